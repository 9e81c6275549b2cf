#ifndef WMH_VOLUME_HPP
#define WMH_VOLUME_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wmh {

/// Thrown on contract violations (geometry mismatch, malformed input, ...).
class VolumeError : public std::runtime_error {
public:
    explicit VolumeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Voxel grid geometry: dimensions, spacing in mm, and a 4x4 voxel-to-world
/// affine stored row-major.
struct Geometry {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::array<double, 16> affine{1, 0, 0, 0,
                                  0, 1, 0, 0,
                                  0, 0, 1, 0,
                                  0, 0, 0, 1};

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    double voxel_volume_mm3() const { return spacing[0] * spacing[1] * spacing[2]; }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * z);
    }

    /// World coordinate of voxel (x,y,z) under the affine.
    std::array<double, 3> voxel_to_world(double x, double y, double z) const {
        std::array<double, 3> w;
        for (int r = 0; r < 3; ++r)
            w[r] = affine[4 * r + 0] * x + affine[4 * r + 1] * y + affine[4 * r + 2] * z +
                   affine[4 * r + 3];
        return w;
    }

    bool same_grid(const Geometry& o, double tol = 1e-6) const;
    void validate() const;
};

/// Identity affine scaled by spacing (default orientation when a file
/// provides none).
Geometry make_geometry(std::array<int, 3> dims, std::array<double, 3> spacing = {1, 1, 1});

/// Dense scalar field, x-fastest order.
struct Volume3D {
    Geometry geom;
    std::vector<double> data;

    Volume3D() = default;
    Volume3D(Geometry g, double fill = 0.0) : geom(g), data(g.voxel_count(), fill) {
        geom.validate();
    }

    double& at(int x, int y, int z) { return data[geom.index(x, y, z)]; }
    double at(int x, int y, int z) const { return data[geom.index(x, y, z)]; }
    std::size_t size() const { return data.size(); }
};

/// Boolean field sharing Volume3D geometry.
struct BinaryMask3D {
    Geometry geom;
    std::vector<std::uint8_t> data;  // 0 or 1

    BinaryMask3D() = default;
    explicit BinaryMask3D(Geometry g, bool fill = false)
        : geom(g), data(g.voxel_count(), fill ? 1 : 0) {
        geom.validate();
    }

    std::uint8_t& at(int x, int y, int z) { return data[geom.index(x, y, z)]; }
    bool at(int x, int y, int z) const { return data[geom.index(x, y, z)] != 0; }
    std::size_t size() const { return data.size(); }

    std::size_t count_true() const {
        std::size_t n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }
    bool empty_mask() const { return count_true() == 0; }
};

/// Real field with all values in [0,1].
struct ProbabilityMap3D {
    Geometry geom;
    std::vector<double> data;

    ProbabilityMap3D() = default;
    explicit ProbabilityMap3D(Geometry g, double fill = 0.0)
        : geom(g), data(g.voxel_count(), fill) {
        geom.validate();
    }

    double& at(int x, int y, int z) { return data[geom.index(x, y, z)]; }
    double at(int x, int y, int z) const { return data[geom.index(x, y, z)]; }
    std::size_t size() const { return data.size(); }

    void validate_range() const;
};

enum class ResampleMode { Trilinear, Nearest };

/// Voxel true iff prob >= threshold (inclusive).
BinaryMask3D binarize(const ProbabilityMap3D& prob, double threshold = 0.5);

/// Resample to a target spacing. Output dims = round(in_dims * in_spacing /
/// target_spacing), clamped to at least 1 per axis. Corner-aligned
/// voxel-center convention: input sample coordinate for output voxel i is
/// ((i + 0.5) * s_out) / s_in - 0.5, clamped to the grid.
Volume3D resample(const Volume3D& vol, std::array<double, 3> target_spacing,
                  ResampleMode mode = ResampleMode::Trilinear);
BinaryMask3D resample_mask(const BinaryMask3D& mask, std::array<double, 3> target_spacing);

/// Remove floor(fraction * n_axis) slices from each end of every axis.
/// Pure crop; the affine translation is updated so retained voxels keep
/// their world coordinates.
Volume3D trim_outer_slices(const Volume3D& vol, double fraction = 1.0 / 12.0);

void require_same_grid(const Geometry& a, const Geometry& b, const char* what);

}  // namespace wmh

#endif
