#include "wmh/volume.hpp"

#include <algorithm>
#include <cmath>

namespace wmh {

bool Geometry::same_grid(const Geometry& o, double tol) const {
    if (dims != o.dims) return false;
    for (int i = 0; i < 3; ++i)
        if (std::abs(spacing[i] - o.spacing[i]) > tol) return false;
    return true;
}

void Geometry::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (dims[i] <= 0) throw VolumeError("Geometry: non-positive dimension");
        if (!(spacing[i] > 0.0)) throw VolumeError("Geometry: non-positive spacing");
    }
}

Geometry make_geometry(std::array<int, 3> dims, std::array<double, 3> spacing) {
    Geometry g;
    g.dims = dims;
    g.spacing = spacing;
    g.affine = {spacing[0], 0, 0, 0,
                0, spacing[1], 0, 0,
                0, 0, spacing[2], 0,
                0, 0, 0, 1};
    g.validate();
    return g;
}

void ProbabilityMap3D::validate_range() const {
    for (double v : data)
        if (!(v >= 0.0 && v <= 1.0))
            throw VolumeError("ProbabilityMap3D: value outside [0,1]");
}

void require_same_grid(const Geometry& a, const Geometry& b, const char* what) {
    if (!a.same_grid(b))
        throw VolumeError(std::string(what) + ": geometry mismatch");
}

BinaryMask3D binarize(const ProbabilityMap3D& prob, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw VolumeError("binarize: threshold must be in (0,1)");
    BinaryMask3D out(prob.geom);
    for (std::size_t i = 0; i < prob.data.size(); ++i)
        out.data[i] = prob.data[i] >= threshold ? 1 : 0;
    return out;
}

namespace {

std::array<int, 3> resampled_dims(const Geometry& g, std::array<double, 3> target) {
    std::array<int, 3> d;
    for (int i = 0; i < 3; ++i) {
        if (!(target[i] > 0.0)) throw VolumeError("resample: non-positive target spacing");
        d[i] = std::max(1, static_cast<int>(std::llround(g.dims[i] * g.spacing[i] / target[i])));
    }
    return d;
}

Geometry resampled_geometry(const Geometry& g, std::array<double, 3> target) {
    Geometry out = g;
    out.dims = resampled_dims(g, target);
    out.spacing = target;
    // Affine: scale the direction columns by the spacing ratio and shift the
    // origin so the corner of the field of view is preserved.
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double dir = g.affine[4 * r + c] / g.spacing[c];  // unit direction component
            out.affine[4 * r + c] = dir * target[c];
        }
    }
    // Voxel centers sit at (i+0.5)*spacing from the corner; the world position
    // of the corner equals affine * (-0.5,-0.5,-0.5) in the old grid.
    auto corner_old = g.voxel_to_world(-0.5, -0.5, -0.5);
    Geometry tmp = out;
    auto corner_new = tmp.voxel_to_world(-0.5, -0.5, -0.5);
    for (int r = 0; r < 3; ++r)
        out.affine[4 * r + 3] += corner_old[r] - corner_new[r];
    return out;
}

}  // namespace

Volume3D resample(const Volume3D& vol, std::array<double, 3> target_spacing, ResampleMode mode) {
    const Geometry& g = vol.geom;
    Geometry og = resampled_geometry(g, target_spacing);
    if (og.dims == g.dims && og.same_grid(g)) {
        Volume3D out = vol;
        out.geom = og;
        return out;
    }
    Volume3D out(og);
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    for (int z = 0; z < og.dims[2]; ++z) {
        double fz = ((z + 0.5) * og.spacing[2]) / g.spacing[2] - 0.5;
        for (int y = 0; y < og.dims[1]; ++y) {
            double fy = ((y + 0.5) * og.spacing[1]) / g.spacing[1] - 0.5;
            for (int x = 0; x < og.dims[0]; ++x) {
                double fx = ((x + 0.5) * og.spacing[0]) / g.spacing[0] - 0.5;
                double v;
                if (mode == ResampleMode::Nearest) {
                    int ix = std::clamp(static_cast<int>(std::llround(fx)), 0, nx - 1);
                    int iy = std::clamp(static_cast<int>(std::llround(fy)), 0, ny - 1);
                    int iz = std::clamp(static_cast<int>(std::llround(fz)), 0, nz - 1);
                    v = vol.at(ix, iy, iz);
                } else {
                    double cx = std::clamp(fx, 0.0, static_cast<double>(nx - 1));
                    double cy = std::clamp(fy, 0.0, static_cast<double>(ny - 1));
                    double cz = std::clamp(fz, 0.0, static_cast<double>(nz - 1));
                    int x0 = std::min(static_cast<int>(cx), nx - 1);
                    int y0 = std::min(static_cast<int>(cy), ny - 1);
                    int z0 = std::min(static_cast<int>(cz), nz - 1);
                    int x1 = std::min(x0 + 1, nx - 1);
                    int y1 = std::min(y0 + 1, ny - 1);
                    int z1 = std::min(z0 + 1, nz - 1);
                    double tx = cx - x0, ty = cy - y0, tz = cz - z0;
                    double c00 = vol.at(x0, y0, z0) * (1 - tx) + vol.at(x1, y0, z0) * tx;
                    double c10 = vol.at(x0, y1, z0) * (1 - tx) + vol.at(x1, y1, z0) * tx;
                    double c01 = vol.at(x0, y0, z1) * (1 - tx) + vol.at(x1, y0, z1) * tx;
                    double c11 = vol.at(x0, y1, z1) * (1 - tx) + vol.at(x1, y1, z1) * tx;
                    double c0 = c00 * (1 - ty) + c10 * ty;
                    double c1 = c01 * (1 - ty) + c11 * ty;
                    v = c0 * (1 - tz) + c1 * tz;
                }
                out.at(x, y, z) = v;
            }
        }
    }
    return out;
}

BinaryMask3D resample_mask(const BinaryMask3D& mask, std::array<double, 3> target_spacing) {
    Volume3D v(mask.geom);
    for (std::size_t i = 0; i < mask.data.size(); ++i) v.data[i] = mask.data[i];
    Volume3D r = resample(v, target_spacing, ResampleMode::Nearest);
    BinaryMask3D out(r.geom);
    for (std::size_t i = 0; i < r.data.size(); ++i) out.data[i] = r.data[i] != 0.0 ? 1 : 0;
    return out;
}

Volume3D trim_outer_slices(const Volume3D& vol, double fraction) {
    if (!(fraction >= 0.0 && fraction < 0.5))
        throw VolumeError("trim_outer_slices: fraction must be in [0, 0.5)");
    const Geometry& g = vol.geom;
    std::array<int, 3> cut;
    std::array<int, 3> nd;
    for (int i = 0; i < 3; ++i) {
        cut[i] = static_cast<int>(std::floor(fraction * g.dims[i]));
        nd[i] = g.dims[i] - 2 * cut[i];
        if (nd[i] <= 0) throw VolumeError("trim_outer_slices: result would be empty");
    }
    Geometry og = g;
    og.dims = nd;
    auto origin = g.voxel_to_world(cut[0], cut[1], cut[2]);
    for (int r = 0; r < 3; ++r) og.affine[4 * r + 3] = origin[r];
    Volume3D out(og);
    for (int z = 0; z < nd[2]; ++z)
        for (int y = 0; y < nd[1]; ++y)
            for (int x = 0; x < nd[0]; ++x)
                out.at(x, y, z) = vol.at(x + cut[0], y + cut[1], z + cut[2]);
    return out;
}

}  // namespace wmh
