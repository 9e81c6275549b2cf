#ifndef WMH_MORPHOLOGY_HPP
#define WMH_MORPHOLOGY_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

enum class Connectivity { Faces6 = 6, Edges18 = 18, Corners26 = 26 };

/// Voxel offsets of the chosen adjacency.
const std::vector<std::array<int, 3>>& neighbor_offsets(Connectivity conn);

/// Integer component labels, 0 = background; labels contiguous
/// 1..n_components in first-encounter scan order.
struct LabelMap3D {
    Geometry geom;
    std::vector<std::int32_t> labels;
    int n_components = 0;

    LabelMap3D() = default;
    explicit LabelMap3D(Geometry g) : geom(g), labels(g.voxel_count(), 0) {}

    std::int32_t at(int x, int y, int z) const { return labels[geom.index(x, y, z)]; }
};

struct LesionRecord {
    int label = 0;
    std::size_t voxel_count = 0;
    double volume_ml = 0.0;
    std::array<int, 3> bbox_extent{0, 0, 0};
    std::array<double, 3> centroid{0, 0, 0};
};

LabelMap3D connected_components(const BinaryMask3D& mask,
                                Connectivity conn = Connectivity::Corners26);

/// Remove every component whose maximal bounding-box extent (in voxels) is
/// below min_diameter_vox. Matches scikit-image diameter_opening semantics.
BinaryMask3D diameter_opening(const BinaryMask3D& mask, int min_diameter_vox = 5,
                              Connectivity conn = Connectivity::Corners26);

std::vector<LesionRecord> lesion_table(const BinaryMask3D& mask,
                                       Connectivity conn = Connectivity::Corners26);

}  // namespace wmh

#endif
