#include "wmh/morphology.hpp"

#include <algorithm>

namespace wmh {

const std::vector<std::array<int, 3>>& neighbor_offsets(Connectivity conn) {
    static const std::vector<std::array<int, 3>> faces = {
        {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    static const auto build = [](int max_manhattan) {
        std::vector<std::array<int, 3>> offs;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int m = std::abs(dx) + std::abs(dy) + std::abs(dz);
                    if (m >= 1 && m <= max_manhattan) offs.push_back({dx, dy, dz});
                }
        return offs;
    };
    static const std::vector<std::array<int, 3>> edges = build(2);
    static const std::vector<std::array<int, 3>> corners = build(3);
    switch (conn) {
        case Connectivity::Faces6: return faces;
        case Connectivity::Edges18: return edges;
        case Connectivity::Corners26: return corners;
    }
    return corners;
}

LabelMap3D connected_components(const BinaryMask3D& mask, Connectivity conn) {
    const Geometry& g = mask.geom;
    LabelMap3D out(g);
    const auto& offs = neighbor_offsets(conn);
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    std::vector<std::size_t> stack;
    int next_label = 0;
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                std::size_t i = g.index(x, y, z);
                if (!mask.data[i] || out.labels[i]) continue;
                ++next_label;
                out.labels[i] = next_label;
                stack.clear();
                stack.push_back(i);
                while (!stack.empty()) {
                    std::size_t cur = stack.back();
                    stack.pop_back();
                    int cx = static_cast<int>(cur % nx);
                    int cy = static_cast<int>((cur / nx) % ny);
                    int cz = static_cast<int>(cur / (static_cast<std::size_t>(nx) * ny));
                    for (const auto& o : offs) {
                        int px = cx + o[0], py = cy + o[1], pz = cz + o[2];
                        if (px < 0 || px >= nx || py < 0 || py >= ny || pz < 0 || pz >= nz)
                            continue;
                        std::size_t j = g.index(px, py, pz);
                        if (mask.data[j] && !out.labels[j]) {
                            out.labels[j] = next_label;
                            stack.push_back(j);
                        }
                    }
                }
            }
    out.n_components = next_label;
    return out;
}

namespace {

struct ComponentStats {
    std::size_t voxel_count = 0;
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
    std::array<double, 3> sum{0, 0, 0};
    bool seen = false;
};

std::vector<ComponentStats> component_stats(const LabelMap3D& lm) {
    std::vector<ComponentStats> stats(lm.n_components);
    const Geometry& g = lm.geom;
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                std::int32_t l = lm.at(x, y, z);
                if (!l) continue;
                ComponentStats& s = stats[l - 1];
                if (!s.seen) {
                    s.lo = s.hi = {x, y, z};
                    s.seen = true;
                } else {
                    s.lo = {std::min(s.lo[0], x), std::min(s.lo[1], y), std::min(s.lo[2], z)};
                    s.hi = {std::max(s.hi[0], x), std::max(s.hi[1], y), std::max(s.hi[2], z)};
                }
                ++s.voxel_count;
                s.sum[0] += x;
                s.sum[1] += y;
                s.sum[2] += z;
            }
    return stats;
}

}  // namespace

BinaryMask3D diameter_opening(const BinaryMask3D& mask, int min_diameter_vox, Connectivity conn) {
    if (min_diameter_vox < 1) throw VolumeError("diameter_opening: min_diameter_vox must be >= 1");
    LabelMap3D lm = connected_components(mask, conn);
    auto stats = component_stats(lm);
    std::vector<std::uint8_t> keep(lm.n_components, 0);
    for (int l = 0; l < lm.n_components; ++l) {
        const auto& s = stats[l];
        int extent = std::max({s.hi[0] - s.lo[0] + 1, s.hi[1] - s.lo[1] + 1,
                               s.hi[2] - s.lo[2] + 1});
        keep[l] = extent >= min_diameter_vox ? 1 : 0;
    }
    BinaryMask3D out(mask.geom);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        out.data[i] = lm.labels[i] && keep[lm.labels[i] - 1] ? 1 : 0;
    return out;
}

std::vector<LesionRecord> lesion_table(const BinaryMask3D& mask, Connectivity conn) {
    LabelMap3D lm = connected_components(mask, conn);
    auto stats = component_stats(lm);
    double vox_ml = mask.geom.voxel_volume_mm3() / 1000.0;
    std::vector<LesionRecord> table(lm.n_components);
    for (int l = 0; l < lm.n_components; ++l) {
        const auto& s = stats[l];
        LesionRecord& r = table[l];
        r.label = l + 1;
        r.voxel_count = s.voxel_count;
        r.volume_ml = static_cast<double>(s.voxel_count) * vox_ml;
        r.bbox_extent = {s.hi[0] - s.lo[0] + 1, s.hi[1] - s.lo[1] + 1, s.hi[2] - s.lo[2] + 1};
        for (int i = 0; i < 3; ++i)
            r.centroid[i] = s.sum[i] / static_cast<double>(s.voxel_count);
    }
    return table;
}

}  // namespace wmh
