#include "wmh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wmh {

ConfusionCounts confusion_counts(const BinaryMask3D& pred, const BinaryMask3D& gt) {
    require_same_grid(pred.geom, gt.geom, "confusion_counts");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        bool p = pred.data[i] != 0, g = gt.data[i] != 0;
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double dice(const BinaryMask3D& pred, const BinaryMask3D& gt) {
    ConfusionCounts c = confusion_counts(pred, gt);
    std::size_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;  // both empty
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::optional<double> avd(const BinaryMask3D& pred, const BinaryMask3D& gt) {
    require_same_grid(pred.geom, gt.geom, "avd");
    double np = static_cast<double>(pred.count_true());
    double ng = static_cast<double>(gt.count_true());
    if (ng == 0.0) return std::nullopt;
    return 100.0 * std::abs(np - ng) / ng;
}

BinaryMask3D boundary_voxels(const BinaryMask3D& mask) {
    const Geometry& g = mask.geom;
    BinaryMask3D out(g);
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                if (!mask.at(x, y, z)) continue;
                bool boundary = x == 0 || x == nx - 1 || y == 0 || y == ny - 1 || z == 0 ||
                                z == nz - 1 || !mask.at(x - 1, y, z) || !mask.at(x + 1, y, z) ||
                                !mask.at(x, y - 1, z) || !mask.at(x, y + 1, z) ||
                                !mask.at(x, y, z - 1) || !mask.at(x, y, z + 1);
                if (boundary) out.data[g.index(x, y, z)] = 1;
            }
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher 1D lower envelope of parabolas; samples at i*s.
void edt_1d(const double* f, double* d, int n, double s, int* v, double* zbuf) {
    int k = 0;
    v[0] = 0;
    zbuf[0] = -kInf;
    zbuf[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        double qq = q * s;
        double sect;
        while (true) {
            double vv = v[k] * s;
            if (f[v[k]] == kInf) {
                sect = -kInf;
            } else {
                sect = ((f[q] + qq * qq) - (f[v[k]] + vv * vv)) / (2 * qq - 2 * vv);
            }
            if (sect <= zbuf[k]) {
                --k;
                if (k < 0) break;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        zbuf[k] = sect;
        zbuf[k + 1] = kInf;
    }
    if (f[v[0]] == kInf) {  // no finite parabola on this line
        for (int q = 0; q < n; ++q) d[q] = kInf;
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        double qq = q * s;
        while (zbuf[j + 1] < qq) ++j;
        double vv = v[j] * s;
        d[q] = (qq - vv) * (qq - vv) + f[v[j]];
    }
}

}  // namespace

std::vector<double> squared_distance_transform(const BinaryMask3D& seeds) {
    const Geometry& g = seeds.geom;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    std::vector<double> dist(g.voxel_count());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = seeds.data[i] ? 0.0 : kInf;

    int nmax = std::max({nx, ny, nz});
    std::vector<double> f(nmax), d(nmax), zbuf(nmax + 1);
    std::vector<int> v(nmax);

    // x pass
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y) {
            std::size_t base = g.index(0, y, z);
            for (int x = 0; x < nx; ++x) f[x] = dist[base + x];
            edt_1d(f.data(), d.data(), nx, g.spacing[0], v.data(), zbuf.data());
            for (int x = 0; x < nx; ++x) dist[base + x] = d[x];
        }
    // y pass
    std::size_t sy = static_cast<std::size_t>(nx);
    for (int z = 0; z < nz; ++z)
        for (int x = 0; x < nx; ++x) {
            std::size_t base = g.index(x, 0, z);
            for (int y = 0; y < ny; ++y) f[y] = dist[base + y * sy];
            edt_1d(f.data(), d.data(), ny, g.spacing[1], v.data(), zbuf.data());
            for (int y = 0; y < ny; ++y) dist[base + y * sy] = d[y];
        }
    // z pass
    std::size_t sz = static_cast<std::size_t>(nx) * ny;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            std::size_t base = g.index(x, y, 0);
            for (int z = 0; z < nz; ++z) f[z] = dist[base + z * sz];
            edt_1d(f.data(), d.data(), nz, g.spacing[2], v.data(), zbuf.data());
            for (int z = 0; z < nz; ++z) dist[base + z * sz] = d[z];
        }
    return dist;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw VolumeError("percentile of empty set");
    std::sort(values.begin(), values.end());
    double rank = q / 100.0 * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(rank);
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

namespace {

std::vector<double> directed_surface_distances(const BinaryMask3D& from_boundary,
                                               const std::vector<double>& sqdist_to_other) {
    std::vector<double> out;
    for (std::size_t i = 0; i < from_boundary.data.size(); ++i)
        if (from_boundary.data[i]) out.push_back(std::sqrt(sqdist_to_other[i]));
    return out;
}

}  // namespace

std::optional<double> hd95(const BinaryMask3D& pred, const BinaryMask3D& gt, Hd95Rule rule) {
    require_same_grid(pred.geom, gt.geom, "hd95");
    if (pred.empty_mask() || gt.empty_mask()) return std::nullopt;
    BinaryMask3D pb = boundary_voxels(pred);
    BinaryMask3D gb = boundary_voxels(gt);
    std::vector<double> dist_to_gb = squared_distance_transform(gb);
    std::vector<double> dist_to_pb = squared_distance_transform(pb);
    std::vector<double> p_to_g = directed_surface_distances(pb, dist_to_gb);
    std::vector<double> g_to_p = directed_surface_distances(gb, dist_to_pb);
    if (rule == Hd95Rule::Pooled) {
        p_to_g.insert(p_to_g.end(), g_to_p.begin(), g_to_p.end());
        return percentile(std::move(p_to_g), 95.0);
    }
    return std::max(percentile(std::move(p_to_g), 95.0), percentile(std::move(g_to_p), 95.0));
}

namespace {

struct ComponentOverlap {
    int n_gt = 0;
    int n_pred = 0;
    int gt_hit = 0;    // gt components overlapping pred
    int pred_hit = 0;  // pred components overlapping gt
    std::vector<std::uint8_t> gt_hit_flags;
    std::vector<std::uint8_t> pred_hit_flags;
    std::vector<std::size_t> gt_sizes;
    std::vector<std::size_t> pred_sizes;
};

ComponentOverlap component_overlap(const BinaryMask3D& pred, const BinaryMask3D& gt,
                                   Connectivity conn) {
    require_same_grid(pred.geom, gt.geom, "lesion metrics");
    LabelMap3D pl = connected_components(pred, conn);
    LabelMap3D gl = connected_components(gt, conn);
    ComponentOverlap ov;
    ov.n_gt = gl.n_components;
    ov.n_pred = pl.n_components;
    ov.gt_hit_flags.assign(gl.n_components, 0);
    ov.pred_hit_flags.assign(pl.n_components, 0);
    ov.gt_sizes.assign(gl.n_components, 0);
    ov.pred_sizes.assign(pl.n_components, 0);
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        if (gl.labels[i]) ++ov.gt_sizes[gl.labels[i] - 1];
        if (pl.labels[i]) ++ov.pred_sizes[pl.labels[i] - 1];
        if (gl.labels[i] && pl.labels[i]) {
            ov.gt_hit_flags[gl.labels[i] - 1] = 1;
            ov.pred_hit_flags[pl.labels[i] - 1] = 1;
        }
    }
    for (auto f : ov.gt_hit_flags) ov.gt_hit += f;
    for (auto f : ov.pred_hit_flags) ov.pred_hit += f;
    return ov;
}

}  // namespace

std::optional<double> lesion_recall(const BinaryMask3D& pred, const BinaryMask3D& gt,
                                    Connectivity conn) {
    ComponentOverlap ov = component_overlap(pred, gt, conn);
    if (ov.n_gt == 0) return std::nullopt;
    return static_cast<double>(ov.gt_hit) / static_cast<double>(ov.n_gt);
}

double lesion_f1(const BinaryMask3D& pred, const BinaryMask3D& gt, Connectivity conn) {
    ComponentOverlap ov = component_overlap(pred, gt, conn);
    int tp = ov.pred_hit;
    int fp = ov.n_pred - ov.pred_hit;
    int fn = ov.n_gt - ov.gt_hit;
    if (2 * tp + fp + fn == 0) return 1.0;  // both masks empty
    return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

CaseMetrics evaluate_case(const BinaryMask3D& pred, const BinaryMask3D& gt, Connectivity conn,
                          Hd95Rule rule) {
    CaseMetrics m;
    m.dsc = dice(pred, gt);
    m.hd95_mm = hd95(pred, gt, rule);
    m.avd_pct = avd(pred, gt);
    m.lesion_recall = lesion_recall(pred, gt, conn);
    m.lesion_f1 = lesion_f1(pred, gt, conn);
    return m;
}

std::vector<double> default_size_bin_edges() {
    return {1, 5, 15, 50, 150, 500, std::numeric_limits<double>::infinity()};
}

std::vector<SizeBinRow> size_stratified_pr(const BinaryMask3D& pred, const BinaryMask3D& gt,
                                           Connectivity conn,
                                           const std::vector<double>& bin_edges) {
    if (bin_edges.size() < 2) throw VolumeError("size_stratified_pr: need at least two edges");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        if (!(bin_edges[i] > bin_edges[i - 1]))
            throw VolumeError("size_stratified_pr: edges must be strictly increasing");

    ComponentOverlap ov = component_overlap(pred, gt, conn);
    std::size_t n_bins = bin_edges.size() - 1;
    std::vector<SizeBinRow> rows(n_bins);
    std::vector<int> gt_total(n_bins, 0), gt_hit(n_bins, 0);
    std::vector<int> pred_total(n_bins, 0), pred_hit(n_bins, 0);

    auto bin_of = [&](std::size_t size) -> int {
        double s = static_cast<double>(size);
        for (std::size_t b = 0; b < n_bins; ++b)
            if (s >= bin_edges[b] && s < bin_edges[b + 1]) return static_cast<int>(b);
        return -1;
    };

    for (int l = 0; l < ov.n_gt; ++l) {
        int b = bin_of(ov.gt_sizes[l]);
        if (b < 0) continue;
        ++gt_total[b];
        if (ov.gt_hit_flags[l]) ++gt_hit[b];
    }
    for (int l = 0; l < ov.n_pred; ++l) {
        int b = bin_of(ov.pred_sizes[l]);
        if (b < 0) continue;
        ++pred_total[b];
        if (ov.pred_hit_flags[l]) ++pred_hit[b];
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        rows[b].bin_low = bin_edges[b];
        rows[b].bin_high = bin_edges[b + 1];
        rows[b].n_gt = gt_total[b];
        rows[b].n_pred = pred_total[b];
        if (gt_total[b] > 0) rows[b].recall = static_cast<double>(gt_hit[b]) / gt_total[b];
        if (pred_total[b] > 0)
            rows[b].precision = static_cast<double>(pred_hit[b]) / pred_total[b];
    }
    return rows;
}

}  // namespace wmh
