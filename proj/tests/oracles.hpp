// Independent brute-force reference implementations used to check the
// library. These deliberately share no code with src/: straight loops only.
#ifndef WMH_TESTS_ORACLES_HPP
#define WMH_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <vector>

#include "wmh/morphology.hpp"
#include "wmh/staple.hpp"
#include "wmh/volume.hpp"

namespace oracle {

inline wmh::BinaryMask3D random_mask(std::mt19937& rng, std::array<int, 3> dims,
                                     double density = 0.3,
                                     std::array<double, 3> spacing = {1, 1, 1}) {
    wmh::BinaryMask3D m(wmh::make_geometry(dims, spacing));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : m.data) v = u(rng) < density ? 1 : 0;
    return m;
}

// Queue-based flood fill, labels in scan order.
inline std::vector<int> flood_fill_labels(const wmh::BinaryMask3D& mask,
                                          wmh::Connectivity conn) {
    const auto& g = mask.geom;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    std::vector<int> labels(mask.data.size(), 0);
    int next = 0;
    int reach = conn == wmh::Connectivity::Faces6 ? 1 : (conn == wmh::Connectivity::Edges18 ? 2 : 3);
    for (int z0 = 0; z0 < nz; ++z0)
        for (int y0 = 0; y0 < ny; ++y0)
            for (int x0 = 0; x0 < nx; ++x0) {
                std::size_t s = g.index(x0, y0, z0);
                if (!mask.data[s] || labels[s]) continue;
                ++next;
                std::queue<std::array<int, 3>> q;
                q.push({x0, y0, z0});
                labels[s] = next;
                while (!q.empty()) {
                    auto [x, y, z] = q.front();
                    q.pop();
                    for (int dz = -1; dz <= 1; ++dz)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                int m = std::abs(dx) + std::abs(dy) + std::abs(dz);
                                if (m == 0 || m > reach) continue;
                                int px = x + dx, py = y + dy, pz = z + dz;
                                if (px < 0 || px >= nx || py < 0 || py >= ny || pz < 0 ||
                                    pz >= nz)
                                    continue;
                                std::size_t j = g.index(px, py, pz);
                                if (mask.data[j] && !labels[j]) {
                                    labels[j] = next;
                                    q.push({px, py, pz});
                                }
                            }
                }
            }
    return labels;
}

// Boundary voxels by direct neighbor inspection.
inline std::vector<std::array<int, 3>> boundary_coords(const wmh::BinaryMask3D& mask) {
    const auto& g = mask.geom;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    std::vector<std::array<int, 3>> out;
    auto bg = [&](int x, int y, int z) {
        return x < 0 || x >= nx || y < 0 || y >= ny || z < 0 || z >= nz || !mask.at(x, y, z);
    };
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                if (!mask.at(x, y, z)) continue;
                if (bg(x - 1, y, z) || bg(x + 1, y, z) || bg(x, y - 1, z) || bg(x, y + 1, z) ||
                    bg(x, y, z - 1) || bg(x, y, z + 1))
                    out.push_back({x, y, z});
            }
    return out;
}

// Percentile with linear interpolation (rank = q/100 * (n-1)).
inline double percentile_interp(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double rank = q / 100.0 * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(rank);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = rank - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// All-pairs directed boundary distances in mm.
inline std::vector<double> directed_allpairs(const std::vector<std::array<int, 3>>& from,
                                             const std::vector<std::array<int, 3>>& to,
                                             std::array<double, 3> spacing) {
    std::vector<double> out;
    for (const auto& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : to) {
            double dx = (a[0] - b[0]) * spacing[0];
            double dy = (a[1] - b[1]) * spacing[1];
            double dz = (a[2] - b[2]) * spacing[2];
            best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
        out.push_back(best);
    }
    return out;
}

inline double hd95_allpairs(const wmh::BinaryMask3D& pred, const wmh::BinaryMask3D& gt,
                            bool pooled = false) {
    auto pb = boundary_coords(pred);
    auto gb = boundary_coords(gt);
    auto p2g = directed_allpairs(pb, gb, pred.geom.spacing);
    auto g2p = directed_allpairs(gb, pb, pred.geom.spacing);
    if (pooled) {
        p2g.insert(p2g.end(), g2p.begin(), g2p.end());
        return percentile_interp(p2g, 95.0);
    }
    return std::max(percentile_interp(p2g, 95.0), percentile_interp(g2p, 95.0));
}

// Straight-loop binary STAPLE EM over the full volume. Mirrors the documented
// schedule: E-step with the init params, then M-step/E-step rounds until the
// max |dW| drops below tol.
struct StapleOracleResult {
    std::vector<double> w;
    std::vector<double> p, q;
    std::vector<double> log_likelihood;
    int n_iters = 0;
};

inline StapleOracleResult staple_em_oracle(const std::vector<std::vector<int>>& votes,
                                           double init_p, double init_q, double prior,
                                           int max_iters = 100, double tol = 1e-6) {
    auto clamp = [](double v) { return std::min(std::max(v, 1e-6), 1.0 - 1e-6); };
    std::size_t r = votes.size();
    std::size_t n = votes[0].size();
    std::vector<double> p(r, clamp(init_p)), q(r, clamp(init_q));
    prior = clamp(prior);
    StapleOracleResult res;
    res.w.assign(n, 0.0);

    auto e_step = [&]() {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double a = prior, b = 1.0 - prior;
            for (std::size_t j = 0; j < r; ++j) {
                if (votes[j][i]) {
                    a *= p[j];
                    b *= 1.0 - q[j];
                } else {
                    a *= 1.0 - p[j];
                    b *= q[j];
                }
            }
            res.w[i] = a / (a + b);
            ll += std::log(a + b);
        }
        return ll;
    };

    res.log_likelihood.push_back(e_step());
    for (int it = 0; it < max_iters; ++it) {
        double sw = 0.0;
        for (double wi : res.w) sw += wi;
        double s1mw = static_cast<double>(n) - sw;
        for (std::size_t j = 0; j < r; ++j) {
            double np = 0.0, nq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (votes[j][i])
                    np += res.w[i];
                else
                    nq += 1.0 - res.w[i];
            }
            p[j] = clamp(sw > 0 ? np / sw : 1e-6);
            q[j] = clamp(s1mw > 0 ? nq / s1mw : 1e-6);
        }
        std::vector<double> prev = res.w;
        res.log_likelihood.push_back(e_step());
        res.n_iters = it + 1;
        double dmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(res.w[i] - prev[i]));
        if (dmax < tol) break;
    }
    res.p = p;
    res.q = q;
    return res;
}

}  // namespace oracle

#endif
