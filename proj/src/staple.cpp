#include "wmh/staple.hpp"

#include <algorithm>
#include <cmath>

namespace wmh {

namespace {

constexpr double kClampLo = 1e-6;
constexpr double kClampHi = 1.0 - 1e-6;

double clamp_prob(double v) { return std::clamp(v, kClampLo, kClampHi); }

}  // namespace

void RaterStack::validate() const {
    if (masks.empty()) throw VolumeError("RaterStack: empty stack");
    for (const auto& m : masks)
        require_same_grid(m.geom, masks.front().geom, "RaterStack");
}

StapleParams default_staple_init(const RaterStack& stack) {
    stack.validate();
    StapleParams p;
    std::size_t r = stack.n_raters();
    p.sensitivity.assign(r, 0.9);
    p.specificity.assign(r, 0.9);
    std::size_t votes = 0;
    for (const auto& m : stack.masks) votes += m.count_true();
    p.prior = clamp_prob(static_cast<double>(votes) /
                         (static_cast<double>(r) * stack.geom().voxel_count()));
    return p;
}

BinaryMask3D majority_vote(const RaterStack& stack) {
    stack.validate();
    BinaryMask3D out(stack.geom());
    std::size_t r = stack.n_raters();
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        std::size_t votes = 0;
        for (const auto& m : stack.masks) votes += (m.data[i] != 0);
        out.data[i] = 2 * votes > r ? 1 : 0;
    }
    return out;
}

StapleResult staple(const RaterStack& stack, const StapleParams& init, StapleOptions options) {
    stack.validate();
    const Geometry& g = stack.geom();
    const std::size_t r = stack.n_raters();
    if (init.sensitivity.size() != r || init.specificity.size() != r)
        throw VolumeError("staple: init parameter count does not match rater count");

    // A single rater carries no disagreement to resolve: the maximum-likelihood
    // parameters form a ridge and EM would land on an init-dependent point of
    // it. Return the input directly instead.
    if (r == 1) {
        StapleResult res;
        res.weights = ProbabilityMap3D(g, 0.0);
        for (std::size_t i = 0; i < res.weights.data.size(); ++i)
            res.weights.data[i] = stack.masks[0].data[i] ? kClampHi : kClampLo;
        res.fused = stack.masks[0];
        res.params = init;
        res.params.sensitivity = {kClampHi};
        res.params.specificity = {kClampHi};
        res.converged = true;
        return res;
    }

    // Active voxel set: full grid, or bbox of the union of votes plus margin.
    std::vector<std::size_t> active;
    if (options.restrict_to_bbox) {
        std::array<int, 3> lo{g.dims[0], g.dims[1], g.dims[2]}, hi{-1, -1, -1};
        for (int z = 0; z < g.dims[2]; ++z)
            for (int y = 0; y < g.dims[1]; ++y)
                for (int x = 0; x < g.dims[0]; ++x) {
                    bool any = false;
                    std::size_t i = g.index(x, y, z);
                    for (const auto& m : stack.masks) any |= (m.data[i] != 0);
                    if (any) {
                        lo = {std::min(lo[0], x), std::min(lo[1], y), std::min(lo[2], z)};
                        hi = {std::max(hi[0], x), std::max(hi[1], y), std::max(hi[2], z)};
                    }
                }
        if (hi[0] >= 0) {
            for (int i = 0; i < 3; ++i) {
                lo[i] = std::max(lo[i] - 1, 0);
                hi[i] = std::min(hi[i] + 1, g.dims[i] - 1);
            }
            for (int z = lo[2]; z <= hi[2]; ++z)
                for (int y = lo[1]; y <= hi[1]; ++y)
                    for (int x = lo[0]; x <= hi[0]; ++x)
                        active.push_back(g.index(x, y, z));
        }
    } else {
        active.resize(g.voxel_count());
        for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
    }

    StapleResult res;
    res.weights = ProbabilityMap3D(g, 0.0);
    res.params = init;
    res.params.prior = clamp_prob(init.prior);
    for (std::size_t j = 0; j < r; ++j) {
        res.params.sensitivity[j] = clamp_prob(init.sensitivity[j]);
        res.params.specificity[j] = clamp_prob(init.specificity[j]);
    }

    const std::size_t n = active.size();
    if (n == 0) {
        res.fused = BinaryMask3D(g);
        res.converged = true;
        return res;
    }

    // Vote matrix over the active set, rater-major.
    std::vector<std::uint8_t> votes(n * r);
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = 0; k < n; ++k)
            votes[j * n + k] = stack.masks[j].data[active[k]];

    std::vector<double> w(n, 0.0), w_prev(n, 0.0);
    auto e_step = [&](std::vector<double>& out) {
        double ll = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double a = res.params.prior;
            double b = 1.0 - res.params.prior;
            for (std::size_t j = 0; j < r; ++j) {
                double p = res.params.sensitivity[j];
                double q = res.params.specificity[j];
                if (votes[j * n + k]) {
                    a *= p;
                    b *= 1.0 - q;
                } else {
                    a *= 1.0 - p;
                    b *= q;
                }
            }
            out[k] = a / (a + b);
            ll += std::log(a + b);
        }
        return ll;
    };

    double ll = e_step(w);
    res.log_likelihood.push_back(ll);

    for (int it = 0; it < init.max_iters; ++it) {
        // M-step
        double sum_w = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum_w += w[k];
        double sum_1mw = static_cast<double>(n) - sum_w;
        for (std::size_t j = 0; j < r; ++j) {
            double num_p = 0.0, num_q = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (votes[j * n + k])
                    num_p += w[k];
                else
                    num_q += 1.0 - w[k];
            }
            res.params.sensitivity[j] = clamp_prob(sum_w > 0 ? num_p / sum_w : kClampLo);
            res.params.specificity[j] = clamp_prob(sum_1mw > 0 ? num_q / sum_1mw : kClampLo);
        }
        // E-step
        w_prev.swap(w);
        ll = e_step(w);
        res.log_likelihood.push_back(ll);
        res.n_iters = it + 1;
        double max_dw = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            max_dw = std::max(max_dw, std::abs(w[k] - w_prev[k]));
        if (max_dw < init.tol) {
            res.converged = true;
            break;
        }
    }

    for (std::size_t k = 0; k < n; ++k) res.weights.data[active[k]] = w[k];
    res.fused = binarize(res.weights, 0.5);
    return res;
}

StapleResult staple(const RaterStack& stack) {
    return staple(stack, default_staple_init(stack));
}

}  // namespace wmh
