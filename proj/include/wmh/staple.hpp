#ifndef WMH_STAPLE_HPP
#define WMH_STAPLE_HPP

#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

/// Candidate segmentations of the same volume, identical geometry.
struct RaterStack {
    std::vector<BinaryMask3D> masks;

    std::size_t n_raters() const { return masks.size(); }
    const Geometry& geom() const {
        if (masks.empty()) throw VolumeError("RaterStack: empty stack");
        return masks.front().geom;
    }
    void validate() const;
};

struct StapleParams {
    std::vector<double> sensitivity;  // p_j, one per rater
    std::vector<double> specificity;  // q_j
    double prior = 0.5;
    int max_iters = 100;
    double tol = 1e-6;
};

/// Default init: p_j = q_j = 0.9, prior = mean voxel vote rate.
StapleParams default_staple_init(const RaterStack& stack);

struct StapleResult {
    ProbabilityMap3D weights;  // posterior P(true label = 1)
    BinaryMask3D fused;        // weights >= 0.5
    StapleParams params;       // final estimates
    int n_iters = 0;
    bool converged = false;
    std::vector<double> log_likelihood;  // one entry per iteration
};

struct StapleOptions {
    /// Restrict EM to the bounding box of the union of votes plus a 1-voxel
    /// margin; voxels with no vote anywhere outside the box get W = 0.
    /// Full-volume mode is exact.
    bool restrict_to_bbox = true;
};

/// Binary STAPLE expectation-maximization fusion. A single-rater stack is
/// returned unchanged (the single-rater likelihood has a ridge of equivalent
/// maxima, so EM output would depend on the init).
StapleResult staple(const RaterStack& stack, const StapleParams& init,
                    StapleOptions options = {});
StapleResult staple(const RaterStack& stack);

/// Voxel true iff strictly more than half the raters vote true; ties false.
BinaryMask3D majority_vote(const RaterStack& stack);

}  // namespace wmh

#endif
