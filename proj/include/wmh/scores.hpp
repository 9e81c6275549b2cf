#ifndef WMH_SCORES_HPP
#define WMH_SCORES_HPP

#include "wmh/volume.hpp"

namespace wmh {

/// Tversky index weights: alpha penalizes false negatives, beta false
/// positives; gamma is the focal exponent parameter; omega the smoothing
/// term guarding against empty-label division by zero.
struct TverskyParams {
    double alpha = 0.85;
    double beta = 0.15;
    double gamma = 4.0 / 3.0;
    double omega = 1.0;
    void validate() const;
};

struct FBetaParams {
    double beta = 2.0;
    double omega = 1.0;
    void validate() const;
};

/// Soft Tversky index: (TP + Ω) / (TP + α·FN + β·FP + Ω) with soft counts
/// TP = Σ p·g, FN = Σ (1−p)·g, FP = Σ p·(1−g).
double tversky_index(const ProbabilityMap3D& pred, const BinaryMask3D& gt,
                     const TverskyParams& params = {});

/// (1 − TI)^(1/γ).
double tversky_focal_loss(const ProbabilityMap3D& pred, const BinaryMask3D& gt,
                          const TverskyParams& params = {});

/// Generalized F-beta on hard counts:
/// ((1+β²)·TP + Ω) / ((1+β²)·TP + β²·FN + FP + Ω).
double f_beta_score(const BinaryMask3D& pred, const BinaryMask3D& gt,
                    const FBetaParams& params = {});

}  // namespace wmh

#endif
