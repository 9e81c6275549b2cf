#include "wmh/scores.hpp"

#include <cmath>

namespace wmh {

void TverskyParams::validate() const {
    if (alpha < 0 || beta < 0) throw VolumeError("tversky: alpha and beta must be >= 0");
    if (!(gamma > 0)) throw VolumeError("tversky: gamma must be > 0");
    if (!(omega > 0)) throw VolumeError("tversky: omega must be > 0");
}

void FBetaParams::validate() const {
    if (!(beta > 0)) throw VolumeError("f_beta: beta must be > 0");
    if (!(omega > 0)) throw VolumeError("f_beta: omega must be > 0");
}

double tversky_index(const ProbabilityMap3D& pred, const BinaryMask3D& gt,
                     const TverskyParams& params) {
    params.validate();
    require_same_grid(pred.geom, gt.geom, "tversky_index");
    double tp = 0.0, fn = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        double p = pred.data[i];
        double g = gt.data[i] ? 1.0 : 0.0;
        tp += p * g;
        fn += (1.0 - p) * g;
        fp += p * (1.0 - g);
    }
    return (tp + params.omega) /
           (tp + params.alpha * fn + params.beta * fp + params.omega);
}

double tversky_focal_loss(const ProbabilityMap3D& pred, const BinaryMask3D& gt,
                          const TverskyParams& params) {
    double ti = tversky_index(pred, gt, params);
    return std::pow(1.0 - ti, 1.0 / params.gamma);
}

double f_beta_score(const BinaryMask3D& pred, const BinaryMask3D& gt, const FBetaParams& params) {
    params.validate();
    require_same_grid(pred.geom, gt.geom, "f_beta_score");
    double tp = 0.0, fn = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        bool p = pred.data[i] != 0, g = gt.data[i] != 0;
        tp += p && g;
        fn += !p && g;
        fp += p && !g;
    }
    double b2 = params.beta * params.beta;
    return ((1.0 + b2) * tp + params.omega) /
           ((1.0 + b2) * tp + b2 * fn + fp + params.omega);
}

}  // namespace wmh
