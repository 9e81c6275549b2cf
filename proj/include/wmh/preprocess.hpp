#ifndef WMH_PREPROCESS_HPP
#define WMH_PREPROCESS_HPP

#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

/// out(v) = max(in(v), 0).
Volume3D clamp_negatives(const Volume3D& vol);

struct ZStandardizeOptions {
    /// Population (divisor n) std by default; sample (n-1) when false.
    bool population_std = true;
    /// When true, voxels <= 0 keep value 0 instead of receiving the affine
    /// transform.
    bool keep_background_zero = false;
};

struct ForegroundStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n_foreground = 0;
};

/// Statistics over voxels with value > 0.
ForegroundStats foreground_stats(const Volume3D& vol, bool population_std = true);

/// Subtract the foreground (value > 0) mean and divide by its std; applied to
/// all voxels unless options.keep_background_zero.
Volume3D zstandardize_foreground(const Volume3D& vol, ZStandardizeOptions options = {});

struct HistogramBin {
    double center;
    double density;
};

/// Normalized density histogram of the foreground (value > 0) over
/// [min, max]; sum(density) * binwidth == 1.
std::vector<HistogramBin> foreground_distribution(const Volume3D& vol, int n_bins);

}  // namespace wmh

#endif
