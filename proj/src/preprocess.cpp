#include "wmh/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace wmh {

Volume3D clamp_negatives(const Volume3D& vol) {
    Volume3D out = vol;
    for (double& v : out.data) v = std::max(v, 0.0);
    return out;
}

ForegroundStats foreground_stats(const Volume3D& vol, bool population_std) {
    ForegroundStats s;
    double sum = 0.0;
    for (double v : vol.data) {
        if (v > 0.0) {
            sum += v;
            ++s.n_foreground;
        }
    }
    if (s.n_foreground == 0) throw VolumeError("zstandardize: empty foreground");
    s.mean = sum / static_cast<double>(s.n_foreground);
    double ss = 0.0;
    for (double v : vol.data)
        if (v > 0.0) ss += (v - s.mean) * (v - s.mean);
    std::size_t divisor = population_std ? s.n_foreground : s.n_foreground - 1;
    if (divisor == 0) throw VolumeError("zstandardize: single-voxel foreground");
    s.stddev = std::sqrt(ss / static_cast<double>(divisor));
    if (!(s.stddev > 0.0)) throw VolumeError("zstandardize: zero foreground variance");
    return s;
}

Volume3D zstandardize_foreground(const Volume3D& vol, ZStandardizeOptions options) {
    ForegroundStats s = foreground_stats(vol, options.population_std);
    if (s.n_foreground < 2) throw VolumeError("zstandardize: single-voxel foreground");
    Volume3D out = vol;
    for (double& v : out.data) {
        if (options.keep_background_zero && !(v > 0.0)) {
            v = 0.0;
        } else {
            v = (v - s.mean) / s.stddev;
        }
    }
    return out;
}

std::vector<HistogramBin> foreground_distribution(const Volume3D& vol, int n_bins) {
    if (n_bins < 1) throw VolumeError("histogram: n_bins must be >= 1");
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (double v : vol.data) {
        if (v > 0.0) {
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (!any) throw VolumeError("histogram: empty foreground");
    if (hi == lo) {  // degenerate range, use unit width centered on the value
        lo -= 0.5;
        hi += 0.5;
    }
    double width = (hi - lo) / n_bins;
    std::vector<std::size_t> counts(n_bins, 0);
    std::size_t total = 0;
    for (double v : vol.data) {
        if (v > 0.0) {
            int b = std::min(static_cast<int>((v - lo) / width), n_bins - 1);
            b = std::max(b, 0);
            ++counts[b];
            ++total;
        }
    }
    std::vector<HistogramBin> bins(n_bins);
    for (int i = 0; i < n_bins; ++i) {
        bins[i].center = lo + (i + 0.5) * width;
        bins[i].density = static_cast<double>(counts[i]) / (static_cast<double>(total) * width);
    }
    return bins;
}

}  // namespace wmh
