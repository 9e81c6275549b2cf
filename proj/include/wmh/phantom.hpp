#ifndef WMH_PHANTOM_HPP
#define WMH_PHANTOM_HPP

#include <cstdint>
#include <utility>

#include "wmh/volume.hpp"

namespace wmh {

/// Counter-based deterministic generator: every draw is a pure hash of
/// (seed, stream, counter), so parallel and split use stays reproducible
/// across platforms.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64();
    double next_uniform();                       // [0, 1)
    double next_gaussian();                      // Box-Muller
    int next_int(int lo, int hi);                // inclusive range
    double next_range(double lo, double hi);

    CounterRng split(std::uint64_t substream) const {
        return CounterRng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + substream + 1);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

struct PhantomOptions {
    std::array<int, 3> dims{64, 64, 64};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    int n_lesions = 5;
    int min_size_vox = 3;   // lesion diameter range in voxels
    int max_size_vox = 11;
    double noise_sigma = 0.05;
    double lesion_intensity = 2.0;  // offset above background
};

struct PhantomCase {
    Volume3D image;
    BinaryMask3D mask;
};

/// Smooth background plus non-overlapping ellipsoidal hyperintense lesions
/// and Gaussian noise; fully determined by the seed. Throws when the
/// requested lesions cannot be placed after bounded retries.
PhantomCase generate_phantom(std::uint64_t seed, const PhantomOptions& options = {});

struct DegradeOptions {
    double erode_prob = 0.0;    // per boundary voxel
    double dilate_prob = 0.0;   // per background voxel adjacent to the mask
    double fp_blob_rate = 0.0;  // in [0,1]; round(rate * 10) blobs injected
};

/// Stochastic boundary erosion/dilation plus injected false-positive blobs
/// placed away from the true mask; deterministic per seed.
BinaryMask3D degrade_mask(const BinaryMask3D& mask, std::uint64_t seed,
                          const DegradeOptions& options);

}  // namespace wmh

#endif
