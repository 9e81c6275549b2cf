#include "wmh/phantom.hpp"

#include <algorithm>
#include <cmath>

namespace wmh {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::next_u64() {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ stream_);
    h = splitmix64(h ^ counter_);
    ++counter_;
    return h;
}

double CounterRng::next_uniform() {
    // 53 mantissa bits
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
    double u1 = next_uniform();
    double u2 = next_uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

int CounterRng::next_int(int lo, int hi) {
    return lo + static_cast<int>(next_uniform() * (hi - lo + 1));
}

double CounterRng::next_range(double lo, double hi) {
    return lo + next_uniform() * (hi - lo);
}

namespace {

struct Ellipsoid {
    std::array<int, 3> center;
    std::array<double, 3> semiaxes;
};

bool ellipsoids_separated(const Ellipsoid& a, const Ellipsoid& b) {
    // Conservative: bounding spheres plus a 2-voxel gap keeps components
    // distinct at 26-connectivity.
    double ra = *std::max_element(a.semiaxes.begin(), a.semiaxes.end());
    double rb = *std::max_element(b.semiaxes.begin(), b.semiaxes.end());
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        double d = a.center[i] - b.center[i];
        d2 += d * d;
    }
    double need = ra + rb + 2.5;
    return d2 > need * need;
}

void paint_ellipsoid(BinaryMask3D& mask, const Ellipsoid& e) {
    const Geometry& g = mask.geom;
    for (int dz = -static_cast<int>(e.semiaxes[2]); dz <= static_cast<int>(e.semiaxes[2]); ++dz)
        for (int dy = -static_cast<int>(e.semiaxes[1]); dy <= static_cast<int>(e.semiaxes[1]); ++dy)
            for (int dx = -static_cast<int>(e.semiaxes[0]); dx <= static_cast<int>(e.semiaxes[0]); ++dx) {
                double u = dx / e.semiaxes[0], v = dy / e.semiaxes[1], w = dz / e.semiaxes[2];
                if (u * u + v * v + w * w > 1.0) continue;
                int x = e.center[0] + dx, y = e.center[1] + dy, z = e.center[2] + dz;
                if (x < 0 || x >= g.dims[0] || y < 0 || y >= g.dims[1] || z < 0 || z >= g.dims[2])
                    continue;
                mask.data[g.index(x, y, z)] = 1;
            }
}

}  // namespace

PhantomCase generate_phantom(std::uint64_t seed, const PhantomOptions& options) {
    for (int d : options.dims)
        if (d < 16) throw VolumeError("phantom: dims must be at least 16 per axis");
    if (options.n_lesions < 0) throw VolumeError("phantom: n_lesions must be >= 0");
    if (options.min_size_vox < 1 || options.max_size_vox < options.min_size_vox)
        throw VolumeError("phantom: bad size range");

    Geometry g = make_geometry(options.dims, options.spacing);
    PhantomCase out{Volume3D(g), BinaryMask3D(g)};

    // Place lesions with bounded retries; RNG split per lesion index.
    std::vector<Ellipsoid> placed;
    CounterRng root(seed, 0);
    for (int l = 0; l < options.n_lesions; ++l) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(l) + 1);
        bool ok = false;
        for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
            Ellipsoid e;
            for (int i = 0; i < 3; ++i) {
                double diameter = rng.next_range(options.min_size_vox, options.max_size_vox);
                e.semiaxes[i] = std::max(1.0, diameter / 2.0);
                int margin = static_cast<int>(std::ceil(e.semiaxes[i])) + 1;
                e.center[i] = rng.next_int(margin, options.dims[i] - 1 - margin);
            }
            ok = std::all_of(placed.begin(), placed.end(),
                             [&](const Ellipsoid& o) { return ellipsoids_separated(e, o); });
            if (ok) placed.push_back(e);
        }
        if (!ok)
            throw VolumeError("phantom: could not place lesion " + std::to_string(l + 1) +
                              " of " + std::to_string(options.n_lesions) + "; placed " +
                              std::to_string(placed.size()));
    }
    for (const auto& e : placed) paint_ellipsoid(out.mask, e);

    // Smooth low-frequency background plus lesion offset plus noise.
    CounterRng noise = root.split(0);
    const double pi = 3.14159265358979323846;
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                double fx = static_cast<double>(x) / g.dims[0];
                double fy = static_cast<double>(y) / g.dims[1];
                double fz = static_cast<double>(z) / g.dims[2];
                double bg = 1.0 + 0.3 * std::sin(2 * pi * fx) * std::cos(2 * pi * fy) +
                            0.2 * std::sin(2 * pi * fz);
                std::size_t i = g.index(x, y, z);
                double v = bg + (out.mask.data[i] ? options.lesion_intensity : 0.0);
                if (options.noise_sigma > 0.0) v += options.noise_sigma * noise.next_gaussian();
                out.image.data[i] = v;
            }
    return out;
}

BinaryMask3D degrade_mask(const BinaryMask3D& mask, std::uint64_t seed,
                          const DegradeOptions& options) {
    for (double r : {options.erode_prob, options.dilate_prob, options.fp_blob_rate})
        if (r < 0.0 || r > 1.0) throw VolumeError("degrade_mask: rates must be in [0,1]");

    const Geometry& g = mask.geom;
    BinaryMask3D out = mask;
    CounterRng root(seed, 0x5eed);
    CounterRng erng = root.split(1);
    CounterRng drng = root.split(2);
    CounterRng frng = root.split(3);

    auto face_neighbor_state = [&](int x, int y, int z, bool want) {
        const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
        auto check = [&](int a, int b, int c) {
            return a >= 0 && a < nx && b >= 0 && b < ny && c >= 0 && c < nz &&
                   mask.at(a, b, c) == want;
        };
        return check(x - 1, y, z) || check(x + 1, y, z) || check(x, y - 1, z) ||
               check(x, y + 1, z) || check(x, y, z - 1) || check(x, y, z + 1);
    };

    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                std::size_t i = g.index(x, y, z);
                if (mask.data[i]) {
                    bool boundary = x == 0 || x == g.dims[0] - 1 || y == 0 ||
                                    y == g.dims[1] - 1 || z == 0 || z == g.dims[2] - 1 ||
                                    face_neighbor_state(x, y, z, false);
                    if (boundary && options.erode_prob > 0.0 &&
                        erng.next_uniform() < options.erode_prob)
                        out.data[i] = 0;
                } else if (options.dilate_prob > 0.0 && face_neighbor_state(x, y, z, true)) {
                    if (drng.next_uniform() < options.dilate_prob) out.data[i] = 1;
                }
            }

    // Injected false positives: small blobs at least 3 voxels from any true
    // voxel so lesion recall is unaffected.
    int n_blobs = static_cast<int>(std::llround(options.fp_blob_rate * 10.0));
    for (int b = 0; b < n_blobs; ++b) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            int x = frng.next_int(1, g.dims[0] - 2);
            int y = frng.next_int(1, g.dims[1] - 2);
            int z = frng.next_int(1, g.dims[2] - 2);
            bool clear = true;
            for (int dz = -3; dz <= 3 && clear; ++dz)
                for (int dy = -3; dy <= 3 && clear; ++dy)
                    for (int dx = -3; dx <= 3 && clear; ++dx) {
                        int a = x + dx, bb = y + dy, c = z + dz;
                        if (a < 0 || a >= g.dims[0] || bb < 0 || bb >= g.dims[1] || c < 0 ||
                            c >= g.dims[2])
                            continue;
                        if (mask.at(a, bb, c)) clear = false;
                    }
            if (!clear) continue;
            out.data[g.index(x, y, z)] = 1;
            if (x + 1 < g.dims[0]) out.data[g.index(x + 1, y, z)] = 1;
            if (y + 1 < g.dims[1]) out.data[g.index(x, y + 1, z)] = 1;
            break;
        }
    }
    return out;
}

}  // namespace wmh
