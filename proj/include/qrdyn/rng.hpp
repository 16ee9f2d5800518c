#pragma once

#include "qrdyn/geometry.hpp"

#include <cstdint>

namespace qrdyn {

// Deterministic splitmix64 stream. Fixed algorithm (not the standard
// library's implementation-defined distributions) so that seeded runs
// produce identical output everywhere doubles behave identically.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [-1,1).
    double next_symmetric() { return 2.0 * next_unit() - 1.0; }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 s(seed ^ (0x2545f4914f6cdd1dULL * (stream + 1)));
    return s.next_u64();
}

// Uniform point in the unit ball of dimension n, by rejection from the cube.
// Consumes a variable number of draws; callers that need partition-stable
// streams must give each partition its own SplitMix64.
inline PointN sample_unit_ball(SplitMix64& rng, int n) {
    PointN x(n);
    for (;;) {
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] = rng.next_symmetric();
            norm2 += x[i] * x[i];
        }
        if (norm2 <= 1.0) return x;
    }
}

}  // namespace qrdyn
