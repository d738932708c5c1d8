#pragma once

#include <cmath>
#include <cstdint>

#include "dlcast/normal.hpp"

namespace dlcast {

// SplitMix64: tiny, fast, and fully specified by the seed, which keeps
// generated datasets reproducible across platforms and compilers.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0,1): 53 mantissa bits, offset by half a
    // step so 0 and 1 are unreachable and the value is safe to feed through
    // inverse CDFs and logs.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_uniform();
    }

    // Inverse-CDF sampling: one uniform consumed per draw, so the stream
    // layout is stable no matter which distributions are interleaved.
    double normal(double mean, double stddev) {
        return mean + stddev * normal_quantile(next_uniform());
    }

    double lognormal(double log_mean, double log_stddev) {
        return std::exp(normal(log_mean, log_stddev));
    }

    double exponential(double rate) {
        return -std::log(next_uniform()) / rate;
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_uniform() * static_cast<double>(n));
    }

private:
    std::uint64_t state_;
};

} // namespace dlcast
