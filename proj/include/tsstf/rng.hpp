#pragma once

#include <cstdint>

namespace tsstf {

/// splitmix64 generator. Chosen because its integer stream is fully specified
/// by the seed and identical on every platform; all stochastic code in this
/// library draws from it so runs are reproducible bit for bit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t nextU64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    double nextUniform() {
        return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n) via rejection sampling (no modulo bias).
    std::uint64_t nextBounded(std::uint64_t n);

    /// Standard normal via the Box-Muller transform (pairs, second cached).
    double nextGaussian();

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool hasCached_ = false;
};

}  // namespace tsstf
