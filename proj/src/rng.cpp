#include "tsstf/rng.hpp"

#include <cmath>
#include <numbers>

namespace tsstf {

std::uint64_t SplitMix64::nextBounded(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = nextU64();
    } while (x >= limit);
    return x % n;
}

double SplitMix64::nextGaussian() {
    if (hasCached_) {
        hasCached_ = false;
        return cached_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - nextUniform();
    const double u2 = nextUniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    hasCached_ = true;
    return r * std::cos(theta);
}

}  // namespace tsstf
