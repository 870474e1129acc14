#include "tsstf/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsstf {

GroupedView GroupedView::contiguous(std::span<double> v, std::size_t groupSize) {
    if (groupSize == 0 || v.size() % groupSize != 0)
        throw std::invalid_argument("GroupedView: length not a multiple of group size");
    return {v.data(), v.size() / groupSize, groupSize, groupSize, 1};
}

GroupedView GroupedView::perPixel(GradientField& f) {
    // Plane p, band b of one pixel lives at (p*B + b) * WH + pixel.
    return {f.values.data(), f.width * f.height, 4 * f.bands, 1, f.width * f.height};
}

void proxMixedL12(GroupedView v, double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("proxMixedL12: gamma must be > 0");
    for (std::size_t g = 0; g < v.groups; ++g) {
        double sq = 0.0;
        for (std::size_t c = 0; c < v.chans; ++c) {
            const double x = v.at(g, c);
            sq += x * x;
        }
        const double norm = std::sqrt(sq);
        const double factor = (norm <= kGroupNormFloor || norm <= gamma) ? 0.0 : 1.0 - gamma / norm;
        for (std::size_t c = 0; c < v.chans; ++c) v.at(g, c) *= factor;
    }
}

double mixedL12Norm(const GroupedView& v) {
    double total = 0.0;
    for (std::size_t g = 0; g < v.groups; ++g) {
        double sq = 0.0;
        for (std::size_t c = 0; c < v.chans; ++c) {
            const double x = v.at(g, c);
            sq += x * x;
        }
        total += std::sqrt(sq);
    }
    return total;
}

void projectHyperslab(std::span<double> x, double center, double radius) {
    if (radius < 0.0) throw std::invalid_argument("projectHyperslab: radius must be >= 0");
    if (x.empty()) return;
    double sum = 0.0;
    for (double v : x) sum += v;
    const double lo = center - radius;
    const double hi = center + radius;
    double shift = 0.0;
    if (sum < lo)
        shift = (lo - sum) / static_cast<double>(x.size());
    else if (sum > hi)
        shift = (hi - sum) / static_cast<double>(x.size());
    else
        return;
    for (double& v : x) v += shift;
}

void projectL2Ball(std::span<double> x, const double* center, double radius) {
    if (radius < 0.0) throw std::invalid_argument("projectL2Ball: radius must be >= 0");
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = center ? x[i] - center[i] : x[i];
        sq += d * d;
    }
    const double dist = std::sqrt(sq);
    if (dist <= radius) return;
    if (dist <= kGroupNormFloor) {
        // Degenerate: at the center of a zero-radius ball already handled above.
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = center ? center[i] : 0.0;
        return;
    }
    const double scale = radius / dist;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = center ? center[i] : 0.0;
        x[i] = c + scale * (x[i] - c);
    }
}

void projectL1Ball(std::span<double> x, double radius) {
    if (radius < 0.0) throw std::invalid_argument("projectL1Ball: radius must be >= 0");
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    if (l1 <= radius) return;
    if (radius == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return;
    }
    // Sort-then-threshold: find the largest k with u_k > (sum_{i<=k} u_i - radius)/k.
    std::vector<double> mag(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mag[i] = std::abs(x[i]);
    std::sort(mag.begin(), mag.end(), std::greater<double>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        cumsum += mag[k];
        const double t = (cumsum - radius) / static_cast<double>(k + 1);
        if (mag[k] > t)
            theta = t;
        else
            break;
    }
    for (double& v : x) {
        const double m = std::abs(v) - theta;
        v = m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
    }
}

void projectMixedL12Ball(GroupedView v, double radius) {
    if (radius < 0.0) throw std::invalid_argument("projectMixedL12Ball: radius must be >= 0");
    std::vector<double> norms(v.groups);
    double total = 0.0;
    for (std::size_t g = 0; g < v.groups; ++g) {
        double sq = 0.0;
        for (std::size_t c = 0; c < v.chans; ++c) {
            const double x = v.at(g, c);
            sq += x * x;
        }
        norms[g] = std::sqrt(sq);
        total += norms[g];
    }
    if (total <= radius) return;
    std::vector<double> target = norms;
    projectL1Ball(std::span<double>(target), radius);
    for (std::size_t g = 0; g < v.groups; ++g) {
        if (norms[g] <= kGroupNormFloor) continue;  // zero groups stay zero
        const double factor = target[g] / norms[g];
        for (std::size_t c = 0; c < v.chans; ++c) v.at(g, c) *= factor;
    }
}

}  // namespace tsstf
