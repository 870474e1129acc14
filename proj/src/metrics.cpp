#include "tsstf/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsstf {

namespace {
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr std::size_t kWindow = 8;
}  // namespace

double psnr(const MultiBandImage& estimate, const MultiBandImage& truth) {
    if (!estimate.sameShape(truth)) throw std::invalid_argument("psnr: shape mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const double d = estimate.values[i] - truth.values[i];
        sq += d * d;
    }
    const double mse = sq / static_cast<double>(estimate.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssimBand(const MultiBandImage& estimate, const MultiBandImage& truth, std::size_t band) {
    if (!estimate.sameShape(truth)) throw std::invalid_argument("ssimBand: shape mismatch");
    if (band >= estimate.bands) throw std::invalid_argument("ssimBand: band out of range");
    const std::size_t wx = std::min(kWindow, estimate.width);
    const std::size_t wy = std::min(kWindow, estimate.height);
    const double n = static_cast<double>(wx * wy);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i0 = 0; i0 + wy <= estimate.height; ++i0) {
        for (std::size_t j0 = 0; j0 + wx <= estimate.width; ++j0) {
            double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (std::size_t i = i0; i < i0 + wy; ++i) {
                for (std::size_t j = j0; j < j0 + wx; ++j) {
                    const double x = estimate.at(i, j, band);
                    const double y = truth.at(i, j, band);
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
            }
            const double mx = sx / n;
            const double my = sy / n;
            const double vx = sxx / n - mx * mx;
            const double vy = syy / n - my * my;
            const double cov = sxy / n - mx * my;
            const double num = (2.0 * mx * my + kC1) * (2.0 * cov + kC2);
            const double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

double mssim(const MultiBandImage& estimate, const MultiBandImage& truth) {
    if (!estimate.sameShape(truth)) throw std::invalid_argument("mssim: shape mismatch");
    double total = 0.0;
    for (std::size_t b = 0; b < estimate.bands; ++b) total += ssimBand(estimate, truth, b);
    return total / static_cast<double>(estimate.bands);
}

MetricReport evaluate(const MultiBandImage& estimate, const MultiBandImage& truth) {
    MetricReport r;
    r.psnr = psnr(estimate, truth);
    r.perBandSsim.resize(estimate.bands);
    double total = 0.0;
    for (std::size_t b = 0; b < estimate.bands; ++b) {
        r.perBandSsim[b] = ssimBand(estimate, truth, b);
        total += r.perBandSsim[b];
    }
    r.mssim = total / static_cast<double>(estimate.bands);
    return r;
}

}  // namespace tsstf
