#pragma once

#include <vector>

#include "tsstf/image.hpp"

namespace tsstf {

struct MetricReport {
    double psnr = 0.0;
    double mssim = 0.0;
    std::vector<double> perBandSsim;
};

/// 10*log10(1/MSE) with peak 1; +infinity for identical images.
double psnr(const MultiBandImage& estimate, const MultiBandImage& truth);

/// Mean local SSIM over 8x8 sliding windows (uniform weighting, biased
/// moments, C1 = 0.01^2, C2 = 0.03^2, dynamic range 1). Bands smaller than
/// the window are evaluated with a single shrunken window.
double ssimBand(const MultiBandImage& estimate, const MultiBandImage& truth, std::size_t band);

/// Arithmetic mean of ssimBand across bands.
double mssim(const MultiBandImage& estimate, const MultiBandImage& truth);

MetricReport evaluate(const MultiBandImage& estimate, const MultiBandImage& truth);

}  // namespace tsstf
