#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tsstf/image.hpp"

namespace tsstf {

/// Single-band noise-attenuated image used only to derive weights.
struct GuideImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;

    GuideImage() = default;
    GuideImage(std::size_t w, std::size_t h, double fill = 0.0)
        : width(w), height(h), values(w * h, fill) {}

    double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

/// Per-pixel, per-direction weight planes in [0, 1], shared across bands.
/// After construction the k smallest weights at each pixel are zero and
/// wMax is the maximum surviving weight.
struct DirectionalWeights {
    std::size_t width = 0;
    std::size_t height = 0;
    std::array<std::vector<double>, 4> planes;
    double wMax = 0.0;
    double delta = 0.0;
    int kZero = 0;
};

/// 3x3 median with replicate borders.
GuideImage medianFilter(const GuideImage& band);

/// Per-band 3x3 median of the reference HR image, then mean across bands.
GuideImage buildGuide(const MultiBandImage& hrRef);

/// Gaussian weights exp(-|d|^2/delta^2) on the guide's four directional
/// differences, then the k smallest weights at each pixel are zeroed
/// (ties zero the lower direction index first). Directions whose neighbor
/// leaves the raster are zeroed outright and consume the budget, keeping
/// real border directions protected.
/// Throws std::invalid_argument for delta <= 0 or k outside 1..4.
DirectionalWeights computeWeights(const GuideImage& guide, double delta, int k);

/// Elementwise product of each field plane with its weight plane, weights
/// broadcast over bands.
GradientField applyWeights(const DirectionalWeights& w, const GradientField& g);

/// Weighted total-variation seminorm: the sum over pixels of the Euclidean
/// norm of that pixel's weighted differences across all bands and directions.
double tgtvValue(const DirectionalWeights& w, const MultiBandImage& img);

}  // namespace tsstf
