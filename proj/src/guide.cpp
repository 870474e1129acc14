#include "tsstf/guide.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsstf {

GuideImage medianFilter(const GuideImage& band) {
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(band.width);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(band.height);
    GuideImage out(band.width, band.height);
    double window[9];
    for (std::ptrdiff_t i = 0; i < h; ++i) {
        for (std::ptrdiff_t j = 0; j < w; ++j) {
            int n = 0;
            for (std::ptrdiff_t di = -1; di <= 1; ++di) {
                const std::ptrdiff_t ii = std::clamp<std::ptrdiff_t>(i + di, 0, h - 1);
                for (std::ptrdiff_t dj = -1; dj <= 1; ++dj) {
                    const std::ptrdiff_t jj = std::clamp<std::ptrdiff_t>(j + dj, 0, w - 1);
                    window[n++] = band.at(ii, jj);
                }
            }
            std::nth_element(window, window + 4, window + 9);
            out.at(i, j) = window[4];
        }
    }
    return out;
}

GuideImage buildGuide(const MultiBandImage& hrRef) {
    GuideImage acc(hrRef.width, hrRef.height, 0.0);
    GuideImage band(hrRef.width, hrRef.height);
    for (std::size_t b = 0; b < hrRef.bands; ++b) {
        for (std::size_t i = 0; i < hrRef.height; ++i)
            for (std::size_t j = 0; j < hrRef.width; ++j)
                band.at(i, j) = hrRef.at(i, j, b);
        const GuideImage med = medianFilter(band);
        for (std::size_t k = 0; k < acc.values.size(); ++k) acc.values[k] += med.values[k];
    }
    const double inv = 1.0 / static_cast<double>(hrRef.bands);
    for (double& v : acc.values) v *= inv;
    return acc;
}

DirectionalWeights computeWeights(const GuideImage& guide, double delta, int k) {
    if (delta <= 0.0) throw std::invalid_argument("computeWeights: delta must be > 0");
    if (k < 1 || k > 4) throw std::invalid_argument("computeWeights: k must be in 1..4");

    MultiBandImage asImage(guide.width, guide.height, 1);
    asImage.values = guide.values;
    const GradientField d = diffForward(asImage);

    DirectionalWeights w;
    w.width = guide.width;
    w.height = guide.height;
    w.delta = delta;
    w.kZero = k;
    const std::size_t n = guide.width * guide.height;
    for (auto& plane : w.planes) plane.assign(n, 0.0);

    // Direction stencil as in diffForward; the first location index runs
    // along the width.
    constexpr std::ptrdiff_t colOff[4] = {1, 1, 0, -1};
    constexpr std::ptrdiff_t rowOff[4] = {0, -1, -1, -1};

    const double invDelta2 = 1.0 / (delta * delta);
    for (std::size_t pix = 0; pix < n; ++pix) {
        const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(pix / guide.width);
        const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(pix % guide.width);
        double raw[4];
        bool valid[4];
        int voids = 0;
        for (std::size_t p = 0; p < 4; ++p) {
            const std::ptrdiff_t nr = row + rowOff[p];
            const std::ptrdiff_t nc = col + colOff[p];
            valid[p] = nr >= 0 && nr < static_cast<std::ptrdiff_t>(guide.height) && nc >= 0 &&
                       nc < static_cast<std::ptrdiff_t>(guide.width);
            const double diff = d.values[p * n + pix];
            raw[p] = std::exp(-diff * diff * invDelta2);
        }
        // Void directions carry no structural information: they are dropped
        // first and consume the zeroing budget, so real directions at the
        // raster border keep their weights. Among valid directions the k
        // smallest go next, ties zeroing the lower direction first.
        for (std::size_t p = 0; p < 4; ++p)
            if (!valid[p]) {
                raw[p] = 0.0;
                ++voids;
            }
        int order[4] = {0, 1, 2, 3};
        std::stable_sort(order, order + 4, [&](int a, int b) { return raw[a] < raw[b]; });
        int remaining = k - voids;
        for (int z = 0; z < 4 && remaining > 0; ++z) {
            if (!valid[order[z]]) continue;
            raw[order[z]] = 0.0;
            --remaining;
        }
        for (std::size_t p = 0; p < 4; ++p) w.planes[p][pix] = raw[p];
    }

    double wMax = 0.0;
    for (const auto& plane : w.planes)
        for (double v : plane) wMax = std::max(wMax, v);
    w.wMax = wMax;
    return w;
}

GradientField applyWeights(const DirectionalWeights& w, const GradientField& g) {
    if (w.width != g.width || w.height != g.height)
        throw std::invalid_argument("applyWeights: shape mismatch");
    const std::size_t n = w.width * w.height;
    GradientField out = g;
    for (std::size_t p = 0; p < 4; ++p) {
        const std::vector<double>& plane = w.planes[p];
        for (std::size_t b = 0; b < g.bands; ++b) {
            double* dst = out.values.data() + (p * g.bands + b) * n;
            for (std::size_t pix = 0; pix < n; ++pix) dst[pix] *= plane[pix];
        }
    }
    return out;
}

double tgtvValue(const DirectionalWeights& w, const MultiBandImage& img) {
    if (w.width != img.width || w.height != img.height)
        throw std::invalid_argument("tgtvValue: shape mismatch");
    const GradientField d = diffForward(img);
    const std::size_t n = img.pixelCount();
    double total = 0.0;
    for (std::size_t pix = 0; pix < n; ++pix) {
        double sq = 0.0;
        for (std::size_t p = 0; p < 4; ++p) {
            const double wp = w.planes[p][pix];
            for (std::size_t b = 0; b < img.bands; ++b) {
                const double v = wp * d.values[(p * img.bands + b) * n + pix];
                sq += v * v;
            }
        }
        total += std::sqrt(sq);
    }
    return total;
}

}  // namespace tsstf
