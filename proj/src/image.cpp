#include "tsstf/image.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace tsstf {

namespace {

// Direction stencils: neighbor = (row + kRowOff[p], col + kColOff[p]).
// The first index of a pixel location runs along the width.
constexpr std::ptrdiff_t kColOff[4] = {1, 1, 0, -1};
constexpr std::ptrdiff_t kRowOff[4] = {0, -1, -1, -1};

inline std::ptrdiff_t clampIndex(std::ptrdiff_t v, std::ptrdiff_t hi) {
    if (v < 0) return 0;
    if (v > hi) return hi;
    return v;
}

}  // namespace

bool MultiBandImage::allFinite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

bool GradientField::allFinite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void SensorModel::validate() const {
    if (window < 1) throw std::invalid_argument("SensorModel: window must be >= 1");
    if (hrWidth == 0 || hrHeight == 0)
        throw std::invalid_argument("SensorModel: HR dimensions must be positive");
    if (hrWidth % window != 0 || hrHeight % window != 0)
        throw std::invalid_argument("SensorModel: HR dimensions must be multiples of window");
}

GradientField diffForward(const MultiBandImage& img) {
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(img.width);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(img.height);
    GradientField g(img.width, img.height, img.bands);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t b = 0; b < img.bands; ++b) {
            for (std::ptrdiff_t i = 0; i < h; ++i) {
                const std::ptrdiff_t ni = i + kRowOff[p];
                for (std::ptrdiff_t j = 0; j < w; ++j) {
                    const std::ptrdiff_t nj = j + kColOff[p];
                    if (ni < 0 || ni >= h || nj < 0 || nj >= w) continue;
                    g.at(p, i, j, b) = img.at(ni, nj, b) - img.at(i, j, b);
                }
            }
        }
    }
    return g;
}

MultiBandImage diffAdjoint(const GradientField& g) {
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(g.width);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(g.height);
    MultiBandImage out(g.width, g.height, g.bands);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t b = 0; b < g.bands; ++b) {
            for (std::ptrdiff_t i = 0; i < h; ++i) {
                const std::ptrdiff_t ni = i + kRowOff[p];
                for (std::ptrdiff_t j = 0; j < w; ++j) {
                    const std::ptrdiff_t nj = j + kColOff[p];
                    if (ni < 0 || ni >= h || nj < 0 || nj >= w) continue;
                    const double v = g.at(p, i, j, b);
                    out.at(ni, nj, b) += v;
                    out.at(i, j, b) -= v;
                }
            }
        }
    }
    return out;
}

MultiBandImage blurDownsample(const MultiBandImage& hr, const SensorModel& m) {
    m.validate();
    if (hr.width != m.hrWidth || hr.height != m.hrHeight)
        throw std::invalid_argument("blurDownsample: HR image does not match sensor dimensions");
    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(m.window);
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(hr.width);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(hr.height);
    const std::ptrdiff_t half = s / 2;
    const double inv = 1.0 / static_cast<double>(s * s);
    MultiBandImage lr(m.lrWidth(), m.lrHeight(), hr.bands);
    for (std::size_t b = 0; b < hr.bands; ++b) {
        for (std::size_t bi = 0; bi < lr.height; ++bi) {
            const std::ptrdiff_t ci = static_cast<std::ptrdiff_t>(bi) * s + half;
            for (std::size_t bj = 0; bj < lr.width; ++bj) {
                const std::ptrdiff_t cj = static_cast<std::ptrdiff_t>(bj) * s + half;
                double acc = 0.0;
                for (std::ptrdiff_t di = -half; di < s - half; ++di) {
                    const std::ptrdiff_t ii = clampIndex(ci + di, h - 1);
                    for (std::ptrdiff_t dj = -half; dj < s - half; ++dj) {
                        const std::ptrdiff_t jj = clampIndex(cj + dj, w - 1);
                        acc += hr.at(ii, jj, b);
                    }
                }
                lr.at(bi, bj, b) = acc * inv;
            }
        }
    }
    return lr;
}

MultiBandImage blurDownsampleAdjoint(const MultiBandImage& lr, const SensorModel& m) {
    m.validate();
    if (lr.width != m.lrWidth() || lr.height != m.lrHeight())
        throw std::invalid_argument("blurDownsampleAdjoint: LR image does not match sensor dimensions");
    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(m.window);
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(m.hrWidth);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(m.hrHeight);
    const std::ptrdiff_t half = s / 2;
    const double inv = 1.0 / static_cast<double>(s * s);
    MultiBandImage hr(m.hrWidth, m.hrHeight, lr.bands);
    for (std::size_t b = 0; b < lr.bands; ++b) {
        for (std::size_t bi = 0; bi < lr.height; ++bi) {
            const std::ptrdiff_t ci = static_cast<std::ptrdiff_t>(bi) * s + half;
            for (std::size_t bj = 0; bj < lr.width; ++bj) {
                const std::ptrdiff_t cj = static_cast<std::ptrdiff_t>(bj) * s + half;
                const double v = lr.at(bi, bj, b) * inv;
                for (std::ptrdiff_t di = -half; di < s - half; ++di) {
                    const std::ptrdiff_t ii = clampIndex(ci + di, h - 1);
                    for (std::ptrdiff_t dj = -half; dj < s - half; ++dj) {
                        const std::ptrdiff_t jj = clampIndex(cj + dj, w - 1);
                        hr.at(ii, jj, b) += v;
                    }
                }
            }
        }
    }
    return hr;
}

MultiBandImage upsampleReplicate(const MultiBandImage& lr, const SensorModel& m) {
    m.validate();
    if (lr.width != m.lrWidth() || lr.height != m.lrHeight())
        throw std::invalid_argument("upsampleReplicate: LR image does not match sensor dimensions");
    const std::size_t s = m.window;
    MultiBandImage hr(m.hrWidth, m.hrHeight, lr.bands);
    for (std::size_t b = 0; b < lr.bands; ++b)
        for (std::size_t i = 0; i < hr.height; ++i)
            for (std::size_t j = 0; j < hr.width; ++j)
                hr.at(i, j, b) = lr.at(i / s, j / s, b);
    return hr;
}

}  // namespace tsstf
