#pragma once

#include <cstddef>
#include <vector>

namespace tsstf {

/// Dense W x H x B raster in band-major layout: all pixels of band 0,
/// then band 1, and so on. Within a band, rows are contiguous.
/// Values are unitless reflectances, nominally in [0, 1].
struct MultiBandImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t bands = 0;
    std::vector<double> values;

    MultiBandImage() = default;
    MultiBandImage(std::size_t w, std::size_t h, std::size_t b, double fill = 0.0)
        : width(w), height(h), bands(b), values(w * h * b, fill) {}

    std::size_t pixelCount() const { return width * height; }
    std::size_t size() const { return width * height * bands; }

    std::size_t index(std::size_t row, std::size_t col, std::size_t band) const {
        return (band * height + row) * width + col;
    }
    double& at(std::size_t row, std::size_t col, std::size_t band) {
        return values[index(row, col, band)];
    }
    double at(std::size_t row, std::size_t col, std::size_t band) const {
        return values[index(row, col, band)];
    }

    bool sameShape(const MultiBandImage& o) const {
        return width == o.width && height == o.height && bands == o.bands;
    }
    bool allFinite() const;
};

/// Four stacked first-difference planes over a W x H x B raster, one per
/// neighbor direction. Plane p occupies the index range
/// [p*W*H*B, (p+1)*W*H*B) and is itself laid out band-major.
struct GradientField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t bands = 0;
    std::vector<double> values;

    GradientField() = default;
    GradientField(std::size_t w, std::size_t h, std::size_t b, double fill = 0.0)
        : width(w), height(h), bands(b), values(4 * w * h * b, fill) {}

    std::size_t planeSize() const { return width * height * bands; }
    std::size_t size() const { return 4 * planeSize(); }

    std::size_t index(std::size_t plane, std::size_t row, std::size_t col, std::size_t band) const {
        return plane * planeSize() + (band * height + row) * width + col;
    }
    double& at(std::size_t plane, std::size_t row, std::size_t col, std::size_t band) {
        return values[index(plane, row, col, band)];
    }
    double at(std::size_t plane, std::size_t row, std::size_t col, std::size_t band) const {
        return values[index(plane, row, col, band)];
    }

    bool sameShape(const GradientField& o) const {
        return width == o.width && height == o.height && bands == o.bands;
    }
    bool allFinite() const;
};

/// Sensor geometry linking an HR raster to its LR counterpart: an s x s
/// averaging blur followed by decimation that keeps the pixel at offset
/// (s/2, s/2) inside each non-overlapping s x s block. HR dimensions must
/// be exact multiples of the window.
struct SensorModel {
    std::size_t window = 1;
    std::size_t hrWidth = 0;
    std::size_t hrHeight = 0;

    std::size_t lrWidth() const { return hrWidth / window; }
    std::size_t lrHeight() const { return hrHeight / window; }

    /// Throws std::invalid_argument when window < 1 or dims not divisible.
    void validate() const;
};

/// Forward differences toward the four neighbors (row+1,col), (row+1,col-1),
/// (row,col-1), (row-1,col-1). Differences whose neighbor falls outside the
/// raster are 0 (replicate boundary).
GradientField diffForward(const MultiBandImage& img);

/// Exact adjoint of diffForward under the Euclidean inner product.
MultiBandImage diffAdjoint(const GradientField& g);

/// Blur with a normalized s x s box filter (replicate padding) and keep the
/// value at each block's center tap. Because the center tap's window is the
/// block itself, each LR pixel is the mean of its s x s HR block.
MultiBandImage blurDownsample(const MultiBandImage& hr, const SensorModel& m);

/// Exact adjoint of blurDownsample: spreads each LR value uniformly over the
/// taps of its blur window.
MultiBandImage blurDownsampleAdjoint(const MultiBandImage& lr, const SensorModel& m);

/// Nearest-neighbor upsampling: each LR pixel fills its s x s HR block.
MultiBandImage upsampleReplicate(const MultiBandImage& lr, const SensorModel& m);

}  // namespace tsstf
