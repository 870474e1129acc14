#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsstf/image.hpp"

namespace tsstf {

/// Affine view of a vector partitioned into equal-sized groups: the entry of
/// group g at channel c sits at data[g*groupStride + c*chanStride]. Covers
/// both contiguous groups (groupStride = chans, chanStride = 1) and the
/// per-pixel groups of a gradient field, where the 4*B channels of one pixel
/// are strided by the pixel count.
struct GroupedView {
    double* data = nullptr;
    std::size_t groups = 0;
    std::size_t chans = 0;
    std::size_t groupStride = 0;
    std::size_t chanStride = 0;

    double& at(std::size_t g, std::size_t c) const {
        return data[g * groupStride + c * chanStride];
    }

    static GroupedView contiguous(std::span<double> v, std::size_t groupSize);
    /// Per-pixel groups spanning all four directions and all bands.
    static GroupedView perPixel(GradientField& f);
};

// Group norms below this floor are treated as zero to avoid division blow-up.
inline constexpr double kGroupNormFloor = 1e-300;

/// Group soft-thresholding: each group shrinks by max{1 - gamma/||g||_2, 0}.
/// Throws std::invalid_argument for gamma <= 0.
void proxMixedL12(GroupedView v, double gamma);

/// Sum over groups of the Euclidean norm of each group.
double mixedL12Norm(const GroupedView& v);

/// Projection onto {z : |center - sum(z)| <= radius}; shifts every entry by
/// the same amount when the sum is out of range.
void projectHyperslab(std::span<double> x, double center, double radius);

/// Projection onto the l2 ball of given center and radius. A null center
/// means the origin.
void projectL2Ball(std::span<double> x, const double* center, double radius);

/// Euclidean projection onto {z : ||z||_1 <= radius} (center 0), by sorting
/// magnitudes and soft-thresholding at the exact level.
void projectL1Ball(std::span<double> x, double radius);

/// Projection onto the mixed-l12 ball of radius eps centered at 0: project
/// the vector of group norms onto the l1 ball, then rescale each group.
void projectMixedL12Ball(GroupedView v, double radius);

/// Conjugate prox via the Moreau identity:
///   z <- z - gamma * prox_{(1/gamma) f}(z / gamma),
/// where proxOfF(vals, t) applies prox_{t f} in place. scratch must have the
/// same length as z.
template <typename ProxFn>
void proxConjugate(std::span<double> z, double gamma, std::span<double> scratch, ProxFn&& proxOfF) {
    const double inv = 1.0 / gamma;
    for (std::size_t i = 0; i < z.size(); ++i) scratch[i] = z[i] * inv;
    proxOfF(scratch, inv);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= gamma * scratch[i];
}

template <typename ProxFn>
std::vector<double> proxConjugate(std::span<const double> z, double gamma, ProxFn&& proxOfF) {
    std::vector<double> out(z.begin(), z.end());
    std::vector<double> scratch(z.size());
    proxConjugate(std::span<double>(out), gamma, std::span<double>(scratch), proxOfF);
    return out;
}

}  // namespace tsstf
