#pragma once

#include <cstdint>

#include "tsstf/image.hpp"

namespace tsstf {

/// Degradation applied to an observed image: additive Gaussian noise plus
/// salt-and-pepper replacement of a fraction of pixel-band entries.
struct NoiseSpec {
    double sigma = 0.0;     ///< Gaussian standard deviation (reflectance units).
    double spRatio = 0.0;   ///< superimposition ratio in [0, 1)
    std::uint64_t seed = 0;

    void validate() const;
};

/// img + i.i.d. Gaussian draws of std sigma. Values are not clipped; the
/// observation model is purely additive.
MultiBandImage addGaussian(const MultiBandImage& img, const NoiseSpec& spec);

/// Replaces floor(spRatio * W*H*B) distinct entries, each set to 1.0 or 0.0
/// by a fair coin.
MultiBandImage addSaltPepper(const MultiBandImage& img, const NoiseSpec& spec);

/// LR observation of an HR image with zero modeling error.
MultiBandImage simulateLr(const MultiBandImage& hr, const SensorModel& sensor);

/// Preset degradations: case 1 none; case 2 sigma 0.05; case 3 adds
/// salt-and-pepper ratio 0.02; case 4 ratio 0.05.
struct NoiseCase {
    double sigma = 0.0;
    double spRatio = 0.0;
};
NoiseCase noiseCaseParams(int caseId);
MultiBandImage applyNoiseCase(const MultiBandImage& hr, int caseId, std::uint64_t seed);

/// A reference/target HR pair over one Voronoi partition: same region
/// geometry, per-region per-band brightness shifts in [-shift, shift].
struct SyntheticScene {
    MultiBandImage hrRef;
    MultiBandImage hrTarget;
};
SyntheticScene makeSyntheticScene(std::size_t width, std::size_t height, std::size_t bands,
                                  std::uint64_t seed, double shift = 0.3);

}  // namespace tsstf
