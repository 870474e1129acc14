#include "tsstf/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tsstf/rng.hpp"

namespace tsstf {

void NoiseSpec::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("NoiseSpec: sigma must be >= 0");
    if (spRatio < 0.0 || spRatio >= 1.0)
        throw std::invalid_argument("NoiseSpec: spRatio must be in [0, 1)");
}

MultiBandImage addGaussian(const MultiBandImage& img, const NoiseSpec& spec) {
    spec.validate();
    MultiBandImage out = img;
    if (spec.sigma == 0.0) return out;
    SplitMix64 rng(spec.seed);
    for (double& v : out.values) v += spec.sigma * rng.nextGaussian();
    return out;
}

MultiBandImage addSaltPepper(const MultiBandImage& img, const NoiseSpec& spec) {
    spec.validate();
    MultiBandImage out = img;
    const std::size_t total = out.size();
    const std::size_t count = static_cast<std::size_t>(spec.spRatio * static_cast<double>(total));
    if (count == 0) return out;
    SplitMix64 rng(spec.seed);
    // Partial Fisher-Yates over entry indices: the first `count` slots end up
    // holding a uniform sample without replacement.
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t j = t + static_cast<std::size_t>(rng.nextBounded(total - t));
        std::swap(idx[t], idx[j]);
        out.values[idx[t]] = rng.nextUniform() < 0.5 ? 1.0 : 0.0;
    }
    return out;
}

MultiBandImage simulateLr(const MultiBandImage& hr, const SensorModel& sensor) {
    return blurDownsample(hr, sensor);
}

NoiseCase noiseCaseParams(int caseId) {
    switch (caseId) {
        case 1: return {0.0, 0.0};
        case 2: return {0.05, 0.0};
        case 3: return {0.05, 0.02};
        case 4: return {0.05, 0.05};
        default: throw std::invalid_argument("noiseCaseParams: case must be 1..4");
    }
}

MultiBandImage applyNoiseCase(const MultiBandImage& hr, int caseId, std::uint64_t seed) {
    const NoiseCase nc = noiseCaseParams(caseId);
    // Independent substreams for the two noise components.
    SplitMix64 streams(seed);
    const std::uint64_t gaussSeed = streams.nextU64();
    const std::uint64_t spSeed = streams.nextU64();
    MultiBandImage out = hr;
    if (nc.sigma > 0.0) out = addGaussian(out, {nc.sigma, 0.0, gaussSeed});
    if (nc.spRatio > 0.0) out = addSaltPepper(out, {0.0, nc.spRatio, spSeed});
    return out;
}

SyntheticScene makeSyntheticScene(std::size_t width, std::size_t height, std::size_t bands,
                                  std::uint64_t seed, double shift) {
    if (width < 16 || height < 16)
        throw std::invalid_argument("makeSyntheticScene: dimensions must be >= 16");
    if (bands == 0) throw std::invalid_argument("makeSyntheticScene: bands must be >= 1");

    SplitMix64 rng(seed);
    const std::size_t nSites = std::max<std::size_t>(6, (width * height) / 256);
    std::vector<double> siteRow(nSites), siteCol(nSites);
    for (std::size_t s = 0; s < nSites; ++s) {
        siteRow[s] = rng.nextUniform() * static_cast<double>(height);
        siteCol[s] = rng.nextUniform() * static_cast<double>(width);
    }

    // Voronoi labels (nearest site, ties to the lower index).
    std::vector<std::size_t> label(width * height);
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            const double pi = static_cast<double>(i) + 0.5;
            const double pj = static_cast<double>(j) + 0.5;
            std::size_t best = 0;
            double bestD = 1e300;
            for (std::size_t s = 0; s < nSites; ++s) {
                const double dr = pi - siteRow[s];
                const double dc = pj - siteCol[s];
                const double d2 = dr * dr + dc * dc;
                if (d2 < bestD) {
                    bestD = d2;
                    best = s;
                }
            }
            label[i * width + j] = best;
        }
    }

    // Region adjacency from the label map.
    std::vector<bool> adj(nSites * nSites, false);
    for (std::size_t i = 0; i < height; ++i)
        for (std::size_t j = 0; j + 1 < width; ++j) {
            const std::size_t a = label[i * width + j], b = label[i * width + j + 1];
            if (a != b) adj[a * nSites + b] = adj[b * nSites + a] = true;
        }
    for (std::size_t i = 0; i + 1 < height; ++i)
        for (std::size_t j = 0; j < width; ++j) {
            const std::size_t a = label[i * width + j], b = label[(i + 1) * width + j];
            if (a != b) adj[a * nSites + b] = adj[b * nSites + a] = true;
        }

    // Region luminances from a spaced palette, each site taking the level
    // farthest from its already-assigned neighbors so every boundary stays
    // visible in the guide's across-band mean.
    constexpr std::size_t kLevels = 5;
    std::vector<double> palette(kLevels);
    for (std::size_t l = 0; l < kLevels; ++l)
        palette[l] = 0.25 + 0.5 * static_cast<double>(l) / static_cast<double>(kLevels - 1);
    std::vector<double> lum(nSites);
    std::vector<bool> assigned(nSites, false);
    for (std::size_t s = 0; s < nSites; ++s) {
        double bestLevel = palette[0];
        double bestScore = -1.0;
        for (std::size_t l = 0; l < kLevels; ++l) {
            double score = 1e300;
            for (std::size_t t = 0; t < s; ++t)
                if (assigned[t] && adj[s * nSites + t])
                    score = std::min(score, std::abs(palette[l] - lum[t]));
            // Break palette ties randomly so scenes differ across seeds.
            score += 1e-7 * rng.nextUniform();
            if (score > bestScore) {
                bestScore = score;
                bestLevel = palette[l];
            }
        }
        lum[s] = bestLevel;
        assigned[s] = true;
    }

    // Spectral signature per band around the luminance; the target applies a
    // per-region brightness shift drawn from +-shift plus a slight per-band
    // variation so spectra change realistically between the dates.
    std::vector<double> refColor(nSites * bands), tgtColor(nSites * bands);
    for (std::size_t s = 0; s < nSites; ++s) {
        const double d = shift * (2.0 * rng.nextUniform() - 1.0);
        for (std::size_t b = 0; b < bands; ++b) {
            const double spectral = 0.05 * (2.0 * rng.nextUniform() - 1.0);
            const double dBand = d * (0.8 + 0.2 * rng.nextUniform());
            refColor[s * bands + b] = lum[s] + spectral;
            tgtColor[s * bands + b] = lum[s] + spectral + dBand;
        }
    }

    // Gentle smooth shading shared by both dates. Without it the weighted
    // gradients of a flat cartoon vanish entirely, which collapses the
    // adaptive edge-constraint radius to zero and leaves the solver in a
    // degenerate equality regime real scenes never produce.
    std::vector<double> freqRow(2 * bands), freqCol(2 * bands), phase(2 * bands), amp(2 * bands);
    for (std::size_t k = 0; k < 2 * bands; ++k) {
        freqRow[k] = 1.0 + 2.0 * rng.nextUniform();
        freqCol[k] = 1.0 + 2.0 * rng.nextUniform();
        phase[k] = 6.283185307179586 * rng.nextUniform();
        amp[k] = 0.008 * (0.5 + rng.nextUniform());
    }

    SyntheticScene scene;
    scene.hrRef = MultiBandImage(width, height, bands);
    scene.hrTarget = MultiBandImage(width, height, bands);
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            const std::size_t s = label[i * width + j];
            for (std::size_t b = 0; b < bands; ++b) {
                double tex = 0.0;
                for (std::size_t k = 2 * b; k < 2 * b + 2; ++k)
                    tex += amp[k] * std::sin(6.283185307179586 *
                                                 (freqRow[k] * static_cast<double>(i) /
                                                      static_cast<double>(height) +
                                                  freqCol[k] * static_cast<double>(j) /
                                                      static_cast<double>(width)) +
                                             phase[k]);
                scene.hrRef.at(i, j, b) = refColor[s * bands + b] + tex;
                scene.hrTarget.at(i, j, b) = tgtColor[s * bands + b] + tex;
            }
        }
    }
    return scene;
}

}  // namespace tsstf
