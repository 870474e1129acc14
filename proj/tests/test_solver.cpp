#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/dense_ops.hpp"
#include "support/reference_iteration.hpp"
#include "tsstf/metrics.hpp"
#include "tsstf/prox.hpp"
#include "tsstf/rng.hpp"
#include "tsstf/simulate.hpp"
#include "tsstf/solver.hpp"

using namespace tsstf;

namespace {

MultiBandImage randomImage(std::size_t w, std::size_t h, std::size_t b, std::uint64_t seed,
                           double lo = 0.0, double hi = 1.0) {
    MultiBandImage img(w, h, b);
    SplitMix64 rng(seed);
    for (double& v : img.values) v = lo + (hi - lo) * rng.nextUniform();
    return img;
}

DirectionalWeights uniformWeights(std::size_t w, std::size_t h) {
    DirectionalWeights dw;
    dw.width = w;
    dw.height = h;
    for (auto& plane : dw.planes) plane.assign(w * h, 1.0);
    dw.wMax = 1.0;
    dw.delta = 0.1;
    dw.kZero = 0;
    return dw;
}

// Small fusion problem over a synthetic scene with derived parameters.
FusionProblem smallProblem(std::size_t size, std::size_t bands, std::size_t window,
                           std::uint64_t seed, int noiseCase) {
    const SyntheticScene scene = makeSyntheticScene(size, size, bands, seed);
    const SensorModel sensor{window, size, size};
    const MultiBandImage hrRefNoisy = applyNoiseCase(scene.hrRef, noiseCase, seed + 1);
    FusionParams params;
    const NoiseCase nc = noiseCaseParams(noiseCase);
    params.sigmaH = nc.sigma;
    params.rH = nc.spRatio;
    FusionProblem p = makeProblem(hrRefNoisy, simulateLr(scene.hrRef, sensor),
                                  simulateLr(scene.hrTarget, sensor), window, params);
    p.params = deriveParameters(p.hrRef, p.lrRef, p.sensor, p.params);
    return p;
}

}  // namespace

TEST_CASE("deriveParameters implements the closed forms") {
    // Zero noise collapses the radii.
    {
        MultiBandImage hr = randomImage(16, 16, 2, 3);
        SensorModel sensor{4, 16, 16};
        const MultiBandImage lr = blurDownsample(hr, sensor);
        FusionParams p;
        const FusionParams full = deriveParameters(hr, lr, sensor, p);
        CHECK(*full.epsH == 0.0);
        CHECK(*full.etaH == 0.0);
        CHECK(*full.epsL == 0.0);  // lr generated exactly as SB hr
        REQUIRE(full.betaPerBand.has_value());
        CHECK(full.betaPerBand->size() == 2);
    }
    // Direct evaluation of the formulas.
    {
        MultiBandImage hr = randomImage(64, 64, 6, 5);
        SensorModel sensor{8, 64, 64};
        MultiBandImage lr = blurDownsample(hr, sensor);
        for (double& v : lr.values) v += 0.001;
        FusionParams p;
        p.sigmaH = 0.05;
        p.rH = 0.02;
        p.rL = 0.01;
        const FusionParams full = deriveParameters(hr, lr, sensor, p);
        CHECK(*full.epsH == doctest::Approx(0.98 * 0.05 * std::sqrt(4096.0 * 6.0 * 0.98)));
        CHECK(*full.etaH == doctest::Approx(0.49 * 4096.0 * 0.02));
        CHECK(*full.etaL == doctest::Approx(0.49 * 64.0 * 0.01));
        double sq = 0.0;
        const MultiBandImage sb = blurDownsample(hr, sensor);
        for (std::size_t i = 0; i < lr.size(); ++i) sq += (lr.values[i] - sb.values[i]) * (lr.values[i] - sb.values[i]);
        CHECK(*full.epsL == doctest::Approx(std::sqrt(sq)));
        for (std::size_t b = 0; b < 6; ++b) {
            double mL = 0.0, mH = 0.0;
            for (std::size_t i = 0; i < 64; ++i) mL += lr.values[b * 64 + i];
            for (std::size_t i = 0; i < 4096; ++i) mH += hr.values[b * 4096 + i];
            CHECK((*full.betaPerBand)[b] ==
                  doctest::Approx(std::abs(mL / 64.0 - mH / 4096.0)).epsilon(1e-12));
        }
        // Explicit overrides win.
        FusionParams o;
        o.epsH = 0.123;
        o.betaPerBand = std::vector<double>(6, 0.5);
        const FusionParams kept = deriveParameters(hr, lr, sensor, o);
        CHECK(*kept.epsH == 0.123);
        CHECK((*kept.betaPerBand)[3] == 0.5);
    }
}

TEST_CASE("computeStepSizes reproduces the closed forms") {
    DirectionalWeights w = uniformWeights(4, 4);
    w.wMax = 1.0;
    StepSizes s = computeStepSizes(w);
    CHECK(s.primal[0] == doctest::Approx(1.0 / 34.0));
    CHECK(s.primal[1] == doctest::Approx(1.0 / 33.0));
    CHECK(s.primal[2] == 1.0);
    CHECK(s.primal[3] == 1.0);
    CHECK(s.primal[4] == 1.0);
    for (double d : s.dual) CHECK(d == doctest::Approx(0.2));

    w.wMax = 0.0;
    s = computeStepSizes(w);
    CHECK(s.primal[0] == doctest::Approx(0.5));
    CHECK(s.primal[1] == doctest::Approx(1.0));

    w.wMax = 0.5;
    s = computeStepSizes(w);
    CHECK(s.primal[0] == doctest::Approx(0.1));
    for (double v : s.primal) CHECK(v > 0.0);
}

TEST_CASE("updateAlpha vanishes in the degenerate cases and recomputes") {
    const GuideImage flatGuide(8, 8, 0.0);
    DirectionalWeights w = uniformWeights(8, 8);

    const MultiBandImage lr = randomImage(2, 2, 1, 31);
    CHECK(updateAlpha(MultiBandImage(8, 8, 1, 0.7), w, lr, lr, 5.0, QNorm::L12) == 0.0);

    const MultiBandImage lr2 = randomImage(2, 2, 1, 32);
    CHECK(updateAlpha(MultiBandImage(8, 8, 1, 0.7), w, lr, lr2, 5.0, QNorm::L12) == 0.0);

    const MultiBandImage hr = randomImage(8, 8, 1, 33);
    const double got = updateAlpha(hr, w, lr, lr2, 5.0, QNorm::L12);
    // Recompute the three factors directly.
    const GradientField wd = applyWeights(w, diffForward(hr));
    double qv = 0.0;
    for (std::size_t pix = 0; pix < 64; ++pix) {
        double sq = 0.0;
        for (std::size_t p = 0; p < 4; ++p) sq += wd.values[p * 64 + pix] * wd.values[p * 64 + pix];
        qv += std::sqrt(sq);
    }
    double l1 = 0.0;
    for (std::size_t i = 0; i < lr.size(); ++i) l1 += std::abs(lr.values[i] - lr2.values[i]);
    CHECK(got == doctest::Approx(5.0 * qv * l1 / 4.0).epsilon(1e-12));
}

TEST_CASE("one iterate matches the dense straight-line transcription") {
    for (const std::size_t bands : {std::size_t{1}, std::size_t{2}}) {
        const std::size_t size = 8, window = 4;
        const std::size_t nH = size * size, nL = 4;

        const MultiBandImage hrRef = randomImage(size, size, bands, 100 + bands);
        const MultiBandImage lrRef = randomImage(size / window, size / window, bands, 200 + bands);
        const MultiBandImage lrTgt = randomImage(size / window, size / window, bands, 300 + bands);

        FusionParams params;
        params.sigmaH = 0.05;
        params.rH = 0.02;
        params.rL = 0.01;
        FusionProblem p = makeProblem(hrRef, lrRef, lrTgt, window, params);
        p.params = deriveParameters(p.hrRef, p.lrRef, p.sensor, p.params);
        const StepSizes steps = computeStepSizes(p.weights);

        // Random but shared starting state.
        SolverState st = initState(p);
        SplitMix64 rng(17 + bands);
        auto fill = [&rng](std::vector<double>& v, double scale) {
            for (double& x : v) x = scale * (2.0 * rng.nextUniform() - 1.0);
        };
        fill(st.hTilR.values, 1.0);
        fill(st.hTilT.values, 1.0);
        fill(st.sHr.values, 0.05);
        fill(st.sLr.values, 0.05);
        fill(st.sLt.values, 0.05);
        fill(st.z1.values, 0.3);
        fill(st.z2.values, 0.3);
        fill(st.z3.values, 0.3);
        fill(st.z4.values, 0.3);
        fill(st.z5.values, 0.3);
        fill(st.z6.values, 0.3);

        oracle::RefProblem rp;
        rp.width = size;
        rp.height = size;
        rp.bands = bands;
        rp.window = window;
        rp.hr = p.hrRef.values;
        rp.lrRef = p.lrRef.values;
        rp.lrTgt = p.lrTarget.values;
        rp.wDiag = oracle::denseWeightDiagonal(p.weights, bands);
        rp.d = oracle::denseDiff(size, size, bands);
        rp.sb = oracle::denseBlurDownsample(size, size, bands, window);
        rp.beta = *p.params.betaPerBand;
        rp.epsH = *p.params.epsH;
        rp.epsL = *p.params.epsL;
        rp.etaH = *p.params.etaH;
        rp.etaL = *p.params.etaL;
        rp.cAlpha = p.params.cAlpha;
        rp.lambda = p.params.lambda;
        rp.qNorm = 2;

        oracle::RefState rs;
        rs.hr = st.hTilR.values;
        rs.ht = st.hTilT.values;
        rs.sHr = st.sHr.values;
        rs.sLr = st.sLr.values;
        rs.sLt = st.sLt.values;
        rs.z1 = st.z1.values;
        rs.z2 = st.z2.values;
        rs.z3 = st.z3.values;
        rs.z4 = st.z4.values;
        rs.z5 = st.z5.values;
        rs.z6 = st.z6.values;
        rs.alpha = st.alphaCur;

        const oracle::RefSteps refSteps{steps.primal[0], steps.primal[1], steps.primal[2],
                                        steps.primal[3], steps.primal[4], steps.dual[0]};

        iterate(st, p, steps);
        oracle::referenceIterate(rs, rp, refSteps);

        auto maxAbsDiff = [](const std::vector<double>& a, const std::vector<double>& b) {
            double m = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
            return m;
        };
        CHECK(maxAbsDiff(st.hTilR.values, rs.hr) < 1e-10);
        CHECK(maxAbsDiff(st.hTilT.values, rs.ht) < 1e-10);
        CHECK(maxAbsDiff(st.sHr.values, rs.sHr) < 1e-10);
        CHECK(maxAbsDiff(st.sLr.values, rs.sLr) < 1e-10);
        CHECK(maxAbsDiff(st.sLt.values, rs.sLt) < 1e-10);
        CHECK(maxAbsDiff(st.z1.values, rs.z1) < 1e-10);
        CHECK(maxAbsDiff(st.z2.values, rs.z2) < 1e-10);
        CHECK(maxAbsDiff(st.z3.values, rs.z3) < 1e-10);
        CHECK(maxAbsDiff(st.z4.values, rs.z4) < 1e-10);
        CHECK(maxAbsDiff(st.z5.values, rs.z5) < 1e-10);
        CHECK(maxAbsDiff(st.z6.values, rs.z6) < 1e-10);
        CHECK(std::abs(st.alphaCur - rs.alpha) < 1e-10);
        CHECK(nH == rp.width * rp.height);
        CHECK(nL == (rp.width / window) * (rp.height / window));
    }
}

TEST_CASE("a fully feasible constant-scene state is a fixed point") {
    const std::size_t size = 16, window = 4;
    const MultiBandImage hr(size, size, 1, 0.5);
    SensorModel sensor{window, size, size};
    const MultiBandImage lr = blurDownsample(hr, sensor);
    FusionParams params;  // zero noise: all radii collapse to 0
    FusionProblem p = makeProblem(hr, lr, lr, window, params);
    p.params = deriveParameters(p.hrRef, p.lrRef, p.sensor, p.params);
    const StepSizes steps = computeStepSizes(p.weights);
    SolverState st = initState(p);  // hTilR = hr, hTilT = replicate(lr) = hr, duals zero
    iterate(st, p, steps);
    for (std::size_t i = 0; i < st.hTilR.values.size(); ++i) {
        CHECK(st.hTilR.values[i] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(st.hTilT.values[i] == doctest::Approx(0.5).epsilon(1e-12));
    }
    for (double v : st.sHr.values) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("z4 update satisfies the Moreau decomposition against the l2 projection") {
    FusionProblem p = smallProblem(16, 2, 4, 7, 3);
    const StepSizes steps = computeStepSizes(p.weights);
    SolverState st = initState(p);
    iterate(st, p, steps);
    iterate(st, p, steps);

    // Reconstruct the pre-prox dual from the committed state by one forward
    // sweep replay: instead, check the decomposition identity directly on a
    // fresh vector.
    SplitMix64 rng(9);
    std::vector<double> zbar(st.z4.values.size());
    for (double& v : zbar) v = 2.0 * rng.nextUniform() - 1.0;
    const double gamma = steps.dual[3];
    std::vector<double> after = zbar;
    std::vector<double> scratch(zbar.size());
    proxConjugate(std::span<double>(after), gamma, std::span<double>(scratch),
                  [&](std::span<double> vals, double) {
                      projectL2Ball(vals, p.hrRef.values.data(), *p.params.epsH);
                  });
    std::vector<double> projected(zbar.size());
    for (std::size_t i = 0; i < zbar.size(); ++i) projected[i] = zbar[i] / gamma;
    projectL2Ball(std::span<double>(projected), p.hrRef.values.data(), *p.params.epsH);
    for (std::size_t i = 0; i < zbar.size(); ++i)
        CHECK(after[i] + gamma * projected[i] == doctest::Approx(zbar[i]).epsilon(1e-12));
}

TEST_CASE("solve reaches the stopping rule on a noise-free changing scene") {
    const std::size_t size = 32, window = 4;
    const SyntheticScene scene = makeSyntheticScene(size, size, 2, 11);
    SensorModel sensor{window, size, size};
    // Mild noise keeps eps_l positive so the fidelity part of the stopping
    // rule is attainable.
    const MultiBandImage hrNoisy = applyNoiseCase(scene.hrRef, 2, 12);
    FusionParams params;
    params.sigmaH = 0.05;
    FusionProblem p = makeProblem(hrNoisy, simulateLr(scene.hrRef, sensor),
                                  simulateLr(scene.hrTarget, sensor), window, params);
    const FusionResult res = solve(p);
    CHECK(res.converged);
    CHECK(res.iterations <= p.params.maxIter);
    const IterationStats& last = res.residualTrace.back();
    CHECK(last.errHr < 1e-5);
    CHECK(last.errHt < 1e-5);
    CHECK(last.gapLrRef <= 0.0);
    CHECK(last.gapLrTgt <= 0.0);
    CHECK(res.finalAlpha >= 0.0);
    CHECK(res.residualTrace.size() == res.iterations);

    // The fused target should be closer to the truth than the LR replication.
    const MultiBandImage naive = upsampleReplicate(simulateLr(scene.hrTarget, sensor), sensor);
    CHECK(psnr(res.targetHr, scene.hrTarget) > psnr(naive, scene.hrTarget));
}

TEST_CASE("residuals reports gaps that match direct evaluation") {
    FusionProblem p = smallProblem(16, 1, 4, 21, 1);
    SolverState st = initState(p);

    // Freshly initialized state with exact LR consistency: zero stop gap.
    {
        const SyntheticScene scene = makeSyntheticScene(16, 16, 1, 22);
        SensorModel sensor{4, 16, 16};
        FusionParams params;
        FusionProblem q = makeProblem(scene.hrRef, simulateLr(scene.hrRef, sensor),
                                      simulateLr(scene.hrRef, sensor), 4, params);
        q.params = deriveParameters(q.hrRef, q.lrRef, q.sensor, q.params);
        SolverState qs = initState(q);
        const DiagnosticRecord rec = residuals(qs, q);
        CHECK(rec.gapLrRefStop == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rec.gapLrRefFidelity == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rec.l1UsedHr == 0.0);
    }

    const DiagnosticRecord rec = residuals(st, p);
    // Recompute two gaps independently.
    const MultiBandImage sb = blurDownsample(st.hTilR, p.sensor);
    double sq = 0.0;
    for (std::size_t i = 0; i < sb.size(); ++i)
        sq += (p.lrRef.values[i] - sb.values[i]) * (p.lrRef.values[i] - sb.values[i]);
    CHECK(rec.gapLrRefStop == doctest::Approx(std::sqrt(sq) - *p.params.epsL).epsilon(1e-12));
    CHECK(rec.alpha == st.alphaCur);
}

TEST_CASE("hyperslab step keeps per-band means within beta") {
    FusionProblem p = smallProblem(16, 2, 4, 51, 2);
    const StepSizes steps = computeStepSizes(p.weights);
    SolverState st = initState(p);
    const std::size_t nH = p.hrRef.pixelCount();
    const std::size_t nL = p.lrRef.pixelCount();
    for (int n = 0; n < 5; ++n) {
        iterate(st, p, steps);
        // hTilT was projected per band before being committed.
        for (std::size_t b = 0; b < p.hrRef.bands; ++b) {
            double sumLt = 0.0, sumHt = 0.0;
            for (std::size_t i = 0; i < nL; ++i) sumLt += p.lrTarget.values[b * nL + i];
            for (std::size_t i = 0; i < nH; ++i) sumHt += st.hTilT.values[b * nH + i];
            const double centre = static_cast<double>(nH) * sumLt / static_cast<double>(nL);
            CHECK(std::abs(centre - sumHt) <=
                  static_cast<double>(nH) * (*p.params.betaPerBand)[b] + 1e-8);
        }
    }
}

TEST_CASE("divergence guard trips on non-finite state") {
    FusionProblem p = smallProblem(16, 1, 4, 33, 2);
    const StepSizes steps = computeStepSizes(p.weights);
    SolverState st = initState(p);
    st.hTilR.values[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(iterate(st, p, steps), SolverDivergence);
}
