#include "tsstf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tsstf/prox.hpp"

namespace tsstf {

namespace {

double l2Norm(const std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

double l2Dist(const std::vector<double>& a, const std::vector<double>& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

double relChange(const std::vector<double>& next, const std::vector<double>& prev) {
    const double den = l2Norm(prev);
    const double num = l2Dist(next, prev);
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

double fieldQNorm(const GradientField& f, QNorm q) {
    switch (q) {
        case QNorm::L1: {
            double s = 0.0;
            for (double v : f.values) s += std::abs(v);
            return s;
        }
        case QNorm::L2:
            return l2Norm(f.values);
        case QNorm::L12: {
            const std::size_t n = f.width * f.height;
            const std::size_t chans = 4 * f.bands;
            double total = 0.0;
            for (std::size_t pix = 0; pix < n; ++pix) {
                double sq = 0.0;
                for (std::size_t c = 0; c < chans; ++c) {
                    const double v = f.values[c * n + pix];
                    sq += v * v;
                }
                total += std::sqrt(sq);
            }
            return total;
        }
    }
    return 0.0;
}

GroupedView perPixelView(std::span<double> vals, std::size_t pixels, std::size_t bands) {
    return {vals.data(), pixels, 4 * bands, 1, pixels};
}

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

std::vector<double> extrapolate(const std::vector<double>& next, const std::vector<double>& prev) {
    std::vector<double> v(next.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * next[i] - prev[i];
    return v;
}

bool finiteAll(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

std::string qNormName(QNorm q) {
    switch (q) {
        case QNorm::L1: return "l1";
        case QNorm::L2: return "l2";
        case QNorm::L12: return "l12";
    }
    return "l12";
}

QNorm qNormFromName(const std::string& name) {
    if (name == "l1") return QNorm::L1;
    if (name == "l2") return QNorm::L2;
    if (name == "l12") return QNorm::L12;
    throw std::invalid_argument("qNormFromName: unknown norm '" + name + "'");
}

void FusionParams::validate() const {
    if (delta <= 0.0) throw std::invalid_argument("FusionParams: delta must be > 0");
    if (kZero < 1 || kZero > 4) throw std::invalid_argument("FusionParams: kZero must be in 1..4");
    if (cAlpha < 0.0) throw std::invalid_argument("FusionParams: cAlpha must be >= 0");
    if (lambda < 0.0) throw std::invalid_argument("FusionParams: lambda must be >= 0");
    if (sigmaH < 0.0) throw std::invalid_argument("FusionParams: sigmaH must be >= 0");
    if (rH < 0.0 || rH >= 1.0) throw std::invalid_argument("FusionParams: rH must be in [0, 1)");
    if (rL < 0.0 || rL >= 1.0) throw std::invalid_argument("FusionParams: rL must be in [0, 1)");
    if (maxIter == 0) throw std::invalid_argument("FusionParams: maxIter must be >= 1");
    if (tolRel <= 0.0) throw std::invalid_argument("FusionParams: tolRel must be > 0");
    auto checkRadius = [](const std::optional<double>& r, const char* name) {
        if (r && *r < 0.0)
            throw std::invalid_argument(std::string("FusionParams: ") + name + " must be >= 0");
    };
    checkRadius(epsH, "epsH");
    checkRadius(epsL, "epsL");
    checkRadius(etaH, "etaH");
    checkRadius(etaL, "etaL");
    if (betaPerBand)
        for (double b : *betaPerBand)
            if (b < 0.0) throw std::invalid_argument("FusionParams: beta must be >= 0");
}

void FusionProblem::validate() const {
    sensor.validate();
    params.validate();
    if (hrRef.width != sensor.hrWidth || hrRef.height != sensor.hrHeight)
        throw std::invalid_argument("FusionProblem: hrRef does not match sensor dimensions");
    if (lrRef.width != sensor.lrWidth() || lrRef.height != sensor.lrHeight())
        throw std::invalid_argument("FusionProblem: lrRef does not match sensor dimensions");
    if (lrTarget.width != sensor.lrWidth() || lrTarget.height != sensor.lrHeight())
        throw std::invalid_argument("FusionProblem: lrTarget does not match sensor dimensions");
    if (hrRef.bands != lrRef.bands || hrRef.bands != lrTarget.bands || hrRef.bands == 0)
        throw std::invalid_argument("FusionProblem: band counts must agree");
    if (weights.width != hrRef.width || weights.height != hrRef.height)
        throw std::invalid_argument("FusionProblem: weights do not match HR dimensions");
    for (const auto& plane : weights.planes)
        if (plane.size() != hrRef.pixelCount())
            throw std::invalid_argument("FusionProblem: weight plane size mismatch");
    if (params.betaPerBand && params.betaPerBand->size() != hrRef.bands)
        throw std::invalid_argument("FusionProblem: betaPerBand length must equal band count");
}

FusionProblem makeProblem(MultiBandImage hrRef, MultiBandImage lrRef, MultiBandImage lrTarget,
                          std::size_t window, FusionParams params) {
    FusionProblem p;
    p.sensor = SensorModel{window, hrRef.width, hrRef.height};
    p.weights = computeWeights(buildGuide(hrRef), params.delta, params.kZero);
    p.hrRef = std::move(hrRef);
    p.lrRef = std::move(lrRef);
    p.lrTarget = std::move(lrTarget);
    p.params = std::move(params);
    p.validate();
    return p;
}

FusionParams deriveParameters(const MultiBandImage& hrRef, const MultiBandImage& lrRef,
                              const SensorModel& sensor, FusionParams params) {
    params.validate();
    const double nH = static_cast<double>(hrRef.pixelCount());
    const double nL = static_cast<double>(lrRef.pixelCount());
    const double bands = static_cast<double>(hrRef.bands);

    if (!params.betaPerBand) {
        std::vector<double> beta(hrRef.bands);
        for (std::size_t b = 0; b < hrRef.bands; ++b) {
            double sumL = 0.0, sumH = 0.0;
            for (std::size_t i = 0; i < lrRef.pixelCount(); ++i)
                sumL += lrRef.values[b * lrRef.pixelCount() + i];
            for (std::size_t i = 0; i < hrRef.pixelCount(); ++i)
                sumH += hrRef.values[b * hrRef.pixelCount() + i];
            beta[b] = std::abs(sumL / nL - sumH / nH);
        }
        params.betaPerBand = std::move(beta);
    }
    if (!params.epsH)
        params.epsH = 0.98 * params.sigmaH * std::sqrt(nH * bands * (1.0 - params.rH));
    if (!params.epsL) {
        const MultiBandImage lrFromHr = blurDownsample(hrRef, sensor);
        params.epsL = l2Dist(lrRef.values, lrFromHr.values);
    }
    if (!params.etaH) params.etaH = 0.49 * nH * params.rH;
    if (!params.etaL) params.etaL = 0.49 * nL * params.rL;

    if (*params.epsH < 0.0 || *params.epsL < 0.0 || *params.etaH < 0.0 || *params.etaL < 0.0)
        throw std::invalid_argument("deriveParameters: negative radius");
    return params;
}

StepSizes computeStepSizes(const DirectionalWeights& weights) {
    const double w2 = weights.wMax * weights.wMax;
    StepSizes s;
    s.primal = {1.0 / (32.0 * w2 + 2.0), 1.0 / (32.0 * w2 + 1.0), 1.0, 1.0, 1.0};
    s.dual.fill(1.0 / 5.0);
    return s;
}

double updateAlpha(const MultiBandImage& hTilR, const DirectionalWeights& weights,
                   const MultiBandImage& lrRef, const MultiBandImage& lrTarget, double cAlpha,
                   QNorm q) {
    const GradientField wd = applyWeights(weights, diffForward(hTilR));
    double l1 = 0.0;
    for (std::size_t i = 0; i < lrRef.size(); ++i)
        l1 += std::abs(lrRef.values[i] - lrTarget.values[i]);
    return cAlpha * fieldQNorm(wd, q) * l1 / static_cast<double>(lrRef.pixelCount());
}

SolverState initState(const FusionProblem& problem) {
    SolverState st;
    st.hTilR = problem.hrRef;
    st.hTilT = upsampleReplicate(problem.lrTarget, problem.sensor);
    st.sHr = MultiBandImage(problem.hrRef.width, problem.hrRef.height, problem.hrRef.bands);
    st.sLr = MultiBandImage(problem.lrRef.width, problem.lrRef.height, problem.lrRef.bands);
    st.sLt = st.sLr;
    st.z1 = GradientField(problem.hrRef.width, problem.hrRef.height, problem.hrRef.bands);
    st.z2 = st.z1;
    st.z3 = st.z1;
    st.z4 = st.sHr;
    st.z5 = st.sLr;
    st.z6 = st.sLr;
    st.alphaCur = updateAlpha(st.hTilR, problem.weights, problem.lrRef, problem.lrTarget,
                              problem.params.cAlpha, problem.params.qNorm);
    return st;
}

void iterate(SolverState& state, const FusionProblem& problem, const StepSizes& steps) {
    if (!problem.params.complete())
        throw std::invalid_argument("iterate: problem parameters are not complete");
    const FusionParams& prm = problem.params;
    const DirectionalWeights& w = problem.weights;
    const std::size_t nH = problem.hrRef.pixelCount();
    const std::size_t nL = problem.lrRef.pixelCount();
    const std::size_t bands = problem.hrRef.bands;

    // Primal gradient steps (old duals throughout).
    GradientField zsum = state.z1;
    for (std::size_t i = 0; i < zsum.values.size(); ++i) zsum.values[i] += state.z3.values[i];
    MultiBandImage ur = diffAdjoint(applyWeights(w, zsum));
    axpy(ur.values, 1.0, state.z4.values);
    axpy(ur.values, 1.0, blurDownsampleAdjoint(state.z5, problem.sensor).values);

    GradientField zdif = state.z2;
    for (std::size_t i = 0; i < zdif.values.size(); ++i) zdif.values[i] -= state.z3.values[i];
    MultiBandImage ut = diffAdjoint(applyWeights(w, zdif));
    axpy(ut.values, 1.0, blurDownsampleAdjoint(state.z6, problem.sensor).values);

    MultiBandImage hrNext = state.hTilR;
    axpy(hrNext.values, -steps.primal[0], ur.values);
    MultiBandImage htNext = state.hTilT;
    axpy(htNext.values, -steps.primal[1], ut.values);

    // Per-band brightness hyperslab on the target estimate.
    for (std::size_t b = 0; b < bands; ++b) {
        double sumLt = 0.0;
        for (std::size_t i = 0; i < nL; ++i) sumLt += problem.lrTarget.values[b * nL + i];
        const double center = static_cast<double>(nH) * sumLt / static_cast<double>(nL);
        const double radius = static_cast<double>(nH) * (*prm.betaPerBand)[b];
        projectHyperslab(std::span<double>(htNext.values.data() + b * nH, nH), center, radius);
    }

    // Sparse estimates: gradient step then l1-ball projection.
    MultiBandImage sHrNext = state.sHr;
    axpy(sHrNext.values, -steps.primal[2], state.z4.values);
    projectL1Ball(std::span<double>(sHrNext.values), *prm.etaH);
    MultiBandImage sLrNext = state.sLr;
    axpy(sLrNext.values, -steps.primal[3], state.z5.values);
    projectL1Ball(std::span<double>(sLrNext.values), *prm.etaL);
    MultiBandImage sLtNext = state.sLt;
    axpy(sLtNext.values, -steps.primal[4], state.z6.values);
    projectL1Ball(std::span<double>(sLtNext.values), *prm.etaL);

    // Extrapolated points.
    MultiBandImage vR = state.hTilR, vT = state.hTilT;
    vR.values = extrapolate(hrNext.values, state.hTilR.values);
    vT.values = extrapolate(htNext.values, state.hTilT.values);
    const std::vector<double> wHr = extrapolate(sHrNext.values, state.sHr.values);
    const std::vector<double> wLr = extrapolate(sLrNext.values, state.sLr.values);
    const std::vector<double> wLt = extrapolate(sLtNext.values, state.sLt.values);

    // Adaptive edge-constraint radius from the new reference estimate.
    state.alphaCur =
        updateAlpha(hrNext, w, problem.lrRef, problem.lrTarget, prm.cAlpha, prm.qNorm);

    // Dual ascent.
    const GradientField fR = applyWeights(w, diffForward(vR));
    const GradientField fT = applyWeights(w, diffForward(vT));
    axpy(state.z1.values, steps.dual[0], fR.values);
    axpy(state.z2.values, steps.dual[1], fT.values);
    for (std::size_t i = 0; i < state.z3.values.size(); ++i)
        state.z3.values[i] += steps.dual[2] * (fR.values[i] - fT.values[i]);
    for (std::size_t i = 0; i < state.z4.values.size(); ++i)
        state.z4.values[i] += steps.dual[3] * (vR.values[i] + wHr[i]);
    const MultiBandImage sbVr = blurDownsample(vR, problem.sensor);
    const MultiBandImage sbVt = blurDownsample(vT, problem.sensor);
    for (std::size_t i = 0; i < state.z5.values.size(); ++i)
        state.z5.values[i] += steps.dual[4] * (sbVr.values[i] + wLr[i]);
    for (std::size_t i = 0; i < state.z6.values.size(); ++i)
        state.z6.values[i] += steps.dual[5] * (sbVt.values[i] + wLt[i]);

    // Conjugate proxes via the Moreau identity.
    std::vector<double> scratch(state.z1.values.size());
    proxConjugate(std::span<double>(state.z1.values), steps.dual[0], std::span<double>(scratch),
                  [&](std::span<double> vals, double t) {
                      proxMixedL12(perPixelView(vals, nH, bands), t);
                  });
    proxConjugate(std::span<double>(state.z2.values), steps.dual[1], std::span<double>(scratch),
                  [&](std::span<double> vals, double t) {
                      proxMixedL12(perPixelView(vals, nH, bands), t * prm.lambda);
                  });
    proxConjugate(std::span<double>(state.z3.values), steps.dual[2], std::span<double>(scratch),
                  [&](std::span<double> vals, double) {
                      switch (prm.qNorm) {
                          case QNorm::L1: projectL1Ball(vals, state.alphaCur); break;
                          case QNorm::L2: projectL2Ball(vals, nullptr, state.alphaCur); break;
                          case QNorm::L12:
                              projectMixedL12Ball(perPixelView(vals, nH, bands), state.alphaCur);
                              break;
                      }
                  });
    scratch.resize(state.z4.values.size());
    proxConjugate(std::span<double>(state.z4.values), steps.dual[3], std::span<double>(scratch),
                  [&](std::span<double> vals, double) {
                      projectL2Ball(vals, problem.hrRef.values.data(), *prm.epsH);
                  });
    scratch.resize(state.z5.values.size());
    proxConjugate(std::span<double>(state.z5.values), steps.dual[4], std::span<double>(scratch),
                  [&](std::span<double> vals, double) {
                      projectL2Ball(vals, problem.lrRef.values.data(), *prm.epsL);
                  });
    proxConjugate(std::span<double>(state.z6.values), steps.dual[5], std::span<double>(scratch),
                  [&](std::span<double> vals, double) {
                      projectL2Ball(vals, problem.lrTarget.values.data(), *prm.epsL);
                  });

    // Commit and record.
    IterationStats stats;
    stats.errHr = relChange(hrNext.values, state.hTilR.values);
    stats.errHt = relChange(htNext.values, state.hTilT.values);
    state.hTilR = std::move(hrNext);
    state.hTilT = std::move(htNext);
    state.sHr = std::move(sHrNext);
    state.sLr = std::move(sLrNext);
    state.sLt = std::move(sLtNext);
    state.iter += 1;
    stats.iter = state.iter;
    stats.gapLrRef =
        l2Dist(problem.lrRef.values, blurDownsample(state.hTilR, problem.sensor).values) -
        *prm.epsL;
    stats.gapLrTgt =
        l2Dist(problem.lrTarget.values, blurDownsample(state.hTilT, problem.sensor).values) -
        *prm.epsL;
    stats.alpha = state.alphaCur;
    state.residuals.push_back(stats);

    const bool ok = std::isfinite(state.alphaCur) && finiteAll(state.hTilR.values) &&
                    finiteAll(state.hTilT.values) && finiteAll(state.sHr.values) &&
                    finiteAll(state.sLr.values) && finiteAll(state.sLt.values) &&
                    finiteAll(state.z1.values) && finiteAll(state.z2.values) &&
                    finiteAll(state.z3.values) && finiteAll(state.z4.values) &&
                    finiteAll(state.z5.values) && finiteAll(state.z6.values);
    if (!ok)
        throw SolverDivergence(state.iter, "solver variable turned non-finite at iteration " +
                                               std::to_string(state.iter));
}

FusionResult solve(const FusionProblem& problem) {
    FusionProblem p = problem;
    p.validate();
    p.params = deriveParameters(p.hrRef, p.lrRef, p.sensor, p.params);
    const StepSizes steps = computeStepSizes(p.weights);
    SolverState state = initState(p);

    bool converged = false;
    for (std::size_t n = 0; n < p.params.maxIter; ++n) {
        iterate(state, p, steps);
        // The first sweep leaves the primal variables unchanged (duals start
        // at zero), which would satisfy the update-error test vacuously, so
        // the stopping rule applies from the second sweep on.
        if (n == 0) continue;
        const IterationStats& last = state.residuals.back();
        if (last.errHr < p.params.tolRel && last.errHt < p.params.tolRel &&
            last.gapLrRef <= 0.0 && last.gapLrTgt <= 0.0) {
            converged = true;
            break;
        }
    }

    FusionResult result;
    result.targetHr = std::move(state.hTilT);
    result.refHrDenoised = std::move(state.hTilR);
    result.sparseHr = std::move(state.sHr);
    result.sparseLr = std::move(state.sLr);
    result.sparseLt = std::move(state.sLt);
    result.iterations = state.iter;
    result.converged = converged;
    result.finalAlpha = state.alphaCur;
    result.residualTrace = std::move(state.residuals);
    return result;
}

DiagnosticRecord residuals(const SolverState& state, const FusionProblem& problem) {
    if (!problem.params.complete())
        throw std::invalid_argument("residuals: problem parameters are not complete");
    const FusionParams& prm = problem.params;
    DiagnosticRecord rec;
    if (!state.residuals.empty()) {
        rec.errHr = state.residuals.back().errHr;
        rec.errHt = state.residuals.back().errHt;
    }

    std::vector<double> hrSum(state.hTilR.values.size());
    for (std::size_t i = 0; i < hrSum.size(); ++i)
        hrSum[i] = state.hTilR.values[i] + state.sHr.values[i];
    rec.gapHrFidelity = l2Dist(problem.hrRef.values, hrSum) - *prm.epsH;

    const MultiBandImage sbHr = blurDownsample(state.hTilR, problem.sensor);
    const MultiBandImage sbHt = blurDownsample(state.hTilT, problem.sensor);
    std::vector<double> lrSum(sbHr.values.size());
    for (std::size_t i = 0; i < lrSum.size(); ++i)
        lrSum[i] = sbHr.values[i] + state.sLr.values[i];
    rec.gapLrRefFidelity = l2Dist(problem.lrRef.values, lrSum) - *prm.epsL;
    for (std::size_t i = 0; i < lrSum.size(); ++i)
        lrSum[i] = sbHt.values[i] + state.sLt.values[i];
    rec.gapLrTgtFidelity = l2Dist(problem.lrTarget.values, lrSum) - *prm.epsL;
    rec.gapLrRefStop = l2Dist(problem.lrRef.values, sbHr.values) - *prm.epsL;
    rec.gapLrTgtStop = l2Dist(problem.lrTarget.values, sbHt.values) - *prm.epsL;

    GradientField dDiff = diffForward(state.hTilR);
    const GradientField dT = diffForward(state.hTilT);
    for (std::size_t i = 0; i < dDiff.values.size(); ++i) dDiff.values[i] -= dT.values[i];
    rec.gapEdge = fieldQNorm(applyWeights(problem.weights, dDiff), prm.qNorm) - state.alphaCur;

    const std::size_t nH = problem.hrRef.pixelCount();
    const std::size_t nL = problem.lrRef.pixelCount();
    rec.gapSlabMax = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < problem.hrRef.bands; ++b) {
        double meanLt = 0.0, meanHt = 0.0;
        for (std::size_t i = 0; i < nL; ++i) meanLt += problem.lrTarget.values[b * nL + i];
        for (std::size_t i = 0; i < nH; ++i) meanHt += state.hTilT.values[b * nH + i];
        meanLt /= static_cast<double>(nL);
        meanHt /= static_cast<double>(nH);
        const double gap = std::abs(meanLt - meanHt) - (*prm.betaPerBand)[b];
        rec.gapSlabMax = std::max(rec.gapSlabMax, gap);
    }

    auto l1Norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    };
    rec.l1UsedHr = l1Norm(state.sHr.values);
    rec.l1UsedLr = l1Norm(state.sLr.values);
    rec.l1UsedLt = l1Norm(state.sLt.values);
    rec.gapL1Hr = rec.l1UsedHr - *prm.etaH;
    rec.gapL1Lr = rec.l1UsedLr - *prm.etaL;
    rec.gapL1Lt = rec.l1UsedLt - *prm.etaL;
    rec.alpha = state.alphaCur;
    return rec;
}

std::string traceCsv(const std::vector<IterationStats>& trace) {
    std::string out = "iter,err_hr,err_ht,gap_lr_ref,gap_lr_tgt,alpha\n";
    char line[256];
    for (const IterationStats& s : trace) {
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.iter, s.errHr,
                      s.errHt, s.gapLrRef, s.gapLrTgt, s.alpha);
        out += line;
    }
    return out;
}

}  // namespace tsstf
