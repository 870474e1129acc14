#include "reference_iteration.hpp"

#include <cmath>

#include "oracles.hpp"

namespace oracle {

namespace {

std::vector<double> scaleVec(const std::vector<double>& v, double a) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = a * v[i];
    return out;
}

std::vector<double> addVec(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

std::vector<double> subVec(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

std::vector<double> diagMul(const std::vector<double>& diag, const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = diag[i] * v[i];
    return out;
}

// Per-pixel group indices of a gradient-domain vector: channel c of pixel g
// lives at c * (W*H) + g.
double groupNorm(const std::vector<double>& v, std::size_t pixels, std::size_t chans,
                 std::size_t g) {
    double sq = 0.0;
    for (std::size_t c = 0; c < chans; ++c) {
        const double x = v[c * pixels + g];
        sq += x * x;
    }
    return std::sqrt(sq);
}

std::vector<double> groupSoftThreshold(const std::vector<double>& v, std::size_t pixels,
                                       std::size_t chans, double gamma) {
    std::vector<double> out(v.size());
    for (std::size_t g = 0; g < pixels; ++g) {
        const double n = groupNorm(v, pixels, chans, g);
        const double f = n > gamma ? 1.0 - gamma / n : 0.0;
        for (std::size_t c = 0; c < chans; ++c) out[c * pixels + g] = f * v[c * pixels + g];
    }
    return out;
}

std::vector<double> hyperslabProject(std::vector<double> x, double center, double radius) {
    double sum = 0.0;
    for (double v : x) sum += v;
    double target = sum;
    if (sum < center - radius) target = center - radius;
    if (sum > center + radius) target = center + radius;
    const double shift = (target - sum) / static_cast<double>(x.size());
    for (double& v : x) v += shift;
    return x;
}

std::vector<double> l2BallProject(const std::vector<double>& x, const std::vector<double>& c,
                                  double radius) {
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - c[i];
        sq += d * d;
    }
    const double dist = std::sqrt(sq);
    if (dist <= radius) return x;
    std::vector<double> out(x.size());
    const double f = dist > 0.0 ? radius / dist : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = c[i] + f * (x[i] - c[i]);
    return out;
}

std::vector<double> qBallProject(const std::vector<double>& x, double radius, int qNorm,
                                 std::size_t pixels, std::size_t chans) {
    if (qNorm == 0) return l1BallProjectBisect(x, radius);
    if (qNorm == 1) return l2BallProject(x, std::vector<double>(x.size(), 0.0), radius);
    // Mixed norm: project the vector of group norms onto the l1 ball, then
    // rescale the groups.
    std::vector<double> norms(pixels);
    double total = 0.0;
    for (std::size_t g = 0; g < pixels; ++g) {
        norms[g] = groupNorm(x, pixels, chans, g);
        total += norms[g];
    }
    if (total <= radius) return x;
    const std::vector<double> target = l1BallProjectBisect(norms, radius);
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t g = 0; g < pixels; ++g) {
        if (norms[g] == 0.0) continue;
        const double f = target[g] / norms[g];
        for (std::size_t c = 0; c < chans; ++c) out[c * pixels + g] = f * x[c * pixels + g];
    }
    return out;
}

double qNormValue(const std::vector<double>& v, int qNorm, std::size_t pixels,
                  std::size_t chans) {
    if (qNorm == 0) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    if (qNorm == 1) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    double s = 0.0;
    for (std::size_t g = 0; g < pixels; ++g) s += groupNorm(v, pixels, chans, g);
    return s;
}

}  // namespace

void referenceIterate(RefState& st, const RefProblem& p, const RefSteps& steps) {
    const std::size_t nH = p.width * p.height;
    const std::size_t nL = (p.width / p.window) * (p.height / p.window);
    const std::size_t chans = 4 * p.bands;

    // u_r = D^T W^T z1 + D^T W^T z3 + z4 + (SB)^T z5
    std::vector<double> ur = p.d.tmul(diagMul(p.wDiag, st.z1));
    ur = addVec(ur, p.d.tmul(diagMul(p.wDiag, st.z3)));
    ur = addVec(ur, st.z4);
    ur = addVec(ur, p.sb.tmul(st.z5));
    // u_t = D^T W^T z2 - D^T W^T z3 + (SB)^T z6
    std::vector<double> ut = p.d.tmul(diagMul(p.wDiag, st.z2));
    ut = subVec(ut, p.d.tmul(diagMul(p.wDiag, st.z3)));
    ut = addVec(ut, p.sb.tmul(st.z6));

    const std::vector<double> hrPrev = st.hr;
    const std::vector<double> htPrev = st.ht;
    const std::vector<double> sHrPrev = st.sHr;
    const std::vector<double> sLrPrev = st.sLr;
    const std::vector<double> sLtPrev = st.sLt;

    std::vector<double> hrNext = subVec(st.hr, scaleVec(ur, steps.g11));
    std::vector<double> htNext = subVec(st.ht, scaleVec(ut, steps.g12));

    for (std::size_t b = 0; b < p.bands; ++b) {
        double sumLt = 0.0;
        for (std::size_t i = 0; i < nL; ++i) sumLt += p.lrTgt[b * nL + i];
        const double center = static_cast<double>(nH) * sumLt / static_cast<double>(nL);
        std::vector<double> bandVals(htNext.begin() + b * nH, htNext.begin() + (b + 1) * nH);
        bandVals = hyperslabProject(bandVals, center, static_cast<double>(nH) * p.beta[b]);
        std::copy(bandVals.begin(), bandVals.end(), htNext.begin() + b * nH);
    }

    std::vector<double> sHrNext =
        l1BallProjectBisect(subVec(st.sHr, scaleVec(st.z4, steps.g13)), p.etaH);
    std::vector<double> sLrNext =
        l1BallProjectBisect(subVec(st.sLr, scaleVec(st.z5, steps.g14)), p.etaL);
    std::vector<double> sLtNext =
        l1BallProjectBisect(subVec(st.sLt, scaleVec(st.z6, steps.g15)), p.etaL);

    const std::vector<double> vR = subVec(scaleVec(hrNext, 2.0), hrPrev);
    const std::vector<double> vT = subVec(scaleVec(htNext, 2.0), htPrev);
    const std::vector<double> wHr = subVec(scaleVec(sHrNext, 2.0), sHrPrev);
    const std::vector<double> wLr = subVec(scaleVec(sLrNext, 2.0), sLrPrev);
    const std::vector<double> wLt = subVec(scaleVec(sLtNext, 2.0), sLtPrev);

    double l1rt = 0.0;
    for (std::size_t i = 0; i < p.lrRef.size(); ++i) l1rt += std::abs(p.lrRef[i] - p.lrTgt[i]);
    st.alpha = p.cAlpha * qNormValue(diagMul(p.wDiag, p.d.mul(hrNext)), p.qNorm, nH, chans) *
               l1rt / static_cast<double>(nL);

    const std::vector<double> wdVr = diagMul(p.wDiag, p.d.mul(vR));
    const std::vector<double> wdVt = diagMul(p.wDiag, p.d.mul(vT));
    st.z1 = addVec(st.z1, scaleVec(wdVr, steps.g2));
    st.z2 = addVec(st.z2, scaleVec(wdVt, steps.g2));
    st.z3 = addVec(st.z3, scaleVec(subVec(wdVr, wdVt), steps.g2));
    st.z4 = addVec(st.z4, scaleVec(addVec(vR, wHr), steps.g2));
    st.z5 = addVec(st.z5, scaleVec(addVec(p.sb.mul(vR), wLr), steps.g2));
    st.z6 = addVec(st.z6, scaleVec(addVec(p.sb.mul(vT), wLt), steps.g2));

    // Conjugate proxes: z <- z - g2 * prox_or_proj(z / g2).
    st.z1 = subVec(st.z1, scaleVec(groupSoftThreshold(scaleVec(st.z1, 1.0 / steps.g2), nH, chans,
                                                      1.0 / steps.g2),
                                   steps.g2));
    st.z2 = subVec(st.z2, scaleVec(groupSoftThreshold(scaleVec(st.z2, 1.0 / steps.g2), nH, chans,
                                                      p.lambda / steps.g2),
                                   steps.g2));
    st.z3 = subVec(st.z3, scaleVec(qBallProject(scaleVec(st.z3, 1.0 / steps.g2), st.alpha,
                                                p.qNorm, nH, chans),
                                   steps.g2));
    st.z4 = subVec(st.z4, scaleVec(l2BallProject(scaleVec(st.z4, 1.0 / steps.g2), p.hr, p.epsH),
                                   steps.g2));
    st.z5 = subVec(st.z5, scaleVec(l2BallProject(scaleVec(st.z5, 1.0 / steps.g2), p.lrRef,
                                                 p.epsL),
                                   steps.g2));
    st.z6 = subVec(st.z6, scaleVec(l2BallProject(scaleVec(st.z6, 1.0 / steps.g2), p.lrTgt,
                                                 p.epsL),
                                   steps.g2));

    st.hr = hrNext;
    st.ht = htNext;
    st.sHr = sHrNext;
    st.sLr = sLrNext;
    st.sLt = sLtNext;
}

}  // namespace oracle
