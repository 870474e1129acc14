#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsstf/guide.hpp"
#include "tsstf/image.hpp"

namespace tsstf {

enum class QNorm { L1, L2, L12 };

std::string qNormName(QNorm q);
QNorm qNormFromName(const std::string& name);

/// Scalar knobs of the fusion problem. Fields left unset are completed by
/// deriveParameters from the observed images:
///   beta_b  = |mean([l_r]_b) - mean([h_r]_b)|
///   eps_h   = 0.98 * sigma_h * sqrt(N_h * B * (1 - r_h))
///   eps_l   = ||l_r - SB h_r||_2
///   eta_h   = 0.49 * N_h * r_h
///   eta_l   = 0.49 * N_l * r_l
struct FusionParams {
    double delta = 0.1;
    int kZero = 2;
    double cAlpha = 5.0;
    double lambda = 1.0;
    QNorm qNorm = QNorm::L12;
    double sigmaH = 0.0;
    double rH = 0.0;
    double rL = 0.0;
    std::optional<std::vector<double>> betaPerBand;
    std::optional<double> epsH;
    std::optional<double> epsL;
    std::optional<double> etaH;
    std::optional<double> etaL;
    std::size_t maxIter = 10000;
    double tolRel = 1e-5;

    bool complete() const {
        return betaPerBand && epsH && epsL && etaH && etaL;
    }
    void validate() const;
};

/// The full input bundle for one solve. weights must be built from hrRef
/// (makeProblem does this) and stay fixed across iterations.
struct FusionProblem {
    MultiBandImage hrRef;
    MultiBandImage lrRef;
    MultiBandImage lrTarget;
    SensorModel sensor;
    FusionParams params;
    DirectionalWeights weights;

    void validate() const;
};

/// Builds the guide image and weights from hrRef and assembles the problem.
FusionProblem makeProblem(MultiBandImage hrRef, MultiBandImage lrRef, MultiBandImage lrTarget,
                          std::size_t window, FusionParams params);

/// Completes every unset parameter with its formula; explicit values win.
FusionParams deriveParameters(const MultiBandImage& hrRef, const MultiBandImage& lrRef,
                              const SensorModel& sensor, FusionParams params);

/// Diagonal-preconditioned stepsizes: one per primal variable, one per dual.
struct StepSizes {
    std::array<double, 5> primal{};
    std::array<double, 6> dual{};
};

/// Closed forms from the operator-norm bounds ||D||_op^2 <= 16,
/// ||SB||_op^2 <= 1: primal = {1/(32w^2+2), 1/(32w^2+1), 1, 1, 1} with
/// w = weights.wMax, dual = 1/5 throughout.
StepSizes computeStepSizes(const DirectionalWeights& weights);

/// Adaptive edge-constraint radius:
///   cAlpha * ||W D hTilR||_q * ||l_r - l_t||_1 / N_l.
double updateAlpha(const MultiBandImage& hTilR, const DirectionalWeights& weights,
                   const MultiBandImage& lrRef, const MultiBandImage& lrTarget, double cAlpha,
                   QNorm q);

/// One row of the residual trace (also the CSV schema): update errors for
/// the two HR estimates, LR fidelity gaps ||l - SB hTil||_2 - eps_l, and the
/// current adaptive radius.
struct IterationStats {
    std::size_t iter = 0;
    double errHr = 0.0;
    double errHt = 0.0;
    double gapLrRef = 0.0;
    double gapLrTgt = 0.0;
    double alpha = 0.0;
};

/// All primal and dual variables of the splitting scheme plus bookkeeping.
struct SolverState {
    MultiBandImage hTilR, hTilT;   // HR estimates
    MultiBandImage sHr;            // sparse estimate on h_r (HR-sized)
    MultiBandImage sLr, sLt;       // sparse estimates on l_r, l_t (LR-sized)
    GradientField z1, z2, z3;
    MultiBandImage z4;             // HR-sized dual
    MultiBandImage z5, z6;         // LR-sized duals
    double alphaCur = 0.0;
    std::size_t iter = 0;
    std::vector<IterationStats> residuals;
};

/// Warm start: hTilR = h_r, hTilT = replicated l_t, sparse estimates and
/// duals zero, alpha from the initial hTilR.
SolverState initState(const FusionProblem& problem);

/// Thrown when any solver variable turns non-finite.
struct SolverDivergence : std::runtime_error {
    std::size_t iteration;
    SolverDivergence(std::size_t it, const std::string& what)
        : std::runtime_error(what), iteration(it) {}
};

/// One full splitting sweep: primal gradient steps and projections,
/// extrapolation, alpha refresh, dual ascent, conjugate proxes. Requires
/// problem.params.complete(). Appends one IterationStats row.
void iterate(SolverState& state, const FusionProblem& problem, const StepSizes& steps);

struct FusionResult {
    MultiBandImage targetHr;
    MultiBandImage refHrDenoised;
    MultiBandImage sparseHr, sparseLr, sparseLt;
    std::size_t iterations = 0;
    bool converged = false;
    double finalAlpha = 0.0;
    std::vector<IterationStats> residualTrace;
};

/// Full pipeline: derive parameters, stepsizes, init, then iterate until the
/// stopping rule (update errors below tolRel and both LR fidelity gaps
/// closed) or maxIter.
FusionResult solve(const FusionProblem& problem);

/// Constraint and stopping diagnostics for one state. Gap fields are
/// (attained value - bound): feasible means <= 0.
struct DiagnosticRecord {
    double errHr = 0.0, errHt = 0.0;     // last update errors, 0 before any sweep
    double gapHrFidelity = 0.0;          // ||h_r - (hTilR + sHr)||_2 - eps_h
    double gapLrRefFidelity = 0.0;       // ||l_r - (SB hTilR + sLr)||_2 - eps_l
    double gapLrTgtFidelity = 0.0;       // ||l_t - (SB hTilT + sLt)||_2 - eps_l
    double gapLrRefStop = 0.0;           // ||l_r - SB hTilR||_2 - eps_l
    double gapLrTgtStop = 0.0;           // ||l_t - SB hTilT||_2 - eps_l
    double gapEdge = 0.0;                // ||W(D hTilR - D hTilT)||_q - alpha
    double gapSlabMax = 0.0;             // max_b |mean gap| - beta_b
    double l1UsedHr = 0.0, l1UsedLr = 0.0, l1UsedLt = 0.0;
    double gapL1Hr = 0.0, gapL1Lr = 0.0, gapL1Lt = 0.0;
    double alpha = 0.0;
};

DiagnosticRecord residuals(const SolverState& state, const FusionProblem& problem);

/// Residual trace as CSV: header iter,err_hr,err_ht,gap_lr_ref,gap_lr_tgt,alpha.
std::string traceCsv(const std::vector<IterationStats>& trace);

}  // namespace tsstf
