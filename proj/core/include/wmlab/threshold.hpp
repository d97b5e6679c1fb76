#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "wmlab/dimension.hpp"
#include "wmlab/evolve.hpp"
#include "wmlab/spectrum.hpp"

namespace wmlab {

// ---------------------------------------------------------------------------
// Amplitude bisection
// ---------------------------------------------------------------------------

struct BisectionStep {
    double amplitude = 0.0;
    Classification classification = Undecided{};
    double width = 0.0;            ///< bracket width after this step
    double plateau_length = 0.0;   ///< tau-length of the h ~ f_1'(0) plateau
    double tau_reached = 0.0;
};

struct ThresholdResult {
    int d = 3;
    double A_lo = 0.0;
    double A_hi = 0.0;
    double A_star = 0.0;
    int n_iters = 0;
    bool lo_disperses = true;  ///< orientation of the bracket
    RunTrace sub_trace;        ///< final dispersing run
    RunTrace super_trace;      ///< final blowup run
    std::vector<BisectionStep> history;
};

struct BisectionOptions {
    GridSpec grid;
    double rel_tol = 1e-13;
    double tau_end = 40.0;
    double sample_every = 0.01;
    ClassifierSettings classifier;  ///< endstates default to known_endstates(d)
    double plateau_c = 0.0;         ///< 0: the unstable endstate of the classifier
    double plateau_band = 0.2;      ///< for the plateau lengths recorded in the history
    int max_iterations = 200;
    std::function<void(const BisectionStep&)> progress;
};

ThresholdResult bisect_amplitude(Dimension d, std::pair<double, double> bracket, const BisectionOptions& options);

/// Longest tau-window over which |h - c| <= band * c.
double plateau_length(const RunTrace& trace, double c, double band = 0.01);

/// Slope of plateau length against -ln(bracket width) over the bisection
/// history (least squares over steps with a nonzero plateau).
double plateau_scaling_slope(const std::vector<BisectionStep>& history);

// ---------------------------------------------------------------------------
// Similarity-time observables and mode fits
// ---------------------------------------------------------------------------

struct SimilaritySample {
    double s = 0.0;
    double dU0 = 0.0;
    double tau = 0.0;
};

/// s = -ln(T - t), dU0 = exp(tau - s) dV0; samples with t >= T are dropped.
std::vector<SimilaritySample> reconstruct_similarity(const RunTrace& trace, double T);

/// t + dt/dtau at the end of the longest window where dt/dtau = exp(-tau) h < rel_rate |t|.
double estimate_T(const RunTrace& trace, double rel_rate = 1e-4);

/// Shared estimate for a marginal pair, whose t(tau) agree until they
/// separate: estimate_T of the trace that gets closer to T (smaller final
/// dt/dtau). Throws ConvergenceError if neither trace has a window.
double estimate_T_pair(const RunTrace& a, const RunTrace& b, double rel_rate = 1e-4);

struct LambdaSet {
    double l1 = 0.0;
    double l0 = 1.0;
    double lm1 = 0.0;
};

struct FitWindow {
    double s_min = 0.0;
    double s_max = 0.0;
};

struct FitResult {
    double T_star = 0.0;
    double a1 = 0.0;
    double a0 = 0.0;
    double a_minus1 = 0.0;
    /// Coefficients of exp(k lm1 s) for k = 2, 3, ... when harmonics of the
    /// stable mode are included; empty for the plain three-mode expansion.
    std::vector<double> stable_harmonics;
    LambdaSet lambdas;
    double f1p0 = 0.0;
    double residual = 0.0;   ///< root mean square over the window
    FitWindow window;
    double condition = 0.0;  ///< of the column-scaled design matrix
    std::size_t samples = 0;

    double model(double s) const;
};

/// First contiguous stretch where |dU0 - f1p0| < band * f1p0.
FitWindow default_fit_window(const std::vector<SimilaritySample>& series, double f1p0, double band = 0.5);

/// Linear least squares of dU0 - f1p0 on exp(l1 s), exp(l0 s), exp(lm1 s)
/// and, for harmonics > 1, exp(k lm1 s) up to k = harmonics.
/// Throws ValidationError for an empty window and ConvergenceError when the
/// design matrix is ill conditioned.
FitResult fit_modes(const std::vector<SimilaritySample>& series, const LambdaSet& lambdas, double f1p0, double T,
                    const FitWindow& window, double max_condition = 1e12, int harmonics = 1);

struct RefineOptions {
    double band = 0.5;  ///< default window band (see default_fit_window)
    /// Fit window as a tau-range; chosen from the band at the bracket midpoint when empty.
    std::optional<std::pair<double, double>> tau_window;
    int max_iterations = 200;
    int harmonics = 1;  ///< see fit_modes
    /// Starting point of the T search; estimate_T(trace) when empty.
    std::optional<double> T_estimate;
};

/// Bisection on T for a0(T) = 0 inside T_bracket.
FitResult refine_T(const RunTrace& trace, const LambdaSet& lambdas, double f1p0, std::pair<double, double> T_bracket,
                   const RefineOptions& options = {});

/// Bracket for refine_T around T_est: scans T - max(t in window) geometrically.
std::pair<double, double> bracket_T(const RunTrace& trace, const LambdaSet& lambdas, double f1p0, double T_est,
                                    const RefineOptions& options = {});

/// estimate_T, bracket_T and refine_T in sequence.
FitResult fit_trace(const RunTrace& trace, const LambdaSet& lambdas, double f1p0, const RefineOptions& options = {});

struct FreeRateOptions {
    /// Decay window: from the first s where |mean dU0 - f1p0| < band f1p0
    /// until the pair separates by more than together * f1p0.
    double band = 0.5;
    double together = 1e-2;
    /// Growth window: floor f1p0 < |sub - super| < ceiling f1p0.
    double separation_floor = 1e-5;
    double separation_ceiling = 5e-2;
    /// Powers of the stable mode in the decay fit.
    int harmonics = 3;
    std::pair<double, double> decay_search{-3.0, -0.02};
};

/// Rates measured from a marginal pair without spectral input. lambda_-1 and
/// T come from the mean of the pair fitted with exp(k lambda s),
/// k = 1..harmonics, plus the gauge mode; lambda_1 from the exponential growth
/// of dU0(sub) - dU0(super) at that T. T_init only places the windows.
struct FreeRateFit {
    double lambda1 = 0.0;
    double lambda_minus1 = 0.0;
    double T = 0.0;
    double growth_residual = 0.0;  ///< rms of the log-linear regression
    double decay_residual = 0.0;   ///< rms of the decay fit
    std::size_t growth_samples = 0;
    std::size_t decay_samples = 0;
    FitWindow growth_window;
    FitWindow decay_window;
};

FreeRateFit fit_free_rates(const RunTrace& sub, const RunTrace& super, double f1p0, double T_init,
                           const FreeRateOptions& options = {});

/// Average of the two blowup times, for plotting a marginal pair against one s.
double average_T(const FitResult& sub, const FitResult& super);

/// (lambda_1, 1, lambda_-1) from the spectrum of f_1: the eigenvalues just
/// above and just below the gauge mode. Throws ValidationError if either is missing.
LambdaSet lambda_set(const SpectrumReport& spectrum);

}  // namespace wmlab
