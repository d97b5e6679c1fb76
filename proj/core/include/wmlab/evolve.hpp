#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wmlab/dimension.hpp"
#include "wmlab/error.hpp"
#include "wmlab/profiles.hpp"

namespace wmlab {

/// d_rho P(tau, 0) <= 0 or non-finite: h = 1 / d_rho P(tau, 0) is undefined.
class GaugeBreakdown : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

struct GridSpec {
    double rho_max = 13.5;
    int n_points = 2049;  ///< including rho = 0
    double dissipation_eps = 0.1;
    double rk_tol = 1e-10;
    double cfl = 0.5;

    double spacing() const { return rho_max / (n_points - 1); }
    double rho(int i) const { return spacing() * i; }
    void validate() const;
};

/// rho_max = 2 * expected_c (the blowup rate f_n'(0) of the expected endstate).
GridSpec default_grid(double expected_c);

struct EvolutionState {
    int d = 3;
    double tau = 0.0;
    double t = 0.0;
    double h = 0.0;
    std::vector<double> V;
    std::vector<double> P;
};

struct TraceSample {
    double tau = 0.0;
    double h = 0.0;
    double dV0 = 0.0;
    double dP0 = 0.0;
    double t = 0.0;
};

struct RunTrace {
    std::vector<TraceSample> samples;
    /// The run ended because d_rho P(tau, 0) reached zero (h without bound).
    bool ends_in_breakdown = false;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    const TraceSample& back() const { return samples.back(); }
};

struct Blowup {
    double h_limit = 0.0;
    int profile_n = 0;
};
struct Dispersion {};
struct Undecided {};
using Classification = std::variant<Blowup, Dispersion, Undecided>;

std::string to_string(const Classification& c);
inline bool is_blowup(const Classification& c) { return std::holds_alternative<Blowup>(c); }
inline bool is_dispersion(const Classification& c) { return std::holds_alternative<Dispersion>(c); }

/// Dispersion: h > H_high for a window of length dispersion_window, or the
/// trace ends in a gauge breakdown after h passed H_high (h escaping to
/// infinity in finite tau). Blowup: over the trailing plateau_window, h stays
/// within plateau_band of its mean, that mean lies within match_band of a
/// stable endstate and |dV0 - 1| < gauge_band.
///
/// Blowup rate f_n'(0) of a self-similar endstate; only stable endstates (no
/// unstable mode besides the gauge mode) end a run as Blowup.
struct KnownEndstate {
    int n = 0;
    double c = 0.0;
    bool stable = false;
};

struct ClassifierSettings {
    std::vector<KnownEndstate> endstates;
    double dispersion_factor = 10.0;  ///< H_high = factor * max c
    double dispersion_window = 1.0;
    double plateau_window = 2.0;
    double plateau_band = 0.10;  ///< |h - mean| / mean over the plateau window
    double match_band = 0.20;    ///< |mean - c| / c
    double gauge_band = 0.05;    ///< |dV0 - 1| on the plateau window

    double h_high() const;
};

/// f_0 and f_1 of dimension d (f_1 from the shooting solver).
std::vector<KnownEndstate> known_endstates(Dimension d);
std::vector<KnownEndstate> known_endstates(std::span<const SelfSimilarProfile> profiles);

Classification classify(const RunTrace& trace, const ClassifierSettings& settings);
Classification classify(const RunTrace& trace, std::span<const SelfSimilarProfile> known_profiles);

/// V(0, rho) = P(0, rho) = A rho / cosh(rho).
EvolutionState init_family(Dimension d, double amplitude, const GridSpec& grid);
/// V(0, rho) = f(rho), P(0, rho) = rho f'(rho), continued past rho = 1 by
/// integrating the profile equation.
EvolutionState init_from_profile(const SelfSimilarProfile& p, const GridSpec& grid);

/// Fourth-order derivative at rho = 0 of an odd grid function.
double origin_derivative(std::span<const double> u, double spacing);

/// Time derivatives (dV, dP) of the semi-discrete system; returns h.
/// Throws GaugeBreakdown when d_rho P(tau, 0) <= 0.
double rhs(const EvolutionState& state, const GridSpec& grid, std::span<double> dV, std::span<double> dP);

struct Snapshot {
    double tau = 0.0;
    std::vector<double> V;
    std::vector<double> P;
};

struct RunOptions {
    double tau_end = 30.0;
    double sample_every = 0.01;
    bool stop_on_classification = true;
    ClassifierSettings classifier;
    std::vector<double> snapshot_taus;
};

struct RunResult {
    RunTrace trace;
    Classification classification = Undecided{};
    EvolutionState final_state;
    std::vector<Snapshot> snapshots;
    std::string termination;  ///< "tau_end", "classified", "gauge breakdown", "integrator failure"
    std::size_t steps = 0;
    std::size_t rhs_evaluations = 0;
};

RunResult run(EvolutionState state, const GridSpec& grid, const RunOptions& options);

struct GaugeLawFit {
    double c = 0.0;             ///< dV0 = 1 + c exp(-tau)
    double max_residual = 0.0;  ///< over the fitted samples
    std::size_t samples = 0;
};

/// Least-squares fit of dV0 - 1 = c exp(-tau) over samples with tau >= tau_min.
GaugeLawFit fit_gauge_law(const RunTrace& trace, double tau_min);

}  // namespace wmlab
