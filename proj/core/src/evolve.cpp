#include "wmlab/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wmlab/dopri5.hpp"

namespace wmlab {

namespace {

constexpr int kGhosts = 3;

// Semi-discrete right-hand side with preallocated ghost-padded copies of V, P.
class Discretization {
public:
    Discretization(int d, const GridSpec& grid)
        : d_(d),
          n_(grid.n_points),
          dx_(grid.spacing()),
          eps_(grid.dissipation_eps),
          vg_(static_cast<std::size_t>(grid.n_points + kGhosts)),
          pg_(static_cast<std::size_t>(grid.n_points + kGhosts)) {}

    // Returns h, or NaN when the gauge is undefined (outputs untouched).
    double operator()(const double* V, const double* P, double* dV, double* dP) {
        const int N = n_ - 1;
        const double dP0 = (8.0 * P[1] - P[2]) / (6.0 * dx_);
        if (!(dP0 > 0.0) || !std::isfinite(dP0)) return std::numeric_limits<double>::quiet_NaN();
        const double h = 1.0 / dP0;

        double* v = vg_.data() + kGhosts;
        double* p = pg_.data() + kGhosts;
        std::copy(V, V + n_, v);
        std::copy(P, P + n_, p);
        for (int k = 1; k <= kGhosts; ++k) {
            v[-k] = -v[k];
            p[-k] = -p[k];
        }

        const double dm1 = d_ - 1.0;
        const double i12 = 1.0 / (12.0 * dx_);
        const double i12s = 1.0 / (12.0 * dx_ * dx_);
        dV[0] = 0.0;
        dP[0] = 0.0;
        for (int i = 1; i <= N; ++i) {
            double v1, v2, p1;
            if (i <= N - 2) {
                v1 = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) * i12;
                p1 = (p[i - 2] - 8.0 * p[i - 1] + 8.0 * p[i + 1] - p[i + 2]) * i12;
                v2 = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) * i12s;
            } else if (i == N - 1) {
                v1 = (-v[i - 3] + 6.0 * v[i - 2] - 18.0 * v[i - 1] + 10.0 * v[i] + 3.0 * v[i + 1]) * i12;
                p1 = (-p[i - 3] + 6.0 * p[i - 2] - 18.0 * p[i - 1] + 10.0 * p[i] + 3.0 * p[i + 1]) * i12;
                v2 = (10.0 * v[i + 1] - 15.0 * v[i] - 4.0 * v[i - 1] + 14.0 * v[i - 2] - 6.0 * v[i - 3] + v[i - 4]) * i12s;
            } else {
                v1 = (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4]) * i12;
                p1 = (25.0 * p[i] - 48.0 * p[i - 1] + 36.0 * p[i - 2] - 16.0 * p[i - 3] + 3.0 * p[i - 4]) * i12;
                v2 = (45.0 * v[i] - 154.0 * v[i - 1] + 214.0 * v[i - 2] - 156.0 * v[i - 3] + 61.0 * v[i - 4] -
                      10.0 * v[i - 5]) *
                     i12s;
            }
            const double rho = dx_ * i;
            dV[i] = h * p[i] - rho * v1;
            dP[i] = h * (v2 + dm1 / rho * v1 - 0.5 * dm1 / (rho * rho) * std::sin(2.0 * v[i])) - p[i] - rho * p1;
        }
        if (eps_ > 0.0) {
            const double s = eps_ / (64.0 * dx_);
            for (int i = 1; i <= N - 3; ++i) {
                dV[i] += s * (v[i - 3] - 6.0 * v[i - 2] + 15.0 * v[i - 1] - 20.0 * v[i] + 15.0 * v[i + 1] -
                              6.0 * v[i + 2] + v[i + 3]);
                dP[i] += s * (p[i - 3] - 6.0 * p[i - 2] + 15.0 * p[i - 1] - 20.0 * p[i] + 15.0 * p[i + 1] -
                              6.0 * p[i + 2] + p[i + 3]);
            }
        }
        return h;
    }

private:
    int d_;
    int n_;
    double dx_;
    double eps_;
    std::vector<double> vg_, pg_;
};

std::vector<double> pack(const EvolutionState& s) {
    std::vector<double> y;
    y.reserve(2 * s.V.size() + 1);
    y.insert(y.end(), s.V.begin(), s.V.end());
    y.insert(y.end(), s.P.begin(), s.P.end());
    y.push_back(s.t);
    return y;
}

void check_state(const EvolutionState& s, const GridSpec& grid) {
    const auto m = static_cast<std::size_t>(grid.n_points);
    if (s.V.size() != m || s.P.size() != m) throw ValidationError("state size does not match the grid");
    Dimension{s.d};
}

// Trailing window [tau_end - width, tau_end]; empty optional if the trace is shorter.
std::size_t window_start(const std::vector<TraceSample>& s, double width) {
    const double from = s.back().tau - width;
    if (s.front().tau > from + 1e-12) return s.size();
    const auto it = std::lower_bound(s.begin(), s.end(), from - 1e-12,
                                     [](const TraceSample& a, double v) { return a.tau < v; });
    return static_cast<std::size_t>(std::distance(s.begin(), it));
}

bool dispersion_at_end(const std::vector<TraceSample>& s, const ClassifierSettings& cs, std::size_t end) {
    // Window ending at sample end-1.
    const double h_high = cs.h_high();
    const double last = s[end - 1].tau;
    if (s.front().tau > last - cs.dispersion_window + 1e-12) return false;
    for (std::size_t i = end; i-- > 0;) {
        if (!(s[i].h > h_high) && std::isfinite(s[i].h)) return false;
        if (s[i].tau <= last - cs.dispersion_window + 1e-12) return true;
    }
    return false;
}

std::optional<Blowup> blowup_at_end(const std::vector<TraceSample>& s, const ClassifierSettings& cs) {
    const std::size_t first = window_start(s, cs.plateau_window);
    if (first >= s.size()) return std::nullopt;
    double mean = 0.0;
    for (std::size_t i = first; i < s.size(); ++i) mean += s[i].h;
    mean /= static_cast<double>(s.size() - first);
    if (!(mean > 0.0)) return std::nullopt;
    for (std::size_t i = first; i < s.size(); ++i) {
        if (!(std::abs(s[i].h - mean) <= cs.plateau_band * mean)) return std::nullopt;
        if (!(std::abs(s[i].dV0 - 1.0) <= cs.gauge_band)) return std::nullopt;
    }
    for (const auto& e : cs.endstates) {
        if (e.stable && std::abs(mean - e.c) <= cs.match_band * e.c) return Blowup{mean, e.n};
    }
    return std::nullopt;
}

}  // namespace

void GridSpec::validate() const {
    if (!(rho_max > 0.0) || !std::isfinite(rho_max)) throw ValidationError("grid: rho_max must be positive");
    if (n_points < 9) throw ValidationError("grid: need at least 9 points");
    if (!(dissipation_eps >= 0.0)) throw ValidationError("grid: dissipation must be nonnegative");
    if (!(rk_tol > 0.0)) throw ValidationError("grid: rk_tol must be positive");
    if (!(cfl > 0.0)) throw ValidationError("grid: CFL factor must be positive");
}

GridSpec default_grid(double expected_c) {
    if (!(expected_c > 0.0)) throw ValidationError("default_grid: expected blowup rate must be positive");
    GridSpec g;
    g.rho_max = 2.0 * expected_c;
    return g;
}

std::string to_string(const Classification& c) {
    if (const auto* b = std::get_if<Blowup>(&c)) {
        std::ostringstream s;
        s << "Blowup(h_limit=" << b->h_limit << ", n=" << b->profile_n << ")";
        return s.str();
    }
    return is_dispersion(c) ? "Dispersion" : "Undecided";
}

double ClassifierSettings::h_high() const {
    double m = 0.0;
    for (const auto& e : endstates) m = std::max(m, e.c);
    return dispersion_factor * (m > 0.0 ? m : 1.0);
}

std::vector<KnownEndstate> known_endstates(Dimension d) {
    std::vector<KnownEndstate> out{{0, d.c0(), true}};
    if (d.validated()) out.push_back({1, find_profile(d, 1).c, false});
    return out;
}

std::vector<KnownEndstate> known_endstates(std::span<const SelfSimilarProfile> profiles) {
    std::vector<KnownEndstate> out;
    for (const auto& p : profiles) out.push_back({p.n, p.c, p.n == 0});
    return out;
}

Classification classify(const RunTrace& trace, const ClassifierSettings& settings) {
    const auto& s = trace.samples;
    if (s.empty()) throw ValidationError("classify: empty trace");
    for (std::size_t end = 1; end <= s.size(); ++end) {
        if (dispersion_at_end(s, settings, end)) return Dispersion{};
    }
    if (trace.ends_in_breakdown && !(s.back().h <= settings.h_high())) return Dispersion{};
    if (auto b = blowup_at_end(s, settings)) return *b;
    return Undecided{};
}

Classification classify(const RunTrace& trace, std::span<const SelfSimilarProfile> known_profiles) {
    ClassifierSettings cs;
    cs.endstates = known_endstates(known_profiles);
    return classify(trace, cs);
}

EvolutionState init_family(Dimension d, double amplitude, const GridSpec& grid) {
    grid.validate();
    if (!std::isfinite(amplitude)) throw ValidationError("amplitude must be finite");
    if (!(amplitude > 0.0)) {
        throw ValidationError("amplitude must be positive: the gauge h = 1/d_rho P(0,0) = 1/A is undefined otherwise");
    }
    EvolutionState s;
    s.d = d.value();
    const auto m = static_cast<std::size_t>(grid.n_points);
    s.V.resize(m);
    s.P.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double rho = grid.rho(static_cast<int>(i));
        s.V[i] = s.P[i] = amplitude * rho / std::cosh(rho);
    }
    s.V[0] = s.P[0] = 0.0;
    s.h = 1.0 / origin_derivative(s.P, grid.spacing());
    return s;
}

EvolutionState init_from_profile(const SelfSimilarProfile& p, const GridSpec& grid) {
    grid.validate();
    EvolutionState s;
    s.d = p.d;
    const auto m = static_cast<std::size_t>(grid.n_points);
    std::vector<double> rho(m);
    for (std::size_t i = 0; i < m; ++i) rho[i] = grid.rho(static_cast<int>(i));
    std::vector<ProfileSample> ext;
    try {
        ext = extend_profile(p, rho);
    } catch (const ConvergenceError& e) {
        throw ValidationError(std::string("profile cannot be continued to rho_max: ") + e.what());
    }
    if (ext.size() != m) throw ValidationError("profile samples insufficient for the grid extent");
    s.V.resize(m);
    s.P.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        s.V[i] = ext[i].f;
        s.P[i] = rho[i] * ext[i].fp;
    }
    s.V[0] = s.P[0] = 0.0;
    s.h = 1.0 / origin_derivative(s.P, grid.spacing());
    return s;
}

double origin_derivative(std::span<const double> u, double spacing) {
    return (8.0 * u[1] - u[2]) / (6.0 * spacing);
}

double rhs(const EvolutionState& state, const GridSpec& grid, std::span<double> dV, std::span<double> dP) {
    grid.validate();
    check_state(state, grid);
    if (dV.size() != state.V.size() || dP.size() != state.P.size()) throw ValidationError("rhs: output size mismatch");
    Discretization disc(state.d, grid);
    const double h = disc(state.V.data(), state.P.data(), dV.data(), dP.data());
    if (!std::isfinite(h)) throw GaugeBreakdown("gauge breakdown: d_rho P(tau, 0) <= 0");
    return h;
}

RunResult run(EvolutionState state, const GridSpec& grid, const RunOptions& options) {
    grid.validate();
    check_state(state, grid);
    if (!(options.tau_end > state.tau)) throw ValidationError("run: tau_end must exceed the current tau");
    if (!(options.sample_every > 0.0)) throw ValidationError("run: sample_every must be positive");

    const auto m = static_cast<std::size_t>(grid.n_points);
    const double dx = grid.spacing();
    Discretization disc(state.d, grid);
    const OdeRhs f = [&](double tau, std::span<const double> y, std::span<double> dy) {
        const double h = disc(y.data(), y.data() + m, dy.data(), dy.data() + m);
        if (!std::isfinite(h)) {
            // Rejected by the step-size control; persistent failure surfaces as ConvergenceError.
            std::fill(dy.begin(), dy.end(), std::numeric_limits<double>::quiet_NaN());
            return;
        }
        dy[2 * m] = std::exp(-tau) * h;
    };

    Dopri5Options opt;
    opt.rtol = grid.rk_tol;
    opt.atol = grid.rk_tol;
    Dopri5 ode(2 * m + 1, opt);
    const auto y0 = pack(state);

    RunResult result;
    auto sample_at = [&](double tau, const double* V, const double* P, double t) {
        TraceSample s;
        s.tau = tau;
        s.dV0 = (8.0 * V[1] - V[2]) / (6.0 * dx);
        s.dP0 = (8.0 * P[1] - P[2]) / (6.0 * dx);
        s.h = 1.0 / s.dP0;
        s.t = t;
        return s;
    };
    const double dP0 = origin_derivative(state.P, dx);
    if (!(dP0 > 0.0)) throw GaugeBreakdown("gauge breakdown in the initial data: d_rho P(0, 0) <= 0");
    result.trace.samples.push_back(sample_at(state.tau, state.V.data(), state.P.data(), state.t));

    std::vector<double> snap_taus = options.snapshot_taus;
    std::sort(snap_taus.begin(), snap_taus.end());
    auto next_snap = snap_taus.begin();
    while (next_snap != snap_taus.end() && *next_snap < state.tau) ++next_snap;
    if (next_snap != snap_taus.end() && *next_snap == state.tau) {
        result.snapshots.push_back({state.tau, state.V, state.P});
        ++next_snap;
    }

    ode.initialize(f, state.tau, y0);
    long next_index = 1;
    const double tau0 = state.tau;
    std::vector<double> buf(2 * m + 1);
    bool classified = false;
    result.termination = "tau_end";
    try {
        while (ode.t() < options.tau_end - 1e-12 && !classified) {
            const auto y = ode.y();
            const double h_now = 1.0 / origin_derivative(y.subspan(m, m), dx);
            const double cap = grid.cfl * dx / std::max(1.0, std::isfinite(h_now) && h_now > 0.0 ? h_now : 1.0);
            ode.step(f, std::min(cap, options.tau_end - ode.t()));

            for (;;) {
                const double ts = tau0 + options.sample_every * static_cast<double>(next_index);
                if (ts > ode.t() + 1e-12 || ts > options.tau_end + 1e-12) break;
                const double tq = std::min(ts, ode.t());
                const double V1 = ode.interpolate(tq, 1), V2 = ode.interpolate(tq, 2);
                const double P1 = ode.interpolate(tq, m + 1), P2 = ode.interpolate(tq, m + 2);
                const double Vs[3] = {0.0, V1, V2}, Ps[3] = {0.0, P1, P2};
                result.trace.samples.push_back(sample_at(tq, Vs, Ps, ode.interpolate(tq, 2 * m)));
                ++next_index;
                if (options.stop_on_classification && !options.classifier.endstates.empty()) {
                    const auto& s = result.trace.samples;
                    if (dispersion_at_end(s, options.classifier, s.size())) {
                        result.classification = Dispersion{};
                        classified = true;
                    } else if (auto b = blowup_at_end(s, options.classifier)) {
                        result.classification = *b;
                        classified = true;
                    }
                    if (classified) break;
                }
            }
            while (next_snap != snap_taus.end() && *next_snap <= ode.t() + 1e-12) {
                ode.interpolate(std::min(*next_snap, ode.t()), buf);
                Snapshot sn{*next_snap, std::vector<double>(buf.begin(), buf.begin() + static_cast<long>(m)),
                            std::vector<double>(buf.begin() + static_cast<long>(m), buf.begin() + static_cast<long>(2 * m))};
                result.snapshots.push_back(std::move(sn));
                ++next_snap;
            }
        }
        if (classified) result.termination = "classified";
    } catch (const ConvergenceError&) {
        // The last accepted state is kept; a failure with h above every
        // known blowup rate is the gauge escaping to infinity.
        const auto y = ode.y();
        auto& s = result.trace.samples;
        if (ode.t() > s.back().tau) s.push_back(sample_at(ode.t(), y.data(), y.data() + m, y[2 * m]));
        const double h_last = s.back().h;
        const bool escaped = !(h_last > 0.0) || h_last > options.classifier.h_high();
        result.trace.ends_in_breakdown = escaped;
        result.termination = escaped ? "gauge breakdown" : "integrator failure";
    }

    const auto y = ode.y();
    state.tau = ode.t();
    std::copy(y.begin(), y.begin() + static_cast<long>(m), state.V.begin());
    std::copy(y.begin() + static_cast<long>(m), y.begin() + static_cast<long>(2 * m), state.P.begin());
    state.t = y[2 * m];
    state.h = 1.0 / origin_derivative(state.P, dx);
    result.final_state = std::move(state);
    result.steps = ode.accepted_steps();
    result.rhs_evaluations = ode.rhs_evaluations();
    if (!classified && !options.classifier.endstates.empty()) {
        result.classification = classify(result.trace, options.classifier);
    }
    return result;
}

GaugeLawFit fit_gauge_law(const RunTrace& trace, double tau_min) {
    double num = 0.0, den = 0.0;
    std::size_t count = 0;
    for (const auto& s : trace.samples) {
        if (s.tau < tau_min) continue;
        const double e = std::exp(-s.tau);
        num += e * (s.dV0 - 1.0);
        den += e * e;
        ++count;
    }
    if (count == 0) throw ValidationError("fit_gauge_law: no samples after tau_min");
    GaugeLawFit fit;
    fit.c = num / den;
    fit.samples = count;
    for (const auto& s : trace.samples) {
        if (s.tau < tau_min) continue;
        fit.max_residual = std::max(fit.max_residual, std::abs(s.dV0 - 1.0 - fit.c * std::exp(-s.tau)));
    }
    return fit;
}

}  // namespace wmlab
