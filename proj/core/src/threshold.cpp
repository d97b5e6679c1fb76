#include "wmlab/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

namespace wmlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RunResult run_amplitude(Dimension d, double A, const BisectionOptions& o, const ClassifierSettings& cs, double tau_end) {
    RunOptions ro;
    ro.tau_end = tau_end;
    ro.sample_every = o.sample_every;
    ro.classifier = cs;
    ro.stop_on_classification = true;
    return run(init_family(d, A, o.grid), o.grid, ro);
}

// Run, and once more with twice the budget when undecided.
RunResult decided_run(Dimension d, double A, const BisectionOptions& o, const ClassifierSettings& cs) {
    RunResult r = run_amplitude(d, A, o, cs, o.tau_end);
    if (std::holds_alternative<Undecided>(r.classification)) r = run_amplitude(d, A, o, cs, 2.0 * o.tau_end);
    if (std::holds_alternative<Undecided>(r.classification)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "evolution with A = " << A << " is undecided at tau = " << r.final_state.tau << " (" << r.termination
            << ")";
        throw ConvergenceError(msg.str());
    }
    return r;
}

struct LinearFit {
    Eigen::VectorXd coeffs;  // unscaled coefficients of exp(rate * s)
    double rms = kNaN;
    double condition = kNaN;
    Eigen::VectorXd residual;
};

// Least squares of y on exp(rate_k s) with scaled columns.
LinearFit exp_fit(const std::vector<double>& s, const std::vector<double>& y, const std::vector<double>& rates) {
    const auto m = static_cast<Eigen::Index>(s.size());
    const auto k = static_cast<Eigen::Index>(rates.size());
    LinearFit out;
    if (m < k) return out;
    const double s_ref = 0.5 * (s.front() + s.back());
    Eigen::MatrixXd A(m, k);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        b(i) = y[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < k; ++j) A(i, j) = std::exp(rates[static_cast<std::size_t>(j)] * (s[static_cast<std::size_t>(i)] - s_ref));
    }
    Eigen::VectorXd norms = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(norms(j) > 0.0) || !std::isfinite(norms(j))) return out;
        A.col(j) /= norms(j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    const Eigen::VectorXd x = svd.solve(b);
    out.residual = A * x - b;
    out.rms = std::sqrt(out.residual.squaredNorm() / static_cast<double>(m));
    out.coeffs.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        out.coeffs(j) = x(j) / norms(j) * std::exp(-rates[static_cast<std::size_t>(j)] * s_ref);
    }
    return out;
}

std::pair<double, double> window_tau_range(const RunTrace& trace, double f1p0, double T, double band) {
    const auto series = reconstruct_similarity(trace, T);
    const FitWindow w = default_fit_window(series, f1p0, band);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& x : series) {
        if (x.s >= w.s_min && x.s <= w.s_max) {
            lo = std::min(lo, x.tau);
            hi = std::max(hi, x.tau);
        }
    }
    return {lo, hi};
}

std::vector<SimilaritySample> in_tau_range(const std::vector<SimilaritySample>& series, std::pair<double, double> r) {
    std::vector<SimilaritySample> out;
    for (const auto& x : series) {
        if (x.tau >= r.first && x.tau <= r.second) out.push_back(x);
    }
    return out;
}

FitResult fit_in_tau_range(const RunTrace& trace, const LambdaSet& l, double f1p0, double T,
                           std::pair<double, double> r, int harmonics) {
    const auto series = in_tau_range(reconstruct_similarity(trace, T), r);
    if (series.empty()) throw ValidationError("fit window contains no samples");
    return fit_modes(series, l, f1p0, T, {series.front().s, series.back().s}, 1e12, harmonics);
}

double max_t_in_range(const RunTrace& trace, std::pair<double, double> r) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& x : trace.samples) {
        if (x.tau >= r.first && x.tau <= r.second) m = std::max(m, x.t);
    }
    return m;
}

std::pair<double, double> resolve_tau_window(const RunTrace& trace, double f1p0, double T, const RefineOptions& o) {
    if (o.tau_window) return *o.tau_window;
    const auto r = window_tau_range(trace, f1p0, T, o.band);
    if (!(r.second > r.first)) throw ValidationError("no fit window: the trace never approaches f1'(0)");
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------

double plateau_length(const RunTrace& trace, double c, double band) {
    double best = 0.0;
    double start = kNaN;
    for (const auto& s : trace.samples) {
        if (std::abs(s.h - c) <= band * c) {
            if (std::isnan(start)) start = s.tau;
            best = std::max(best, s.tau - start);
        } else {
            start = kNaN;
        }
    }
    return best;
}

double plateau_scaling_slope(const std::vector<BisectionStep>& history) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& h : history) {
        if (!(h.plateau_length > 0.0) || !(h.width > 0.0)) continue;
        const double x = -std::log(h.width);
        sx += x;
        sy += h.plateau_length;
        sxx += x * x;
        sxy += x * h.plateau_length;
        ++n;
    }
    if (n < 2) throw ValidationError("plateau scaling needs at least two runs with a plateau");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ThresholdResult bisect_amplitude(Dimension d, std::pair<double, double> bracket, const BisectionOptions& options) {
    auto [lo, hi] = bracket;
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi > lo)) {
        throw ValidationError("amplitude bracket must satisfy 0 < lo < hi");
    }
    if (!(options.rel_tol >= 10.0 * std::numeric_limits<double>::epsilon())) {
        throw ValidationError("rel_tol must be at least 10 machine epsilons");
    }
    options.grid.validate();
    ClassifierSettings cs = options.classifier;
    if (cs.endstates.empty()) cs.endstates = known_endstates(d);
    double plateau_c = options.plateau_c;
    if (!(plateau_c > 0.0)) {
        for (const auto& e : cs.endstates) {
            if (!e.stable) plateau_c = std::max(plateau_c, e.c);
        }
    }

    ThresholdResult res;
    res.d = d.value();
    auto record = [&](double A, const RunResult& r, double width) {
        BisectionStep step;
        step.amplitude = A;
        step.classification = r.classification;
        step.width = width;
        step.plateau_length = plateau_c > 0.0 ? plateau_length(r.trace, plateau_c, options.plateau_band) : 0.0;
        step.tau_reached = r.final_state.tau;
        res.history.push_back(step);
        if (options.progress) options.progress(step);
    };

    RunResult r_lo = decided_run(d, lo, options, cs);
    record(lo, r_lo, hi - lo);
    RunResult r_hi = decided_run(d, hi, options, cs);
    record(hi, r_hi, hi - lo);
    if (r_lo.classification.index() == r_hi.classification.index()) {
        throw ValidationError("bracket does not straddle the threshold: both ends give " + to_string(r_lo.classification));
    }
    res.lo_disperses = is_dispersion(r_lo.classification);
    const std::size_t lo_kind = r_lo.classification.index();
    RunTrace t_lo = std::move(r_lo.trace), t_hi = std::move(r_hi.trace);

    int iters = 0;
    while ((hi - lo) / (0.5 * (lo + hi)) > options.rel_tol && iters < options.max_iterations) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        RunResult r = decided_run(d, mid, options, cs);
        if (r.classification.index() == lo_kind) {
            lo = mid;
            t_lo = std::move(r.trace);
        } else {
            hi = mid;
            t_hi = std::move(r.trace);
        }
        ++iters;
        record(mid, r, hi - lo);
    }
    res.A_lo = lo;
    res.A_hi = hi;
    res.A_star = lo + 0.5 * (hi - lo);
    res.n_iters = iters;
    res.sub_trace = res.lo_disperses ? std::move(t_lo) : std::move(t_hi);
    res.super_trace = res.lo_disperses ? std::move(t_hi) : std::move(t_lo);
    return res;
}

std::vector<SimilaritySample> reconstruct_similarity(const RunTrace& trace, double T) {
    std::vector<SimilaritySample> out;
    for (const auto& x : trace.samples) {
        if (!(x.t < T) || !std::isfinite(x.dV0)) continue;
        const double gap = T - x.t;
        out.push_back({-std::log(gap), std::exp(x.tau) * gap * x.dV0, x.tau});
    }
    return out;
}

double estimate_T(const RunTrace& trace, double rel_rate) {
    double best_len = -1.0, best_T = kNaN;
    double start = kNaN, last_T = kNaN, last_tau = 0.0;
    auto close = [&] {
        if (!std::isnan(start) && last_tau - start > best_len) {
            best_len = last_tau - start;
            best_T = last_T;
        }
        start = kNaN;
    };
    for (const auto& x : trace.samples) {
        const double rate = std::exp(-x.tau) * x.h;
        if (x.h > 0.0 && std::isfinite(rate) && rate < rel_rate * std::abs(x.t)) {
            if (std::isnan(start)) start = x.tau;
            last_T = x.t + rate;
            last_tau = x.tau;
        } else {
            close();
        }
    }
    close();
    if (std::isnan(best_T)) throw ConvergenceError("estimate_T: dt/dtau never becomes small compared to t");
    return best_T;
}

double estimate_T_pair(const RunTrace& a, const RunTrace& b, double rel_rate) {
    double best = kNaN, best_rate = std::numeric_limits<double>::infinity();
    for (const RunTrace* t : {&a, &b}) {
        double T = kNaN;
        try {
            T = estimate_T(*t, rel_rate);
        } catch (const ConvergenceError&) {
            continue;
        }
        double rate = std::numeric_limits<double>::infinity();
        for (const auto& x : t->samples) {
            const double r = std::exp(-x.tau) * x.h;
            if (x.h > 0.0 && std::isfinite(r)) rate = std::min(rate, r);
        }
        if (rate < best_rate) {
            best_rate = rate;
            best = T;
        }
    }
    if (std::isnan(best)) throw ConvergenceError("estimate_T_pair: neither trace approaches its blowup time");
    return best;
}

double FitResult::model(double s) const {
    double v = f1p0 + a1 * std::exp(lambdas.l1 * s) + a0 * std::exp(lambdas.l0 * s) + a_minus1 * std::exp(lambdas.lm1 * s);
    for (std::size_t k = 0; k < stable_harmonics.size(); ++k) {
        v += stable_harmonics[k] * std::exp(static_cast<double>(k + 2) * lambdas.lm1 * s);
    }
    return v;
}

FitWindow default_fit_window(const std::vector<SimilaritySample>& series, double f1p0, double band) {
    FitWindow w{kNaN, kNaN};
    bool inside = false;
    for (const auto& x : series) {
        const bool near = std::abs(x.dU0 - f1p0) < band * f1p0;
        if (near && !inside && std::isnan(w.s_min)) {
            w.s_min = x.s;
            inside = true;
        }
        if (inside) {
            if (!near) break;
            w.s_max = x.s;
        }
    }
    if (std::isnan(w.s_min)) throw ValidationError("fit window: series never comes within the band of f1'(0)");
    return w;
}

FitResult fit_modes(const std::vector<SimilaritySample>& series, const LambdaSet& l, double f1p0, double T,
                    const FitWindow& window, double max_condition, int harmonics) {
    if (harmonics < 1) throw ValidationError("fit_modes: harmonics must be at least 1");
    std::vector<double> s, y;
    for (const auto& x : series) {
        if (x.s >= window.s_min && x.s <= window.s_max) {
            s.push_back(x.s);
            y.push_back(x.dU0 - f1p0);
        }
    }
    if (s.empty()) throw ValidationError("fit_modes: window contains no samples");
    std::vector<double> rates{l.l1, l.l0, l.lm1};
    for (int k = 2; k <= harmonics; ++k) rates.push_back(k * l.lm1);
    if (s.size() < rates.size()) throw ValidationError("fit_modes: window contains fewer samples than modes");
    const LinearFit lf = exp_fit(s, y, rates);
    if (!(lf.condition <= max_condition)) {
        std::ostringstream msg;
        msg << "fit_modes: ill-conditioned design matrix (condition estimate " << lf.condition << ")";
        throw ConvergenceError(msg.str());
    }
    FitResult r;
    r.T_star = T;
    r.a1 = lf.coeffs(0);
    r.a0 = lf.coeffs(1);
    r.a_minus1 = lf.coeffs(2);
    for (Eigen::Index k = 3; k < lf.coeffs.size(); ++k) r.stable_harmonics.push_back(lf.coeffs(k));
    r.lambdas = l;
    r.f1p0 = f1p0;
    r.residual = lf.rms;
    r.window = {s.front(), s.back()};
    r.condition = lf.condition;
    r.samples = s.size();
    return r;
}

FitResult refine_T(const RunTrace& trace, const LambdaSet& l, double f1p0, std::pair<double, double> T_bracket,
                   const RefineOptions& options) {
    double lo = T_bracket.first, hi = T_bracket.second;
    if (!(hi > lo)) throw ValidationError("refine_T: empty T bracket");
    const auto range = resolve_tau_window(trace, f1p0, 0.5 * (lo + hi), options);
    if (!(lo > max_t_in_range(trace, range))) {
        throw ValidationError("refine_T: bracket must lie above every t in the fit window");
    }
    FitResult f_lo = fit_in_tau_range(trace, l, f1p0, lo, range, options.harmonics);
    FitResult f_hi = fit_in_tau_range(trace, l, f1p0, hi, range, options.harmonics);
    if (f_lo.a0 == 0.0) return f_lo;
    if (f_hi.a0 == 0.0) return f_hi;
    if ((f_lo.a0 < 0.0) == (f_hi.a0 < 0.0)) throw ConvergenceError("refine_T: a0(T) does not change sign over the bracket");
    for (int it = 0; it < options.max_iterations; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        FitResult f = fit_in_tau_range(trace, l, f1p0, mid, range, options.harmonics);
        if (f.a0 == 0.0) return f;
        if ((f.a0 < 0.0) == (f_lo.a0 < 0.0)) {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    return std::abs(f_lo.a0) <= std::abs(f_hi.a0) ? f_lo : f_hi;
}

std::pair<double, double> bracket_T(const RunTrace& trace, const LambdaSet& l, double f1p0, double T_est,
                                    const RefineOptions& options) {
    const auto range = resolve_tau_window(trace, f1p0, T_est, options);
    const double t_max = max_t_in_range(trace, range);
    const double scale = std::max(std::abs(T_est), 1e-300);
    std::vector<double> Ts, a0s;
    for (int k = 0; k <= 120; ++k) {
        const double gap = scale * 1e-14 * std::pow(10.0, k / 10.0);
        if (gap > 0.1 * scale) break;
        const double T = t_max + gap;
        double a0 = kNaN;
        try {
            a0 = fit_in_tau_range(trace, l, f1p0, T, range, options.harmonics).a0;
        } catch (const Error&) {
        }
        Ts.push_back(T);
        a0s.push_back(a0);
    }
    std::optional<std::pair<double, double>> best;
    for (std::size_t i = 0; i + 1 < Ts.size(); ++i) {
        if (!std::isfinite(a0s[i]) || !std::isfinite(a0s[i + 1])) continue;
        if ((a0s[i] < 0.0) == (a0s[i + 1] < 0.0) && a0s[i] != 0.0) continue;
        const auto cand = std::make_pair(Ts[i], Ts[i + 1]);
        auto dist = [&](const std::pair<double, double>& b) { return std::abs(0.5 * (b.first + b.second) - T_est); };
        if (!best || dist(cand) < dist(*best)) best = cand;
    }
    if (!best) throw ConvergenceError("bracket_T: a0(T) has no sign change near the estimate");
    return *best;
}

FitResult fit_trace(const RunTrace& trace, const LambdaSet& l, double f1p0, const RefineOptions& options) {
    const double T_est = options.T_estimate ? *options.T_estimate : estimate_T(trace);
    RefineOptions o = options;
    if (!o.tau_window) o.tau_window = resolve_tau_window(trace, f1p0, T_est, options);
    return refine_T(trace, l, f1p0, bracket_T(trace, l, f1p0, T_est, o), o);
}

namespace {

double lerp_at(const std::vector<TraceSample>& v, double tau, double TraceSample::*field) {
    auto it = std::lower_bound(v.begin(), v.end(), tau, [](const TraceSample& x, double t) { return x.tau < t; });
    if (it == v.end()) return kNaN;
    if (it->tau == tau) return (*it).*field;
    if (it == v.begin()) return kNaN;
    const auto& a = *(it - 1);
    const auto& b = *it;
    const double w = (tau - a.tau) / (b.tau - a.tau);
    return (1.0 - w) * (a.*field) + w * (b.*field);
}

// Sub- and supercritical samples at common tau.
struct PairedTrace {
    std::vector<double> tau, t1, v1, t2, v2;

    PairedTrace(const RunTrace& sub, const RunTrace& super) {
        for (const auto& x : sub.samples) {
            const double t = lerp_at(super.samples, x.tau, &TraceSample::t);
            const double v = lerp_at(super.samples, x.tau, &TraceSample::dV0);
            if (!std::isfinite(t) || !std::isfinite(v) || !std::isfinite(x.dV0)) continue;
            tau.push_back(x.tau);
            t1.push_back(x.t);
            v1.push_back(x.dV0);
            t2.push_back(t);
            v2.push_back(v);
        }
    }
    std::size_t size() const { return tau.size(); }
    bool usable(std::size_t i, double T) const { return t1[i] < T && t2[i] < T; }
    double s(std::size_t i, double T) const { return -std::log(T - t1[i]); }
    double u1(std::size_t i, double T) const { return std::exp(tau[i]) * (T - t1[i]) * v1[i]; }
    double u2(std::size_t i, double T) const { return std::exp(tau[i]) * (T - t2[i]) * v2[i]; }
    double mean(std::size_t i, double T) const { return 0.5 * (u1(i, T) + u2(i, T)); }
    double diff(std::size_t i, double T) const { return u1(i, T) - u2(i, T); }
};

}  // namespace

FreeRateFit fit_free_rates(const RunTrace& sub, const RunTrace& super, double f1p0, double T_init,
                           const FreeRateOptions& o) {
    if (!(f1p0 > 0.0)) throw ValidationError("fit_free_rates: f1p0 must be positive");
    if (o.harmonics < 1) throw ValidationError("fit_free_rates: harmonics must be at least 1");
    const auto [lo, hi] = o.decay_search;
    if (!(lo < hi && hi < 0.0)) throw ValidationError("fit_free_rates: decay search interval must be negative");
    const PairedTrace pt(sub, super);
    if (pt.size() < 10) throw ValidationError("fit_free_rates: the traces share too few samples");

    // Decay window in tau, chosen at T_init.
    std::size_t d0 = pt.size();
    for (std::size_t i = 0; i < pt.size(); ++i) {
        if (pt.usable(i, T_init) && std::abs(pt.mean(i, T_init) - f1p0) < o.band * f1p0) {
            d0 = i;
            break;
        }
    }
    std::size_t d1 = d0;
    while (d1 < pt.size() && pt.usable(d1, T_init) && std::abs(pt.diff(d1, T_init)) <= o.together * f1p0) ++d1;
    if (d1 < d0 + 2 * static_cast<std::size_t>(o.harmonics + 2)) {
        throw ConvergenceError("fit_free_rates: no decay window before the pair separates");
    }
    double t_w = -std::numeric_limits<double>::infinity();
    for (std::size_t i = d0; i < d1; ++i) t_w = std::max({t_w, pt.t1[i], pt.t2[i]});

    // The decay fit is sensitive to T through s, so T is optimized along
    // with the rate: for each rate, the rms is minimized over ln(T - t_w).
    std::vector<double> s, y;
    auto rms_at = [&](double lam, double T) {
        s.clear();
        y.clear();
        for (std::size_t i = d0; i < d1; ++i) {
            s.push_back(pt.s(i, T));
            y.push_back(pt.mean(i, T) - f1p0);
        }
        std::vector<double> rates{1.0};
        for (int k = 1; k <= o.harmonics; ++k) rates.push_back(k * lam);
        const LinearFit lf = exp_fit(s, y, rates);
        return std::isfinite(lf.rms) ? lf.rms : std::numeric_limits<double>::infinity();
    };
    const double q0 = std::log(std::max(T_init - t_w, 1e-300));
    auto best_T = [&](double lam) {
        const auto r = boost::math::tools::brent_find_minima(
            [&](double q) { return rms_at(lam, t_w + std::exp(q)); }, q0 - 5.0, q0 + 3.0, 30);
        return std::make_pair(t_w + std::exp(r.first), r.second);
    };
    constexpr int kGrid = 300;
    const double step = (hi - lo) / kGrid;
    std::vector<double> grid_v(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i) grid_v[static_cast<std::size_t>(i)] = best_T(lo + i * step).second;
    double lam = lo, val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const bool local = (i == 0 || grid_v[iu] <= grid_v[iu - 1]) && (i == kGrid || grid_v[iu] <= grid_v[iu + 1]);
        if (!local) continue;
        const double a = std::max(lo, lo + (i - 1) * step);
        const double b = std::min(hi, lo + (i + 1) * step);
        const auto r = boost::math::tools::brent_find_minima([&](double l) { return best_T(l).second; }, a, b, 30);
        if (r.second < val) {
            lam = r.first;
            val = r.second;
        }
    }
    const double T = best_T(lam).first;
    FreeRateFit out;
    out.T = T;
    out.lambda_minus1 = lam;
    out.decay_residual = val;
    out.decay_samples = d1 - d0;
    out.decay_window = {pt.s(d0, T), pt.s(d1 - 1, T)};

    // Growth: the last stretch of the separation from the floor to the ceiling.
    std::vector<std::pair<double, double>> sep;  // (s, |diff|)
    for (std::size_t i = 0; i < pt.size(); ++i) {
        if (!pt.usable(i, T)) break;
        sep.emplace_back(pt.s(i, T), std::abs(pt.diff(i, T)));
    }
    std::size_t end = sep.size();
    for (std::size_t i = 0; i < sep.size(); ++i) {
        if (sep[i].second >= o.separation_ceiling * f1p0) {
            end = i;
            break;
        }
    }
    std::size_t begin = 0;
    for (std::size_t i = end; i-- > 0;) {
        if (sep[i].second <= o.separation_floor * f1p0) {
            begin = i + 1;
            break;
        }
    }
    if (end < begin + 5) throw ConvergenceError("fit_free_rates: the pair never separates over a usable range");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const double x = sep[i].first, yy = std::log(sep[i].second);
        sx += x;
        sy += yy;
        sxx += x * x;
        sxy += x * yy;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double r = icpt + slope * sep[i].first - std::log(sep[i].second);
        sq += r * r;
    }
    out.lambda1 = slope;
    out.growth_residual = std::sqrt(sq / n);
    out.growth_samples = end - begin;
    out.growth_window = {sep[begin].first, sep[end - 1].first};
    return out;
}

double average_T(const FitResult& sub, const FitResult& super) { return 0.5 * (sub.T_star + super.T_star); }

LambdaSet lambda_set(const SpectrumReport& spectrum) {
    LambdaSet l;
    bool above = false, below = false;
    for (const auto& e : spectrum.eigenpairs) {
        if (e.lambda > 1.0 + 1e-6 && (!above || e.lambda < l.l1)) {
            l.l1 = e.lambda;
            above = true;
        }
        if (e.lambda < 1.0 - 1e-6 && (!below || e.lambda > l.lm1)) {
            l.lm1 = e.lambda;
            below = true;
        }
    }
    if (!above || !below) throw ValidationError("spectrum " + spectrum.profile_id + " lacks eigenvalues on both sides of 1");
    return l;
}

}  // namespace wmlab
