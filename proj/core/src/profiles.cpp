#include "wmlab/profiles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "wmlab/dopri5.hpp"
#include "wmlab/error.hpp"
#include "wmlab/parallel.hpp"

namespace wmlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

OdeRhs make_rhs(int d) {
    return [d](double y, std::span<const double> u, std::span<double> du) { profile_ode_rhs(d, y, u, du); };
}

// Integrate without range checks; samples at `sample_y` that fall inside the
// travelled interval are appended to `dense`.
OdePoint integrate_raw(int d, const OdePoint& from, double to_y, double tol, std::span<const double> sample_y,
                       std::vector<ProfileSample>* dense) {
    Dopri5Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    const std::array<double, 2> u0{from.f, from.fp};
    std::function<void(const Dopri5&)> observer;
    if (dense && !sample_y.empty()) {
        observer = [&](const Dopri5& s) {
            const double a = std::min(s.t_previous(), s.t());
            const double b = std::max(s.t_previous(), s.t());
            const auto lo = std::lower_bound(sample_y.begin(), sample_y.end(), a);
            for (auto it = lo; it != sample_y.end() && *it <= b; ++it) {
                // Each sample belongs to exactly one step: skip the shared endpoint
                // of the step travelled first.
                if (*it == s.t_previous() && s.accepted_steps() > 1) continue;
                dense->push_back({*it, s.interpolate(*it, 0), s.interpolate(*it, 1)});
            }
        };
    }
    const auto u = integrate(make_rhs(d), from.y, u0, to_y, opt, observer);
    return {to_y, u[0], u[1]};
}

struct Legs {
    double f_left = kNaN, fp_left = kNaN, f_right = kNaN, fp_right = kNaN;
    double r1() const { return f_left - f_right; }
    double r2() const { return fp_left - fp_right; }
    double norm() const { return std::max(std::abs(r1()), std::abs(r2())); }
    double scale() const { return 1.0 + std::abs(f_left) + std::abs(fp_left); }
    bool finite() const { return std::isfinite(r1()) && std::isfinite(r2()); }
};

Legs shoot(Dimension d, double c, const BoundaryBranch& branch, const ShootingSettings& s) {
    Legs legs;
    try {
        const auto [f0, fp0] = origin_series(d, c, s.y0, s.origin_order);
        const auto left = integrate_raw(d.value(), {s.y0, f0, fp0}, s.y_mid, s.ode_tol, {}, nullptr);
        const auto [f1, fp1] = boundary_series(d, branch, s.delta, s.boundary_order);
        const auto right = integrate_raw(d.value(), {1.0 - s.delta, f1, fp1}, s.y_mid, s.ode_tol, {}, nullptr);
        legs = {left.f, left.fp, right.f, right.fp};
    } catch (const ConvergenceError&) {
    }
    return legs;
}

// Which component of (f, f') at 1 - delta fixes the branch parameter in the
// one-sided seed scan; the other one measures the smoothness defect.
bool seed_matches_value(BranchKind kind) { return kind == BranchKind::EvenD; }

double seed_guess(BranchKind kind, double f, double fp, double delta) {
    switch (kind) {
        case BranchKind::D3: return fp;
        case BranchKind::D5Main: return -fp / delta;
        case BranchKind::D5Alt: return (-fp + std::sqrt(3.0) / 2.0) / delta;
        case BranchKind::EvenD: return f;
    }
    return 0.0;
}

struct SeedPoint {
    double defect = kNaN;
    double parameter = kNaN;
};

// One-sided smoothness defect at y = 1 - delta for shooting parameter c.
SeedPoint smoothness_defect(Dimension d, BranchKind kind, double c, const ShootingSettings& s) {
    SeedPoint out;
    OdePoint end;
    try {
        const auto [f0, fp0] = origin_series(d, c, s.y0, s.origin_order);
        end = integrate_raw(d.value(), {s.y0, f0, fp0}, 1.0 - s.delta, std::max(s.ode_tol, 1e-12), {}, nullptr);
    } catch (const ConvergenceError&) {
        return out;
    }
    const bool by_value = seed_matches_value(kind);
    const double target = by_value ? end.f : end.fp;
    auto component = [&](double p) {
        if (kind == BranchKind::EvenD && std::abs(p - kPi / 2) < 1e-12) p += 1e-11;
        const auto [f, fp] = boundary_series(d, make_branch(kind, p), s.delta, s.boundary_order);
        return (by_value ? f : fp) - target;
    };
    double p = seed_guess(kind, end.f, end.fp, s.delta);
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
        const double g = component(p);
        const double hp = 1e-7 * std::max(1.0, std::abs(p));
        const double dg = (component(p + hp) - g) / hp;
        if (!std::isfinite(g) || !std::isfinite(dg) || dg == 0.0) break;
        const double step = g / dg;
        p -= step;
        if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(p))) {
            ok = true;
            break;
        }
    }
    if (!ok || !std::isfinite(p)) return out;
    if (kind == BranchKind::EvenD && std::abs(p - kPi / 2) < 1e-12) return out;
    const auto [f, fp] = boundary_series(d, make_branch(kind, p), s.delta, s.boundary_order);
    out.parameter = p;
    out.defect = by_value ? end.fp - fp : end.f - f;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Branches
// ---------------------------------------------------------------------------

BranchKind kind_of(const BoundaryBranch& branch) {
    return std::visit(overloaded{
                          [](const BranchD3&) { return BranchKind::D3; },
                          [](const BranchD5Main&) { return BranchKind::D5Main; },
                          [](const BranchD5Alt&) { return BranchKind::D5Alt; },
                          [](const BranchEvenD&) { return BranchKind::EvenD; },
                      },
                      branch);
}

std::string to_string(BranchKind kind) {
    switch (kind) {
        case BranchKind::D3: return "D3";
        case BranchKind::D5Main: return "D5Main";
        case BranchKind::D5Alt: return "D5Alt";
        case BranchKind::EvenD: return "EvenD";
    }
    return "?";
}

BranchKind branch_kind_from_string(const std::string& name) {
    for (auto k : {BranchKind::D3, BranchKind::D5Main, BranchKind::D5Alt, BranchKind::EvenD}) {
        if (to_string(k) == name) return k;
    }
    throw ValidationError("unknown boundary branch '" + name + "'");
}

double branch_parameter(const BoundaryBranch& branch) {
    return std::visit(overloaded{
                          [](const BranchD3& b) { return b.fp1; },
                          [](const BranchD5Main& b) { return b.fpp1; },
                          [](const BranchD5Alt& b) { return b.fpp1; },
                          [](const BranchEvenD& b) { return b.f1; },
                      },
                      branch);
}

BoundaryBranch make_branch(BranchKind kind, double parameter) {
    switch (kind) {
        case BranchKind::D3: return BranchD3{parameter};
        case BranchKind::D5Main: return BranchD5Main{parameter};
        case BranchKind::D5Alt: return BranchD5Alt{parameter};
        case BranchKind::EvenD: return BranchEvenD{parameter};
    }
    throw ValidationError("invalid branch kind");
}

void validate_branch(Dimension d, const BoundaryBranch& branch) {
    const BranchKind kind = kind_of(branch);
    const int dv = d.value();
    const bool ok = (kind == BranchKind::D3 && dv == 3) ||
                    ((kind == BranchKind::D5Main || kind == BranchKind::D5Alt) && dv == 5) ||
                    (kind == BranchKind::EvenD && dv % 2 == 0);
    if (!ok) {
        throw ValidationError("boundary branch " + to_string(kind) + " is not valid in d = " + std::to_string(dv));
    }
    if (!std::isfinite(branch_parameter(branch))) throw ValidationError("non-finite branch parameter");
    if (kind == BranchKind::EvenD && std::abs(branch_parameter(branch) - kPi / 2) < 1e-12) {
        throw ValidationError("EvenD branch with f(1) = pi/2 is degenerate");
    }
}

BranchKind default_branch_kind(Dimension d, int n) {
    switch (d.value()) {
        case 3: return BranchKind::D3;
        case 5: return n == 0 ? BranchKind::D5Alt : BranchKind::D5Main;
        default:
            if (d.value() % 2 == 0) return BranchKind::EvenD;
    }
    throw ValidationError("no boundary branch is defined for odd d = " + std::to_string(d.value()) + " >= 7");
}

series::Coeffs boundary_coefficients(Dimension d, const BoundaryBranch& branch, std::size_t order) {
    validate_branch(d, branch);
    const auto bs = std::visit(
        overloaded{
            [&](const BranchD3& b) { return series::profile_boundary_coeffs(3, kPi / 2, -b.fp1, order); },
            [&](const BranchD5Main& b) { return series::profile_boundary_coeffs(5, kPi / 2, 0.5 * b.fpp1, order); },
            [&](const BranchD5Alt& b) { return series::profile_boundary_coeffs(5, kPi / 3, 0.5 * b.fpp1, order); },
            [&](const BranchEvenD& b) { return series::profile_boundary_coeffs(d.value(), b.f1, 0.0, order); },
        },
        branch);
    if (std::abs(bs.compatibility_defect) > 1e-10) {
        throw ValidationError("boundary branch violates the compatibility condition at y = 1");
    }
    return bs.b;
}

// ---------------------------------------------------------------------------
// Local solutions and integration
// ---------------------------------------------------------------------------

double closed_form_f0(Dimension d, double y) {
    if (!(y >= 0.0 && y <= 1.0)) throw ValidationError("closed_form_f0: y must lie in [0, 1]");
    return 2.0 * std::atan(y / std::sqrt(d.as_double() - 2.0));
}

double closed_form_f0_derivative(Dimension d, double y) {
    const double s2 = d.as_double() - 2.0;
    return 2.0 * std::sqrt(s2) / (s2 + y * y);
}

std::pair<double, double> origin_series(Dimension d, double c, double y0, int order) {
    const auto a = series::profile_origin_coeffs(d.value(), c, static_cast<std::size_t>(order));
    return {series::evaluate(a, y0), series::evaluate_derivative(a, y0)};
}

std::pair<double, double> boundary_series(Dimension d, const BoundaryBranch& branch, double delta, int order) {
    const auto b = boundary_coefficients(d, branch, static_cast<std::size_t>(order));
    // d/dy = -d/dx
    return {series::evaluate(b, delta), -series::evaluate_derivative(b, delta)};
}

void profile_ode_rhs(int d, double y, std::span<const double> u, std::span<double> du) {
    const double dm1 = d - 1.0;
    du[0] = u[1];
    du[1] = (0.5 * dm1 / (y * y) * std::sin(2.0 * u[0]) - (dm1 / y - 2.0 * y) * u[1]) / (1.0 - y * y);
}

OdePoint integrate_ode(Dimension d, const OdePoint& from, double to_y, double tol, std::span<const double> sample_y,
                       std::vector<ProfileSample>* dense) {
    if (!(from.y > 0.0 && from.y < 1.0 && to_y > 0.0 && to_y < 1.0)) {
        throw ValidationError("integrate_ode: interval must lie inside (0, 1)");
    }
    if (!(tol > 0.0)) throw ValidationError("integrate_ode: tolerance must be positive");
    return integrate_raw(d.value(), from, to_y, tol, sample_y, dense);
}

std::pair<double, double> match_residual(Dimension d, double c, const BoundaryBranch& branch,
                                         const ShootingSettings& settings) {
    validate_branch(d, branch);
    const Legs legs = shoot(d, c, branch, settings);
    return {legs.r1(), legs.r2()};
}

std::pair<double, double> match_residual(Dimension d, double c, const BoundaryBranch& branch, double y_mid) {
    if (!(y_mid > 0.0 && y_mid < 1.0)) throw ValidationError("match_residual: y_mid must lie in (0, 1)");
    ShootingSettings s;
    s.y_mid = y_mid;
    return match_residual(d, c, branch, s);
}

// ---------------------------------------------------------------------------
// Shooting
// ---------------------------------------------------------------------------

std::pair<double, double> default_c_bracket(Dimension d, int n) {
    const double c0 = d.c0();
    if (n == 0) return {0.5 * c0, 1.5 * c0};
    if (n == 1) return {1.5 * c0, 20.0 * c0};
    return {1.5 * c0, 200.0 * c0};
}

SelfSimilarProfile polish_profile(Dimension d, double c, const BoundaryBranch& seed, const ShootingSettings& s) {
    validate_branch(d, seed);
    const BranchKind kind = kind_of(seed);
    double p = branch_parameter(seed);
    Legs legs = shoot(d, c, seed, s);
    if (!legs.finite()) throw ConvergenceError("shooting failed at the Newton seed");

    bool converged = false;
    for (int it = 0; it < s.max_newton_iterations; ++it) {
        if (legs.norm() <= s.match_tol * legs.scale()) {
            converged = true;
            break;
        }
        const double hc = 1e-7 * std::max(1.0, std::abs(c));
        const double hp = 1e-7 * std::max(1.0, std::abs(p));
        const Legs lc = shoot(d, c + hc, make_branch(kind, p), s);
        const Legs lp = shoot(d, c, make_branch(kind, p + hp), s);
        if (!lc.finite() || !lp.finite()) throw ConvergenceError("shooting failed while forming the Jacobian");
        const double j11 = (lc.r1() - legs.r1()) / hc, j12 = (lp.r1() - legs.r1()) / hp;
        const double j21 = (lc.r2() - legs.r2()) / hc, j22 = (lp.r2() - legs.r2()) / hp;
        const double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || det == 0.0) throw ConvergenceError("singular shooting Jacobian");
        const double dc = -(j22 * legs.r1() - j12 * legs.r2()) / det;
        const double dp = -(-j21 * legs.r1() + j11 * legs.r2()) / det;

        double t = 1.0;
        bool improved = false;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            const double c_try = c + t * dc;
            const double p_try = p + t * dp;
            if (c_try <= 0.0) continue;
            if (kind == BranchKind::EvenD && std::abs(p_try - kPi / 2) < 1e-12) continue;
            const Legs trial = shoot(d, c_try, make_branch(kind, p_try), s);
            if (trial.finite() && trial.norm() < legs.norm()) {
                c = c_try;
                p = p_try;
                legs = trial;
                improved = true;
                break;
            }
        }
        if (!improved) {
            // Residual at the noise floor of the integrator.
            converged = legs.norm() <= 100.0 * s.match_tol * legs.scale();
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "Newton iteration for the profile did not converge (c = " << c << ", residual = " << legs.norm() << ")";
        throw ConvergenceError(msg.str());
    }

    SelfSimilarProfile prof;
    prof.d = d.value();
    prof.c = c;
    prof.branch = make_branch(kind, p);
    prof.settings = s;
    prof.match_residual = legs.norm();
    prof.origin = series::profile_origin_coeffs(d.value(), c, static_cast<std::size_t>(s.origin_order));
    prof.boundary = boundary_coefficients(d, prof.branch, static_cast<std::size_t>(s.boundary_order));
    prof.f1 = prof.boundary[0];
    prof.fp1 = -prof.boundary[1];
    prof.fpp1 = 2.0 * prof.boundary[2];

    const int m = std::max(11, s.sample_count);
    std::vector<double> ys(static_cast<std::size_t>(m));
    const double a = s.y0, b = 1.0 - s.delta;
    for (int i = 0; i < m; ++i) ys[static_cast<std::size_t>(i)] = a + (b - a) * i / (m - 1.0);
    const auto split = std::upper_bound(ys.begin(), ys.end(), s.y_mid);
    std::vector<double> left_y(ys.begin(), split), right_y(split, ys.end());

    std::vector<ProfileSample> left, right;
    const auto [f0, fp0] = origin_series(d, c, s.y0, s.origin_order);
    left.push_back({s.y0, f0, fp0});
    integrate_raw(d.value(), {s.y0, f0, fp0}, s.y_mid, s.ode_tol, std::span(left_y).subspan(1), &left);
    const auto [fb, fpb] = boundary_series(d, prof.branch, s.delta, s.boundary_order);
    right.push_back({b, fb, fpb});
    right_y.pop_back();
    integrate_raw(d.value(), {b, fb, fpb}, s.y_mid, s.ode_tol, right_y, &right);
    prof.samples = std::move(left);
    prof.samples.insert(prof.samples.end(), right.begin(), right.end());
    std::sort(prof.samples.begin(), prof.samples.end(),
              [](const ProfileSample& x, const ProfileSample& y) { return x.y < y.y; });
    prof.samples.erase(std::unique(prof.samples.begin(), prof.samples.end(),
                                   [](const ProfileSample& x, const ProfileSample& y) { return x.y == y.y; }),
                       prof.samples.end());
    prof.n = nodal_index(prof);
    return prof;
}

std::vector<ShootingCandidate> scan_profiles(Dimension d, BranchKind kind, std::pair<double, double> bracket,
                                             const ShootingSettings& s, int threads) {
    auto [lo, hi] = bracket;
    if (!(lo > 0.0 && hi > lo)) throw ValidationError("c bracket must satisfy 0 < lo < hi");
    const double decades = std::log10(hi / lo);
    const auto count = static_cast<std::size_t>(std::max(2.0, std::ceil(decades * s.scan_points_per_decade) + 1.0));
    std::vector<double> cs(count);
    for (std::size_t i = 0; i < count; ++i) cs[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1.0));

    std::vector<SeedPoint> seeds(count);
    parallel_for(count, threads, [&](std::size_t i) { seeds[i] = smoothness_defect(d, kind, cs[i], s); });

    std::vector<std::pair<double, double>> intervals;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const double a = seeds[i].defect, b = seeds[i + 1].defect;
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if ((a < 0.0) != (b < 0.0) || a == 0.0) intervals.emplace_back(cs[i], cs[i + 1]);
    }

    std::vector<std::optional<ShootingCandidate>> found(intervals.size());
    parallel_for(intervals.size(), threads, [&](std::size_t k) {
        auto defect = [&](double c) {
            const double v = smoothness_defect(d, kind, c, s).defect;
            return std::isfinite(v) ? v : 0.0;
        };
        double c_seed = 0.5 * (intervals[k].first + intervals[k].second);
        try {
            boost::uintmax_t iters = 60;
            const auto root = boost::math::tools::toms748_solve(
                defect, intervals[k].first, intervals[k].second, boost::math::tools::eps_tolerance<double>(40), iters);
            c_seed = 0.5 * (root.first + root.second);
        } catch (const std::exception&) {
        }
        const SeedPoint sp = smoothness_defect(d, kind, c_seed, s);
        if (!std::isfinite(sp.parameter)) return;
        try {
            const auto prof = polish_profile(d, c_seed, make_branch(kind, sp.parameter), s);
            found[k] = ShootingCandidate{prof.c, prof.branch, prof.n, prof.match_residual};
        } catch (const Error&) {
        }
    });

    std::vector<ShootingCandidate> out;
    for (auto& f : found) {
        if (!f) continue;
        const bool dup = std::any_of(out.begin(), out.end(), [&](const ShootingCandidate& o) {
            return std::abs(o.c - f->c) <= 1e-7 * std::max(1.0, o.c);
        });
        if (!dup) out.push_back(*f);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.c < b.c; });
    return out;
}

SelfSimilarProfile find_profile(Dimension d, int n, std::optional<std::pair<double, double>> c_bracket,
                                const ShootingSettings& settings, std::optional<BranchKind> kind, int threads) {
    if (n < 0) throw ValidationError("nodal index must be nonnegative");
    const auto bracket = c_bracket.value_or(default_c_bracket(d, n));
    const BranchKind k = kind.value_or(default_branch_kind(d, n));
    const auto candidates = scan_profiles(d, k, bracket, settings, threads);
    for (const auto& cand : candidates) {
        if (cand.nodal_index == n) return polish_profile(d, cand.c, cand.branch, settings);
    }
    std::ostringstream msg;
    msg << "no profile with nodal index " << n << " in c bracket [" << bracket.first << ", " << bracket.second
        << "] on branch " << to_string(k);
    if (!candidates.empty()) {
        msg << "; found:";
        for (const auto& cand : candidates) msg << " (c = " << cand.c << ", n = " << cand.nodal_index << ")";
    }
    throw ConvergenceError(msg.str());
}

// ---------------------------------------------------------------------------
// Profile evaluation and diagnostics
// ---------------------------------------------------------------------------

namespace {

// Cubic Hermite interpolation of (value, slope) pairs.
double hermite(double t, double h, double v0, double s0, double v1, double s1) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * s0 + (-2 * t3 + 3 * t2) * v1 + (t3 - t2) * h * s1;
}

double hermite_slope(double t, double h, double v0, double s0, double v1, double s1) {
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * v0 + (-6 * t2 + 6 * t) * v1) / h + (3 * t2 - 4 * t + 1) * s0 + (3 * t2 - 2 * t) * s1;
}

std::size_t locate(const std::vector<ProfileSample>& s, double y) {
    auto it = std::upper_bound(s.begin(), s.end(), y, [](double v, const ProfileSample& p) { return v < p.y; });
    std::size_t i = static_cast<std::size_t>(std::distance(s.begin(), it));
    return std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, s.size() - 2);
}

}  // namespace

double SelfSimilarProfile::f(double y) const {
    if (samples.size() < 2 || y <= samples.front().y) return series::evaluate(origin, y);
    if (y >= samples.back().y) return series::evaluate(boundary, 1.0 - y);
    const std::size_t i = locate(samples, y);
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    const double h = b.y - a.y;
    return hermite((y - a.y) / h, h, a.f, a.fp, b.f, b.fp);
}

double SelfSimilarProfile::fp(double y) const {
    if (samples.size() < 2 || y <= samples.front().y) return series::evaluate_derivative(origin, y);
    if (y >= samples.back().y) return -series::evaluate_derivative(boundary, 1.0 - y);
    const std::size_t i = locate(samples, y);
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    const double h = b.y - a.y;
    const double fpp_a = fpp(a.y), fpp_b = fpp(b.y);
    return hermite((y - a.y) / h, h, a.fp, fpp_a, b.fp, fpp_b);
}

double SelfSimilarProfile::fpp(double y) const {
    if (std::abs(1.0 - y) < settings.delta) {
        series::Coeffs d1(boundary.size() > 1 ? boundary.size() - 1 : 1, 0.0);
        for (std::size_t k = 1; k < boundary.size(); ++k) d1[k - 1] = static_cast<double>(k) * boundary[k];
        return series::evaluate_derivative(d1, 1.0 - y);
    }
    if (y < settings.y0) {
        series::Coeffs d1(origin.size() > 1 ? origin.size() - 1 : 1, 0.0);
        for (std::size_t k = 1; k < origin.size(); ++k) d1[k - 1] = static_cast<double>(k) * origin[k];
        return series::evaluate_derivative(d1, y);
    }
    std::array<double, 2> u{f(y), 0.0};
    // f' from the samples (or series) without recursing into fp().
    if (samples.size() >= 2 && y > samples.front().y && y < samples.back().y) {
        const std::size_t i = locate(samples, y);
        const auto& a = samples[i];
        const auto& b = samples[i + 1];
        const double h = b.y - a.y;
        u[1] = hermite_slope((y - a.y) / h, h, a.f, a.fp, b.f, b.fp);
        if (y == a.y) u[1] = a.fp;
    } else {
        u[1] = y <= settings.y0 ? series::evaluate_derivative(origin, y) : -series::evaluate_derivative(boundary, 1 - y);
    }
    std::array<double, 2> du{};
    profile_ode_rhs(d, y, u, du);
    return du[1];
}

double SelfSimilarProfile::boundary_identity_a() const {
    return (d - 3.0) * fp1 - 0.5 * (d - 1.0) * std::sin(2.0 * f1);
}

double SelfSimilarProfile::boundary_identity_b() const {
    return (d - 5.0) * fpp1 + (d - 7.0 - (d - 1.0) * std::cos(2.0 * f1)) * fp1;
}

std::string SelfSimilarProfile::id() const {
    return "f" + std::to_string(n) + "_d" + std::to_string(d);
}

std::vector<double> derivative_zeros(const SelfSimilarProfile& p) {
    std::vector<double> zeros;
    const auto& s = p.samples;
    auto slope_at = [&](const ProfileSample& q) {
        std::array<double, 2> u{q.f, q.fp}, du{};
        profile_ode_rhs(p.d, q.y, u, du);
        return du[1];
    };
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double a = s[i].fp, b = s[i + 1].fp;
        if (a == 0.0 || (a < 0.0) == (b < 0.0)) continue;
        if (b == 0.0 && i + 2 < s.size() && (s[i + 2].fp < 0.0) == (a < 0.0)) continue;
        const double h = s[i + 1].y - s[i].y;
        const double sa = slope_at(s[i]), sb = slope_at(s[i + 1]);
        double lo = 0.0, hi = 1.0;
        const double flo = hermite(lo, h, a, sa, b, sb);
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = hermite(mid, h, a, sa, b, sb);
            if ((fm < 0.0) == (flo < 0.0)) lo = mid;
            else hi = mid;
        }
        const double y = s[i].y + 0.5 * (lo + hi) * h;
        const double slope = hermite_slope(0.5 * (lo + hi), h, a, sa, b, sb);
        if (std::abs(slope) > 1e-8) zeros.push_back(y);
    }
    return zeros;
}

int nodal_index(const SelfSimilarProfile& p) {
    const int zeros = static_cast<int>(derivative_zeros(p).size());
    const Dimension d(p.d);
    if (std::abs(p.c - d.c0()) <= 1e-6 * d.c0()) return 0;
    if (p.d == 5 || p.d == 6) return zeros + 1;
    return zeros;
}

double max_ode_residual(const SelfSimilarProfile& p) {
    const auto& s = p.samples;
    if (s.size() < 5) return 0.0;
    const double dm1 = p.d - 1.0;
    double max_fpp = 0.0, max_res = 0.0;
    std::vector<double> res;
    for (std::size_t i = 2; i + 2 < s.size(); ++i) {
        const double h = s[i + 1].y - s[i].y;
        const double fpp = (s[i - 2].fp - 8.0 * s[i - 1].fp + 8.0 * s[i + 1].fp - s[i + 2].fp) / (12.0 * h);
        const double y = s[i].y;
        const double r = (1.0 - y * y) * fpp + (dm1 / y - 2.0 * y) * s[i].fp - 0.5 * dm1 / (y * y) * std::sin(2.0 * s[i].f);
        max_fpp = std::max(max_fpp, std::abs(fpp));
        max_res = std::max(max_res, std::abs(r));
    }
    return max_fpp > 0.0 ? max_res / max_fpp : max_res;
}

std::vector<ProfileSample> extend_profile(const SelfSimilarProfile& p, std::span<const double> y_values, double tol) {
    std::vector<ProfileSample> out;
    out.reserve(y_values.size());
    const double start = 1.0 + p.settings.delta;
    std::vector<double> far;
    for (double y : y_values) {
        if (y <= start) out.push_back({y, p.f(y), p.fp(y)});
        else far.push_back(y);
    }
    if (!far.empty()) {
        std::sort(far.begin(), far.end());
        const OdePoint from{start, series::evaluate(p.boundary, -p.settings.delta),
                            -series::evaluate_derivative(p.boundary, -p.settings.delta)};
        std::vector<ProfileSample> dense;
        integrate_raw(p.d, from, far.back(), tol, far, &dense);
        out.insert(out.end(), dense.begin(), dense.end());
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.y < b.y; });
    return out;
}

}  // namespace wmlab
