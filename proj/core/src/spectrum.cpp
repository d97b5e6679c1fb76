#include "wmlab/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "wmlab/dopri5.hpp"
#include "wmlab/error.hpp"
#include "wmlab/parallel.hpp"
#include "wmlab/power_series.hpp"

namespace wmlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using State = std::array<double, 4>;  // f, f', v, v'

OdeRhs augmented_rhs(int d, double lambda) {
    const double dm1 = d - 1.0;
    const double ll = lambda * (lambda + 1.0);
    return [=](double y, std::span<const double> u, std::span<double> du) {
        const double w = 1.0 - y * y;
        const double y2 = y * y;
        du[0] = u[1];
        du[1] = (0.5 * dm1 / y2 * std::sin(2.0 * u[0]) - (dm1 / y - 2.0 * y) * u[1]) / w;
        du[2] = u[3];
        du[3] = (ll * u[2] + dm1 / y2 * std::cos(2.0 * u[0]) * u[2] - (dm1 / y - 2.0 * (lambda + 1.0) * y) * u[3]) / w;
    };
}

// Profile data shared by every lambda.
struct Seeds {
    State left{};                 // f, f' at y0; v, v' filled per lambda
    series::Coeffs origin_cos2f;  // cos(2f) in powers of y
    State right{};                // f, f' at 1 - delta
    series::Coeffs boundary_cos2g;
};

Seeds make_seeds(const SelfSimilarProfile& p, const SpectrumSettings& s) {
    Seeds seeds;
    const auto no = static_cast<std::size_t>(s.origin_order);
    const auto nb = static_cast<std::size_t>(s.boundary_order);
    auto f = series::profile_origin_coeffs(p.d, p.c, no);
    for (auto& a : f) a *= 2.0;
    seeds.origin_cos2f = series::sin_cos(f, no).second;
    seeds.left[0] = 0.5 * series::evaluate(f, s.y0);
    seeds.left[1] = 0.5 * series::evaluate_derivative(f, s.y0);

    auto g = boundary_coefficients(p.dimension(), p.branch, nb);
    seeds.right[0] = series::evaluate(g, s.delta);
    seeds.right[1] = -series::evaluate_derivative(g, s.delta);
    for (auto& a : g) a *= 2.0;
    seeds.boundary_cos2g = series::sin_cos(g, nb).second;
    return seeds;
}

struct Legs {
    State left{}, right{};
    bool ok = false;
};

Legs shoot(const SelfSimilarProfile& p, double lambda, const Seeds& seeds, const SpectrumSettings& s,
           std::vector<EigenSample>* left_samples = nullptr, std::vector<EigenSample>* right_samples = nullptr,
           std::span<const double> left_y = {}, std::span<const double> right_y = {}) {
    Legs legs;
    if (!std::isfinite(lambda)) return legs;
    const auto no = static_cast<std::size_t>(s.origin_order);
    const auto nb = static_cast<std::size_t>(s.boundary_order);
    const auto vo = series::perturbation_origin_coeffs(p.d, lambda, seeds.origin_cos2f, no);
    const auto vb = series::perturbation_boundary_coeffs(p.d, lambda, seeds.boundary_cos2g, nb);
    if (std::all_of(vb.begin(), vb.end(), [](double x) { return x == 0.0; })) return legs;

    State l = seeds.left, r = seeds.right;
    l[2] = series::evaluate(vo, s.y0);
    l[3] = series::evaluate_derivative(vo, s.y0);
    r[2] = series::evaluate(vb, s.delta);
    r[3] = -series::evaluate_derivative(vb, s.delta);

    Dopri5Options opt;
    opt.rtol = s.ode_tol;
    opt.atol = s.ode_tol;
    const auto rhs = augmented_rhs(p.d, lambda);
    auto sampler = [](std::vector<EigenSample>* out, std::span<const double> ys) {
        return [out, ys](const Dopri5& st) {
            const double a = std::min(st.t_previous(), st.t());
            const double b = std::max(st.t_previous(), st.t());
            for (auto it = std::lower_bound(ys.begin(), ys.end(), a); it != ys.end() && *it <= b; ++it) {
                if (*it == st.t_previous() && st.accepted_steps() > 1) continue;
                out->push_back({*it, st.interpolate(*it, 2), st.interpolate(*it, 3)});
            }
        };
    };
    try {
        std::function<void(const Dopri5&)> obs_l, obs_r;
        if (left_samples) obs_l = sampler(left_samples, left_y);
        if (right_samples) obs_r = sampler(right_samples, right_y);
        const auto yl = integrate(rhs, s.y0, l, s.y_mid, opt, obs_l);
        const auto yr = 1.0 - s.delta > s.y_mid ? integrate(rhs, 1.0 - s.delta, r, s.y_mid, opt, obs_r)
                                                : std::vector<double>(r.begin(), r.end());
        std::copy(yl.begin(), yl.end(), legs.left.begin());
        std::copy(yr.begin(), yr.end(), legs.right.begin());
        legs.ok = true;
    } catch (const ConvergenceError&) {
    }
    return legs;
}

double determinant(const Legs& legs) {
    if (!legs.ok) return kNaN;
    const double nl = std::hypot(legs.left[2], legs.left[3]);
    const double nr = std::hypot(legs.right[2], legs.right[3]);
    if (!(nl > 0.0) || !(nr > 0.0)) return kNaN;
    return (legs.left[2] * legs.right[3] - legs.left[3] * legs.right[2]) / (nl * nr);
}

// Every solution is smooth at y = 1 when lambda sits on a resonance whose
// logarithmic term vanishes; the matching condition then holds trivially.
bool smooth_resonance(int d, double lambda, const Seeds& seeds) {
    const double obstruction = series::perturbation_boundary_obstruction(d, lambda, seeds.boundary_cos2g);
    return std::isfinite(obstruction) && std::abs(obstruction) < 1e-10;
}

void validate(const SpectrumSettings& s) {
    if (!(s.y_mid > s.y0 && s.y_mid < 1.0 - s.delta)) throw ValidationError("spectrum: y_mid must lie in (y0, 1 - delta)");
    if (!(s.ode_tol > 0.0)) throw ValidationError("spectrum: tolerance must be positive");
    if (s.scan_points < 2) throw ValidationError("spectrum: need at least two scan points");
}

}  // namespace

std::vector<double> SpectrumReport::eigenvalues() const {
    std::vector<double> out;
    out.reserve(eigenpairs.size());
    for (const auto& e : eigenpairs) out.push_back(e.lambda);
    return out;
}

double mu_of_lambda(Dimension d, double lambda) { return lambda * (d.as_double() - 1.0 - lambda); }

double lambda_of_mu(Dimension d, double mu) {
    const double dm1 = d.as_double() - 1.0;
    const double disc = dm1 * dm1 - 4.0 * mu;
    if (disc < 0.0) throw ValidationError("lambda_of_mu: mu exceeds (d-1)^2/4");
    return 0.5 * (dm1 + std::sqrt(disc));
}

double eigen_residual(const SelfSimilarProfile& p, double lambda, const SpectrumSettings& settings) {
    validate(settings);
    const Seeds seeds = make_seeds(p, settings);
    if (smooth_resonance(p.d, lambda, seeds)) return 0.0;
    return determinant(shoot(p, lambda, seeds, settings));
}

double eigen_residual(const SelfSimilarProfile& p, double lambda, double y_mid) {
    SpectrumSettings s;
    s.y_mid = y_mid;
    return eigen_residual(p, lambda, s);
}

EigenPair eigenpair(const SelfSimilarProfile& p, double lambda, const SpectrumSettings& settings) {
    validate(settings);
    const Seeds seeds = make_seeds(p, settings);
    SpectrumSettings s = settings;
    const bool resonant = smooth_resonance(p.d, lambda, seeds);
    if (resonant) s.y_mid = 1.0 - s.delta;
    const int m = std::max(11, s.sample_count);
    std::vector<double> ys(static_cast<std::size_t>(m));
    const double a = s.y0, b = 1.0 - s.delta;
    for (int i = 0; i < m; ++i) ys[static_cast<std::size_t>(i)] = a + (b - a) * i / (m - 1.0);
    const auto split = std::upper_bound(ys.begin(), ys.end(), s.y_mid);
    std::vector<double> left_y(ys.begin(), split), right_y(split, ys.end());

    std::vector<EigenSample> left, right;
    const Legs legs = shoot(p, lambda, seeds, s, &left, &right, left_y, right_y);
    if (!legs.ok) throw ConvergenceError("eigenfunction integration failed");

    // Scale the right leg onto the left one at y_mid (least squares in (v, v')).
    const double num = legs.left[2] * legs.right[2] + legs.left[3] * legs.right[3];
    const double den = legs.right[2] * legs.right[2] + legs.right[3] * legs.right[3];
    const double scale = num / den;
    for (auto& e : right) {
        e.v *= scale;
        e.vp *= scale;
    }
    EigenPair out;
    out.lambda = lambda;
    out.mu = mu_of_lambda(p.dimension(), lambda);
    out.residual = resonant ? 0.0 : determinant(legs);
    out.v_samples = std::move(left);
    out.v_samples.insert(out.v_samples.end(), right.begin(), right.end());
    std::sort(out.v_samples.begin(), out.v_samples.end(), [](const auto& x, const auto& y) { return x.y < y.y; });
    return out;
}

std::pair<double, double> default_lambda_range(Dimension d) { return {-5.0, d.as_double() + 3.0}; }

SpectrumReport find_eigenvalues(const SelfSimilarProfile& p, std::pair<double, double> range, int max_count,
                                const SpectrumSettings& s, int threads, bool with_eigenfunctions) {
    validate(s);
    const auto [lo, hi] = range;
    if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo)) throw ValidationError("lambda range must be finite with lo < hi");
    const Seeds seeds = make_seeds(p, s);
    auto det = [&](double lambda) {
        return smooth_resonance(p.d, lambda, seeds) ? 0.0 : determinant(shoot(p, lambda, seeds, s));
    };

    const auto count = static_cast<std::size_t>(s.scan_points);
    std::vector<double> grid(count), values(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1.0);
    parallel_for(count, threads, [&](std::size_t i) { values[i] = det(grid[i]); });

    std::vector<std::pair<double, double>> brackets;
    std::vector<double> exact;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const double a = values[i], b = values[i + 1];
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if (a == 0.0) exact.push_back(grid[i]);
        else if ((a < 0.0) != (b < 0.0) && b != 0.0) brackets.emplace_back(grid[i], grid[i + 1]);
    }
    if (values.back() == 0.0) exact.push_back(grid.back());
    for (double m = 1.0; 0.5 * (p.d - 1.0) - m >= lo; m += 1.0) {
        const double lambda = 0.5 * (p.d - 1.0) - m;
        if (lambda <= hi && smooth_resonance(p.d, lambda, seeds)) exact.push_back(lambda);
    }

    std::vector<double> roots(brackets.size(), kNaN);
    parallel_for(brackets.size(), threads, [&](std::size_t k) {
        auto tol = [&](double a, double b) { return std::abs(b - a) <= s.polish_rtol * std::max(1.0, std::abs(a)); };
        boost::uintmax_t iters = 200;
        try {
            const auto r = boost::math::tools::toms748_solve(det, brackets[k].first, brackets[k].second, tol, iters);
            roots[k] = 0.5 * (r.first + r.second);
        } catch (const std::exception&) {
        }
    });
    roots.insert(roots.end(), exact.begin(), exact.end());

    std::vector<double> accepted;
    for (double r : roots) {
        if (!std::isfinite(r)) continue;
        const double v = det(r);
        if (!(std::abs(v) <= s.root_det_max)) continue;
        const bool dup = std::any_of(accepted.begin(), accepted.end(),
                                     [&](double a) { return std::abs(a - r) <= 1e-8 * std::max(1.0, std::abs(a)); });
        if (!dup) accepted.push_back(r);
    }
    std::sort(accepted.begin(), accepted.end(), std::greater<>());
    if (max_count > 0 && accepted.size() > static_cast<std::size_t>(max_count)) accepted.resize(static_cast<std::size_t>(max_count));

    SpectrumReport report;
    report.profile_id = p.id();
    report.d = p.d;
    report.n = p.n;
    report.range = range;
    const double dm2 = p.d - 2.0;
    for (double r : accepted) {
        if (with_eigenfunctions) {
            report.eigenpairs.push_back(eigenpair(p, r, s));
        } else {
            report.eigenpairs.push_back({r, mu_of_lambda(p.dimension(), r), det(r), {}});
        }
        if (std::abs(r - dm2) <= 1e-6) {
            // d = 3 has its gauge mode at d - 2 = 1.
            if (p.d != 3) ++report.count_at_dm2;
        } else if (r > dm2) {
            ++report.count_above_dm2;
        }
    }
    report.gauge_residual = std::abs(det(1.0));
    report.sturm_count = sturm_mode_count(p);
    return report;
}

int sturm_mode_count(const SelfSimilarProfile& p) { return static_cast<int>(derivative_zeros(p).size()); }

}  // namespace wmlab
