#include "wmlab/power_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wmlab/error.hpp"

namespace wmlab::series {

namespace {

double at(std::span<const double> a, long k) {
    return (k >= 0 && static_cast<std::size_t>(k) < a.size()) ? a[static_cast<std::size_t>(k)] : 0.0;
}

// x(2-x)(1-x)^2 = 2x - 5x^2 + 4x^3 - x^4
constexpr double kBoundaryP2[5] = {0.0, 2.0, -5.0, 4.0, -1.0};

// Coefficient of x^k in P2 g'' + sum_{i>=1} p_i x^i g' with the x^0 part of
// the first-derivative coefficient and the x^1 part of P2 left out; those are
// the terms that multiply the next unknown b_{k+1}.
double boundary_known_derivative_terms(std::span<const double> b, long k, const double (&p)[4]) {
    double e = 0.0;
    for (long i = 2; i <= 4; ++i) {
        const long j = k - i;  // index into g''
        if (j >= 0) e += kBoundaryP2[i] * static_cast<double>((j + 2) * (j + 1)) * at(b, j + 2);
    }
    for (long i = 1; i <= 3; ++i) {
        const long j = k - i;  // index into g'
        if (j >= 0) e += p[i] * static_cast<double>(j + 1) * at(b, j + 1);
    }
    return e;
}

}  // namespace

Coeffs multiply(std::span<const double> a, std::span<const double> b, std::size_t order) {
    Coeffs c(order + 1, 0.0);
    for (std::size_t i = 0; i < a.size() && i <= order; ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size() && i + j <= order; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

std::pair<Coeffs, Coeffs> sin_cos(std::span<const double> g, std::size_t order) {
    Coeffs s(order + 1, 0.0), c(order + 1, 0.0);
    const double g0 = g.empty() ? 0.0 : g[0];
    s[0] = std::sin(g0);
    c[0] = std::cos(g0);
    // S' = C G', C' = -S G'
    for (std::size_t k = 1; k <= order; ++k) {
        double ss = 0.0, cc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            const double jg = static_cast<double>(j) * at(g, static_cast<long>(j));
            if (jg == 0.0) continue;
            ss += jg * c[k - j];
            cc -= jg * s[k - j];
        }
        s[k] = ss / static_cast<double>(k);
        c[k] = cc / static_cast<double>(k);
    }
    return {std::move(s), std::move(c)};
}

double evaluate(std::span<const double> a, double z) {
    double r = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) r = r * z + *it;
    return r;
}

double evaluate_derivative(std::span<const double> a, double z) {
    double r = 0.0;
    for (std::size_t k = a.size(); k-- > 1;) r = r * z + static_cast<double>(k) * a[k];
    return r;
}

Coeffs profile_origin_coeffs(int d, double c, std::size_t order) {
    const double dm1 = d - 1.0;
    Coeffs a(order + 1, 0.0);
    if (order >= 1) a[1] = c;
    for (std::size_t k = 3; k <= order; k += 2) {
        // Order-k residual with a_k = 0; the a_k coefficient is (k-1)(k+d-1).
        const Coeffs twice = [&] {
            Coeffs t(k + 1);
            for (std::size_t j = 0; j <= k; ++j) t[j] = 2.0 * a[j];
            return t;
        }();
        const double sk = sin_cos(twice, k).first[k];
        const double kk = static_cast<double>(k);
        const double e = -(kk - 2.0) * (kk - 3.0) * a[k - 2] - 2.0 * (kk - 2.0) * a[k - 2] - 0.5 * dm1 * sk;
        a[k] = -e / ((kk - 1.0) * (kk + dm1));
    }
    return a;
}

int boundary_free_index(int d) {
    return (d % 2 == 1) ? (d - 3) / 2 + 1 : -1;
}

BoundarySeries profile_boundary_coeffs(int d, double b0, double free_value, std::size_t order) {
    const double dm1 = d - 1.0;
    // -[(d-1)(1-x) - 2(1-x)^3]
    const double p[4] = {3.0 - d, d - 7.0, 6.0, -2.0};
    BoundarySeries out;
    out.b.assign(order + 1, 0.0);
    auto& b = out.b;
    b[0] = b0;
    const int free_index = boundary_free_index(d);
    for (std::size_t k = 0; k + 1 <= order; ++k) {
        const long kl = static_cast<long>(k);
        Coeffs twice(k + 1);
        for (std::size_t j = 0; j <= k; ++j) twice[j] = 2.0 * b[j];
        const double sk = sin_cos(twice, k).first[k];
        const double e = boundary_known_derivative_terms(b, kl, p) - 0.5 * dm1 * sk;
        const double den = static_cast<double>(k + 1) * (2.0 * static_cast<double>(k) + 3.0 - d);
        if (static_cast<int>(k) + 1 == free_index) {
            out.compatibility_defect = e;
            b[k + 1] = free_value;
        } else {
            b[k + 1] = -e / den;
        }
    }
    return out;
}

Coeffs perturbation_origin_coeffs(int d, double lambda, std::span<const double> cos2f, std::size_t order) {
    const double dm1 = d - 1.0;
    const double lam1 = lambda + 1.0;
    Coeffs v(order + 1, 0.0);
    if (order >= 1) v[1] = 1.0;
    for (std::size_t k = 3; k <= order; k += 2) {
        const double kk = static_cast<double>(k);
        double conv = 0.0;  // (C v)_k without the C_0 v_k term
        for (std::size_t j = 1; j <= k; ++j) conv += at(cos2f, static_cast<long>(j)) * v[k - j];
        const double e = -(kk - 2.0) * (kk - 3.0) * v[k - 2] - 2.0 * lam1 * (kk - 2.0) * v[k - 2]
                         - lambda * lam1 * v[k - 2] - dm1 * conv;
        const double den = kk * (kk - 1.0) + dm1 * kk - dm1 * at(cos2f, 0);
        v[k] = -e / den;
    }
    return v;
}

namespace {

// Known part of the order-k equation for the index-0 solution at y = 1 and the
// factor multiplying v_{k+1}.
std::pair<double, double> perturbation_boundary_step(int d, double lambda, std::span<const double> cos2g,
                                                     std::span<const double> v, std::size_t k) {
    const double dm1 = d - 1.0;
    const double lam1 = lambda + 1.0;
    const double p[4] = {2.0 * lam1 - dm1, dm1 - 6.0 * lam1, 6.0 * lam1, -2.0 * lam1};
    const long kl = static_cast<long>(k);
    double e = boundary_known_derivative_terms(v, kl, p);
    e += -lambda * lam1 * (at(v, kl) - 2.0 * at(v, kl - 1) + at(v, kl - 2));
    double conv = 0.0;
    for (std::size_t j = 0; j <= k; ++j) conv += at(cos2g, static_cast<long>(j)) * at(v, kl - static_cast<long>(j));
    e -= dm1 * conv;
    const double den = static_cast<double>(k + 1) * (2.0 * static_cast<double>(k) + 2.0 * lambda + 3.0 - d);
    return {e, den};
}

}  // namespace

double perturbation_boundary_obstruction(int d, double lambda, std::span<const double> cos2g) {
    const double m = 0.5 * (d - 1.0) - lambda;
    const double mr = std::round(m);
    if (mr < 1.0 || std::abs(m - mr) > 1e-12) return std::numeric_limits<double>::quiet_NaN();
    const auto top = static_cast<std::size_t>(mr);
    Coeffs v(top + 1, 0.0);
    v[0] = 1.0;
    for (std::size_t k = 0; k + 1 < top; ++k) {
        const auto [e, den] = perturbation_boundary_step(d, lambda, cos2g, v, k);
        v[k + 1] = -e / den;
    }
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    return perturbation_boundary_step(d, lambda, cos2g, v, top - 1).first / scale;
}

Coeffs perturbation_boundary_coeffs(int d, double lambda, std::span<const double> cos2g, std::size_t order) {
    Coeffs v(order + 1, 0.0);
    v[0] = 1.0;
    for (std::size_t k = 0; k + 1 <= order; ++k) {
        const auto [e, den] = perturbation_boundary_step(d, lambda, cos2g, v, k);
        double scale = 0.0;
        for (std::size_t j = 0; j <= k; ++j) scale = std::max(scale, std::abs(v[j]));
        if (std::abs(den) < 1e-13 * static_cast<double>(k + 1) && std::abs(e) <= 1e-12 * scale) {
            // Exact resonance without a logarithm: the coefficient is free.
            v[k + 1] = 0.0;
            continue;
        }
        // v_{k+1} = -e/den, applied as "multiply everything by den".
        for (std::size_t j = 0; j <= k; ++j) v[j] *= den;
        v[k + 1] = -e;
        double m = 0.0;
        for (std::size_t j = 0; j <= k + 1; ++j) m = std::max(m, std::abs(v[j]));
        if (m > 0.0 && std::isfinite(m)) {
            for (std::size_t j = 0; j <= k + 1; ++j) v[j] /= m;
        }
    }
    return v;
}

}  // namespace wmlab::series
