#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace wmlab::series {

/// Truncated power series, coefficient k multiplies z^k.
using Coeffs = std::vector<double>;

Coeffs multiply(std::span<const double> a, std::span<const double> b, std::size_t order);

/// sin(g) and cos(g) of a truncated series, both truncated at `order`.
std::pair<Coeffs, Coeffs> sin_cos(std::span<const double> g, std::size_t order);

double evaluate(std::span<const double> a, double z);
double evaluate_derivative(std::span<const double> a, double z);

// ---------------------------------------------------------------------------
// Local solutions of the self-similar profile equation
//
//   (1-y^2) f'' + ((d-1)/y - 2y) f' - (d-1)/(2y^2) sin(2f) = 0
//
// around the regular singular points y = 0 and y = 1.
// ---------------------------------------------------------------------------

/// Odd series f = c y + a3 y^3 + ... in powers of y, up to y^order.
Coeffs profile_origin_coeffs(int d, double c, std::size_t order);

/// Coefficients of f as a series in x = 1 - y.
///
/// b0 = f(1) is always supplied. At the resonant order k = (d-3)/2 the
/// coefficient b_{k+1} is free and must be supplied through `free_value`;
/// all other coefficients follow from the equation.
struct BoundarySeries {
    Coeffs b;
    /// Residual of the equation at the resonant order, i.e. the defect of the
    /// compatibility condition on (b0, b1). Zero for a consistent branch.
    double compatibility_defect = 0.0;
};
BoundarySeries profile_boundary_coeffs(int d, double b0, double free_value, std::size_t order);

/// Index of the free boundary coefficient, or -1 when d is even.
int boundary_free_index(int d);

// ---------------------------------------------------------------------------
// Local solutions of the linearized (quadratic eigenvalue) equation
//
//   (1-y^2) v'' + ((d-1)/y - 2(lambda+1)y) v' - lambda(lambda+1) v
//       - (d-1)/y^2 cos(2f) v = 0
// ---------------------------------------------------------------------------

/// Regular solution v = y + O(y^3) at the origin. `cos2f` is cos(2f) in powers
/// of y (from the profile's origin series).
Coeffs perturbation_origin_coeffs(int d, double lambda, std::span<const double> cos2f,
                                  std::size_t order);

/// Analytic (Frobenius index 0) solution at y = 1 in powers of x = 1 - y.
///
/// Denominators are cleared as the recurrence proceeds, so the result is the
/// analytic solution multiplied by a lambda-dependent constant that vanishes
/// only at resonances (where the second index (d-1)/2 - lambda is a positive
/// integer). Near a resonance with a logarithmic obstruction the series
/// smoothly turns into the index-m solution x^m (1 + ...), which keeps the
/// matching determinant free of poles. An all-zero result signals a
/// degenerate recursion.
Coeffs perturbation_boundary_coeffs(int d, double lambda, std::span<const double> cos2g,
                                    std::size_t order);

/// At a resonance m = (d-1)/2 - lambda in {1, 2, ...}: the scaled residual that
/// obstructs the analytic index-0 solution (zero when every solution is
/// smooth at y = 1). NaN away from resonances.
double perturbation_boundary_obstruction(int d, double lambda, std::span<const double> cos2g);

}  // namespace wmlab::series
