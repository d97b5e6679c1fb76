#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wmlab/dimension.hpp"
#include "wmlab/power_series.hpp"

namespace wmlab {

// ---------------------------------------------------------------------------
// Boundary behaviour at the light cone y = 1
// ---------------------------------------------------------------------------

/// d = 3: f(1) = pi/2, free parameter f'(1).
struct BranchD3 { double fp1 = 0.0; };
/// d = 5: f(1) = pi/2, f'(1) = 0, free parameter f''(1).
struct BranchD5Main { double fpp1 = 0.0; };
/// d = 5: f(1) = pi/3, f'(1) = sqrt(3)/2, free parameter f''(1).
struct BranchD5Alt { double fpp1 = 0.0; };
/// d = 4, 6 (any even d): free parameter f(1) != pi/2.
struct BranchEvenD { double f1 = 0.0; };

using BoundaryBranch = std::variant<BranchD3, BranchD5Main, BranchD5Alt, BranchEvenD>;

enum class BranchKind { D3, D5Main, D5Alt, EvenD };

BranchKind kind_of(const BoundaryBranch& branch);
std::string to_string(BranchKind kind);
BranchKind branch_kind_from_string(const std::string& name);

/// The single free parameter carried by the branch.
double branch_parameter(const BoundaryBranch& branch);
BoundaryBranch make_branch(BranchKind kind, double parameter);

/// Throws ValidationError if the branch cannot describe a smooth solution in d.
void validate_branch(Dimension d, const BoundaryBranch& branch);

/// Branch searched by default: D3, EvenD, and for d = 5 D5Main when n >= 1.
/// The explicit solution f_0 in d = 5 has f(1) = pi/3 and lives on D5Alt.
BranchKind default_branch_kind(Dimension d, int n);

/// Taylor coefficients of f in x = 1 - y for the branch.
series::Coeffs boundary_coefficients(Dimension d, const BoundaryBranch& branch, std::size_t order = 10);

// ---------------------------------------------------------------------------
// Converged profile
// ---------------------------------------------------------------------------

struct ProfileSample {
    double y = 0.0;
    double f = 0.0;
    double fp = 0.0;
};

/// Numerical settings of the two-sided shooting. Recorded with every profile.
struct ShootingSettings {
    double y0 = 1e-4;          ///< origin-series offset
    double delta = 1e-3;       ///< boundary-series offset, legs start at 1 - delta
    double y_mid = 0.5;        ///< matching point
    double ode_tol = 1e-14;    ///< DOPRI5 rtol = atol on each leg
    double match_tol = 1e-12;  ///< relative matching tolerance for Newton
    int origin_order = 11;
    int boundary_order = 10;
    int scan_points_per_decade = 200;
    int max_newton_iterations = 60;
    int sample_count = 2001;
};

struct SelfSimilarProfile {
    int d = 3;
    int n = 0;
    double c = 0.0;  ///< f'(0)
    BoundaryBranch branch;
    double f1 = 0.0;    ///< f(1)
    double fp1 = 0.0;   ///< f'(1)
    double fpp1 = 0.0;  ///< f''(1)
    double match_residual = 0.0;  ///< max |mismatch| at y_mid after Newton
    ShootingSettings settings;
    std::vector<ProfileSample> samples;  ///< on [y0, 1 - delta], strictly increasing y
    series::Coeffs origin;    ///< f in powers of y
    series::Coeffs boundary;  ///< f in powers of 1 - y

    Dimension dimension() const { return Dimension(d); }

    /// f(y) on [0, 1 + delta]; series near the endpoints, cubic Hermite on the samples.
    double f(double y) const;
    double fp(double y) const;
    /// f'' from the ODE itself (valid for 0 < y, y != 1).
    double fpp(double y) const;

    /// Identity (9a)-type residual (d-3) f'(1) - (d-1)/2 sin(2 f(1)).
    double boundary_identity_a() const;
    /// (d-5) f''(1) + (d-7 - (d-1) cos(2 f(1))) f'(1).
    double boundary_identity_b() const;
    std::string id() const;
};

/// f_0(y) = 2 arctan(y / sqrt(d-2)), y in [0, 1].
double closed_form_f0(Dimension d, double y);
double closed_form_f0_derivative(Dimension d, double y);

struct OdePoint {
    double y = 0.0;
    double f = 0.0;
    double fp = 0.0;
};

/// (f, f') at y0 of the smooth local solution with f'(0) = c.
std::pair<double, double> origin_series(Dimension d, double c, double y0, int order = 11);

/// (f, f') at y = 1 - delta of the smooth local solution on `branch`.
std::pair<double, double> boundary_series(Dimension d, const BoundaryBranch& branch, double delta,
                                          int order = 10);

/// Right-hand side of the profile ODE as a first-order system (f, f').
void profile_ode_rhs(int d, double y, std::span<const double> u, std::span<double> du);

/// Integrate the profile ODE from `from` to `to_y` (both inside (0, 1)).
/// `dense`, if given, receives samples of the trajectory at the requested y
/// values (any order; values outside the interval are ignored).
OdePoint integrate_ode(Dimension d, const OdePoint& from, double to_y, double tol,
                       std::span<const double> sample_y = {}, std::vector<ProfileSample>* dense = nullptr);

/// Two-sided shooting residual (f_left - f_right, f'_left - f'_right) at y_mid.
/// Integration failures give non-finite residuals.
std::pair<double, double> match_residual(Dimension d, double c, const BoundaryBranch& branch,
                                         const ShootingSettings& settings = {});
std::pair<double, double> match_residual(Dimension d, double c, const BoundaryBranch& branch, double y_mid);

/// One converged root of the shooting problem found by `scan_profiles`.
struct ShootingCandidate {
    double c = 0.0;
    BoundaryBranch branch;
    int nodal_index = -1;
    double residual = 0.0;
};

/// Scan c over `bracket` (log-spaced), seed a damped Newton iteration at each
/// sign change of the one-sided smoothness defect and return every converged
/// root (sorted by c, duplicates removed).
std::vector<ShootingCandidate> scan_profiles(Dimension d, BranchKind kind, std::pair<double, double> bracket,
                                             const ShootingSettings& settings = {}, int threads = 1);

/// Default c bracket: (c0/2, 1.5 c0) for n = 0, (1.5 c0, 20 c0) for n = 1 and
/// (1.5 c0, 200 c0) above.
std::pair<double, double> default_c_bracket(Dimension d, int n);

/// Newton-polish (c, branch parameter) and assemble the sampled profile.
SelfSimilarProfile polish_profile(Dimension d, double c, const BoundaryBranch& seed,
                                  const ShootingSettings& settings = {});

/// Smooth self-similar profile with nodal index n inside the bracket.
SelfSimilarProfile find_profile(Dimension d, int n, std::optional<std::pair<double, double>> c_bracket = {},
                                const ShootingSettings& settings = {}, std::optional<BranchKind> kind = {},
                                int threads = 1);

/// Zeros of f' on (0, 1), refined between samples.
std::vector<double> derivative_zeros(const SelfSimilarProfile& p);

/// Nodal index: number of zeros N of f' for d = 3, 4 and N + 1 for d = 5, 6,
/// except that the explicit solution f_0 (c = 2/sqrt(d-2)) has index 0.
int nodal_index(const SelfSimilarProfile& p);

/// Largest ODE residual at interior samples, with f'' reconstructed from the
/// sampled f' by fourth-order differences, divided by max |f''|.
double max_ode_residual(const SelfSimilarProfile& p);

/// Continue a profile past the light cone: (f, f') at increasing y > 1 + delta.
std::vector<ProfileSample> extend_profile(const SelfSimilarProfile& p, std::span<const double> y_values,
                                          double tol = 1e-12);

}  // namespace wmlab
