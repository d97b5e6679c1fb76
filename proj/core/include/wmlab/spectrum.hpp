#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wmlab/dimension.hpp"
#include "wmlab/profiles.hpp"

namespace wmlab {

struct SpectrumSettings {
    double y0 = 1e-4;
    double delta = 0.1;  ///< right leg starts at 1 - delta
    double y_mid = 0.7;
    double ode_tol = 1e-13;
    int origin_order = 15;
    int boundary_order = 40;
    int scan_points = 1000;
    double polish_rtol = 1e-10;
    /// Polished roots with |det| above this are rejected.
    double root_det_max = 1e-6;
    int sample_count = 401;
};

struct EigenSample {
    double y = 0.0;
    double v = 0.0;
    double vp = 0.0;
};

struct EigenPair {
    double lambda = 0.0;
    double mu = 0.0;
    double residual = 0.0;  ///< matching determinant at lambda
    std::vector<EigenSample> v_samples;  ///< normalized so that v'(0) = 1
};

struct SpectrumReport {
    std::string profile_id;
    int d = 3;
    int n = 0;
    std::pair<double, double> range{0.0, 0.0};
    std::vector<EigenPair> eigenpairs;  ///< sorted by decreasing lambda
    double gauge_residual = 0.0;        ///< |det| at lambda = 1
    int count_above_dm2 = 0;            ///< eigenvalues with lambda > d - 2
    int count_at_dm2 = 0;               ///< eigenvalues with lambda = d - 2 (d = 5 exception)
    int sturm_count = 0;

    std::vector<double> eigenvalues() const;
};

double mu_of_lambda(Dimension d, double lambda);
/// Larger root of mu = lambda (d - 1 - lambda). Throws ValidationError when
/// mu > (d-1)^2/4.
double lambda_of_mu(Dimension d, double mu);

/// Matching determinant of the smooth left and right solutions at y_mid,
/// each normalized to unit norm. Non-finite on integration failure.
double eigen_residual(const SelfSimilarProfile& p, double lambda, const SpectrumSettings& settings = {});
double eigen_residual(const SelfSimilarProfile& p, double lambda, double y_mid);

/// Eigenfunction at a converged eigenvalue, v'(0) = 1.
EigenPair eigenpair(const SelfSimilarProfile& p, double lambda, const SpectrumSettings& settings = {});

/// Default scan range (-5, d + 3).
std::pair<double, double> default_lambda_range(Dimension d);

/// Real eigenvalues in `range`, at most `max_count` (largest first; 0 means all).
SpectrumReport find_eigenvalues(const SelfSimilarProfile& p, std::pair<double, double> range, int max_count = 0,
                                const SpectrumSettings& settings = {}, int threads = 1,
                                bool with_eigenfunctions = true);

/// Number of zeros of f' on (0, 1).
int sturm_mode_count(const SelfSimilarProfile& p);

}  // namespace wmlab
