#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "wmlab/threshold.hpp"

using namespace wmlab;

namespace {

constexpr double kF1p0 = 6.71508;
const LambdaSet kLambdas{2.42624, 1.0, -0.17996};

struct Modes {
    double a1, a0, am1, T;
    double am2 = 0.0;  ///< coefficient of exp(2 lm1 s)
};

double model(const Modes& m, double s) {
    return kF1p0 + m.a1 * std::exp(kLambdas.l1 * s) + m.a0 * std::exp(s) + m.am1 * std::exp(kLambdas.lm1 * s) +
           m.am2 * std::exp(2 * kLambdas.lm1 * s);
}

// A trace whose similarity reconstruction at T reproduces the model exactly:
// T - t = k exp(-tau), so s = tau - ln k and dU0 = k dV0.
RunTrace synthetic_trace(const Modes& m, double tau_end = 14.0, double k = 0.8) {
    RunTrace trace;
    for (double tau = 0.0; tau <= tau_end + 1e-12; tau += 0.01) {
        const double s = tau - std::log(k);
        TraceSample x;
        x.tau = tau;
        x.t = m.T - k * std::exp(-tau);
        x.h = k;
        x.dV0 = model(m, s) / k;
        x.dP0 = 1.0 / k;
        trace.samples.push_back(x);
    }
    return trace;
}

// Exact explicit-solution trace (T = 1) for the data V = f_0, P = rho f_0'.
RunTrace explicit_trace(int d, double tau_end) {
    const double c = Dimension(d).c0();
    RunTrace trace;
    for (double tau = 0.0; tau <= tau_end + 1e-12; tau += 0.01) {
        const double x = c / (1.0 + (c - 1.0) * std::exp(-tau));
        trace.samples.push_back({tau, x * x / c, c / x, 1.0 / (x * x / c), 1.0 - std::exp(-tau) * x});
    }
    return trace;
}

}  // namespace

TEST(Similarity, ExplicitSolutionIsStationary) {
    const auto series = reconstruct_similarity(explicit_trace(4, 10.0), 1.0);
    ASSERT_FALSE(series.empty());
    for (const auto& x : series) EXPECT_NEAR(x.dU0, std::sqrt(2.0), 1e-11);
    for (std::size_t i = 1; i < series.size(); ++i) EXPECT_GT(series[i].s, series[i - 1].s);
}

TEST(Similarity, ShiftedBlowupTimeContaminates) {
    const auto trace = explicit_trace(4, 10.0);
    const auto series = reconstruct_similarity(trace, 1.0 + 1e-6);
    const double first = series.front().dU0 - std::sqrt(2.0);
    const double last = series.back().dU0 - std::sqrt(2.0);
    EXPECT_LT(std::abs(first), 1e-5);
    EXPECT_GT(std::abs(last), 1e-3);
}

TEST(Similarity, DropsSamplesPastT) {
    const auto trace = explicit_trace(4, 10.0);
    const auto series = reconstruct_similarity(trace, 0.5);
    for (const auto& x : series) EXPECT_LT(x.tau, 1.0);
    EXPECT_LT(series.size(), trace.size());
    EXPECT_TRUE(reconstruct_similarity(trace, -1.0).empty());
}

TEST(EstimateT, ExplicitSolution) {
    EXPECT_NEAR(estimate_T(explicit_trace(5, 14.0)), 1.0, 1e-6);
}

TEST(EstimateT, DispersionHasNoPlateau) {
    RunTrace trace;
    for (int i = 0; i <= 500; ++i) {
        const double tau = 0.01 * i;
        trace.samples.push_back({tau, std::exp(2 * tau), 1.0, std::exp(-2 * tau), std::exp(tau) - 1.0});
    }
    EXPECT_THROW(estimate_T(trace), ConvergenceError);
}

TEST(FitModes, SyntheticCoefficientsRecovered) {
    const Modes m{3e-12, 4e-6, -2.5, 1.2345};
    const auto series = reconstruct_similarity(synthetic_trace(m), m.T);
    const auto w = default_fit_window(series, kF1p0);
    const auto fit = fit_modes(series, kLambdas, kF1p0, m.T, w);
    EXPECT_NEAR(fit.a1 / m.a1, 1.0, 1e-8);
    EXPECT_NEAR(fit.a0 / m.a0, 1.0, 1e-8);
    EXPECT_NEAR(fit.a_minus1 / m.am1, 1.0, 1e-8);
    EXPECT_LT(fit.residual, 1e-10);
    EXPECT_NEAR(fit.model(w.s_min), model(m, w.s_min), 1e-10);
}

TEST(FitModes, EmptyWindowRejected) {
    const Modes m{3e-12, 0.0, -2.5, 1.0};
    const auto series = reconstruct_similarity(synthetic_trace(m), m.T);
    EXPECT_THROW(fit_modes(series, kLambdas, kF1p0, m.T, {100.0, 101.0}), ValidationError);
    EXPECT_THROW(fit_modes({}, kLambdas, kF1p0, m.T, {0.0, 1.0}), ValidationError);
}

TEST(FitModes, CoincidentRatesIllConditioned) {
    const Modes m{3e-12, 0.0, -2.5, 1.0};
    const auto series = reconstruct_similarity(synthetic_trace(m), m.T);
    const LambdaSet bad{1.0 + 1e-12, 1.0, -0.18};
    EXPECT_THROW(fit_modes(series, bad, kF1p0, m.T, default_fit_window(series, kF1p0)), ConvergenceError);
}

TEST(FitModes, HarmonicsExtendTheBasis) {
    const Modes m{3e-12, 0.0, -2.5, 1.0};
    const auto series = reconstruct_similarity(synthetic_trace(m), m.T);
    const auto fit = fit_modes(series, kLambdas, kF1p0, m.T, default_fit_window(series, kF1p0), 1e14, 3);
    ASSERT_EQ(fit.stable_harmonics.size(), 2u);
    EXPECT_LT(std::abs(fit.stable_harmonics[0]), 1e-6);
    EXPECT_NEAR(fit.a_minus1 / m.am1, 1.0, 1e-6);
}

class FitRoundTrip : public ::testing::TestWithParam<Modes> {};

TEST_P(FitRoundTrip, BlowupTimeAndCoefficients) {
    const Modes m = GetParam();
    const auto trace = synthetic_trace(m);
    const auto fit = fit_trace(trace, kLambdas, kF1p0);
    EXPECT_NEAR(fit.T_star / m.T, 1.0, 1e-8);
    EXPECT_NEAR(fit.a1 / m.a1, 1.0, 1e-6);
    EXPECT_NEAR(fit.a_minus1 / m.am1, 1.0, 1e-6);
    EXPECT_LT(std::abs(fit.a0), 1e-6 * std::max({std::abs(fit.a1), std::abs(fit.a_minus1), kF1p0}));
    EXPECT_LT(fit.residual, 1e-3 * kF1p0);
}

TEST_P(FitRoundTrip, ExplicitBracket) {
    const Modes m = GetParam();
    const auto trace = synthetic_trace(m);
    const auto bracket = bracket_T(trace, kLambdas, kF1p0, m.T * (1 + 1e-9));
    EXPECT_LT(bracket.first, m.T);
    EXPECT_GT(bracket.second, m.T);
    const auto fit = refine_T(trace, kLambdas, kF1p0, bracket);
    EXPECT_NEAR(fit.T_star / m.T, 1.0, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Synthetic, FitRoundTrip,
                         ::testing::Values(Modes{3e-12, 0.0, -2.5, 1.2345}, Modes{-3e-12, 0.0, -2.4, 0.75},
                                           Modes{1e-11, 0.0, 1.5, 2.0}, Modes{-5e-13, 0.0, -0.8, 1.0}));

TEST(RefineT, BracketWithoutRootRejected) {
    const Modes m{3e-12, 0.0, -2.5, 1.0};
    const auto trace = synthetic_trace(m);
    RefineOptions o;
    o.tau_window = std::pair{4.0, 12.0};
    EXPECT_THROW(refine_T(trace, kLambdas, kF1p0, {1.0 + 1e-4, 1.0 + 2e-4}, o), ConvergenceError);
    EXPECT_THROW(refine_T(trace, kLambdas, kF1p0, {1.1, 1.0}, o), ValidationError);
}

// A marginal pair sharing the stable part and separating along the unstable mode.
TEST(FreeRates, SyntheticPairSingleStableMode) {
    const double T = 1.0;
    const Modes sub{-1e-9, 0.0, -3.0, T}, super{1e-9, 0.0, -3.0, T};
    FreeRateOptions o;
    // With powers of the rate in the basis, lm1 / 2 would fit a single mode equally well.
    o.harmonics = 1;
    const auto fit = fit_free_rates(synthetic_trace(sub, 14.0), synthetic_trace(super, 14.0), kF1p0, T, o);
    EXPECT_NEAR(fit.lambda1 / kLambdas.l1, 1.0, 1e-3);
    EXPECT_NEAR(fit.lambda_minus1 / kLambdas.lm1, 1.0, 1e-3);
    EXPECT_NEAR(fit.T, T, 1e-6);
}

TEST(FreeRates, SyntheticPairWithHarmonic) {
    const double T = 1.3;
    const Modes sub{-1e-9, 0.0, -3.0, T, 1.2}, super{1e-9, 0.0, -3.0, T, 1.2};
    const auto fit = fit_free_rates(synthetic_trace(sub, 14.0), synthetic_trace(super, 14.0), kF1p0, T * (1 + 1e-7));
    EXPECT_NEAR(fit.lambda1 / kLambdas.l1, 1.0, 1e-3);
    EXPECT_NEAR(fit.lambda_minus1 / kLambdas.lm1, 1.0, 1e-3);
    EXPECT_NEAR(fit.T / T, 1.0, 1e-6);
}

TEST(Plateau, LengthAndScaling) {
    RunTrace t;
    for (int i = 0; i <= 1000; ++i) {
        const double tau = 0.01 * i;
        t.samples.push_back({tau, (tau > 2.0 && tau < 6.0) ? 6.7 : 1.0, 1.0, 1.0, 0.0});
    }
    EXPECT_NEAR(plateau_length(t, 6.7, 0.01), 4.0, 0.03);
    EXPECT_EQ(plateau_length(t, 3.0, 0.01), 0.0);

    std::vector<BisectionStep> history;
    for (int k = 1; k <= 6; ++k) {
        BisectionStep s;
        s.width = std::pow(10.0, -k);
        s.plateau_length = 0.4 * k * std::log(10.0) + 1.0;
        history.push_back(s);
    }
    EXPECT_NEAR(plateau_scaling_slope(history), 0.4, 1e-12);
    EXPECT_THROW(plateau_scaling_slope({}), ValidationError);
}

TEST(Bisection, DegenerateBracketRejected) {
    BisectionOptions o;
    EXPECT_THROW(bisect_amplitude(Dimension(6), {5.0, 5.0}, o), ValidationError);
    EXPECT_THROW(bisect_amplitude(Dimension(6), {-1.0, 5.0}, o), ValidationError);
    o.rel_tol = 1e-17;
    EXPECT_THROW(bisect_amplitude(Dimension(6), {1.0, 5.0}, o), ValidationError);
}

TEST(Bisection, BracketMustStraddle) {
    BisectionOptions o;
    o.grid = default_grid(6.71508);
    o.grid.n_points = 513;
    EXPECT_THROW(bisect_amplitude(Dimension(6), {5.0, 10.0}, o), ValidationError);
}

TEST(Bisection, CoarseThresholdBracketShrinks) {
    BisectionOptions o;
    o.grid = default_grid(6.71508);
    o.grid.n_points = 513;
    o.rel_tol = 1e-2;
    int calls = 0;
    o.progress = [&](const BisectionStep&) { ++calls; };
    const auto r = bisect_amplitude(Dimension(6), {0.1, 10.0}, o);
    EXPECT_LE((r.A_hi - r.A_lo) / r.A_star, 1e-2);
    EXPECT_TRUE(r.lo_disperses);
    EXPECT_GT(r.A_star, 1.5);
    EXPECT_LT(r.A_star, 1.9);
    EXPECT_EQ(calls, static_cast<int>(r.history.size()));
    for (std::size_t i = 2; i < r.history.size(); ++i) {
        EXPECT_NEAR(r.history[i].width, 0.5 * r.history[i - 1].width, 1e-12 * r.history[i - 1].width);
    }
    EXPECT_FALSE(r.sub_trace.empty());
    EXPECT_FALSE(r.super_trace.empty());
}

TEST(LambdaSet, FromSpectrum) {
    SpectrumReport rep;
    rep.profile_id = "f1_d6";
    for (double l : {2.42624, 1.0, -0.17996, -1.30848}) rep.eigenpairs.push_back({l, 0.0, 0.0, {}});
    const auto l = lambda_set(rep);
    EXPECT_DOUBLE_EQ(l.l1, 2.42624);
    EXPECT_DOUBLE_EQ(l.lm1, -0.17996);
    rep.eigenpairs.erase(rep.eigenpairs.begin());
    EXPECT_THROW(lambda_set(rep), ValidationError);
}

TEST(AverageT, Midpoint) {
    FitResult a, b;
    a.T_star = 1.0;
    b.T_star = 2.0;
    EXPECT_DOUBLE_EQ(average_T(a, b), 1.5);
}
