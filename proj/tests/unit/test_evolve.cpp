#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "wmlab/evolve.hpp"

using namespace wmlab;

namespace {

// For data V = f_0(rho), P = rho f_0'(rho) the solution stays on f_0 with
// blowup at T = 1: V(tau, rho) = f_0(rho / x(tau)) and h = x^2 / c, where
// x(tau) = c / (1 + (c - 1) exp(-tau)).
double exact_x(double c, double tau) { return c / (1.0 + (c - 1.0) * std::exp(-tau)); }

GridSpec f0_grid(int d, int n_points, double eps = 0.1, double rk_tol = 1e-12) {
    GridSpec g = default_grid(Dimension(d).c0());
    g.n_points = n_points;
    g.dissipation_eps = eps;
    g.rk_tol = rk_tol;
    return g;
}

RunResult run_f0(int d, const GridSpec& g, double tau_end, double sample_every = 0.01) {
    RunOptions o;
    o.tau_end = tau_end;
    o.sample_every = sample_every;
    o.stop_on_classification = false;
    o.classifier.endstates = {{0, Dimension(d).c0(), true}};
    return run(init_from_profile(test::profile(d, 0), g), g, o);
}

// Max error of V against the exact solution inside the past light cone.
double light_cone_error(int d, const GridSpec& g, const EvolutionState& s) {
    const double x = exact_x(Dimension(d).c0(), s.tau);
    double e = 0.0;
    for (int i = 0; i < g.n_points; ++i) {
        const double y = g.rho(i) / x;
        if (y > 1.0) break;
        e = std::max(e, std::abs(s.V[i] - test::f0(d, y)));
    }
    return e;
}

TraceSample sample(double tau, double h) { return {tau, h, 1.0, 1.0 / h, 0.0}; }

}  // namespace

TEST(Grid, Validation) {
    GridSpec g;
    g.n_points = 8;
    EXPECT_THROW(g.validate(), ValidationError);
    g = GridSpec{};
    g.dissipation_eps = -1.0;
    EXPECT_THROW(g.validate(), ValidationError);
    EXPECT_DOUBLE_EQ(default_grid(6.71508).rho_max, 2 * 6.71508);
}

TEST(Stencil, OriginDerivativeExactForOddCubics) {
    const double dx = 0.05;
    std::vector<double> u(20);
    for (int i = 0; i < 20; ++i) {
        const double r = dx * i;
        u[i] = 1.7 * r - 0.9 * r * r * r;
    }
    EXPECT_NEAR(origin_derivative(u, dx), 1.7, 1e-13);
}

TEST(InitFamily, GaugeFromAmplitude) {
    const GridSpec g = default_grid(1.0);
    for (double A : {0.5, 1.0, 10.0}) {
        const auto s = init_family(Dimension(6), A, g);
        EXPECT_EQ(s.V[0], 0.0);
        EXPECT_EQ(s.P[0], 0.0);
        EXPECT_NEAR(s.h, 1.0 / A, 1e-8 / A);
        const double r = g.rho(100);
        EXPECT_DOUBLE_EQ(s.V[100], A * r / std::cosh(r));
        EXPECT_DOUBLE_EQ(s.P[100], s.V[100]);
    }
    EXPECT_THROW(init_family(Dimension(6), 0.0, g), ValidationError);
}

TEST(InitProfile, DataOnExplicitSolution) {
    const int d = 4;
    const GridSpec g = f0_grid(d, 257);
    const auto s = init_from_profile(test::profile(d, 0), g);
    const double c = Dimension(d).c0();
    EXPECT_NEAR(s.h, 1.0 / c, 1e-7);
    for (int i : {10, 100, 200, 256}) {
        const double r = g.rho(i);
        EXPECT_NEAR(s.V[i], test::f0(d, r), 1e-9) << r;
        EXPECT_NEAR(s.P[i], r * test::f0p(d, r), 1e-8) << r;
    }
}

TEST(Rhs, LinearDataAdvection) {
    GridSpec g = default_grid(1.0);
    g.n_points = 65;
    EvolutionState s;
    s.d = 6;
    const double a = 0.3, b = 2.0;
    for (int i = 0; i < g.n_points; ++i) {
        s.V.push_back(a * g.rho(i));
        s.P.push_back(b * g.rho(i));
    }
    std::vector<double> dV(g.n_points), dP(g.n_points);
    const double h = rhs(s, g, dV, dP);
    EXPECT_NEAR(h, 1.0 / b, 1e-14);
    for (int i = 0; i < g.n_points; ++i) EXPECT_NEAR(dV[i], (1.0 - a) * g.rho(i), 1e-11) << i;
}

TEST(Rhs, DegenerateGaugeRejected) {
    GridSpec g = default_grid(1.0);
    g.n_points = 33;
    EvolutionState s;
    s.d = 6;
    s.V.assign(g.n_points, 0.0);
    s.P.assign(g.n_points, 0.0);
    std::vector<double> dV(g.n_points), dP(g.n_points);
    EXPECT_THROW(rhs(s, g, dV, dP), GaugeBreakdown);
}

TEST(Rhs, GaugeRelaxationOnExplicitSolution) {
    const int d = 5;
    const GridSpec g = f0_grid(d, 513);
    const auto s = init_from_profile(test::profile(d, 0), g);
    std::vector<double> dV(g.n_points), dP(g.n_points);
    rhs(s, g, dV, dP);
    const double c = Dimension(d).c0();
    // d/dtau (d_rho V(tau, 0)) = -(d_rho V(tau, 0) - 1) with d_rho V(0, 0) = c.
    EXPECT_NEAR(origin_derivative(dV, g.spacing()), 1.0 - c, 1e-7);
}

TEST(Evolve, ExplicitSolutionTracked) {
    const int d = 4;
    const GridSpec g = f0_grid(d, 257);
    const auto r = run_f0(d, g, 3.0);
    const double c = Dimension(d).c0();
    for (const auto& s : r.trace.samples) {
        const double x = exact_x(c, s.tau);
        ASSERT_NEAR(s.h, x * x / c, 1e-6) << s.tau;
        ASSERT_NEAR(s.dV0, c / x, 1e-6) << s.tau;
    }
    EXPECT_LT(light_cone_error(d, g, r.final_state), 1e-6);
    // T - t = exp(-tau) x(tau) with T = 1.
    const auto& last = r.trace.back();
    EXPECT_NEAR(last.t, 1.0 - std::exp(-last.tau) * exact_x(c, last.tau), 1e-7);
}

TEST(Evolve, ExplicitSolutionEndstate) {
    const int d = 5;
    const GridSpec g = f0_grid(d, 513, 0.1, 1e-10);
    const auto r = run_f0(d, g, 10.0, 0.1);
    EXPECT_NEAR(r.trace.back().tau, 10.0, 1e-12);
    EXPECT_LT(std::abs(r.trace.back().h - 2.0 / std::sqrt(3.0)), 1e-2);
    EXPECT_LT(light_cone_error(d, g, r.final_state), 1e-5);
}

TEST(Evolve, GaugeLawOnExplicitSolution) {
    const int d = 6;
    const GridSpec g = f0_grid(d, 513, 0.1, 1e-10);
    const auto r = run_f0(d, g, 6.0, 0.05);
    const auto fit = fit_gauge_law(r.trace, 2.0);
    // dV0 = c / x(tau) = 1 + (c - 1) exp(-tau).
    EXPECT_NEAR(fit.c, Dimension(d).c0() - 1.0, 1e-6);
    EXPECT_LT(fit.max_residual, 1e-6);
    EXPECT_GT(fit.samples, 50u);
}

TEST(Evolve, DissipationNeutrality) {
    const int d = 4;
    const auto a = run_f0(d, f0_grid(d, 257, 0.1), 3.0, 0.5);
    const auto b = run_f0(d, f0_grid(d, 257, 0.0), 3.0, 0.5);
    EXPECT_LT(std::abs(a.trace.back().h - b.trace.back().h) / b.trace.back().h, 1e-3);
}

TEST(Evolve, RunValidation) {
    const GridSpec g = f0_grid(4, 65);
    RunOptions o;
    o.tau_end = 0.0;
    EXPECT_THROW(run(init_family(Dimension(4), 1.0, g), g, o), ValidationError);
}

class Convergence : public ::testing::Test {};

TEST_F(Convergence, FourthOrderOnGridHalving) {
    const int d = 4;
    double err[3];
    const int sizes[3] = {129, 257, 513};
    for (int k = 0; k < 3; ++k) {
        const GridSpec g = f0_grid(d, sizes[k], 0.1, 1e-14);
        err[k] = light_cone_error(d, g, run_f0(d, g, 1.0, 0.5).final_state);
    }
    for (int k = 0; k < 2; ++k) {
        const double ratio = err[k] / err[k + 1];
        EXPECT_GT(ratio, 12.0) << sizes[k];
        EXPECT_LT(ratio, 20.0) << sizes[k];
    }
}

class Parity : public ::testing::Test {};

TEST_F(Parity, OriginValuesStayZero) {
    GridSpec g = default_grid(Dimension(6).c0());
    g.n_points = 257;
    RunOptions o;
    o.tau_end = 3.0;
    o.stop_on_classification = false;
    o.classifier.endstates = {{0, 1.0, true}};
    o.snapshot_taus = {0.5, 1.0, 2.0, 3.0};
    const auto r = run(init_family(Dimension(6), 3.0, g), g, o);
    ASSERT_EQ(r.snapshots.size(), 4u);
    for (const auto& s : r.snapshots) {
        EXPECT_EQ(s.V[0], 0.0) << s.tau;
        EXPECT_EQ(s.P[0], 0.0) << s.tau;
    }
    EXPECT_EQ(r.final_state.V[0], 0.0);
    EXPECT_EQ(r.final_state.P[0], 0.0);
}

TEST_F(Parity, ExplicitSolutionOriginValues) {
    const int d = 4;
    const GridSpec g = f0_grid(d, 129);
    const auto r = run_f0(d, g, 1.0, 0.25);
    for (const auto& s : r.trace.samples) EXPECT_GT(s.dP0, 0.0);
    EXPECT_EQ(r.final_state.V[0], 0.0);
    EXPECT_EQ(r.final_state.P[0], 0.0);
}

TEST(Classify, ConstantGaugeIsBlowup) {
    RunTrace t;
    for (int i = 0; i <= 300; ++i) t.samples.push_back(sample(0.01 * i, 1.0));
    ClassifierSettings cs;
    cs.endstates = {{0, 1.0, true}, {1, 6.71508, false}};
    const auto c = classify(t, cs);
    ASSERT_TRUE(is_blowup(c));
    EXPECT_NEAR(std::get<Blowup>(c).h_limit, 1.0, 1e-12);
    EXPECT_EQ(std::get<Blowup>(c).profile_n, 0);
}

TEST(Classify, DoublingGaugeIsDispersion) {
    RunTrace t;
    for (int i = 0; i <= 1000; ++i) t.samples.push_back(sample(0.01 * i, std::exp2(0.01 * i)));
    ClassifierSettings cs;
    cs.endstates = {{0, 1.0, true}, {1, 6.71508, false}};
    EXPECT_TRUE(is_dispersion(classify(t, cs)));
}

TEST(Classify, PlateauAtUnstableProfileUndecided) {
    RunTrace t;
    for (int i = 0; i <= 600; ++i) t.samples.push_back(sample(0.01 * i, 6.715));
    ClassifierSettings cs;
    cs.endstates = {{0, 1.0, true}, {1, 6.71508, false}};
    EXPECT_TRUE(std::holds_alternative<Undecided>(classify(t, cs)));
    EXPECT_THROW(classify(RunTrace{}, cs), ValidationError);
}

TEST(Endstates, LargeAndSmallAmplitude) {
    const GridSpec g = default_grid(Dimension(6).c0());
    RunOptions o;
    o.tau_end = 30.0;
    o.classifier.endstates = known_endstates(Dimension(6));
    const auto big = run(init_family(Dimension(6), 10.0, g), g, o);
    ASSERT_TRUE(is_blowup(big.classification)) << to_string(big.classification);
    EXPECT_NEAR(std::get<Blowup>(big.classification).h_limit, 1.0, 0.2);
    const auto small = run(init_family(Dimension(6), 0.05, g), g, o);
    EXPECT_TRUE(is_dispersion(small.classification)) << to_string(small.classification);
}
