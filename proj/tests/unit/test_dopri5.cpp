#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wmlab/dopri5.hpp"
#include "wmlab/error.hpp"

using namespace wmlab;

namespace {

void decay(double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; }

void oscillator(double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
}

}  // namespace

TEST(Dopri5, ExponentialDecay) {
    const std::vector<double> y0{1.0};
    Dopri5Options o;
    o.rtol = o.atol = 1e-12;
    const auto y = integrate(decay, 0.0, y0, 5.0, o);
    EXPECT_NEAR(y[0], std::exp(-5.0), 1e-11);
}

TEST(Dopri5, BackwardIntegration) {
    const std::vector<double> y0{std::exp(-2.0)};
    Dopri5Options o;
    o.rtol = o.atol = 1e-12;
    const auto y = integrate(decay, 2.0, y0, 0.0, o);
    EXPECT_NEAR(y[0], 1.0, 1e-10);
}

TEST(Dopri5, OscillatorPeriod) {
    const std::vector<double> y0{1.0, 0.0};
    Dopri5Options o;
    o.rtol = o.atol = 1e-12;
    const auto y = integrate(oscillator, 0.0, y0, 20.0 * std::numbers::pi, o);
    EXPECT_NEAR(y[0], 1.0, 1e-9);
    EXPECT_NEAR(y[1], 0.0, 1e-9);
}

TEST(Dopri5, DenseOutputInsideSteps) {
    const std::vector<double> y0{1.0, 0.0};
    Dopri5Options o;
    o.rtol = o.atol = 1e-10;
    double worst = 0.0;
    integrate(oscillator, 0.0, y0, 6.0, o, [&](const Dopri5& s) {
        const double tm = 0.5 * (s.t_previous() + s.t());
        worst = std::max(worst, std::abs(s.interpolate(tm, 0) - std::cos(tm)));
    });
    EXPECT_LT(worst, 1e-8);
}

TEST(Dopri5, StepCapIsRespected) {
    const std::vector<double> y0{1.0};
    Dopri5 solver(1);
    solver.initialize(decay, 0.0, y0);
    for (int i = 0; i < 20; ++i) {
        const double before = solver.t();
        solver.step(decay, 0.01);
        EXPECT_LE(solver.t() - before, 0.01 + 1e-15);
    }
    solver.advance_to(decay, 1.0);
    EXPECT_DOUBLE_EQ(solver.t(), 1.0);
    EXPECT_NEAR(solver.y()[0], std::exp(-1.0), 1e-9);
}

TEST(Dopri5, BlowupIsReported) {
    const auto blowup = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
    const std::vector<double> y0{1.0};
    EXPECT_THROW(integrate(blowup, 0.0, y0, 2.0), ConvergenceError);
}
