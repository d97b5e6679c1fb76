#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace wmlab {

/// Right-hand side y' = F(t, y); writes F into `dydt`.
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct Dopri5Options {
    double rtol = 1e-10;
    double atol = 1e-10;
    /// Initial step; 0 selects one automatically.
    double initial_step = 0.0;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 5'000'000;
};

/// Embedded Dormand-Prince 5(4) pair with FSAL, PI step-size control and the
/// standard fourth-order continuous extension.
///
/// Integrates forward or backward in t. One call to `step()` performs exactly
/// one accepted step (retrying internally after rejections), so callers can
/// interleave their own checks and step caps between steps.
class Dopri5 {
public:
    Dopri5(std::size_t n, Dopri5Options options = {});

    void initialize(const OdeRhs& rhs, double t0, std::span<const double> y0, double direction = 1.0);

    /// One accepted step; the step size is additionally capped by `step_cap`
    /// (in absolute value). Throws ConvergenceError on step-size underflow,
    /// too many rejections or a non-finite solution.
    void step(const OdeRhs& rhs, double step_cap = std::numeric_limits<double>::infinity());

    /// Advance exactly to `t_end` (the last step is shortened to land on it).
    void advance_to(const OdeRhs& rhs, double t_end,
                    double step_cap = std::numeric_limits<double>::infinity());

    double t() const noexcept { return t_; }
    double t_previous() const noexcept { return t_old_; }
    std::span<const double> y() const noexcept { return y_; }
    std::span<const double> derivative() const noexcept { return k1_; }
    double suggested_step() const noexcept { return h_; }

    /// Dense output inside the last accepted step [t_previous(), t()].
    void interpolate(double t, std::span<double> out) const;
    double interpolate(double t, std::size_t component) const;

    std::size_t accepted_steps() const noexcept { return accepted_; }
    std::size_t rejected_steps() const noexcept { return rejected_; }
    std::size_t rhs_evaluations() const noexcept { return evaluations_; }

    const Dopri5Options& options() const noexcept { return options_; }

private:
    double initial_step(const OdeRhs& rhs);
    double error_norm(std::span<const double> err) const;

    std::size_t n_;
    Dopri5Options options_;
    double t_ = 0.0, t_old_ = 0.0, h_ = 0.0, h_last_ = 0.0, direction_ = 1.0;
    double fac_old_ = 1e-4;
    std::vector<double> y_, y_new_, y_stage_, err_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    std::vector<double> r1_, r2_, r3_, r4_, r5_;
    std::size_t accepted_ = 0, rejected_ = 0, evaluations_ = 0;
};

/// Integrate from (t0, y0) to t1 and return y(t1). `observer`, when given, is
/// called after every accepted step with the integrator (dense output valid).
std::vector<double> integrate(const OdeRhs& rhs, double t0, std::span<const double> y0, double t1,
                              const Dopri5Options& options = {},
                              const std::function<void(const Dopri5&)>& observer = {});

}  // namespace wmlab
