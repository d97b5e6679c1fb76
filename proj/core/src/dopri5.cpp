#include "wmlab/dopri5.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wmlab/error.hpp"

namespace wmlab {

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output (Hairer & Wanner, CONTD5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9, kFacMin = 0.2, kFacMax = 10.0, kBeta = 0.04;
constexpr std::size_t kMaxRejectionsPerStep = 200;

}  // namespace

Dopri5::Dopri5(std::size_t n, Dopri5Options options)
    : n_(n), options_(options), y_(n), y_new_(n), y_stage_(n), err_(n),
      k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), k7_(n),
      r1_(n), r2_(n), r3_(n), r4_(n), r5_(n) {}

void Dopri5::initialize(const OdeRhs& rhs, double t0, std::span<const double> y0, double direction) {
    std::copy(y0.begin(), y0.end(), y_.begin());
    t_ = t_old_ = t0;
    direction_ = direction >= 0.0 ? 1.0 : -1.0;
    fac_old_ = 1e-4;
    accepted_ = rejected_ = 0;
    evaluations_ = 0;
    rhs(t_, y_, k1_);
    ++evaluations_;
    h_ = options_.initial_step > 0.0 ? options_.initial_step : initial_step(rhs);
}

double Dopri5::error_norm(std::span<const double> err) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double sk = options_.atol + options_.rtol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
        const double q = err[i] / sk;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(n_));
}

double Dopri5::initial_step(const OdeRhs& rhs) {
    // Hairer & Wanner, Solving ODEs I, II.4
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double sk = options_.atol + options_.rtol * std::abs(y_[i]);
        dnf += (k1_[i] / sk) * (k1_[i] / sk);
        dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, options_.max_step);
    for (std::size_t i = 0; i < n_; ++i) y_stage_[i] = y_[i] + direction_ * h * k1_[i];
    rhs(t_ + direction_ * h, y_stage_, k2_);
    ++evaluations_;
    double der2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double sk = options_.atol + options_.rtol * std::abs(y_[i]);
        const double q = (k2_[i] - k1_[i]) / sk;
        der2 += q * q;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, options_.max_step});
}

void Dopri5::step(const OdeRhs& rhs, double step_cap) {
    const double expo = 0.2 - kBeta * 0.75;
    bool rejected_last = false;
    for (std::size_t attempt = 0;; ++attempt) {
        if (attempt > kMaxRejectionsPerStep) {
            throw ConvergenceError("DOPRI5: too many consecutive step rejections");
        }
        double h = std::min({std::abs(h_), step_cap, options_.max_step});
        if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_)))) {
            std::ostringstream msg;
            msg << "DOPRI5: step size underflow at t = " << t_ << " (singularity encountered?)";
            throw ConvergenceError(msg.str());
        }
        h *= direction_;
        const double t = t_;
        const auto& y = y_;
        auto& ys = y_stage_;
        for (std::size_t i = 0; i < n_; ++i) ys[i] = y[i] + h * a21 * k1_[i];
        rhs(t + c2 * h, ys, k2_);
        for (std::size_t i = 0; i < n_; ++i) ys[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        rhs(t + c3 * h, ys, k3_);
        for (std::size_t i = 0; i < n_; ++i) ys[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        rhs(t + c4 * h, ys, k4_);
        for (std::size_t i = 0; i < n_; ++i)
            ys[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        rhs(t + c5 * h, ys, k5_);
        for (std::size_t i = 0; i < n_; ++i)
            ys[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        rhs(t + h, ys, k6_);
        for (std::size_t i = 0; i < n_; ++i)
            y_new_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        rhs(t + h, y_new_, k7_);
        evaluations_ += 6;

        for (std::size_t i = 0; i < n_; ++i)
            err_[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
        double err = error_norm(err_);
        if (!std::isfinite(err)) err = 1e10;

        const double fac11 = std::pow(err, expo);
        if (err <= 1.0) {
            double fac = fac11 / std::pow(fac_old_, kBeta);
            fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
            double h_new = std::abs(h) / fac;
            if (rejected_last) h_new = std::min(h_new, std::abs(h));
            fac_old_ = std::max(err, 1e-4);

            // Continuous extension coefficients.
            for (std::size_t i = 0; i < n_; ++i) {
                const double dy = y_new_[i] - y[i];
                const double bspl = h * k1_[i] - dy;
                r1_[i] = y[i];
                r2_[i] = dy;
                r3_[i] = bspl;
                r4_[i] = dy - h * k7_[i] - bspl;
                r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
            }
            t_old_ = t_;
            t_ = t + h;
            h_last_ = h;
            std::swap(y_, y_new_);
            std::swap(k1_, k7_);
            h_ = h_new;
            ++accepted_;
            if (accepted_ > options_.max_steps) {
                throw ConvergenceError("DOPRI5: maximum number of steps exceeded");
            }
            return;
        }
        rejected_last = true;
        ++rejected_;
        h_ = std::abs(h) / std::min(1.0 / kFacMin, fac11 / kSafety);
    }
}

void Dopri5::advance_to(const OdeRhs& rhs, double t_end, double step_cap) {
    while ((t_end - t_) * direction_ > 1e-14 * std::max(1.0, std::abs(t_end))) {
        step(rhs, std::min(step_cap, std::abs(t_end - t_)));
    }
}

void Dopri5::interpolate(double t, std::span<double> out) const {
    const double theta = h_last_ == 0.0 ? 1.0 : (t - t_old_) / h_last_;
    const double theta1 = 1.0 - theta;
    for (std::size_t i = 0; i < n_; ++i) {
        out[i] = r1_[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
    }
}

double Dopri5::interpolate(double t, std::size_t i) const {
    const double theta = h_last_ == 0.0 ? 1.0 : (t - t_old_) / h_last_;
    const double theta1 = 1.0 - theta;
    return r1_[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
}

std::vector<double> integrate(const OdeRhs& rhs, double t0, std::span<const double> y0, double t1,
                              const Dopri5Options& options, const std::function<void(const Dopri5&)>& observer) {
    Dopri5 solver(y0.size(), options);
    solver.initialize(rhs, t0, y0, t1 >= t0 ? 1.0 : -1.0);
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    while ((t1 - solver.t()) * dir > 1e-14 * std::max(1.0, std::abs(t1))) {
        const double remaining = std::abs(t1 - solver.t());
        solver.step(rhs, remaining);
        if (observer) observer(solver);
    }
    return {solver.y().begin(), solver.y().end()};
}

}  // namespace wmlab
