#pragma once

// Embedded Dormand-Prince 5(4) stepper with FSAL, step-size control, and
// cubic-Hermite dense output over each accepted step. A fixed-step RK4 mode
// is provided for cross-checks against closed-form solutions.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "etcbf/types.hpp"

namespace etcbf {

using OdeRhs = std::function<Vec(double, const Vec&)>;

/// One accepted step with endpoint derivatives; eval() interpolates with a
/// cubic Hermite polynomial (3rd-order accurate inside the step).
struct DenseSegment {
  double t0 = 0.0, t1 = 0.0;
  Vec x0, x1, f0, f1;

  Vec eval(double t) const {
    const double h = t1 - t0;
    const double th = (t - t0) / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    const double c00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    const double c10 = th3 - 2.0 * th2 + th;
    const double c01 = -2.0 * th3 + 3.0 * th2;
    const double c11 = th3 - th2;
    return c00 * x0 + (c10 * h) * f0 + c01 * x1 + (c11 * h) * f1;
  }
};

struct StepperOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double initial_step = 0.0;  // 0: choose automatically
};

class Rk45Stepper {
 public:
  Rk45Stepper(OdeRhs rhs, double t0, Vec x0, StepperOptions opt)
      : rhs_(std::move(rhs)), opt_(opt) {
    if (!(opt_.rel_tol > 0.0) || !(opt_.abs_tol > 0.0) || !(opt_.max_step > 0.0))
      throw std::invalid_argument("Rk45Stepper: tolerances and max_step must be > 0");
    reset(t0, std::move(x0));
  }

  double time() const { return t_; }
  const Vec& state() const { return x_; }

  void reset(double t, Vec x) {
    t_ = t;
    x_ = std::move(x);
    if (!x_.allFinite()) throw std::runtime_error("Rk45Stepper: non-finite state");
    f_ = rhs_(t_, x_);
    h_ = opt_.initial_step > 0.0 ? opt_.initial_step : suggest_initial_step();
    h_ = std::min(h_, opt_.max_step);
  }

  /// Advance by one accepted step without passing t_limit.
  DenseSegment step(double t_limit) {
    if (!(t_limit > t_)) throw std::logic_error("Rk45Stepper::step: t_limit must exceed current time");

    Vec k2, k3, k4, k5, k6, x_new, f_new, err;
    for (int attempt = 0; attempt < 64; ++attempt) {
      double h = std::min({h_, opt_.max_step, t_limit - t_});
      const bool hits_limit = (h >= t_limit - t_);
      if (h < 16.0 * eps_ * std::max(1.0, std::abs(t_)))
        throw std::runtime_error("Rk45Stepper: step size underflow");

      k2 = rhs_(t_ + c2 * h, x_ + h * (a21 * f_));
      k3 = rhs_(t_ + c3 * h, x_ + h * (a31 * f_ + a32 * k2));
      k4 = rhs_(t_ + c4 * h, x_ + h * (a41 * f_ + a42 * k2 + a43 * k3));
      k5 = rhs_(t_ + c5 * h, x_ + h * (a51 * f_ + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = rhs_(t_ + h, x_ + h * (a61 * f_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      x_new = x_ + h * (b1 * f_ + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f_new = rhs_(t_ + h, x_new);  // FSAL stage
      err = h * (e1 * f_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * f_new);

      if (!x_new.allFinite() || !f_new.allFinite())
        throw std::runtime_error("Rk45Stepper: non-finite state during step");

      double err_norm = 0.0;
      for (Eigen::Index i = 0; i < x_.size(); ++i) {
        const double scale =
            opt_.abs_tol + opt_.rel_tol * std::max(std::abs(x_(i)), std::abs(x_new(i)));
        const double q = err(i) / scale;
        err_norm += q * q;
      }
      err_norm = std::sqrt(err_norm / static_cast<double>(x_.size()));

      const double factor =
          err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      if (err_norm <= 1.0) {
        DenseSegment seg{t_, hits_limit ? t_limit : t_ + h, x_, x_new, f_, f_new};
        t_ = seg.t1;
        x_ = std::move(x_new);
        f_ = std::move(f_new);
        h_ = std::min(h * factor, opt_.max_step);
        return seg;
      }
      h_ = h * factor;
    }
    throw std::runtime_error("Rk45Stepper: too many rejected steps");
  }

 private:
  // Hairer-style two-probe estimate of the starting step.
  double suggest_initial_step() const {
    const auto scaled_norm = [&](const Vec& v, const Vec& ref) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double sk = opt_.abs_tol + opt_.rel_tol * std::abs(ref(i));
        const double q = v(i) / sk;
        s += q * q;
      }
      return std::sqrt(s / static_cast<double>(v.size()));
    };
    const double d0 = scaled_norm(x_, x_);
    const double d1 = scaled_norm(f_, x_);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, opt_.max_step);

    const Vec x1 = x_ + h0 * f_;
    const Vec f1 = rhs_(t_ + h0, x1);
    const double d2 = scaled_norm(f1 - f_, x_) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax > 1e-15 ? std::pow(0.01 / dmax, 0.2) : std::max(1e-6, h0 * 1e-3);
    return std::min({100.0 * h0, h1, opt_.max_step});
  }

  static constexpr double eps_ = 2.220446049250313e-16;

  // Dormand-Prince RK5(4)7M tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  OdeRhs rhs_;
  StepperOptions opt_;
  double t_ = 0.0;
  double h_ = 0.0;
  Vec x_, f_;
};

/// Integrate to exactly t_end and return the state there.
inline Vec integrate_to(const OdeRhs& rhs, double t0, const Vec& x0, double t_end,
                        const StepperOptions& opt) {
  if (t_end == t0) return x0;
  Rk45Stepper stepper(rhs, t0, x0, opt);
  for (long i = 0; i < 100000000L; ++i) {
    stepper.step(t_end);
    if (stepper.time() >= t_end) return stepper.state();
  }
  throw std::runtime_error("integrate_to: step budget exhausted");
}

/// Classic fixed-step 4th-order Runge-Kutta.
inline Vec rk4_fixed(const OdeRhs& rhs, double t0, const Vec& x0, double t_end,
                     int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("rk4_fixed: n_steps must be >= 1");
  const double h = (t_end - t0) / n_steps;
  Vec x = x0;
  double t = t0;
  for (int i = 0; i < n_steps; ++i) {
    const Vec k1 = rhs(t, x);
    const Vec k2 = rhs(t + 0.5 * h, x + (0.5 * h) * k1);
    const Vec k3 = rhs(t + 0.5 * h, x + (0.5 * h) * k2);
    const Vec k4 = rhs(t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + (i + 1) * h;
  }
  return x;
}

}  // namespace etcbf
