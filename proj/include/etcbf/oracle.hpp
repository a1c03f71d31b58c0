#pragma once

// Closed-form solution of the planar builtin between events. With the input
// held at u_i = k(x_i) the flow is a rotation scaled by exp(h(x_i) dt / 2),
// which gives exact expressions for the state, the measurement error norm,
// and the first trigger crossing. This is the independent ground truth the
// integrator and the event localizer are checked against.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "etcbf/integrate.hpp"
#include "etcbf/triggers.hpp"
#include "etcbf/types.hpp"

namespace etcbf::oracle {

using Vec2 = Eigen::Vector2d;

/// Hold-interval solution anchored at the event state x_i.
struct HoldSolution {
  Vec2 x_i;
  double h_i;      // 1 - |x_i|^2
  double norm_xi;  // |x_i|

  explicit HoldSolution(const Vec2& x)
      : x_i(x), h_i(1.0 - x.squaredNorm()), norm_xi(x.norm()) {}

  /// State after dt: exp(h_i dt / 2) * [cos dt, sin dt; -sin dt, cos dt] * x_i.
  Vec2 state(double dt) const {
    const double scale = std::exp(0.5 * h_i * dt);
    const double c = std::cos(dt), s = std::sin(dt);
    return Vec2(scale * (c * x_i(0) + s * x_i(1)), scale * (-s * x_i(0) + c * x_i(1)));
  }

  /// |x_i - x(dt)| = sqrt(exp(w) - 2 exp(w/2) cos(dt) + 1) |x_i|, w = h_i dt.
  double error_norm(double dt) const {
    const double w = h_i * dt;
    const double radicand = std::exp(w) - 2.0 * std::exp(0.5 * w) * std::cos(dt) + 1.0;
    return std::sqrt(std::max(0.0, radicand)) * norm_xi;
  }

  /// h(x(dt)) = 1 - exp(h_i dt) |x_i|^2.
  double h(double dt) const { return 1.0 - std::exp(h_i * dt) * x_i.squaredNorm(); }
};

inline Vec2 closed_form_step(const Vec2& x_i, double dt) {
  return HoldSolution(x_i).state(dt);
}

inline double error_norm_exact(const Vec2& x_i, double dt) {
  return HoldSolution(x_i).error_norm(dt);
}

/// First dt > 0 at which the trigger residual, evaluated on the closed form,
/// crosses zero; nullopt if there is no crossing before the horizon. The
/// barrier_shift is added to h for laws built on a lifted certificate h + b.
/// Bracketing uses probes that grow geometrically up to a fixed pitch, then
/// bisection to 1e-12 absolute.
inline std::optional<double> exact_event_time(const Vec2& x_i, const TriggerLaw& law,
                                              double barrier_shift = 0.0,
                                              double horizon = 1e3) {
  if (!std::holds_alternative<SignedNaiveSafetyTrigger>(law) &&
      !std::holds_alternative<StrongIssfTrigger>(law))
    throw std::invalid_argument(
        "exact_event_time: law must be the signed naive or strong ISSf trigger");

  const HoldSolution sol(x_i);
  const auto residual = [&](double dt) {
    return trigger_residual(law, sol.h(dt) + barrier_shift, sol.error_norm(dt),
                            sol.state(dt).norm());
  };

  double lo = 0.0;
  double r_lo = residual(0.0);
  if (r_lo <= 0.0) return 0.0;  // already on or past the event surface

  double probe = 1e-12;
  while (lo < horizon) {
    const double hi = std::min(lo + probe, horizon);
    const double r_hi = residual(hi);
    if (r_hi <= 0.0) {
      // Bisect to 1e-12 absolute width.
      double a = lo, b = hi;
      while (b - a > 1e-12) {
        const double mid = 0.5 * (a + b);
        (residual(mid) > 0.0 ? a : b) = mid;
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    r_lo = r_hi;
    probe = std::min(2.0 * probe, 0.05);
  }
  return std::nullopt;
}

struct OracleTrialFailure {
  int trial;
  Vec2 x_i;
  double dt;
  double integrator_rel_err;
  double consistency_err;
};

struct OracleValidationResult {
  int trials = 0;
  double max_integrator_rel_err = 0.0;
  double max_consistency_err = 0.0;
  std::vector<OracleTrialFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Randomized agreement check between the adaptive integrator and the closed
/// form: x_i uniform in the disk |x| <= 1.2, dt in (0, 1]. Asserts relative
/// state error <= tol_integrator and closed-form error-norm self-consistency
/// <= tol_consistency. Fully deterministic for a fixed seed.
inline OracleValidationResult validate_oracle(std::uint64_t seed, int trials,
                                              double tol_integrator = 1e-8,
                                              double tol_consistency = 1e-10) {
  if (trials < 1) throw std::invalid_argument("validate_oracle: trials must be >= 1");

  std::uint64_t state = seed ? seed : 0x9e3779b97f4a7c15ULL;
  const auto next_unit = [&state]() {
    // splitmix64, mapped to [0, 1); avoids distribution objects so results
    // are bit-identical across standard libraries.
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };

  StepperOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;
  opt.max_step = 0.1;

  OracleValidationResult result;
  result.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    const double radius = 1.2 * std::sqrt(next_unit());
    const double angle = 2.0 * M_PI * next_unit();
    const Vec2 x_i(radius * std::cos(angle), radius * std::sin(angle));
    const double dt = 1.0 - next_unit();  // (0, 1]

    const double u_held = 0.5 * (1.0 - x_i.squaredNorm());
    const auto rhs = [u_held](double, const Vec& x) {
      Vec dx(2);
      dx(0) = x(1) + x(0) * u_held;
      dx(1) = -x(0) + x(1) * u_held;
      return dx;
    };

    const Vec2 exact = closed_form_step(x_i, dt);
    const Vec numeric = integrate_to(rhs, 0.0, x_i, dt, opt);
    const double rel_err =
        (numeric - exact).norm() / std::max(exact.norm(), 1e-12);
    const double consistency_err =
        std::abs(error_norm_exact(x_i, dt) - (x_i - exact).norm());

    result.max_integrator_rel_err = std::max(result.max_integrator_rel_err, rel_err);
    result.max_consistency_err = std::max(result.max_consistency_err, consistency_err);
    if (rel_err > tol_integrator || consistency_err > tol_consistency)
      result.failures.push_back({trial, x_i, dt, rel_err, consistency_err});
  }
  return result;
}

}  // namespace etcbf::oracle
