#pragma once

// Control systems and certificates, plus the two builtin systems: the planar
// rotating system whose safe set is the unit disk, and a scalar demo with an
// ISS Lyapunov certificate.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "etcbf/classk.hpp"
#include "etcbf/types.hpp"

namespace etcbf {

/// Differentiable scalar function of the state with its gradient (row form).
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<RowVec(const Vec&)> gradient;
};

/// Wraps a value function with a central finite-difference gradient,
/// step 1e-6 * (1 + |x|).
inline ScalarField with_fd_gradient(std::function<double(const Vec&)> value) {
  auto grad = [value](const Vec& x) {
    const double step = 1e-6 * (1.0 + x.norm());
    RowVec g(x.size());
    Vec xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      xp(i) = x(i) + step;
      xm(i) = x(i) - step;
      g(i) = (value(xp) - value(xm)) / (2.0 * step);
      xp(i) = x(i);
      xm(i) = x(i);
    }
    return g;
  };
  return ScalarField{std::move(value), std::move(grad)};
}

struct ControlSystem {
  int state_dim = 0;
  int input_dim = 0;
  std::function<Vec(const Vec&, const Vec&)> dynamics;  // f(x, u)
  std::function<Vec(const Vec&)> controller;            // k(x)
};

struct BarrierCertificate {
  ScalarField h;
  KFunction alpha;  // extended K-infinity
  KFunction iota;   // class K-infinity, Lipschitz constant expected
  double strong_margin = 0.0;            // d: 0 = plain certificate
  std::optional<double> dynamics_bound;  // F: set by bound_dynamics
};

struct IssLfCertificate {
  ScalarField V;
  KFunction alpha1, alpha2;  // sandwich bounds (metadata)
  KFunction alpha3;
  KFunction gamma;
};

struct SystemBundle {
  ControlSystem system;
  BarrierCertificate certificate;
};

struct DemoBundle {
  ControlSystem system;
  IssLfCertificate certificate;
};

/// Planar system x1' = x2 + x1*u, x2' = -x1 + x2*u with h(x) = 1 - |x|^2 and
/// controller k(x) = (1 - |x|^2)/2. Valid certificate gains on |x| <= r:
/// alpha(s) = s, iota(s) = 2 r^3 s. Requires r > 1. The dynamics bound F is
/// left unset; compute it with bound_dynamics over the working set.
inline SystemBundle counterexample_system(double r) {
  if (!(r > 1.0)) throw std::invalid_argument("counterexample_system: r must be > 1");

  ControlSystem sys;
  sys.state_dim = 2;
  sys.input_dim = 1;
  sys.dynamics = [](const Vec& x, const Vec& u) {
    Vec dx(2);
    dx(0) = x(1) + x(0) * u(0);
    dx(1) = -x(0) + x(1) * u(0);
    return dx;
  };
  sys.controller = [](const Vec& x) {
    Vec u(1);
    u(0) = 0.5 * (1.0 - x(0) * x(0) - x(1) * x(1));
    return u;
  };

  BarrierCertificate cert{
      ScalarField{
          [](const Vec& x) { return 1.0 - x(0) * x(0) - x(1) * x(1); },
          [](const Vec& x) {
            RowVec g(2);
            g(0) = -2.0 * x(0);
            g(1) = -2.0 * x(1);
            return g;
          }},
      KFunction::linear(1.0),
      KFunction::linear(2.0 * r * r * r, nonnegative_domain()).with_lipschitz(2.0 * r * r * r),
      0.0,
      std::nullopt};
  return SystemBundle{std::move(sys), std::move(cert)};
}

/// Scalar integrator x' = u with k(x) = -x and V(x) = x^2/2. The certificate
/// alpha3(s) = gamma(s) = s^2/2 follows from x*(-x - e) <= -x^2/2 + e^2/2.
inline DemoBundle scalar_stabilization_demo() {
  ControlSystem sys;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.dynamics = [](const Vec&, const Vec& u) { return u; };
  sys.controller = [](const Vec& x) -> Vec { return -x; };

  const KFunction half_square = KFunction::power(0.5, 2.0, nonnegative_domain());
  IssLfCertificate lf{
      ScalarField{[](const Vec& x) { return 0.5 * x(0) * x(0); },
                  [](const Vec& x) {
                    RowVec g(1);
                    g(0) = x(0);
                    return g;
                  }},
      half_square, half_square, half_square, half_square};
  return DemoBundle{std::move(sys), std::move(lf)};
}

namespace detail {

// Visit every grid point of [-radius, radius]^dim with norm <= radius.
// radius = 0 yields the single zero vector.
template <typename Fn>
void for_each_ball_point(int dim, double radius, int grid, Fn&& fn) {
  Vec point = Vec::Zero(dim);
  if (radius == 0.0) {
    fn(point);
    return;
  }
  std::vector<int> idx(dim, 0);
  while (true) {
    for (int k = 0; k < dim; ++k)
      point(k) = -radius + 2.0 * radius * idx[k] / (grid - 1);
    if (point.norm() <= radius) fn(point);
    int k = 0;
    while (k < dim && ++idx[k] == grid) idx[k++] = 0;
    if (k == dim) break;
  }
}

}  // namespace detail

/// Grid maximization of |f(x, k(x+e))| over the ball |x| <= working_radius
/// and error ball |e| <= error_radius, inflated by a safety factor. Stores
/// the result in cert.dynamics_bound and returns it.
inline double bound_dynamics(const ControlSystem& sys, BarrierCertificate& cert,
                             double working_radius, double error_radius, int grid,
                             double inflation = 1.1) {
  if (grid < 2) throw std::invalid_argument("bound_dynamics: grid must be >= 2 per axis");
  if (!(working_radius > 0.0))
    throw std::invalid_argument("bound_dynamics: working_radius must be > 0");
  if (!(error_radius >= 0.0))
    throw std::invalid_argument("bound_dynamics: error_radius must be >= 0");

  double max_norm = 0.0;
  detail::for_each_ball_point(sys.state_dim, working_radius, grid, [&](const Vec& x) {
    detail::for_each_ball_point(sys.state_dim, error_radius, grid, [&](const Vec& e) {
      const Vec u = sys.controller(x + e);
      const Vec dx = sys.dynamics(x, u);
      const double n = dx.norm();
      if (!std::isfinite(n))
        throw std::runtime_error("bound_dynamics: non-finite dynamics value on grid");
      if (n > max_norm) max_norm = n;
    });
  });
  if (!(max_norm > 0.0))
    throw std::runtime_error("bound_dynamics: grid maximum is not positive");

  const double bound = inflation * max_norm;
  cert.dynamics_bound = bound;
  return bound;
}

/// Residual of the (strong) input-to-state safe barrier inequality at (x, e):
///   dh/dx . f(x, k(x+e)) + alpha(h(x)) - d + iota(|e|).
/// Nonnegative iff the inequality holds at this pair.
inline double certify_barrier_inequality(const ControlSystem& sys,
                                         const BarrierCertificate& cert, const Vec& x,
                                         const Vec& e) {
  const Vec u = sys.controller(x + e);
  const double hdot = cert.h.gradient(x).dot(sys.dynamics(x, u));
  return hdot + cert.alpha(cert.h.value(x)) - cert.strong_margin + cert.iota(e.norm());
}

}  // namespace etcbf
