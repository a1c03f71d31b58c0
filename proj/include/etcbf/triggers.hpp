#pragma once

// The four trigger laws as residual functions with a uniform sign convention:
// positive while holding is permitted, zero on the event surface. Also the
// minimum-interevent-time bound and the certificate shift transform.

#include <cmath>
#include <stdexcept>
#include <variant>

#include "etcbf/classk.hpp"
#include "etcbf/systems.hpp"

namespace etcbf {

// Residual sigma*alpha3(|x|) - gamma(|e|); events keep the Lyapunov decay
// rate at a (1 - sigma) fraction of the nominal one.
struct StabilizationTrigger {
  KFunction gamma;
  KFunction alpha3;
  double sigma;  // (0, 1)
};

// Residual sigma*alpha(h) - iota(|e|). Infeasible outside the safe set,
// where alpha(h) < 0; kept to expose exactly that failure mode.
struct NaiveSafetyTrigger {
  KFunction iota;
  KFunction alpha;
  double sigma;  // > 0
};

// Residual sigma*|alpha(h)| - iota(|e|); feasible on both sides of the
// boundary but admits vanishing interevent times as h -> 0.
struct SignedNaiveSafetyTrigger {
  KFunction iota;
  KFunction alpha;
  double sigma;  // (0, 1)
};

// Residual beta(h) - alpha(h) + sigma*d - iota(|e|). With margin d > 0 the
// right-hand side stays >= sigma*d, which buys a positive minimum
// interevent time.
struct StrongIssfTrigger {
  KFunction iota;
  KFunction alpha;
  KFunction beta;  // beta(r) >= alpha(r) over the working range
  double sigma;    // (0, 1]
  double margin;   // d > 0
};

using TriggerLaw =
    std::variant<StabilizationTrigger, NaiveSafetyTrigger, SignedNaiveSafetyTrigger,
                 StrongIssfTrigger>;

inline TriggerLaw stabilization_trigger(KFunction gamma, KFunction alpha3, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw std::invalid_argument("stabilization trigger: sigma must be in (0,1)");
  return StabilizationTrigger{std::move(gamma), std::move(alpha3), sigma};
}

inline TriggerLaw naive_safety_trigger(KFunction iota, KFunction alpha, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("naive safety trigger: sigma must be > 0");
  return NaiveSafetyTrigger{std::move(iota), std::move(alpha), sigma};
}

inline TriggerLaw signed_naive_safety_trigger(KFunction iota, KFunction alpha,
                                              double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw std::invalid_argument("signed naive safety trigger: sigma must be in (0,1)");
  return SignedNaiveSafetyTrigger{std::move(iota), std::move(alpha), sigma};
}

inline TriggerLaw strong_issf_trigger(KFunction iota, KFunction alpha, KFunction beta,
                                      double sigma, double margin) {
  if (!(sigma > 0.0 && sigma <= 1.0))
    throw std::invalid_argument("strong ISSf trigger: sigma must be in (0,1]");
  if (!(margin > 0.0))
    throw std::invalid_argument("strong ISSf trigger: margin d must be > 0");
  return StrongIssfTrigger{std::move(iota), std::move(alpha), std::move(beta), sigma,
                           margin};
}

/// Trigger residual at a point: h_val is the certificate value h(x) (ignored
/// by the stabilization law), err_norm = |e|, state_norm = |x|. Positive
/// means holding is permitted; an event must fire no later than the first
/// zero-crossing from above.
inline double trigger_residual(const TriggerLaw& law, double h_val, double err_norm,
                               double state_norm) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, StabilizationTrigger>) {
          return t.sigma * t.alpha3(state_norm) - t.gamma(err_norm);
        } else if constexpr (std::is_same_v<T, NaiveSafetyTrigger>) {
          return t.sigma * t.alpha(h_val) - t.iota(err_norm);
        } else if constexpr (std::is_same_v<T, SignedNaiveSafetyTrigger>) {
          return t.sigma * std::abs(t.alpha(h_val)) - t.iota(err_norm);
        } else {
          return t.beta(h_val) - t.alpha(h_val) + t.sigma * t.margin - t.iota(err_norm);
        }
      },
      law);
}

/// Guaranteed minimum interevent time tau = sigma*d / (L_iota * F).
inline double miet_bound(const StrongIssfTrigger& law, double lipschitz_iota, double dynamics_bound) {
  if (!(lipschitz_iota > 0.0))
    throw std::invalid_argument("miet_bound: L_iota must be > 0");
  if (!(dynamics_bound > 0.0))
    throw std::invalid_argument("miet_bound: F must be > 0");
  if (!(law.margin > 0.0)) throw std::invalid_argument("miet_bound: margin d must be > 0");
  return law.sigma * law.margin / (lipschitz_iota * dynamics_bound);
}

/// Lift a certificate to the inflated set {h + b >= 0}: h_b = h + b with the
/// same gradient, alpha_b from the shift transform, and strong margin
/// d_b = -alpha(-b) > 0. The dynamics bound is cleared since the working set
/// grew; recompute it before using the MIET bound.
inline BarrierCertificate shift_certificate(const BarrierCertificate& cert, double b) {
  auto [alpha_b, margin] = shift_transform(cert.alpha, b);
  BarrierCertificate out{
      ScalarField{[value = cert.h.value, b](const Vec& x) { return value(x) + b; },
                  cert.h.gradient},
      std::move(alpha_b), cert.iota, margin, std::nullopt};
  return out;
}

/// Sampled check of the tuning assumption beta(r) >= alpha(r) over [lo, hi].
inline bool beta_dominates_alpha(const KFunction& beta, const KFunction& alpha, double lo,
                                 double hi, int samples = 1000) {
  if (samples < 2) throw std::invalid_argument("beta_dominates_alpha: samples must be >= 2");
  for (int i = 0; i < samples; ++i) {
    const double r = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
    if (beta(r) < alpha(r)) return false;
  }
  return true;
}

/// Largest error norm at which any trigger residual can stay nonnegative,
/// obtained by inverting the error gain at the maximum residual right-hand
/// side over the reachable range. For the stabilization law range_hi bounds
/// |x|; for the safety laws it bounds the certificate value h.
inline double trigger_error_radius(const TriggerLaw& law, double range_hi,
                                   int samples = 1000) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        double rhs_max = 0.0;
        for (int i = 0; i < samples; ++i) {
          const double r = range_hi * static_cast<double>(i) / (samples - 1);
          double rhs;
          if constexpr (std::is_same_v<T, StabilizationTrigger>) {
            rhs = t.sigma * t.alpha3(r);
          } else if constexpr (std::is_same_v<T, NaiveSafetyTrigger>) {
            rhs = t.sigma * t.alpha(r);
          } else if constexpr (std::is_same_v<T, SignedNaiveSafetyTrigger>) {
            rhs = t.sigma * std::abs(t.alpha(r));
          } else {
            rhs = t.beta(r) - t.alpha(r) + t.sigma * t.margin;
          }
          if (rhs > rhs_max) rhs_max = rhs;
        }
        const KFunction& gain = [&]() -> const KFunction& {
          if constexpr (std::is_same_v<T, StabilizationTrigger>)
            return t.gamma;
          else
            return t.iota;
        }();
        return invert_k(gain, rhs_max);
      },
      law);
}

}  // namespace etcbf
