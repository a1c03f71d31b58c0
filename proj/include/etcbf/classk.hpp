#pragma once

// Scalar comparison functions: strictly increasing maps vanishing at zero,
// on one-sided ([0,a)) or two-sided (extended) domains.  These carry the
// gain functions used by every certificate and trigger law in the library.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace etcbf {

/// Interval of validity. Extended-domain functions are symmetric about 0;
/// one-sided functions live on [0, hi]. Treated as closed for containment.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double r) const { return r >= lo && r <= hi; }
};

inline Interval nonnegative_domain() {
  return Interval{0.0, std::numeric_limits<double>::infinity()};
}

struct ValidationReport {
  bool zero_at_zero = true;
  bool monotone = true;
  bool lipschitz_ok = true;  // vacuously true when no constant is set
  // First sample pair (r1, r2) violating monotonicity or the Lipschitz bound.
  std::optional<std::pair<double, double>> violation;

  bool passed() const { return zero_at_zero && monotone && lipschitz_ok; }

  std::string summary() const {
    if (passed()) return "pass";
    std::ostringstream os;
    os << "fail:";
    if (!zero_at_zero) os << " f(0) != 0";
    if (!monotone) os << " not strictly increasing";
    if (!lipschitz_ok) os << " Lipschitz bound violated";
    if (violation)
      os << " at pair (" << violation->first << ", " << violation->second << ")";
    return os.str();
  }
};

/// A validated scalar monotone function (class K / K-infinity / extended K).
/// Immutable after construction; safe to share across threads.
class KFunction {
 public:
  struct Linear {
    double slope;
  };
  // Sign-preserving power law: coeff * sign(r) * |r|^exponent. Odd extension
  // keeps any positive exponent strictly increasing on the whole line.
  struct Power {
    double coeff;
    double exponent;
  };
  // Piecewise-linear interpolation through sorted (r, f(r)) samples.
  struct Tabulated {
    std::vector<std::pair<double, double>> points;
  };
  // Shift transform of another function: f(r) = base(r - shift) - offset,
  // with offset = base(-shift) so that f(0) = 0 bit-exactly.
  struct Shifted {
    std::shared_ptr<const KFunction> base;
    double shift;
    double offset;
  };

  static KFunction linear(double slope, Interval dom = Interval{}) {
    if (!(slope > 0.0)) throw std::invalid_argument("KFunction::linear: slope must be > 0");
    return KFunction(Linear{slope}, dom);
  }

  static KFunction power(double coeff, double exponent, Interval dom = Interval{}) {
    if (!(coeff > 0.0)) throw std::invalid_argument("KFunction::power: coeff must be > 0");
    if (!(exponent > 0.0)) throw std::invalid_argument("KFunction::power: exponent must be > 0");
    return KFunction(Power{coeff, exponent}, dom);
  }

  static KFunction tabulated(std::vector<std::pair<double, double>> points) {
    if (points.size() < 2)
      throw std::invalid_argument("KFunction::tabulated: need at least 2 points");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (!(points[i - 1].first < points[i].first))
        throw std::invalid_argument("KFunction::tabulated: sample grid must be strictly increasing in r");
    Interval dom{points.front().first, points.back().first};
    return KFunction(Tabulated{std::move(points)}, dom);
  }

  KFunction with_lipschitz(double constant) const {
    if (!(constant >= 0.0))
      throw std::invalid_argument("KFunction::with_lipschitz: constant must be >= 0");
    KFunction f = *this;
    f.lipschitz_ = constant;
    return f;
  }

  const Interval& domain() const { return domain_; }
  std::optional<double> lipschitz_constant() const { return lipschitz_; }

  double operator()(double r) const {
    if (!domain_.contains(r)) {
      std::ostringstream os;
      os << "KFunction: argument " << r << " outside domain [" << domain_.lo
         << ", " << domain_.hi << "]";
      throw std::out_of_range(os.str());
    }
    return eval_unchecked(r);
  }

  template <typename Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), repr_);
  }

 private:
  using Repr = std::variant<Linear, Power, Tabulated, Shifted>;

  KFunction(Repr repr, Interval dom) : repr_(std::move(repr)), domain_(dom) {}

  double eval_unchecked(double r) const {
    if (const auto* l = std::get_if<Linear>(&repr_)) return l->slope * r;
    if (const auto* p = std::get_if<Power>(&repr_))
      return p->coeff * std::copysign(std::pow(std::abs(r), p->exponent), r);
    if (const auto* t = std::get_if<Tabulated>(&repr_)) return interp(t->points, r);
    const auto& s = std::get<Shifted>(repr_);
    return (*s.base)(r - s.shift) - s.offset;
  }

  static double interp(const std::vector<std::pair<double, double>>& pts, double r) {
    if (r <= pts.front().first) return pts.front().second;
    if (r >= pts.back().first) return pts.back().second;
    std::size_t lo = 0, hi = pts.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      (pts[mid].first <= r ? lo : hi) = mid;
    }
    const double t = (r - pts[lo].first) / (pts[hi].first - pts[lo].first);
    return pts[lo].second + t * (pts[hi].second - pts[lo].second);
  }

  friend std::pair<KFunction, double> shift_transform(const KFunction&, double);

  Repr repr_;
  Interval domain_;
  std::optional<double> lipschitz_;
};

inline double eval_k(const KFunction& f, double r) { return f(r); }

/// Sampled membership check: f(0) = 0, strict monotonicity, and (when a
/// Lipschitz constant is set) the sampled Lipschitz bound. Unbounded domains
/// are clipped to [-window, window] before sampling.
inline ValidationReport validate_k(const KFunction& f, int samples, double window = 10.0) {
  if (samples < 2) throw std::invalid_argument("validate_k: samples must be >= 2");
  ValidationReport rep;

  const double lo = std::max(f.domain().lo, -window);
  const double hi = std::min(f.domain().hi, window);
  if (f.domain().contains(0.0)) rep.zero_at_zero = (f(0.0) == 0.0);

  const std::optional<double> L = f.lipschitz_constant();
  double r_prev = lo, v_prev = f(lo);
  for (int i = 1; i < samples; ++i) {
    const double r = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
    const double v = f(r);
    if (rep.monotone && !(v_prev < v)) {
      rep.monotone = false;
      rep.violation = {r_prev, r};
    }
    if (L && rep.lipschitz_ok &&
        std::abs(v - v_prev) > *L * std::abs(r - r_prev) * (1.0 + 1e-9) + 1e-15) {
      rep.lipschitz_ok = false;
      if (!rep.violation) rep.violation = {r_prev, r};
    }
    r_prev = r;
    v_prev = v;
  }
  return rep;
}

/// Shift transform: alpha_b(r) = alpha(r - b) - alpha(-b), with margin
/// d_b = -alpha(-b) > 0. Requires b > 0 and -b inside alpha's domain.
inline std::pair<KFunction, double> shift_transform(const KFunction& alpha, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("shift_transform: b must be > 0");
  if (!alpha.domain().contains(-b))
    throw std::out_of_range("shift_transform: -b outside alpha's domain");

  const double offset = alpha(-b);
  const double margin = -offset;
  if (!(margin > 0.0))
    throw std::invalid_argument("shift_transform: alpha(-b) must be negative");

  Interval dom{alpha.domain().lo == -std::numeric_limits<double>::infinity()
                   ? -std::numeric_limits<double>::infinity()
                   : alpha.domain().lo + b,
               alpha.domain().hi == std::numeric_limits<double>::infinity()
                   ? std::numeric_limits<double>::infinity()
                   : alpha.domain().hi + b};
  KFunction shifted(KFunction::Shifted{std::make_shared<KFunction>(alpha), b, offset}, dom);
  if (auto L = alpha.lipschitz_constant()) shifted = shifted.with_lipschitz(*L);
  return {std::move(shifted), margin};
}

/// Inverse of an increasing function at y >= 0, by bracketing + bisection.
inline double invert_k(const KFunction& f, double y, double tol = 1e-14) {
  if (!(y >= 0.0)) throw std::invalid_argument("invert_k: y must be >= 0");
  if (y == 0.0) return 0.0;
  double hi = 1.0;
  const double dom_hi = f.domain().hi;
  while (f(std::min(hi, dom_hi)) < y) {
    if (hi >= dom_hi || hi > 1e154)
      throw std::out_of_range("invert_k: y not attained on the domain");
    hi *= 2.0;
  }
  hi = std::min(hi, dom_hi);
  double lo = 0.0;
  for (int i = 0; i < 200 && (hi - lo) > tol * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Pointwise positive scaling c*f for the analytic kinds. Used to build
/// tuning functions beta = c*alpha with c >= 1.
inline KFunction scale_k(const KFunction& f, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scale_k: c must be > 0");
  std::optional<KFunction> out;
  f.visit([&](const auto& repr) {
    using T = std::decay_t<decltype(repr)>;
    if constexpr (std::is_same_v<T, KFunction::Linear>) {
      out = KFunction::linear(c * repr.slope, f.domain());
    } else if constexpr (std::is_same_v<T, KFunction::Power>) {
      out = KFunction::power(c * repr.coeff, repr.exponent, f.domain());
    } else if constexpr (std::is_same_v<T, KFunction::Tabulated>) {
      auto pts = repr.points;
      for (auto& p : pts) p.second *= c;
      out = KFunction::tabulated(std::move(pts));
    } else {
      throw std::invalid_argument("scale_k: shifted functions cannot be scaled");
    }
  });
  if (auto L = f.lipschitz_constant()) out = out->with_lipschitz(c * *L);
  return *out;
}

}  // namespace etcbf
