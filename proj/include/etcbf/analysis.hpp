#pragma once

// Post-run metrics over an EventLog: interevent-time statistics against the
// theoretical MIET, trace safety margin, interevent shrinkage detection, and
// pointwise certification of the law-specific derivative inequality.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "etcbf/sim.hpp"
#include "etcbf/systems.hpp"
#include "etcbf/triggers.hpp"

namespace etcbf {

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

struct MietReport {
  int count = 0;
  double min = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double tau = 0.0;
  bool pass = true;  // vacuous when count == 0
};

inline MietReport miet_report(const EventLog& log, double tau_theoretical) {
  MietReport rep;
  rep.tau = tau_theoretical;
  rep.count = static_cast<int>(log.interevent_times.size());
  if (rep.count == 0) return rep;
  rep.min = *std::min_element(log.interevent_times.begin(), log.interevent_times.end());
  rep.max = *std::max_element(log.interevent_times.begin(), log.interevent_times.end());
  rep.median = detail::median(log.interevent_times);
  rep.pass = rep.min >= tau_theoretical - log.event_tol;
  return rep;
}

struct SafetyReport {
  double min_h = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;  // vacuous on an empty trace
};

inline SafetyReport safety_report(const EventLog& log, double eps_safety = 1e-6) {
  SafetyReport rep;
  if (log.samples.empty()) return rep;
  rep.min_h = log.samples.front().h;
  for (const Sample& s : log.samples) rep.min_h = std::min(rep.min_h, s.h);
  rep.pass = rep.min_h >= -eps_safety;
  return rep;
}

struct ShrinkageReport {
  bool conclusive = false;
  double first_decile_median = std::numeric_limits<double>::quiet_NaN();
  double last_decile_median = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool flagged = false;
};

/// Compares the first and last decile of interevent times (chronological).
/// A ratio above 10 flags shrinking intervals; fewer than 20 intervals is
/// inconclusive.
inline ShrinkageReport shrinkage_report(const EventLog& log) {
  ShrinkageReport rep;
  const auto& dts = log.interevent_times;
  const std::size_t n = dts.size();
  if (n < 20) return rep;
  const std::size_t k = n / 10;
  rep.conclusive = true;
  rep.first_decile_median =
      detail::median(std::vector<double>(dts.begin(), dts.begin() + k));
  rep.last_decile_median = detail::median(std::vector<double>(dts.end() - k, dts.end()));
  rep.ratio = rep.first_decile_median / rep.last_decile_median;
  rep.flagged = rep.ratio > 10.0;
  return rep;
}

struct CertificationReport {
  int checked = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  // Strong law only: slack against the tighter -beta(h) + (1-sigma)d bound.
  double min_strong_slack = std::numeric_limits<double>::infinity();
  double max_fd_error = 0.0;
  bool fd_ok = true;
  bool pass = true;

  void fold(double slack, double tolerance) {
    ++checked;
    min_slack = std::min(min_slack, slack);
    if (slack < -tolerance) pass = false;
  }
};

namespace detail {

// Finite-difference cross-check of the analytic derivative against adjacent
// samples of the same hold interval; tolerance max(1e-4, 1e-2 |deriv|).
inline void fd_crosscheck(CertificationReport& rep, const std::vector<Sample>& samples,
                          const std::vector<double>& analytic_deriv) {
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
    if (samples[k - 1].interval != samples[k].interval ||
        samples[k + 1].interval != samples[k].interval)
      continue;
    const double dt = samples[k + 1].t - samples[k - 1].t;
    if (dt <= 0.0) continue;
    const double fd = (samples[k + 1].h - samples[k - 1].h) / dt;
    const double err = std::abs(fd - analytic_deriv[k]);
    rep.max_fd_error = std::max(rep.max_fd_error, err);
    if (err > std::max(1e-4, 1e-2 * std::abs(analytic_deriv[k]))) rep.fd_ok = false;
  }
  if (!rep.fd_ok) rep.pass = false;
}

}  // namespace detail

/// Pointwise certification of the derivative inequality the active law
/// enforces, over all dense samples:
///   strong:       hdot + beta(h) >= (1-sigma) d   (both slacks reported)
///   naive:        hdot + (1+sigma) alpha(h) >= 0
///   signed naive: hdot + (1+sigma) alpha(h) >= 0 on h >= 0,
///                 hdot + (1-sigma) alpha(h) >= 0 on h < 0
inline CertificationReport certify_trajectory(const EventLog& log, const ControlSystem& sys,
                                              const BarrierCertificate& cert,
                                              const TriggerLaw& law,
                                              double tolerance = 1e-6) {
  if (std::holds_alternative<StabilizationTrigger>(law))
    throw std::invalid_argument(
        "certify_trajectory: use the Lyapunov overload for the stabilization law");

  CertificationReport rep;
  std::vector<double> hdots;
  hdots.reserve(log.samples.size());
  for (const Sample& s : log.samples) {
    const Vec& u = log.held_inputs[s.interval];
    const double hdot = cert.h.gradient(s.x).dot(sys.dynamics(s.x, u));
    hdots.push_back(hdot);

    if (const auto* strong = std::get_if<StrongIssfTrigger>(&law)) {
      const double slack = hdot + strong->beta(s.h);
      rep.fold(slack, tolerance);
      const double strong_slack = slack - (1.0 - strong->sigma) * strong->margin;
      rep.min_strong_slack = std::min(rep.min_strong_slack, strong_slack);
    } else if (const auto* naive = std::get_if<NaiveSafetyTrigger>(&law)) {
      rep.fold(hdot + (1.0 + naive->sigma) * naive->alpha(s.h), tolerance);
    } else {
      const auto& sn = std::get<SignedNaiveSafetyTrigger>(law);
      const double factor = s.h >= 0.0 ? 1.0 + sn.sigma : 1.0 - sn.sigma;
      rep.fold(hdot + factor * sn.alpha(s.h), tolerance);
    }
  }
  detail::fd_crosscheck(rep, log.samples, hdots);
  return rep;
}

/// Stabilization variant: checks Vdot <= (sigma - 1) alpha3(|x|) at every
/// sample, with slack (sigma - 1) alpha3(|x|) - Vdot.
inline CertificationReport certify_trajectory(const EventLog& log, const ControlSystem& sys,
                                              const IssLfCertificate& lf,
                                              const TriggerLaw& law,
                                              double tolerance = 1e-6) {
  const auto* stab = std::get_if<StabilizationTrigger>(&law);
  if (!stab)
    throw std::invalid_argument(
        "certify_trajectory: Lyapunov overload requires the stabilization law");

  CertificationReport rep;
  std::vector<double> vdots;
  vdots.reserve(log.samples.size());
  for (const Sample& s : log.samples) {
    const Vec& u = log.held_inputs[s.interval];
    const double vdot = lf.V.gradient(s.x).dot(sys.dynamics(s.x, u));
    vdots.push_back(vdot);
    rep.fold((stab->sigma - 1.0) * lf.alpha3(s.x.norm()) - vdot, tolerance);
  }
  detail::fd_crosscheck(rep, log.samples, vdots);
  return rep;
}

// --- JSON serialization (stable key names) ---

inline nlohmann::json to_json(const MietReport& r) {
  nlohmann::json j;
  j["count"] = r.count;
  j["min"] = r.count ? nlohmann::json(r.min) : nlohmann::json();
  j["median"] = r.count ? nlohmann::json(r.median) : nlohmann::json();
  j["max"] = r.count ? nlohmann::json(r.max) : nlohmann::json();
  j["tau"] = r.tau;
  j["pass"] = r.pass;
  return j;
}

inline nlohmann::json to_json(const SafetyReport& r) {
  nlohmann::json j;
  j["min_h"] = std::isnan(r.min_h) ? nlohmann::json() : nlohmann::json(r.min_h);
  j["pass"] = r.pass;
  return j;
}

inline nlohmann::json to_json(const ShrinkageReport& r) {
  nlohmann::json j;
  j["conclusive"] = r.conclusive;
  j["ratio"] = r.conclusive ? nlohmann::json(r.ratio) : nlohmann::json();
  j["first_decile_median"] =
      r.conclusive ? nlohmann::json(r.first_decile_median) : nlohmann::json();
  j["last_decile_median"] =
      r.conclusive ? nlohmann::json(r.last_decile_median) : nlohmann::json();
  j["flagged"] = r.flagged;
  return j;
}

inline nlohmann::json to_json(const CertificationReport& r) {
  nlohmann::json j;
  j["checked"] = r.checked;
  j["min_slack"] = r.checked ? nlohmann::json(r.min_slack) : nlohmann::json();
  if (std::isfinite(r.min_strong_slack)) j["min_strong_slack"] = r.min_strong_slack;
  j["max_fd_error"] = r.max_fd_error;
  j["fd_ok"] = r.fd_ok;
  j["pass"] = r.pass;
  return j;
}

}  // namespace etcbf
