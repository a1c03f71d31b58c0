#pragma once

// Sample-and-hold closed-loop simulation. Between events the input is frozen
// at k(x(t_i)) and the state integrates under the held dynamics; the trigger
// residual is monitored at every accepted step and at dense-output midpoints,
// and each event time is the first residual zero-crossing, localized by
// bisection on the dense output to within event_tol.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "etcbf/integrate.hpp"
#include "etcbf/systems.hpp"
#include "etcbf/triggers.hpp"
#include "etcbf/types.hpp"

namespace etcbf {

struct SimConfig {
  double t_final = 10.0;
  int max_events = 100000;
  double max_step = 0.05;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double event_tol = 1e-8;
  double sample_stride = 0.01;

  void validate() const {
    if (!(t_final > 0.0)) throw std::invalid_argument("SimConfig: t_final must be > 0");
    if (max_events < 1) throw std::invalid_argument("SimConfig: max_events must be >= 1");
    if (!(max_step > 0.0)) throw std::invalid_argument("SimConfig: max_step must be > 0");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw std::invalid_argument("SimConfig: tolerances must be > 0");
    if (!(event_tol > 0.0)) throw std::invalid_argument("SimConfig: event_tol must be > 0");
    if (!(event_tol < max_step))
      throw std::invalid_argument("SimConfig: event_tol must be well below max_step");
    if (!(sample_stride > 0.0))
      throw std::invalid_argument("SimConfig: sample_stride must be > 0");
  }
};

enum class Termination { TimeLimit, EventLimit, TriggerInfeasible, IntegrationFailure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::TimeLimit: return "time_limit";
    case Termination::EventLimit: return "event_limit";
    case Termination::TriggerInfeasible: return "trigger_infeasible";
    case Termination::IntegrationFailure: return "integration_failure";
  }
  return "unknown";
}

struct Sample {
  double t;
  Vec x;
  double h;         // certificate value at x
  double err_norm;  // |x(t_i) - x(t)| for the enclosing interval
  double residual;
  int interval;     // index of the enclosing hold interval
};

struct EventLog {
  std::vector<double> event_times;
  std::vector<Vec> event_states;
  std::vector<Vec> held_inputs;
  std::vector<double> event_h;
  std::vector<Sample> samples;
  std::vector<double> interevent_times;
  Termination termination = Termination::TimeLimit;
  double event_tol = 0.0;  // localization tolerance the log was produced with
};

inline bool trigger_bracket_ok(double r_lo, double r_hi) {
  return r_lo > 0.0 && r_hi <= 0.0;
}

/// Bisect the residual zero-crossing inside [t_lo, t_hi] on a dense segment.
/// Requires residual(t_lo) > 0 >= residual(t_hi); the bracket is narrowed to
/// tol and the midpoint returned.
inline double localize_event(const DenseSegment& seg,
                             const std::function<double(double, const Vec&)>& residual,
                             double t_lo, double t_hi, double tol) {
  if (!(trigger_bracket_ok(residual(t_lo, seg.eval(t_lo)), residual(t_hi, seg.eval(t_hi)))))
    throw std::logic_error("localize_event: no sign change in bracket");
  while (t_hi - t_lo > tol) {
    const double mid = 0.5 * (t_lo + t_hi);
    (residual(mid, seg.eval(mid)) > 0.0 ? t_lo : t_hi) = mid;
  }
  return 0.5 * (t_lo + t_hi);
}

/// Run the event-triggered closed loop from x0. The scalar field supplies
/// the certificate value recorded in samples and fed to the trigger (the
/// barrier for safety laws, the Lyapunov function for the stabilization law).
inline EventLog simulate(const ControlSystem& sys, const ScalarField& field,
                         const TriggerLaw& law, const Vec& x0, const SimConfig& cfg) {
  cfg.validate();
  if (!x0.allFinite()) throw std::invalid_argument("simulate: x0 must be finite");

  EventLog log;
  log.event_tol = cfg.event_tol;

  // Appends the event and refreshes the held input; false when the residual
  // is already nonpositive at the refresh (re-triggering impossible).
  const auto fire_event = [&](double t, const Vec& x) {
    if (!log.event_times.empty())
      log.interevent_times.push_back(t - log.event_times.back());
    log.event_times.push_back(t);
    log.event_states.push_back(x);
    log.held_inputs.push_back(sys.controller(x));
    log.event_h.push_back(field.value(x));
    return trigger_residual(law, log.event_h.back(), 0.0, x.norm()) > 0.0;
  };

  long stride_index = 0;
  const auto next_stride_time = [&]() { return stride_index * cfg.sample_stride; };
  const auto record_sample = [&](double t, const Vec& x, int interval, const Vec& x_i) {
    const double err = (x_i - x).norm();
    const double h = field.value(x);
    log.samples.push_back(
        {t, x, h, err, trigger_residual(law, h, err, x.norm()), interval});
  };

  if (!fire_event(0.0, x0)) {
    record_sample(0.0, x0, 0, x0);
    log.termination = Termination::TriggerInfeasible;
    return log;
  }

  while (true) {
    const int interval = static_cast<int>(log.event_times.size()) - 1;
    const double t_i = log.event_times.back();
    const Vec x_i = log.event_states.back();
    const Vec u_i = log.held_inputs.back();

    const auto rhs = [&sys, &u_i](double, const Vec& x) { return sys.dynamics(x, u_i); };
    const auto residual_at = [&](double, const Vec& x) {
      return trigger_residual(law, field.value(x), (x_i - x).norm(), x.norm());
    };

    StepperOptions opt{cfg.rel_tol, cfg.abs_tol, cfg.max_step, 0.0};
    try {
      Rk45Stepper stepper(rhs, t_i, x_i, opt);

      bool event_fired = false;
      while (!event_fired) {
        if (stepper.time() >= cfg.t_final) {
          log.termination = Termination::TimeLimit;
          return log;
        }
        const DenseSegment seg = stepper.step(cfg.t_final);

        const double t_mid = 0.5 * (seg.t0 + seg.t1);
        const double r_mid = residual_at(t_mid, seg.eval(t_mid));
        const double r_end = residual_at(seg.t1, seg.x1);

        double br_lo = seg.t0, br_hi = 0.0;
        bool crossing = false;
        if (r_mid <= 0.0) {
          br_hi = t_mid;
          crossing = true;
        } else if (r_end <= 0.0) {
          br_lo = t_mid;
          br_hi = seg.t1;
          crossing = true;
        }

        if (crossing) {
          const double t_ev =
              localize_event(seg, residual_at, br_lo, br_hi, cfg.event_tol);
          Vec x_ev;
          if (t_ev - seg.t0 < 64.0 * 2.22e-16 * std::max(1.0, std::abs(seg.t0)))
            x_ev = seg.eval(t_ev);
          else
            x_ev = integrate_to(rhs, seg.t0, seg.x0, t_ev, opt);

          while (next_stride_time() < t_ev && next_stride_time() <= seg.t1) {
            const double ts = next_stride_time();
            record_sample(ts, seg.eval(ts), interval, x_i);
            ++stride_index;
          }

          if (!fire_event(t_ev, x_ev)) {
            log.termination = Termination::TriggerInfeasible;
            return log;
          }
          if (static_cast<int>(log.event_times.size()) >= cfg.max_events) {
            log.termination = Termination::EventLimit;
            return log;
          }
          event_fired = true;
        } else {
          while (next_stride_time() <= seg.t1) {
            const double ts = next_stride_time();
            record_sample(ts, seg.eval(ts), interval, x_i);
            ++stride_index;
          }
        }
      }
    } catch (const std::runtime_error&) {
      log.termination = Termination::IntegrationFailure;
      return log;
    }
  }
}

inline EventLog simulate(const ControlSystem& sys, const BarrierCertificate& cert,
                         const TriggerLaw& law, const Vec& x0, const SimConfig& cfg) {
  return simulate(sys, cert.h, law, x0, cfg);
}

}  // namespace etcbf
