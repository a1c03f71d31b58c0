#pragma once

// EventLog serialization. Column order is fixed; floats are printed with 17
// significant digits so identical runs produce byte-identical files.

#include <cstdio>
#include <ostream>
#include <string>

#include "etcbf/sim.hpp"

namespace etcbf {

namespace detail {

inline void append_float(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace detail

/// events.csv: index, t_i, dt_i, x..., u..., h  (dt_0 = 0).
inline void write_events_csv(std::ostream& os, const EventLog& log) {
  std::string line = "index,t_i,dt_i";
  if (!log.event_states.empty()) {
    for (Eigen::Index i = 0; i < log.event_states.front().size(); ++i)
      line += ",x" + std::to_string(i + 1);
    for (Eigen::Index i = 0; i < log.held_inputs.front().size(); ++i)
      line += ",u" + std::to_string(i + 1);
  }
  line += ",h\n";
  os << line;

  for (std::size_t i = 0; i < log.event_times.size(); ++i) {
    line = std::to_string(i);
    line += ',';
    detail::append_float(line, log.event_times[i]);
    line += ',';
    detail::append_float(line, i == 0 ? 0.0 : log.interevent_times[i - 1]);
    for (Eigen::Index k = 0; k < log.event_states[i].size(); ++k) {
      line += ',';
      detail::append_float(line, log.event_states[i](k));
    }
    for (Eigen::Index k = 0; k < log.held_inputs[i].size(); ++k) {
      line += ',';
      detail::append_float(line, log.held_inputs[i](k));
    }
    line += ',';
    detail::append_float(line, log.event_h[i]);
    line += '\n';
    os << line;
  }
}

/// trace.csv: t, x..., h, err_norm, residual.
inline void write_trace_csv(std::ostream& os, const EventLog& log) {
  std::string line = "t";
  if (!log.samples.empty())
    for (Eigen::Index i = 0; i < log.samples.front().x.size(); ++i)
      line += ",x" + std::to_string(i + 1);
  line += ",h,err_norm,residual\n";
  os << line;

  for (const Sample& s : log.samples) {
    line.clear();
    detail::append_float(line, s.t);
    for (Eigen::Index k = 0; k < s.x.size(); ++k) {
      line += ',';
      detail::append_float(line, s.x(k));
    }
    line += ',';
    detail::append_float(line, s.h);
    line += ',';
    detail::append_float(line, s.err_norm);
    line += ',';
    detail::append_float(line, s.residual);
    line += '\n';
    os << line;
  }
}

}  // namespace etcbf
