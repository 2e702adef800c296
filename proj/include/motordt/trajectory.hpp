#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "motordt/circuit.hpp"
#include "motordt/motor.hpp"

namespace motordt {

/// Per-window health figures recorded by the series marcher.
struct WindowDiagnostics {
  std::size_t index = 0;
  double t0 = 0.0;
  double length = 0.0;
  /// Largest violation of the Z0/Z1 and U0/current series identities.
  double series_residual = 0.0;
  /// Largest relative gap between the division-recurrence currents and the affine map.
  double two_path_deviation = 0.0;
  /// Largest violation of the circuit law V(k) = E(k) - Znet I(k).
  double circuit_residual = 0.0;
};

struct TrajectoryMeta {
  std::string method;
  double h = 0.0;
  std::size_t order = 0;
  double t_end = 0.0;
  double sample_dt = 0.0;
  double step = 0.0;  ///< oracle integration step, 0 for the series method
  std::vector<WindowDiagnostics> windows;
  std::vector<std::string> warnings;

  [[nodiscard]] double max_series_residual() const noexcept {
    double m = 0.0;
    for (const auto& w : windows) m = std::max(m, w.series_residual);
    return m;
  }
  [[nodiscard]] double max_two_path_deviation() const noexcept {
    double m = 0.0;
    for (const auto& w : windows) m = std::max(m, w.two_path_deviation);
    return m;
  }
  [[nodiscard]] double max_circuit_residual() const noexcept {
    double m = 0.0;
    for (const auto& w : windows) m = std::max(m, w.circuit_residual);
    return m;
  }
};

/// Time-sampled states and algebraic variables.
struct Trajectory {
  std::vector<double> times;
  std::vector<MotorState> states;
  std::vector<AlgebraicPoint> algebraics;
  TrajectoryMeta meta;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  [[nodiscard]] bool empty() const noexcept { return times.empty(); }

  void push(double t, const MotorState& x, const AlgebraicPoint& y) {
    times.push_back(t);
    states.push_back(x);
    algebraics.push_back(y);
  }
};

/// Column-wise maximum absolute deviation between two trajectories on the same sample grid.
struct TrajectoryDeviation {
  double s = 0.0, vre_p = 0.0, vim_p = 0.0;
  double vx = 0.0, vy = 0.0, ire = 0.0, iim = 0.0;

  [[nodiscard]] double states_max() const noexcept { return std::max({s, vre_p, vim_p}); }
  [[nodiscard]] double currents_max() const noexcept { return std::max(ire, iim); }
};

inline TrajectoryDeviation compare(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw InvalidInput("compare: trajectories have different sample counts");
  TrajectoryDeviation d;
  auto upd = [](double& m, double x, double y) { m = std::max(m, std::abs(x - y)); };
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i])))
      throw InvalidInput("compare: sample grids differ");
    upd(d.s, a.states[i].s, b.states[i].s);
    upd(d.vre_p, a.states[i].vre_p, b.states[i].vre_p);
    upd(d.vim_p, a.states[i].vim_p, b.states[i].vim_p);
    upd(d.vx, a.algebraics[i].vx, b.algebraics[i].vx);
    upd(d.vy, a.algebraics[i].vy, b.algebraics[i].vy);
    upd(d.ire, a.algebraics[i].ire, b.algebraics[i].ire);
    upd(d.iim, a.algebraics[i].iim, b.algebraics[i].iim);
  }
  return d;
}

/// Sample instants 0, dt, 2dt, ... up to t_end; t_end is always the last sample.
inline std::vector<double> sample_times(double t_end, double dt) {
  std::vector<double> out;
  const double tol = 1e-9 * dt;
  for (std::size_t n = 0;; ++n) {
    const double t = static_cast<double>(n) * dt;
    if (t >= t_end - tol) break;
    out.push_back(t);
  }
  out.push_back(t_end);
  return out;
}

}  // namespace motordt
