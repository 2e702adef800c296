#pragma once

// Windowed series marching: steady-state initialization, one series window per
// step with the source coupling solved order by order, restart at each window end.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "motordt/circuit.hpp"
#include "motordt/error.hpp"
#include "motordt/motor.hpp"
#include "motordt/oracle.hpp"
#include "motordt/series.hpp"
#include "motordt/trajectory.hpp"

namespace motordt {

struct SimConfig {
  double h = 1e-3;
  std::size_t order = 8;
  double t_end = 1.0;
  double sample_dt = 1e-3;
  double residual_tol = 1e-10;

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("sim: h must be positive");
    if (order < 1) throw InvalidInput("sim: series order K must be at least 1");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidInput("sim: t_end must be positive");
    if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw InvalidInput("sim: sample_dt must be positive");
    if (!(residual_tol > 0.0)) throw InvalidInput("sim: residual_tol must be positive");
  }
};

// ---------------------------------------------------------------------------
// Steady-state initialization
// ---------------------------------------------------------------------------

struct SteadyState {
  MotorState state;
  AlgebraicPoint point;
  /// Genuine torque-balance roots found in the bracket, ascending.
  std::vector<double> roots;
  std::vector<std::string> warnings;
};

namespace detail {

struct EquilibriumProbe {
  MotorState state;
  AlgebraicPoint point;
  double slip_rate = 0.0;
};

// Transient voltages at their own equilibrium for slip s, and the resulting ds/dt.
inline EquilibriumProbe equilibrium_at(double s, const MotorParams& p, double ex, double ey,
                                       const TheveninSource& src) {
  const auto y = oracle::algebraic<double>(s, ex, ey, p, src);
  const double k = p.rotor_rate();
  const double d = p.reactance_drop();
  // [-k, ws s; -ws s, k] [vre; vim] = [k d iim; k d ire]
  const double a = -k, b = p.w_s * s, c = -p.w_s * s, e = k;
  const double det = a * e - b * c;
  EquilibriumProbe out;
  out.point = {y.vx, y.vy, y.ire, y.iim};
  if (det == 0.0) {
    out.slip_rate = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double r0 = k * d * y.iim, r1 = k * d * y.ire;
  out.state = {s, (r0 * e - b * r1) / det, (a * r1 - c * r0) / det};
  out.slip_rate = state_derivatives<double>(s, out.state.vre_p, out.state.vim_p, y.ire, y.iim, p)[0];
  return out;
}

}  // namespace detail

/// Torque-balance residual ds/dt at slip s with transient voltages at equilibrium.
inline double torque_balance(double s, const MotorParams& p, const TheveninSource& src) {
  const auto e = src.emf_rect_at(0.0);
  return detail::equilibrium_at(s, p, e[0], e[1], src).slip_rate;
}

/// Equilibrium under the source values in force at t = 0.
///
/// 200-point scan of (1e-6, 0.99), bisection of each sign change to 1e-12,
/// three finite-difference Newton polish steps. Sign changes across the pole at
/// s = r_r/x_r (where the transient-voltage balance is singular) are discarded.
inline SteadyState init_steady_state(const MotorParams& p, const TheveninSource& src) {
  p.validate();
  src.validate();
  const auto e = src.emf_rect_at(0.0);
  auto f = [&](double s) { return detail::equilibrium_at(s, p, e[0], e[1], src).slip_rate; };

  constexpr std::size_t kScan = 200;
  constexpr double lo = 1e-6, hi = 0.99;
  std::vector<double> grid(kScan), vals(kScan);
  for (std::size_t i = 0; i < kScan; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kScan - 1);
    vals[i] = f(grid[i]);
  }

  SteadyState out;
  for (std::size_t i = 0; i + 1 < kScan; ++i) {
    double a = grid[i], b = grid[i + 1], fa = vals[i], fb = vals[i + 1];
    if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
    if (fa == 0.0) {
      out.roots.push_back(a);
      continue;
    }
    if (fa * fb > 0.0) continue;
    while (b - a > 1e-12) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    double s = 0.5 * (a + b);
    for (int it = 0; it < 3; ++it) {
      const double fs = f(s);
      const double ds = 1e-7 * std::max(s, 1e-3);
      const double slope = (f(s + ds) - f(s - ds)) / (2.0 * ds);
      if (!(std::abs(slope) > 0.0) || !std::isfinite(slope)) break;
      const double cand = s - fs / slope;
      if (std::isfinite(cand) && std::abs(f(cand)) < std::abs(fs)) s = cand;
    }
    // A pole flips sign without passing through zero.
    if (std::abs(f(s)) <= 1e-8) out.roots.push_back(s);
  }

  if (out.roots.empty())
    throw NoEquilibrium("no torque-balance root for slip in (1e-6, 0.99)");
  if (out.roots.size() > 1) {
    std::string msg = "multiple equilibria at s =";
    for (double r : out.roots) msg += " " + std::to_string(r);
    out.warnings.push_back(msg + "; using the smallest");
  }
  const auto eq = detail::equilibrium_at(out.roots.front(), p, e[0], e[1], src);
  out.state = eq.state;
  out.point = eq.point;

  const auto d = state_derivatives<double>(eq.state.s, eq.state.vre_p, eq.state.vim_p, eq.point.ire, eq.point.iim, p);
  const double worst = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
  if (!(worst <= 1e-10))
    throw NoEquilibrium("equilibrium residual " + std::to_string(worst) + " exceeds 1e-10");
  if (!eq.state.slip_in_normal_range()) out.warnings.push_back("equilibrium slip outside [0, 1)");
  return out;
}

// ---------------------------------------------------------------------------
// One series window
// ---------------------------------------------------------------------------

struct WindowResult {
  MotorSeries series;
  PowerSeries vx;
  PowerSeries vy;
  MotorState end;
  WindowDiagnostics diag;

  /// Terminal voltage and current at offset tau inside the window, from their own series.
  [[nodiscard]] AlgebraicPoint algebraic_at(double tau) const noexcept {
    return {evaluate(vx, tau), evaluate(vy, tau), evaluate(series.ire, tau), evaluate(series.iim, tau)};
  }
  [[nodiscard]] MotorState state_at(double tau) const noexcept {
    return {evaluate(series.S, tau), evaluate(series.vre_p, tau), evaluate(series.vim_p, tau)};
  }
};

/// Build all series of one window of length `length` starting from `state`.
///
/// For each order k = 0..K: impedance intermediates, the affine injection map,
/// the coupled order-k solve for V(k), the u-terms and division-recurrence
/// currents, then (k < K) the order-(k+1) states.
inline WindowResult simulate_window(const MotorState& state, const MotorParams& p, const TheveninSource& src,
                                    double window_start, double length, std::size_t order,
                                    std::size_t window_index = 0) {
  if (!state.finite()) throw InvalidInput("simulate_window: initial state not finite");
  const auto emf = source_series(src, window_start, order, length);

  WindowResult w{MotorSeries::starting_at(state, order), PowerSeries(order), PowerSeries(order), {}, {}};
  auto& io = w.series;
  const double r = src.r, x = src.x;
  std::size_t k = 0;
  try {
    for (; k <= order; ++k) {
      dt_intermediates(k, p, io);
      const auto aff = injection_coeffs(k, w.vx, w.vy, io);
      const auto sol = solve_order_k(aff, emf.ex[k], emf.ey[k], src);
      w.vx[k] = sol.vx;
      w.vy[k] = sol.vy;
      dt_u(w.vx, w.vy, k, io);
      dt_currents(k, io);

      w.diag.two_path_deviation = std::max(w.diag.two_path_deviation, injection_deviation(aff, w.vx, w.vy, k, io));
      w.diag.circuit_residual =
          std::max({w.diag.circuit_residual, std::abs(w.vx[k] - (emf.ex[k] - (r * io.ire[k] - x * io.iim[k]))),
                    std::abs(w.vy[k] - (emf.ey[k] - (x * io.ire[k] + r * io.iim[k])))});
      if (k < order) advance_states(k, p, io);
    }
  } catch (const SimulationFailure&) {
    throw;
  } catch (const Error& err) {
    throw SimulationFailure(window_index, k, window_start, err.what());
  }
  w.diag.t0 = window_start;
  w.diag.length = length;
  w.diag.series_residual = residual_max(io, p, order);
  w.end = w.state_at(length);
  return w;
}

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

/// Raised when a window fails; carries everything sampled before the failure.
class PartialSimulation : public SimulationFailure {
 public:
  PartialSimulation(std::size_t window, std::size_t order, double t, const std::string& cause, Trajectory partial)
      : SimulationFailure(window, order, t, cause), partial_(std::move(partial)) {}

  [[nodiscard]] const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

struct Window {
  double start = 0.0;
  double length = 0.0;
};

/// Window layout over [0, t_end]: steps of h, restarted at every source event.
inline std::vector<Window> window_plan(const TheveninSource& src, double h, double t_end) {
  std::vector<double> cuts{0.0};
  for (const auto& ev : src.schedule)
    if (ev.t > 0.0 && ev.t < t_end) cuts.push_back(ev.t);
  cuts.push_back(t_end);

  std::vector<Window> plan;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / h - 1e-9)));
    for (std::size_t j = 0; j < n; ++j) {
      const double start = a + static_cast<double>(j) * h;
      const double end = j + 1 == n ? b : a + static_cast<double>(j + 1) * h;
      plan.push_back({start, end - start});
    }
  }
  return plan;
}

/// Series-method trajectory from `x0` (normally the steady state) at t = 0.
inline Trajectory simulate(const MotorParams& p, const TheveninSource& src, const SimConfig& cfg,
                           const MotorState& x0) {
  p.validate();
  src.validate();
  cfg.validate();

  Trajectory traj;
  traj.meta.method = "dt";
  traj.meta.h = cfg.h;
  traj.meta.order = cfg.order;
  traj.meta.t_end = cfg.t_end;
  traj.meta.sample_dt = cfg.sample_dt;

  const auto samples = sample_times(cfg.t_end, cfg.sample_dt);
  const auto plan = window_plan(src, cfg.h, cfg.t_end);
  std::size_t next = 0;
  MotorState x = x0;
  bool warned_slip = false;
  for (std::size_t wi = 0; wi < plan.size(); ++wi) {
    const auto [start, length] = plan[wi];
    const bool last = wi + 1 == plan.size();
    WindowResult w;
    try {
      w = simulate_window(x, p, src, start, length, cfg.order, wi);
    } catch (const SimulationFailure& err) {
      throw PartialSimulation(wi, err.order(), start, err.what(), std::move(traj));
    }
    if (!w.end.finite() || !w.series.S.all_finite())
      throw PartialSimulation(wi, cfg.order, start, "non-finite series", std::move(traj));
    w.diag.index = wi;
    if (w.diag.series_residual > cfg.residual_tol)
      traj.meta.warnings.push_back("window " + std::to_string(wi) + ": series residual " +
                                   std::to_string(w.diag.series_residual) + " above tolerance");

    const double end = start + length;
    while (next < samples.size() && (samples[next] < end || (last && samples[next] <= end))) {
      const double tau = samples[next] - start;
      traj.push(samples[next], w.state_at(tau), w.algebraic_at(tau));
      ++next;
    }
    if (!warned_slip && !w.end.slip_in_normal_range()) {
      traj.meta.warnings.push_back("slip left [0, 1) near t=" + std::to_string(end));
      warned_slip = true;
    }
    traj.meta.windows.push_back(w.diag);
    x = w.end;
  }
  return traj;
}

/// Series-method trajectory starting from the steady state.
inline Trajectory simulate(const MotorParams& p, const TheveninSource& src, const SimConfig& cfg) {
  const auto init = init_steady_state(p, src);
  auto traj = simulate(p, src, cfg, init.state);
  traj.meta.warnings.insert(traj.meta.warnings.begin(), init.warnings.begin(), init.warnings.end());
  return traj;
}

}  // namespace motordt
