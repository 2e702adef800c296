#pragma once

// Classical reference for the motor model: the algebraic variables are eliminated
// at every evaluation with a complex-number voltage divider, and the resulting
// ODE is integrated with fixed-step RK4. Nothing here touches the series code.
//
// Everything is templated on the working precision so the reference can run in
// long double when it has to resolve differences far below double round-off.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "motordt/circuit.hpp"
#include "motordt/error.hpp"
#include "motordt/motor.hpp"
#include "motordt/trajectory.hpp"

namespace motordt::oracle {

template <typename Real = double>
using StateVec = std::array<Real, 3>;

template <typename Real = double>
struct Instant {
  Real vx{}, vy{}, ire{}, iim{};
};

template <typename Real>
StateVec<Real> to_vec(const MotorState& x) {
  return {Real(x.s), Real(x.vre_p), Real(x.vim_p)};
}

template <typename Real>
MotorState to_state(const StateVec<Real>& x) {
  return {double(x[0]), double(x[1]), double(x[2])};
}

/// Terminal voltage and injection at slip s behind EMF (ex, ey).
template <typename Real = double>
Instant<Real> algebraic(Real s, Real ex, Real ey, const MotorParams& p, const TheveninSource& src) {
  using C = std::complex<Real>;
  const auto z = impedance_direct<Real>(s, p);
  const C zl(z.re, z.im);
  const C zn(Real(src.r), Real(src.x));
  const C total = zl + zn;
  if (!(std::norm(total) > Real(kDivisionEpsilon)))
    throw CouplingSingular("oracle: load plus source impedance vanishes");
  const C v = C(ex, ey) * zl / total;
  const auto i = current_direct<Real>(v.real(), v.imag(), s, p);
  return {v.real(), v.imag(), i.re, i.im};
}

/// Time derivatives with the EMF held at (ex, ey).
template <typename Real = double>
StateVec<Real> rhs_frozen(const StateVec<Real>& x, Real ex, Real ey, const MotorParams& p,
                          const TheveninSource& src) {
  const auto y = algebraic<Real>(x[0], ex, ey, p, src);
  return state_derivatives<Real>(x[0], x[1], x[2], y.ire, y.iim, p);
}

/// Time derivatives at time t (EMF from the source schedule, left-closed events).
template <typename Real = double>
StateVec<Real> rhs(const MotorState& x, const MotorParams& p, const TheveninSource& src, double t) {
  const auto e = src.emf_rect_at(t);
  return rhs_frozen<Real>(to_vec<Real>(x), Real(e[0]), Real(e[1]), p, src);
}

template <typename Real>
StateVec<Real> rk4_step(const StateVec<Real>& x, Real h, Real ex, Real ey, const MotorParams& p,
                        const TheveninSource& src) {
  auto axpy = [](const StateVec<Real>& a, Real c, const StateVec<Real>& b) {
    return StateVec<Real>{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
  };
  const Real half = h / Real(2);
  const auto k1 = rhs_frozen<Real>(x, ex, ey, p, src);
  const auto k2 = rhs_frozen<Real>(axpy(x, half, k1), ex, ey, p, src);
  const auto k3 = rhs_frozen<Real>(axpy(x, half, k2), ex, ey, p, src);
  const auto k4 = rhs_frozen<Real>(axpy(x, h, k3), ex, ey, p, src);
  StateVec<Real> out;
  for (std::size_t i = 0; i < 3; ++i) out[i] = x[i] + h / Real(6) * (k1[i] + Real(2) * (k2[i] + k3[i]) + k4[i]);
  return out;
}

/// Integrate from t0 to t1 (either direction) with the EMF frozen, using
/// equal substeps no longer than |step|.
template <typename Real>
StateVec<Real> advance(StateVec<Real> x, Real t0, Real t1, Real step, Real ex, Real ey, const MotorParams& p,
                       const TheveninSource& src) {
  const Real span = t1 - t0;
  if (span == Real(0)) return x;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / step - Real(1e-9)));
  const Real h = span / static_cast<Real>(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) x = rk4_step<Real>(x, h, ex, ey, p, src);
  return x;
}

struct Config {
  double step = 1e-5;
  double t_end = 1.0;
  double sample_dt = 1e-3;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidInput("oracle: step must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidInput("oracle: t_end must be positive");
    if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw InvalidInput("oracle: sample_dt must be positive");
  }
};

/// Fixed-step RK4 trajectory from x0 at t = 0. Integration stops at every
/// sample instant and every source event, so events never fall inside a step.
template <typename Real = double>
Trajectory integrate(const MotorParams& p, const TheveninSource& src, const MotorState& x0, const Config& cfg) {
  p.validate();
  src.validate();
  cfg.validate();

  const auto samples = sample_times(cfg.t_end, cfg.sample_dt);
  std::vector<double> stops = samples;
  for (const auto& ev : src.schedule)
    if (ev.t > 0.0 && ev.t < cfg.t_end) stops.push_back(ev.t);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  Trajectory traj;
  traj.meta.method = "oracle";
  traj.meta.t_end = cfg.t_end;
  traj.meta.sample_dt = cfg.sample_dt;
  traj.meta.step = cfg.step;

  auto record = [&](double t, const StateVec<Real>& x) {
    const auto e = src.emf_rect_at(t);
    const auto y = algebraic<Real>(x[0], Real(e[0]), Real(e[1]), p, src);
    traj.push(t, to_state(x), {double(y.vx), double(y.vy), double(y.ire), double(y.iim)});
  };

  StateVec<Real> x = to_vec<Real>(x0);
  std::size_t next_sample = 0;
  double t = 0.0;
  if (samples.front() == 0.0) {
    record(0.0, x);
    next_sample = 1;
  }
  for (double stop : stops) {
    if (stop <= t) continue;
    const auto e = src.emf_rect_at(t);
    x = advance<Real>(x, Real(t), Real(stop), Real(cfg.step), Real(e[0]), Real(e[1]), p, src);
    t = stop;
    if (next_sample < samples.size() && samples[next_sample] == stop) {
      record(stop, x);
      ++next_sample;
    }
  }
  return traj;
}

/// State trajectory through (t0, x0) under a source frozen at the values in force
/// at t0, evaluated at any t (backwards too) by RK4 with substeps <= step.
template <typename Real = double>
std::function<StateVec<Real>(Real)> flow(const MotorParams& p, const TheveninSource& src, const MotorState& x0,
                                         double t0, double step) {
  const auto e = src.emf_rect_at(t0);
  const TheveninSource frozen = src.frozen_at(t0);
  return [=](Real t) {
    return advance<Real>(to_vec<Real>(x0), Real(t0), t, Real(step), Real(e[0]), Real(e[1]), p, frozen);
  };
}

/// Finite-difference weights (Fornberg) for derivatives 0..max_deriv at 0 on the given nodes.
template <typename Real>
std::vector<std::vector<Real>> fd_weights(std::span<const Real> nodes, std::size_t max_deriv) {
  const std::size_t n = nodes.size();
  std::vector<std::vector<Real>> c(max_deriv + 1, std::vector<Real>(n, Real(0)));
  Real c1 = 1;
  Real c4 = nodes[0];
  c[0][0] = 1;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, max_deriv);
    Real c2 = 1;
    const Real c5 = c4;
    c4 = nodes[i];
    for (std::size_t j = 0; j < i; ++j) {
      const Real c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[k][i] = c1 * (Real(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - Real(k) * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Taylor coefficient estimates f^(k)(t0)/k!, k = 0..max_order (max 4), from a
/// 9-point central stencil of spacing `delta`. Any event inside the stencil is an error.
template <typename Real = double>
std::vector<Real> taylor_probe(const std::function<Real(Real)>& f, Real t0, std::size_t max_order,
                               Real delta = Real(1e-4), std::span<const double> events = {}) {
  if (max_order > 4) throw InvalidInput("taylor_probe: orders above 4 are not supported");
  if (!(delta > Real(0))) throw InvalidInput("taylor_probe: stencil step must be positive");
  for (double ev : events)
    if (std::abs(Real(ev) - t0) < Real(4) * delta)
      throw ContractViolation("taylor_probe: source event inside the stencil");

  constexpr int half = 4;
  std::array<Real, 2 * half + 1> offsets{};
  std::array<Real, 2 * half + 1> values{};
  for (int j = -half; j <= half; ++j) {
    offsets[j + half] = Real(j);
    values[j + half] = f(t0 + Real(j) * delta);
  }
  const auto w = fd_weights<Real>(offsets, max_order);
  std::vector<Real> out(max_order + 1, Real(0));
  Real factorial = 1;
  Real scale = 1;
  for (std::size_t k = 0; k <= max_order; ++k) {
    if (k > 0) {
      factorial *= Real(k);
      scale *= delta;
    }
    Real acc = 0;
    for (std::size_t j = 0; j < values.size(); ++j) acc += w[k][j] * values[j];
    out[k] = k == 0 ? values[half] : acc / (scale * factorial);
  }
  return out;
}

}  // namespace motordt::oracle
