#pragma once

// Third-order induction motor load: parameters, direct algebra and the
// differential-transformation recurrences for one series window.
//
// Model (states s, v're, v'im; algebraic i_re, i_im at terminal voltage vx + j vy):
//
//   ds/dt    = (a1 s^2 + b1 s + c1 - v're i_re + v'im i_im) / (2H)
//   dv're/dt = -ws (rr/xr) ((xs - xs') i_im + v're) + ws s v'im
//   dv'im/dt = -ws (rr/xr) ((xs - xs') i_re - v'im) - ws s v're
//
//   z1 = rr^2 + xr^2 s^2,  z0 = rr^2 (xs - xs') / z1
//   z_re = rs + z0,        z_im = xs' + (xr/rr) z0 s
//   i_re + j i_im = (vx + j vy) / (z_re + j z_im)
//
// Signs follow the model exactly as stated above, including the electrical
// torque term; see README for the caveat.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "motordt/error.hpp"
#include "motordt/series.hpp"

namespace motordt {

struct MotorParams {
  double H = 0.0;    ///< inertia constant (s)
  double a1 = 0.0;   ///< mechanical torque, s^2 coefficient (pu)
  double b1 = 0.0;   ///< mechanical torque, s coefficient (pu)
  double c1 = 0.0;   ///< mechanical torque, constant (pu)
  double r_s = 0.0;  ///< stator resistance (pu)
  double x_s = 0.0;  ///< synchronous reactance (pu)
  double x_sp = 0.0; ///< transient reactance x_s' (pu)
  double r_r = 0.0;  ///< rotor resistance (pu)
  double x_r = 0.0;  ///< rotor reactance (pu)
  double w_s = 0.0;  ///< synchronous electrical speed (rad/s)

  /// Throws InvalidInput when an invariant is broken.
  void validate() const {
    const std::array<double, 10> all{H, a1, b1, c1, r_s, x_s, x_sp, r_r, x_r, w_s};
    for (double v : all)
      if (!std::isfinite(v)) throw InvalidInput("motor parameters must be finite");
    if (!(H > 0.0)) throw InvalidInput("motor: H must be positive");
    if (!(r_r > 0.0)) throw InvalidInput("motor: r_r must be positive");
    if (!(x_r > 0.0)) throw InvalidInput("motor: x_r must be positive");
    if (!(w_s > 0.0)) throw InvalidInput("motor: w_s must be positive");
    if (!(x_sp > 0.0 && x_s > x_sp)) throw InvalidInput("motor: require x_s > x_sp > 0");
  }

  /// (x_s - x_s').
  [[nodiscard]] double reactance_drop() const noexcept { return x_s - x_sp; }
  /// ws * rr / xr, the rotor-circuit rate.
  [[nodiscard]] double rotor_rate() const noexcept { return w_s * r_r / x_r; }
};

struct MotorState {
  double s = 0.0;
  double vre_p = 0.0;
  double vim_p = 0.0;

  [[nodiscard]] bool finite() const noexcept {
    return std::isfinite(s) && std::isfinite(vre_p) && std::isfinite(vim_p);
  }
  /// Healthy operation keeps slip in [0, 1); outside is legal but worth a warning.
  [[nodiscard]] bool slip_in_normal_range() const noexcept { return s >= 0.0 && s < 1.0; }

  friend bool operator==(const MotorState&, const MotorState&) = default;
};

template <typename Real = double>
struct Impedance {
  Real re{};
  Real im{};
};

template <typename Real = double>
struct Current {
  Real re{};
  Real im{};
};

/// Equivalent impedance at slip s.
template <typename Real = double>
Impedance<Real> impedance_direct(Real s, const MotorParams& p) {
  const Real rr = p.r_r;
  const Real xr = p.x_r;
  const Real z1 = rr * rr + xr * xr * s * s;
  const Real z0 = rr * rr * Real(p.reactance_drop()) / z1;
  return {Real(p.r_s) + z0, Real(p.x_sp) + (xr / rr) * z0 * s};
}

/// Current injection drawn at terminal voltage (vx, vy) and slip s.
template <typename Real = double>
Current<Real> current_direct(Real vx, Real vy, Real s, const MotorParams& p) {
  const auto z = impedance_direct<Real>(s, p);
  const Real mag2 = z.re * z.re + z.im * z.im;
  if (!(mag2 > Real(kDivisionEpsilon))) throw SingularDivision("current_direct", static_cast<double>(mag2));
  return {(vx * z.re + vy * z.im) / mag2, (-vx * z.im + vy * z.re) / mag2};
}

/// Right-hand side of the three state equations given the instantaneous currents.
template <typename Real = double>
std::array<Real, 3> state_derivatives(Real s, Real vre_p, Real vim_p, Real ire, Real iim, const MotorParams& p) {
  const Real drop = p.reactance_drop();
  const Real rate = p.rotor_rate();
  const Real ws = p.w_s;
  return {
      (Real(p.a1) * s * s + Real(p.b1) * s + Real(p.c1) - vre_p * ire + vim_p * iim) / (Real(2) * Real(p.H)),
      -rate * (drop * iim + vre_p) + ws * s * vim_p,
      -rate * (drop * ire - vim_p) - ws * s * vre_p,
  };
}

/// Every transformed signal of one motor over one window, common order K.
///
/// Coefficients are populated order by order in the sequence
/// intermediates -> u-terms -> currents -> state advance. `filled` counts the
/// populated coefficients of each group and is checked by every recurrence.
struct MotorSeries {
  struct Fill {
    std::size_t states = 0;
    std::size_t intermediates = 0;
    std::size_t u = 0;
    std::size_t currents = 0;
  };

  MotorSeries() = default;
  explicit MotorSeries(std::size_t order)
      : S(order), vre_p(order), vim_p(order), ire(order), iim(order), z0(order), z1(order),
        zre(order), zim(order), u0(order), u1(order), u2(order) {}

  /// Fresh series whose order-0 states are `x`.
  static MotorSeries starting_at(const MotorState& x, std::size_t order) {
    MotorSeries m(order);
    m.S[0] = x.s;
    m.vre_p[0] = x.vre_p;
    m.vim_p[0] = x.vim_p;
    m.filled.states = 1;
    return m;
  }

  [[nodiscard]] std::size_t order() const noexcept { return S.order(); }

  PowerSeries S, vre_p, vim_p;
  PowerSeries ire, iim;
  PowerSeries z0, z1, zre, zim;
  PowerSeries u0, u1, u2;
  Fill filled;
};

/// Order-k affine map I(k) = a V(k) + b.
struct InjectionAffine {
  std::array<std::array<double, 2>, 2> a{};
  std::array<double, 2> b{};

  [[nodiscard]] std::array<double, 2> apply(double vx, double vy) const noexcept {
    return {a[0][0] * vx + a[0][1] * vy + b[0], a[1][0] * vx + a[1][1] * vy + b[1]};
  }
};

namespace detail {

inline void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ContractViolation(std::string(op) + ": " + what);
}

inline void require_order(const MotorSeries& io, std::size_t k, const char* op) {
  require(k <= io.order(), op, "order " + std::to_string(k) + " beyond truncation order");
}

}  // namespace detail

/// Z1(k), Z0(k), Zre(k), Zim(k) from the slip series.
inline void dt_intermediates(std::size_t k, const MotorParams& p, MotorSeries& io) {
  detail::require_order(io, k, "dt_intermediates");
  detail::require(io.filled.states > k, "dt_intermediates", "slip not populated through order k");
  detail::require(io.filled.intermediates == k, "dt_intermediates", "intermediates must be filled in order");

  const double rr2 = p.r_r * p.r_r;
  io.z1[k] = rr2 * delta(k) + p.x_r * p.x_r * conv(io.S, io.S, k);
  io.z0[k] = divide_step(rr2 * p.reactance_drop() * delta(k), io.z1, io.z0, k, "dt_intermediates");
  io.zre[k] = p.r_s * delta(k) + io.z0[k];
  io.zim[k] = p.x_sp * delta(k) + (p.x_r / p.r_r) * conv(io.z0, io.S, k);
  io.filled.intermediates = k + 1;
}

/// U0(k), U1(k), U2(k) from the voltage and impedance series.
inline void dt_u(const PowerSeries& vx, const PowerSeries& vy, std::size_t k, MotorSeries& io) {
  detail::require_order(io, k, "dt_u");
  detail::require(io.filled.intermediates > k, "dt_u", "impedance not populated through order k");
  detail::require(io.filled.u == k, "dt_u", "u-terms must be filled in order");

  io.u1[k] = conv(vx, io.zre, k) + conv(vy, io.zim, k);
  io.u2[k] = -conv(vx, io.zim, k) + conv(vy, io.zre, k);
  io.u0[k] = conv(io.zre, io.zre, k) + conv(io.zim, io.zim, k);
  io.filled.u = k + 1;
}

/// Ire(k), Iim(k) by the division recurrence I (x) U0 = U1, U2.
inline void dt_currents(std::size_t k, MotorSeries& io) {
  detail::require_order(io, k, "dt_currents");
  detail::require(io.filled.u > k, "dt_currents", "u-terms not populated through order k");
  detail::require(io.filled.currents == k, "dt_currents", "currents must be filled in order");

  io.ire[k] = divide_step(io.u1[k], io.u0, io.ire, k, "dt_currents");
  io.iim[k] = divide_step(io.u2[k], io.u0, io.iim, k, "dt_currents");
  io.filled.currents = k + 1;
}

/// Affine map giving the order-k currents from the yet-unknown order-k voltages.
///
/// Needs Zre, Zim through order k and Vx, Vy, Ire, Iim through order k-1. U0(k)
/// is populated here if it is not already; it depends on impedances only.
inline InjectionAffine injection_coeffs(std::size_t k, const PowerSeries& vx, const PowerSeries& vy,
                                        MotorSeries& io) {
  detail::require_order(io, k, "injection_coeffs");
  detail::require(io.filled.intermediates > k, "injection_coeffs", "impedance not populated through order k");
  detail::require(io.filled.currents >= k, "injection_coeffs", "currents not populated through order k-1");
  detail::require(io.filled.u >= k, "injection_coeffs", "u-terms not populated through order k-1");

  const double u00 = conv(io.zre, io.zre, 0) + conv(io.zim, io.zim, 0);
  if (!(std::abs(u00) > kDivisionEpsilon)) throw SingularDivision("injection_coeffs", u00);
  // U0(k) for the history sums; conv reads only impedances.
  const double u0k = conv(io.zre, io.zre, k) + conv(io.zim, io.zim, k);

  double sum_vx_zre = 0.0, sum_vy_zim = 0.0, sum_vx_zim = 0.0, sum_vy_zre = 0.0;
  double sum_u0_ire = 0.0, sum_u0_iim = 0.0;
  for (std::size_t m = 0; m < k; ++m) {
    sum_vx_zre += vx[m] * io.zre[k - m];
    sum_vy_zim += vy[m] * io.zim[k - m];
    sum_vx_zim += vx[m] * io.zim[k - m];
    sum_vy_zre += vy[m] * io.zre[k - m];
    const double u0 = m == 0 ? u0k : io.u0[k - m];
    sum_u0_ire += u0 * io.ire[m];
    sum_u0_iim += u0 * io.iim[m];
  }
  const double b1 = sum_vx_zre + sum_vy_zim - sum_u0_ire;
  const double b2 = -sum_vx_zim + sum_vy_zre - sum_u0_iim;

  const double p = io.zre[0] / u00;
  const double q = io.zim[0] / u00;
  InjectionAffine aff;
  aff.a = {{{p, q}, {-q, p}}};
  aff.b = {b1 / u00, b2 / u00};
  return aff;
}

/// Order-(k+1) state coefficients from everything populated through order k.
inline MotorState advance_states(std::size_t k, const MotorParams& p, MotorSeries& io) {
  detail::require(k + 1 <= io.order(), "advance_states", "order k+1 beyond truncation order");
  detail::require(io.filled.states == k + 1, "advance_states", "states must be advanced in order");
  detail::require(io.filled.currents > k, "advance_states", "currents not populated through order k");

  const double n = static_cast<double>(k + 1);
  const double rate = p.rotor_rate();
  const double drop = p.reactance_drop();
  const double ds = (p.a1 * conv(io.S, io.S, k) + p.b1 * io.S[k] + p.c1 * delta(k) -
                     conv(io.vre_p, io.ire, k) + conv(io.vim_p, io.iim, k)) /
                    (2.0 * p.H);
  const double dvre = -rate * (drop * io.iim[k] + io.vre_p[k]) + p.w_s * conv(io.S, io.vim_p, k);
  const double dvim = -rate * (drop * io.ire[k] - io.vim_p[k]) - p.w_s * conv(io.S, io.vre_p, k);

  io.S[k + 1] = ds / n;
  io.vre_p[k + 1] = dvre / n;
  io.vim_p[k + 1] = dvim / n;
  io.filled.states = k + 2;
  return {io.S[k + 1], io.vre_p[k + 1], io.vim_p[k + 1]};
}

/// Relative gap at order k between the division-recurrence currents already in
/// `io` and the affine map applied to V(k). The gap is scaled by the magnitude of
/// the terms the two computations combine, so it measures rounding only.
inline double injection_deviation(const InjectionAffine& aff, const PowerSeries& vx, const PowerSeries& vy,
                                  std::size_t k, const MotorSeries& io) {
  detail::require(io.filled.currents > k, "injection_deviation", "currents not populated through order k");
  const auto via_map = aff.apply(vx[k], vy[k]);
  double scale = 0.0;
  for (std::size_t m = 0; m <= k; ++m) {
    const double z = std::abs(io.zre[k - m]) + std::abs(io.zim[k - m]);
    scale += (std::abs(vx[m]) + std::abs(vy[m])) * z;
    if (m < k) scale += std::abs(io.u0[k - m]) * (std::abs(io.ire[m]) + std::abs(io.iim[m]));
  }
  scale /= std::abs(io.u0[0]);
  scale = std::max(scale, std::numeric_limits<double>::min());
  return std::max(std::abs(io.ire[k] - via_map[0]), std::abs(io.iim[k] - via_map[1])) / scale;
}

/// Largest violation of the three series identities through order `upto`:
/// Z0 (x) Z1 = rr^2 (xs - xs') delta, U0 (x) Ire = U1, U0 (x) Iim = U2.
inline double residual_max(const MotorSeries& io, const MotorParams& p, std::size_t upto) {
  const double c = p.r_r * p.r_r * p.reactance_drop();
  double worst = 0.0;
  for (std::size_t k = 0; k <= upto; ++k) {
    worst = std::max(worst, std::abs(conv(io.z0, io.z1, k) - c * delta(k)));
    worst = std::max(worst, std::abs(conv(io.u0, io.ire, k) - io.u1[k]));
    worst = std::max(worst, std::abs(conv(io.u0, io.iim, k) - io.u2[k]));
  }
  return worst;
}

}  // namespace motordt
