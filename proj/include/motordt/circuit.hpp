#pragma once

// Thevenin source feeding the motor terminal, and the per-order coupling solve.
//
// Circuit law: V = E - Znet I, Znet = [[r, -x], [x, r]] (rectangular form of r + jx).
// Combined with the motor's order-k map I(k) = A V(k) + B:
//   (I2 + A Znet) I(k) = A E(k) + B.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "motordt/error.hpp"
#include "motordt/motor.hpp"
#include "motordt/series.hpp"

namespace motordt {

inline constexpr double kDeterminantGuard = 1e-14;
inline constexpr double kConditionLimit = 1e12;

struct SourceEvent {
  double t = 0.0;
  double e_mag = 0.0;
  double e_ang = 0.0;
};

struct TheveninSource {
  double e_mag = 1.0;
  double e_ang = 0.0;
  double r = 0.0;
  double x = 0.0;
  std::vector<SourceEvent> schedule;

  void validate() const {
    if (!std::isfinite(e_mag) || !std::isfinite(e_ang) || !std::isfinite(r) || !std::isfinite(x))
      throw InvalidInput("source: values must be finite");
    if (!(r >= 0.0)) throw InvalidInput("source: r must be non-negative");
    if (!(e_mag >= 0.0)) throw InvalidInput("source: e_mag must be non-negative");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const auto& ev = schedule[i];
      if (!std::isfinite(ev.t) || !std::isfinite(ev.e_mag) || !std::isfinite(ev.e_ang))
        throw InvalidInput("source: event values must be finite");
      if (!(ev.e_mag >= 0.0)) throw InvalidInput("source: event e_mag must be non-negative");
      if (i > 0 && !(ev.t > schedule[i - 1].t))
        throw InvalidInput("source: event times must be strictly increasing");
    }
  }

  /// (e_mag, e_ang) in force at time t; events are left-closed.
  [[nodiscard]] std::pair<double, double> emf_at(double t) const noexcept {
    double mag = e_mag, ang = e_ang;
    for (const auto& ev : schedule) {
      if (ev.t > t) break;
      mag = ev.e_mag;
      ang = ev.e_ang;
    }
    return {mag, ang};
  }

  /// Rectangular EMF (Ex, Ey) in force at time t.
  [[nodiscard]] std::array<double, 2> emf_rect_at(double t) const noexcept {
    const auto [mag, ang] = emf_at(t);
    return {mag * std::cos(ang), mag * std::sin(ang)};
  }

  /// First event strictly after t, or +inf.
  [[nodiscard]] double next_event_after(double t) const noexcept {
    for (const auto& ev : schedule)
      if (ev.t > t) return ev.t;
    return std::numeric_limits<double>::infinity();
  }

  /// Same source frozen at the values in force at time t (no schedule).
  [[nodiscard]] TheveninSource frozen_at(double t) const {
    const auto [mag, ang] = emf_at(t);
    return TheveninSource{mag, ang, r, x, {}};
  }
};

/// Terminal voltage and injection at one instant.
struct AlgebraicPoint {
  double vx = 0.0;
  double vy = 0.0;
  double ire = 0.0;
  double iim = 0.0;
};

struct OrderSolution {
  double vx = 0.0;
  double vy = 0.0;
  double ire = 0.0;
  double iim = 0.0;
};

/// Order-k terminal voltage and current from the motor's affine map and the source.
inline OrderSolution solve_order_k(const InjectionAffine& aff, double ex_k, double ey_k,
                                   const TheveninSource& src) {
  const auto& a = aff.a;
  const double r = src.r, x = src.x;
  // M = I2 + A * Znet
  const double m00 = 1.0 + a[0][0] * r + a[0][1] * x;
  const double m01 = -a[0][0] * x + a[0][1] * r;
  const double m10 = a[1][0] * r + a[1][1] * x;
  const double m11 = 1.0 + -a[1][0] * x + a[1][1] * r;
  const double det = m00 * m11 - m01 * m10;
  if (!(std::abs(det) > kDeterminantGuard)) throw CouplingSingular("coupling system singular, det=" + std::to_string(det));

  const double i00 = m11 / det, i01 = -m01 / det, i10 = -m10 / det, i11 = m00 / det;
  const double norm_m = std::max(std::abs(m00) + std::abs(m01), std::abs(m10) + std::abs(m11));
  const double norm_inv = std::max(std::abs(i00) + std::abs(i01), std::abs(i10) + std::abs(i11));
  if (!(norm_m * norm_inv <= kConditionLimit))
    throw CouplingSingular("coupling system ill-conditioned, cond=" + std::to_string(norm_m * norm_inv));

  const double rhs0 = a[0][0] * ex_k + a[0][1] * ey_k + aff.b[0];
  const double rhs1 = a[1][0] * ex_k + a[1][1] * ey_k + aff.b[1];
  OrderSolution out;
  out.ire = i00 * rhs0 + i01 * rhs1;
  out.iim = i10 * rhs0 + i11 * rhs1;
  out.vx = ex_k - (r * out.ire - x * out.iim);
  out.vy = ey_k - (x * out.ire + r * out.iim);
  return out;
}

struct SourceSeries {
  PowerSeries ex;
  PowerSeries ey;
};

/// EMF series over a window [window_start, window_start + length).
///
/// The source is piecewise constant, so only order 0 is non-zero. A window
/// that contains an event strictly inside it is a contract violation.
inline SourceSeries source_series(const TheveninSource& src, double window_start, std::size_t order,
                                  double length = 0.0) {
  if (length > 0.0 && src.next_event_after(window_start) < window_start + length)
    throw ContractViolation("source_series: window straddles a source event");
  const auto e = src.emf_rect_at(window_start);
  return {PowerSeries::constant(e[0], order), PowerSeries::constant(e[1], order)};
}

}  // namespace motordt
