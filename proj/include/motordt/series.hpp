#pragma once

// Truncated power-series arithmetic.
//
// A series holds X(0..K) with X(k) = x^(k)(t0) / k!, the Taylor coefficients of a
// signal about the start of a time window. The Cauchy product, the impulse, the
// division recurrence and Horner evaluation are all that the motor recurrences need.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "motordt/error.hpp"

namespace motordt {

/// Leading-coefficient magnitude below which series division is refused.
inline constexpr double kDivisionEpsilon = 1e-12;

template <typename Real>
class BasicPowerSeries {
 public:
  using value_type = Real;

  BasicPowerSeries() : coeffs_(1, Real{0}) {}

  /// Zero series of truncation order `order` (order+1 coefficients).
  explicit BasicPowerSeries(std::size_t order) : coeffs_(order + 1, Real{0}) {}

  BasicPowerSeries(std::initializer_list<Real> coeffs) : coeffs_(coeffs) { validate(); }

  explicit BasicPowerSeries(std::vector<Real> coeffs) : coeffs_(std::move(coeffs)) { validate(); }

  /// Series of the constant `value`: value * delta.
  static BasicPowerSeries constant(Real value, std::size_t order) {
    BasicPowerSeries s(order);
    s.coeffs_[0] = value;
    return s;
  }

  [[nodiscard]] std::size_t order() const noexcept { return coeffs_.size() - 1; }
  [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }

  Real& operator[](std::size_t k) noexcept { return coeffs_[k]; }
  const Real& operator[](std::size_t k) const noexcept { return coeffs_[k]; }

  Real& at(std::size_t k) {
    check_index(k);
    return coeffs_[k];
  }
  [[nodiscard]] const Real& at(std::size_t k) const {
    check_index(k);
    return coeffs_[k];
  }

  [[nodiscard]] std::span<const Real> coeffs() const noexcept { return coeffs_; }

  [[nodiscard]] bool all_finite() const noexcept {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](Real c) { return std::isfinite(c); });
  }

  BasicPowerSeries& operator+=(const BasicPowerSeries& rhs) {
    check_same_order(rhs);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
    return *this;
  }
  BasicPowerSeries& operator-=(const BasicPowerSeries& rhs) {
    check_same_order(rhs);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= rhs.coeffs_[k];
    return *this;
  }
  BasicPowerSeries& operator*=(Real a) noexcept {
    for (auto& c : coeffs_) c *= a;
    return *this;
  }

  friend BasicPowerSeries operator+(BasicPowerSeries lhs, const BasicPowerSeries& rhs) { return lhs += rhs; }
  friend BasicPowerSeries operator-(BasicPowerSeries lhs, const BasicPowerSeries& rhs) { return lhs -= rhs; }
  friend BasicPowerSeries operator*(Real a, BasicPowerSeries s) noexcept { return s *= a; }
  friend BasicPowerSeries operator*(BasicPowerSeries s, Real a) noexcept { return s *= a; }

  friend bool operator==(const BasicPowerSeries&, const BasicPowerSeries&) = default;

 private:
  void validate() const {
    if (coeffs_.empty()) throw InvalidInput("power series needs at least one coefficient");
    if (!all_finite()) throw InvalidInput("power series coefficients must be finite");
  }
  void check_index(std::size_t k) const {
    if (k >= coeffs_.size())
      throw std::out_of_range("series order " + std::to_string(k) + " exceeds truncation order " +
                              std::to_string(order()));
  }
  void check_same_order(const BasicPowerSeries& rhs) const {
    if (rhs.order() != order()) throw InvalidInput("series orders differ");
  }

  std::vector<Real> coeffs_;
};

using PowerSeries = BasicPowerSeries<double>;

/// Impulse: the transform of the constant 1.
template <typename Real = double>
constexpr Real delta(std::size_t k) noexcept {
  return k == 0 ? Real{1} : Real{0};
}

namespace detail {

// sum_{m=lo}^{hi} F(m) G(k-m); caller guarantees indices are in range.
template <typename Real>
Real conv_range(const BasicPowerSeries<Real>& f, const BasicPowerSeries<Real>& g, std::size_t k,
                std::size_t lo, std::size_t hi) noexcept {
  Real acc{0};
  for (std::size_t m = lo; m <= hi && m <= k; ++m) acc += f[m] * g[k - m];
  return acc;
}

}  // namespace detail

/// Cauchy product coefficient (F (x) G)(k) = sum_{m=0}^{k} F(m) G(k-m).
template <typename Real>
Real conv(const BasicPowerSeries<Real>& f, const BasicPowerSeries<Real>& g, std::size_t k) {
  if (k > f.order() || k > g.order())
    throw std::out_of_range("conv order " + std::to_string(k) + " exceeds operand order");
  return detail::conv_range(f, g, k, 0, k);
}

/// Cauchy product sum restricted to m < k of D(k-m) Q(m): the history term of a division.
template <typename Real>
Real conv_history(const BasicPowerSeries<Real>& d, const BasicPowerSeries<Real>& q, std::size_t k) {
  if (k > d.order() || k > q.order())
    throw std::out_of_range("conv order " + std::to_string(k) + " exceeds operand order");
  if (k == 0) return Real{0};
  return detail::conv_range(q, d, k, 0, k - 1);
}

/// One step of the division recurrence: Q(k) = (N(k) - sum_{m<k} D(k-m) Q(m)) / D(0).
template <typename Real>
Real divide_step(Real numerator_k, const BasicPowerSeries<Real>& denominator,
                 const BasicPowerSeries<Real>& quotient, std::size_t k, const char* where = "divide") {
  const Real d0 = denominator.at(0);
  if (!(std::abs(d0) > Real{kDivisionEpsilon})) throw SingularDivision(where, static_cast<double>(d0));
  return (numerator_k - conv_history(denominator, quotient, k)) / d0;
}

/// Full quotient series Q with Q (x) D = N through the common order.
template <typename Real>
BasicPowerSeries<Real> divide_recurrence(const BasicPowerSeries<Real>& numerator,
                                         const BasicPowerSeries<Real>& denominator) {
  if (numerator.order() != denominator.order()) throw InvalidInput("divide_recurrence: orders differ");
  BasicPowerSeries<Real> q(numerator.order());
  for (std::size_t k = 0; k <= q.order(); ++k) q[k] = divide_step(numerator[k], denominator, q, k, "divide_recurrence");
  return q;
}

/// a*F + b*G.
template <typename Real>
BasicPowerSeries<Real> combine(Real a, const BasicPowerSeries<Real>& f, Real b, const BasicPowerSeries<Real>& g) {
  return a * f + b * g;
}

/// Horner evaluation of sum_k F(k) t^k.
template <typename Real>
Real evaluate(const BasicPowerSeries<Real>& f, Real t) noexcept {
  Real acc{0};
  for (std::size_t k = f.size(); k-- > 0;) acc = acc * t + f[k];
  return acc;
}

}  // namespace motordt
