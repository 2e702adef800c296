#pragma once

#include <cmath>
#include <numbers>

#include "motordt/circuit.hpp"
#include "motordt/motor.hpp"

namespace motordt::testing {

/// Bundled dip-scenario motor (scenarios/dip.json).
inline MotorParams dip_motor() {
  MotorParams p;
  p.H = 0.5;
  p.a1 = 2.0;
  p.b1 = -2.0;
  p.c1 = 0.04;
  p.r_s = 0.05;
  p.x_s = 2.0;
  p.x_sp = 0.9;
  p.r_r = 0.005;
  p.x_r = 3.2;
  p.w_s = 120.0 * std::numbers::pi;
  return p;
}

/// 1.0 -> 0.6 pu at 0.1 s, back to 1.0 pu at 0.3 s.
inline TheveninSource dip_source() { return TheveninSource{1.0, 0.0, 0.0, 0.15, {{0.1, 0.6, 0.0}, {0.3, 1.0, 0.0}}}; }

inline TheveninSource steady_source() { return TheveninSource{1.0, 0.0, 0.0, 0.15, {}}; }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace motordt::testing
