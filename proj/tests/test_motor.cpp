#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "motordt/motor.hpp"
#include "motordt/oracle.hpp"
#include "motordt/verify.hpp"

using namespace motordt;
using motordt::testing::dip_motor;

namespace {

MotorParams unit_params() {
  MotorParams p;
  p.H = 1.0;
  p.r_r = 1.0;
  p.x_r = 1.0;
  p.x_s = 1.0;
  p.x_sp = 0.5;
  p.r_s = 0.0;
  p.w_s = 1.0;
  return p;
}

// Equivalent impedance written out in the single-fraction form, without the
// z0/z1 intermediates.
std::pair<double, double> impedance_by_hand(double s, const MotorParams& p) {
  const double den = p.r_r * p.r_r + p.x_r * p.x_r * s * s;
  const double drop = p.x_s - p.x_sp;
  return {p.r_s + p.r_r * p.r_r * drop / den, p.x_sp + p.r_r * drop * p.x_r * s / den};
}

// Populate every group through order K for given state, slip and voltage histories,
// using the division recurrence for the currents.
void populate(MotorSeries& io, const PowerSeries& vx, const PowerSeries& vy, const MotorParams& p) {
  for (std::size_t k = 0; k <= io.order(); ++k) {
    dt_intermediates(k, p, io);
    dt_u(vx, vy, k, io);
    dt_currents(k, io);
  }
}

MotorSeries random_series_set(std::mt19937_64& rng, std::size_t K) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MotorSeries io(K);
  for (std::size_t k = 0; k <= K; ++k) {
    io.S[k] = k == 0 ? 0.5 + 0.4 * u(rng) : 0.3 * u(rng);
    io.vre_p[k] = u(rng);
    io.vim_p[k] = u(rng);
  }
  io.filled.states = K + 1;
  return io;
}

PowerSeries random_ps(std::mt19937_64& rng, std::size_t K) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PowerSeries s(K);
  for (std::size_t k = 0; k <= K; ++k) s[k] = u(rng);
  return s;
}

}  // namespace

TEST(MotorParams, Validation) {
  EXPECT_NO_THROW(dip_motor().validate());
  auto p = dip_motor();
  p.x_sp = p.x_s;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = dip_motor();
  p.r_r = 0.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = dip_motor();
  p.H = std::nan("");
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(ImpedanceDirect, ZeroSlip) {
  const auto p = dip_motor();
  const auto z = impedance_direct(0.0, p);
  EXPECT_DOUBLE_EQ(z.re, p.r_s + (p.x_s - p.x_sp));
  EXPECT_DOUBLE_EQ(z.im, p.x_sp);
}

TEST(ImpedanceDirect, HandArithmetic) {
  const auto z = impedance_direct(1.0, unit_params());
  EXPECT_DOUBLE_EQ(z.re, 0.25);
  EXPECT_DOUBLE_EQ(z.im, 0.75);
}

TEST(ImpedanceDirect, SweepMatchesSingleFractionForm) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(rng);
    for (int i = 0; i <= 100; ++i) {
      const double s = i / 100.0;
      const auto z = impedance_direct(s, p);
      const auto [re, im] = impedance_by_hand(s, p);
      EXPECT_NEAR(z.re, re, 1e-13 * std::abs(re));
      EXPECT_NEAR(z.im, im, 1e-13 * std::abs(im));
    }
  }
}

TEST(CurrentDirect, UnitResistiveImpedance) {
  // x_sp + (x_r/r_r) z0 s = 0 at s^2 + 3s + 1 = 0 with these values; r_s tops z_re up to 1.
  auto p = unit_params();
  p.x_sp = 0.25;
  const double s = (-3.0 + std::sqrt(5.0)) / 2.0;
  const double z0 = 0.75 / (1.0 + s * s);
  p.r_s = 1.0 - z0;
  const auto z = impedance_direct(s, p);
  ASSERT_NEAR(z.re, 1.0, 1e-15);
  ASSERT_NEAR(z.im, 0.0, 1e-15);
  const auto i = current_direct(0.7, -0.2, s, p);
  EXPECT_NEAR(i.re, 0.7, 1e-14);
  EXPECT_NEAR(i.im, -0.2, 1e-14);
}

TEST(CurrentDirect, ZeroVoltage) {
  const auto i = current_direct(0.0, 0.0, 0.03, dip_motor());
  EXPECT_EQ(i.re, 0.0);
  EXPECT_EQ(i.im, 0.0);
}

TEST(CurrentDirect, AgreesWithComplexDivision) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.5, 1.5), slip(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = random_params(rng);
    const double vx = u(rng), vy = u(rng), s = slip(rng);
    const auto z = impedance_direct(s, p);
    const auto ref = std::complex<double>(vx, vy) / std::complex<double>(z.re, z.im);
    const auto i = current_direct(vx, vy, s, p);
    const double scale = std::abs(ref) + 1e-300;
    EXPECT_LE(std::abs(i.re - ref.real()), 1e-14 * scale + 1e-15);
    EXPECT_LE(std::abs(i.im - ref.imag()), 1e-14 * scale + 1e-15);
  }
}

TEST(DtIntermediates, ConstantSlip) {
  const auto p = dip_motor();
  const double s0 = 0.04;
  auto io = MotorSeries::starting_at({s0, 0.0, 0.0}, 5);
  io.filled.states = 6;
  for (std::size_t k = 0; k <= 5; ++k) dt_intermediates(k, p, io);
  const double z1 = p.r_r * p.r_r + p.x_r * p.x_r * s0 * s0;
  EXPECT_DOUBLE_EQ(io.z1[0], z1);
  EXPECT_DOUBLE_EQ(io.z0[0], p.r_r * p.r_r * (p.x_s - p.x_sp) / z1);
  for (std::size_t k = 1; k <= 5; ++k) {
    EXPECT_EQ(io.z1[k], 0.0);
    EXPECT_EQ(io.z0[k], 0.0);
    EXPECT_EQ(io.zre[k], 0.0);
    EXPECT_EQ(io.zim[k], 0.0);
  }
}

TEST(DtIntermediates, OrderZeroIsDirectImpedance) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_params(rng);
    auto io = random_series_set(rng, 3);
    dt_intermediates(0, p, io);
    const auto z = impedance_direct(io.S[0], p);
    EXPECT_NEAR(io.zre[0], z.re, 1e-14 * std::abs(z.re));
    EXPECT_NEAR(io.zim[0], z.im, 1e-14 * std::abs(z.im));
    EXPECT_DOUBLE_EQ(io.zim[0], p.x_sp + (p.x_r / p.r_r) * io.z0[0] * io.S[0]);
  }
}

TEST(DtIntermediates, MatchFiniteDifferenceTaylorCoefficients) {
  // s(t) = 0.1 + 0.05 t; the impedance series must be the Taylor expansion of
  // impedance_direct(s(t)) about t = 0.
  MotorParams p = dip_motor();
  p.r_r = 0.05;
  p.x_r = 2.0;
  const std::size_t K = 4;
  auto io = MotorSeries::starting_at({0.1, 0.0, 0.0}, K);
  io.S[1] = 0.05;
  io.filled.states = K + 1;
  for (std::size_t k = 0; k <= K; ++k) dt_intermediates(k, p, io);

  using LD = long double;
  const std::function<LD(LD)> zre = [&](LD t) { return impedance_direct<LD>(0.1L + 0.05L * t, p).re; };
  const std::function<LD(LD)> zim = [&](LD t) { return impedance_direct<LD>(0.1L + 0.05L * t, p).im; };
  const auto fre = oracle::taylor_probe<LD>(zre, 0.0L, K, 1e-2L);
  const auto fim = oracle::taylor_probe<LD>(zim, 0.0L, K, 1e-2L);
  for (std::size_t k = 0; k <= K; ++k) {
    EXPECT_NEAR(io.zre[k], double(fre[k]), 1e-6) << "k=" << k;
    EXPECT_NEAR(io.zim[k], double(fim[k]), 1e-6) << "k=" << k;
  }
}

TEST(DtIntermediates, ContractChecks) {
  const auto p = dip_motor();
  auto io = MotorSeries::starting_at({0.03, 0.0, 0.0}, 3);
  EXPECT_THROW(dt_intermediates(1, p, io), ContractViolation);  // slip only has order 0
  dt_intermediates(0, p, io);
  EXPECT_THROW(dt_intermediates(0, p, io), ContractViolation);  // already filled
  EXPECT_THROW(dt_intermediates(4, p, io), ContractViolation);  // beyond K
}

TEST(DtU, OrderZeroProducts) {
  std::mt19937_64 rng(8);
  const auto p = random_params(rng);
  auto io = random_series_set(rng, 2);
  const auto vx = random_ps(rng, 2), vy = random_ps(rng, 2);
  dt_intermediates(0, p, io);
  dt_u(vx, vy, 0, io);
  EXPECT_DOUBLE_EQ(io.u0[0], io.zre[0] * io.zre[0] + io.zim[0] * io.zim[0]);
  EXPECT_DOUBLE_EQ(io.u1[0], vx[0] * io.zre[0] + vy[0] * io.zim[0]);
  EXPECT_DOUBLE_EQ(io.u2[0], -vx[0] * io.zim[0] + vy[0] * io.zre[0]);
}

TEST(DtU, ImpulseVoltage) {
  std::mt19937_64 rng(9);
  const auto p = random_params(rng);
  const std::size_t K = 6;
  auto io = random_series_set(rng, K);
  PowerSeries vx(K), vy(K);
  vx[0] = 1.0;
  for (std::size_t k = 0; k <= K; ++k) {
    dt_intermediates(k, p, io);
    dt_u(vx, vy, k, io);
    EXPECT_EQ(io.u1[k], io.zre[k]);
    EXPECT_EQ(io.u2[k], -io.zim[k]);
  }
}

TEST(DtU, MatchesBruteForceConvolution) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_params(rng);
    const std::size_t K = 7;
    auto io = random_series_set(rng, K);
    const auto vx = random_ps(rng, K), vy = random_ps(rng, K);
    for (std::size_t k = 0; k <= K; ++k) {
      dt_intermediates(k, p, io);
      dt_u(vx, vy, k, io);
    }
    for (std::size_t k = 0; k <= K; ++k) {
      double u0 = 0, u1 = 0, u2 = 0, scale = 0;
      for (std::size_t i = 0; i <= K; ++i)
        for (std::size_t j = 0; j <= K; ++j) {
          if (i + j != k) continue;
          u0 += io.zre[i] * io.zre[j] + io.zim[i] * io.zim[j];
          u1 += vx[i] * io.zre[j] + vy[i] * io.zim[j];
          u2 += -vx[i] * io.zim[j] + vy[i] * io.zre[j];
          scale += std::abs(io.zre[i] * io.zre[j]) + std::abs(io.zim[i] * io.zim[j]) +
                   std::abs(vx[i]) * (std::abs(io.zre[j]) + std::abs(io.zim[j])) +
                   std::abs(vy[i]) * (std::abs(io.zre[j]) + std::abs(io.zim[j]));
        }
      EXPECT_LE(std::abs(io.u0[k] - u0), 1e-14 * scale);
      EXPECT_LE(std::abs(io.u1[k] - u1), 1e-14 * scale);
      EXPECT_LE(std::abs(io.u2[k] - u2), 1e-14 * scale);
    }
  }
}

TEST(DtCurrents, OrderZeroAndConstantSignals) {
  const auto p = dip_motor();
  const std::size_t K = 5;
  auto io = MotorSeries::starting_at({0.035, 0.01, -0.02}, K);
  io.filled.states = K + 1;
  const auto vx = PowerSeries::constant(0.9, K), vy = PowerSeries::constant(-0.1, K);
  populate(io, vx, vy, p);
  EXPECT_DOUBLE_EQ(io.ire[0], io.u1[0] / io.u0[0]);
  const auto i = current_direct(0.9, -0.1, 0.035, p);
  EXPECT_NEAR(io.ire[0], i.re, 1e-14);
  EXPECT_NEAR(io.iim[0], i.im, 1e-14);
  for (std::size_t k = 1; k <= K; ++k) {
    EXPECT_EQ(io.ire[k], 0.0);
    EXPECT_EQ(io.iim[k], 0.0);
    EXPECT_EQ(io.u0[k], 0.0);
  }
}

TEST(DtCurrents, RemultiplicationResidual) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_params(rng);
    const std::size_t K = 8;
    auto io = random_series_set(rng, K);
    populate(io, random_ps(rng, K), random_ps(rng, K), p);
    for (std::size_t k = 0; k <= K; ++k) {
      double scale = std::abs(io.u1[k]) + std::abs(io.u2[k]);
      for (std::size_t m = 0; m <= k; ++m)
        scale += std::abs(io.u0[k - m]) * (std::abs(io.ire[m]) + std::abs(io.iim[m]));
      EXPECT_LE(std::abs(conv(io.u0, io.ire, k) - io.u1[k]), 1e-12 * scale);
      EXPECT_LE(std::abs(conv(io.u0, io.iim, k) - io.u2[k]), 1e-12 * scale);
    }
  }
}

TEST(DtCurrents, SingularU0Throws) {
  MotorSeries io(1);
  io.filled = {2, 2, 1, 0};
  io.u0[0] = 1e-13;
  io.u1[0] = 1.0;
  EXPECT_THROW(dt_currents(0, io), SingularDivision);
}

TEST(ResidualIdentities, HoldOnRandomHistories) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    MotorParams p = random_params(rng);
    p.r_r = 0.02 + 0.1 * std::uniform_real_distribution<double>(0, 1)(rng);
    const std::size_t K = 8;
    auto io = random_series_set(rng, K);
    populate(io, random_ps(rng, K), random_ps(rng, K), p);
    // pu-scaled signals: bound relative to the largest series entry involved
    double mag = 1.0;
    for (std::size_t k = 0; k <= K; ++k)
      mag = std::max({mag, std::abs(io.u0[k]), std::abs(io.u1[k]), std::abs(io.ire[k]), std::abs(io.z1[k])});
    EXPECT_LE(residual_max(io, p, K), 1e-12 * mag * mag);
  }
}

TEST(OrderZeroCollapse, ConstantInputs) {
  const auto p = dip_motor();
  const std::size_t K = 6;
  const MotorState x{0.045, -0.01, -0.03};
  auto io = MotorSeries::starting_at(x, K);
  io.filled.states = K + 1;
  populate(io, PowerSeries::constant(0.8, K), PowerSeries::constant(0.3, K), p);
  const auto z = impedance_direct(x.s, p);
  const auto i = current_direct(0.8, 0.3, x.s, p);
  EXPECT_NEAR(io.zre[0], z.re, 1e-15);
  EXPECT_NEAR(io.zim[0], z.im, 1e-15);
  EXPECT_NEAR(io.ire[0], i.re, 1e-14);
  EXPECT_NEAR(io.iim[0], i.im, 1e-14);
  for (std::size_t k = 1; k <= K; ++k)
    for (const auto* s : {&io.z0, &io.z1, &io.zre, &io.zim, &io.u0, &io.u1, &io.u2, &io.ire, &io.iim})
      EXPECT_EQ((*s)[k], 0.0);
}

TEST(InjectionCoeffs, OrderZeroHasNoHistoryTerm) {
  std::mt19937_64 rng(14);
  const auto p = random_params(rng);
  auto io = random_series_set(rng, 3);
  PowerSeries vx(3), vy(3);
  dt_intermediates(0, p, io);
  const auto aff = injection_coeffs(0, vx, vy, io);
  const double u00 = io.zre[0] * io.zre[0] + io.zim[0] * io.zim[0];
  EXPECT_EQ(aff.b[0], 0.0);
  EXPECT_EQ(aff.b[1], 0.0);
  EXPECT_DOUBLE_EQ(aff.a[0][0], io.zre[0] / u00);
  EXPECT_DOUBLE_EQ(aff.a[0][1], io.zim[0] / u00);
  EXPECT_DOUBLE_EQ(aff.a[1][0], -io.zim[0] / u00);
  EXPECT_DOUBLE_EQ(aff.a[1][1], io.zre[0] / u00);
}

TEST(InjectionCoeffs, UnitImpedanceGivesIdentity) {
  MotorSeries io(2);
  io.zre[0] = 1.0;
  io.zim[0] = 0.0;
  io.filled = {3, 1, 0, 0};
  const auto aff = injection_coeffs(0, PowerSeries(2), PowerSeries(2), io);
  EXPECT_EQ(aff.a[0][0], 1.0);
  EXPECT_EQ(aff.a[0][1], 0.0);
  EXPECT_EQ(aff.a[1][0], 0.0);
  EXPECT_EQ(aff.a[1][1], 1.0);
}

TEST(InjectionCoeffs, RotationStructureIsExact) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_params(rng);
    const std::size_t K = 4;
    auto io = random_series_set(rng, K);
    auto vx = random_ps(rng, K), vy = random_ps(rng, K);
    for (std::size_t k = 0; k <= K; ++k) {
      dt_intermediates(k, p, io);
      const auto aff = injection_coeffs(k, vx, vy, io);
      EXPECT_EQ(aff.a[0][0], aff.a[1][1]);
      EXPECT_EQ(aff.a[0][1], -aff.a[1][0]);
      dt_u(vx, vy, k, io);
      dt_currents(k, io);
    }
  }
}

TEST(InjectionCoeffs, TwoPathEquivalenceFuzz) {
  // The affine map and the division recurrence are rearrangements of one another.
  const auto rep = verify_proposition(1000, 20240611);
  EXPECT_LE(rep.worst.deviation, 1e-12) << "trial " << rep.worst.trial << " order " << rep.worst.order;
  EXPECT_EQ(rep.checks, 1000u * 2u * 9u);
}

TEST(InjectionCoeffs, FuzzIsDeterministic) {
  const auto a = verify_proposition(50, 42);
  const auto b = verify_proposition(50, 42);
  EXPECT_EQ(a.worst.deviation, b.worst.deviation);
  EXPECT_EQ(a.worst.trial, b.worst.trial);
  EXPECT_THROW(verify_proposition(0, 42), InvalidInput);
}

TEST(InjectionCoeffs, NeedsCurrentHistory) {
  const auto p = dip_motor();
  auto io = MotorSeries::starting_at({0.03, 0.0, 0.0}, 2);
  io.filled.states = 3;
  dt_intermediates(0, p, io);
  dt_intermediates(1, p, io);
  EXPECT_THROW(injection_coeffs(1, PowerSeries(2), PowerSeries(2), io), ContractViolation);
}

TEST(AdvanceStates, ZeroSeriesLeavesOnlyConstantTorque) {
  auto p = dip_motor();
  p.c1 = 0.3;
  MotorSeries io(2);
  io.filled = {1, 1, 1, 1};
  const auto next = advance_states(0, p, io);
  EXPECT_DOUBLE_EQ(next.s, p.c1 / (2.0 * p.H));
  EXPECT_EQ(next.vre_p, 0.0);
  EXPECT_EQ(next.vim_p, 0.0);
}

TEST(AdvanceStates, DividesByNextOrder) {
  std::mt19937_64 rng(16);
  const auto p = random_params(rng);
  const std::size_t K = 5;
  auto io = random_series_set(rng, K);
  populate(io, random_ps(rng, K), random_ps(rng, K), p);
  io.filled.states = 3;
  const double expected = (p.a1 * conv(io.S, io.S, 2) + p.b1 * io.S[2] - conv(io.vre_p, io.ire, 2) +
                           conv(io.vim_p, io.iim, 2)) /
                          (2.0 * p.H) / 3.0;
  EXPECT_DOUBLE_EQ(advance_states(2, p, io).s, expected);
}

TEST(AdvanceStates, LinearInCurrentCoefficients) {
  // With S and V' fixed, the order-(k+1) states are affine in the current
  // coefficients: f(I1 + I2) - f(0) = (f(I1) - f(0)) + (f(I2) - f(0)).
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_params(rng);
    const std::size_t K = 6;
    const std::size_t k = trial % K;
    const auto base = random_series_set(rng, K);
    const auto i1r = random_ps(rng, K), i1i = random_ps(rng, K), i2r = random_ps(rng, K), i2i = random_ps(rng, K);
    auto eval = [&](const PowerSeries& ir, const PowerSeries& ii) {
      auto io = base;
      io.ire = ir;
      io.iim = ii;
      io.filled = {k + 1, K + 1, K + 1, K + 1};
      return advance_states(k, p, io);
    };
    const auto f0 = eval(PowerSeries(K), PowerSeries(K));
    const auto f1 = eval(i1r, i1i);
    const auto f2 = eval(i2r, i2i);
    const auto f12 = eval(i1r + i2r, i1i + i2i);
    const double tol_s = 1e-13 * double(K + 1) * (1.0 + 1.0 / p.H);
    const double tol_v = 1e-13 * double(K + 1) * (1.0 + p.rotor_rate() * p.reactance_drop() + p.w_s);
    EXPECT_NEAR(f12.s - f0.s, (f1.s - f0.s) + (f2.s - f0.s), tol_s);
    EXPECT_NEAR(f12.vre_p - f0.vre_p, (f1.vre_p - f0.vre_p) + (f2.vre_p - f0.vre_p), tol_v);
    EXPECT_NEAR(f12.vim_p - f0.vim_p, (f1.vim_p - f0.vim_p) + (f2.vim_p - f0.vim_p), tol_v);
  }
}

TEST(AdvanceStates, CallOrderIsEnforced) {
  const auto p = dip_motor();
  auto io = MotorSeries::starting_at({0.03, 0.0, 0.0}, 2);
  EXPECT_THROW(advance_states(0, p, io), ContractViolation);  // currents missing
  io.filled = {3, 3, 3, 3};
  EXPECT_THROW(advance_states(2, p, io), ContractViolation);  // k+1 beyond K
}
