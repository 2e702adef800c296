#pragma once

// Verification routines shared by the CLI and the acceptance suite: the affine
// injection fuzz, the order-of-accuracy study against the reference integrator,
// and RK4 step-halving self-convergence.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "motordt/circuit.hpp"
#include "motordt/motor.hpp"
#include "motordt/oracle.hpp"
#include "motordt/simulator.hpp"

namespace motordt {

// ---------------------------------------------------------------------------
// Affine injection fuzz
// ---------------------------------------------------------------------------

inline constexpr double kPropositionTolerance = 1e-12;

struct PropositionCase {
  std::size_t trial = 0;
  std::size_t order = 0;
  double deviation = 0.0;
  MotorParams params;
};

struct PropositionReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t max_order = 0;
  std::size_t checks = 0;
  PropositionCase worst;

  [[nodiscard]] bool passed() const noexcept { return worst.deviation <= kPropositionTolerance; }
};

/// Parameters drawn uniformly inside the MotorParams invariants.
template <typename Rng>
MotorParams random_params(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  MotorParams p;
  p.H = in(0.1, 10.0);
  p.a1 = in(-2.0, 2.0);
  p.b1 = in(-2.0, 2.0);
  p.c1 = in(-2.0, 2.0);
  p.r_s = in(0.0, 0.2);
  p.x_s = in(0.5, 5.0);
  p.x_sp = p.x_s * in(0.05, 0.95);
  p.r_r = in(0.005, 0.2);
  p.x_r = in(0.05, 4.0);
  p.w_s = in(1.0, 400.0);
  return p;
}

/// One trial: random parameters and coefficient histories, order 0..max_order.
/// At each order two independent voltage choices are checked against the map.
inline PropositionCase proposition_trial(std::uint64_t seed, std::size_t trial, std::size_t max_order) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  PropositionCase worst{trial, 0, 0.0, random_params(rng)};
  const auto& p = worst.params;

  MotorSeries io(max_order);
  for (std::size_t k = 0; k <= max_order; ++k) {
    io.S[k] = k == 0 ? 0.5 * (u(rng) + 1.0) : 0.5 * u(rng);
    io.vre_p[k] = u(rng);
    io.vim_p[k] = u(rng);
  }
  io.filled.states = max_order + 1;
  PowerSeries vx(max_order), vy(max_order);

  for (std::size_t k = 0; k <= max_order; ++k) {
    dt_intermediates(k, p, io);
    const auto aff = injection_coeffs(k, vx, vy, io);
    MotorSeries kept;
    PowerSeries kept_vx, kept_vy;
    for (int choice = 0; choice < 2; ++choice) {
      auto trial_io = io;
      auto tvx = vx, tvy = vy;
      tvx[k] = 1.5 * u(rng);
      tvy[k] = 1.5 * u(rng);
      dt_u(tvx, tvy, k, trial_io);
      dt_currents(k, trial_io);
      const double dev = injection_deviation(aff, tvx, tvy, k, trial_io);
      if (!(dev <= worst.deviation)) {
        worst.deviation = dev;
        worst.order = k;
      }
      if (choice == 0) {
        kept = std::move(trial_io);
        kept_vx = std::move(tvx);
        kept_vy = std::move(tvy);
      }
    }
    io = std::move(kept);
    vx = std::move(kept_vx);
    vy = std::move(kept_vy);
  }
  return worst;
}

inline PropositionReport verify_proposition(std::size_t trials, std::uint64_t seed, std::size_t max_order = 8) {
  if (trials == 0) throw InvalidInput("verify_proposition: trials must be at least 1");
  PropositionReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.max_order = max_order;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto c = proposition_trial(seed, t, max_order);
    rep.checks += 2 * (max_order + 1);
    if (t == 0 || !(c.deviation <= rep.worst.deviation)) rep.worst = c;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Order of accuracy against the reference integrator
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  std::size_t order = 0;
  double h = 0.0;
  double error = 0.0;
};

struct ConvergenceFit {
  std::size_t order = 0;
  std::optional<double> slope;
};

struct ConvergenceReport {
  double t_ref = 0.0;
  MotorState start;
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceFit> fits;
};

/// Least-squares slope of log(error) against log(h); empty with fewer than two usable points.
inline std::optional<double> loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) continue;
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double den = static_cast<double>(n) * sxx - sx * sx;
  if (!(std::abs(den) > 1e-300)) return std::nullopt;
  return (static_cast<double>(n) * sxy - sx * sy) / den;
}

/// Start of the study window: the first source event (post-event dynamics are
/// non-trivial), or t = 0 when the schedule is empty.
inline double convergence_reference_time(const TheveninSource& src) {
  for (const auto& ev : src.schedule)
    if (ev.t > 0.0) return ev.t;
  return 0.0;
}

/// Single-window error of the series method for every (order, h) pair.
///
/// The start state at the reference time comes from a long-double RK4 run out of
/// the steady state; each window's end state is compared with a long-double RK4
/// flow over the same window (substeps h/400).
inline ConvergenceReport convergence_study(const MotorParams& p, const TheveninSource& src, const MotorState& x0,
                                           const std::vector<std::size_t>& orders, const std::vector<double>& steps) {
  p.validate();
  src.validate();
  ConvergenceReport rep;
  rep.t_ref = convergence_reference_time(src);
  if (rep.t_ref > 0.0) {
    oracle::Config oc{1e-6, rep.t_ref, rep.t_ref};
    rep.start = oracle::integrate<long double>(p, src, x0, oc).states.back();
  } else {
    rep.start = x0;
  }

  std::vector<std::future<ConvergenceRow>> jobs;
  for (std::size_t K : orders) {
    for (double h : steps) {
      jobs.push_back(std::async(std::launch::async, [&, K, h] {
        if (!(h > 0.0) || K < 1) throw InvalidInput("convergence_study: need h > 0 and K >= 1");
        const auto w = simulate_window(rep.start, p, src, rep.t_ref, h, K);
        const auto ref = oracle::flow<long double>(p, src, rep.start, rep.t_ref, h / 400.0)(
            static_cast<long double>(rep.t_ref) + static_cast<long double>(h));
        const double err = std::max({std::abs(double(ref[0]) - w.end.s), std::abs(double(ref[1]) - w.end.vre_p),
                                     std::abs(double(ref[2]) - w.end.vim_p)});
        return ConvergenceRow{K, h, err};
      }));
    }
  }
  for (auto& j : jobs) rep.rows.push_back(j.get());

  for (std::size_t K : orders) {
    std::vector<double> hs, es;
    for (const auto& r : rep.rows)
      if (r.order == K) {
        hs.push_back(r.h);
        es.push_back(r.error);
      }
    rep.fits.push_back({K, loglog_slope(hs, es)});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// RK4 self-convergence
// ---------------------------------------------------------------------------

struct SelfConvergence {
  double step = 0.0;
  double diff_coarse = 0.0;  ///< |x(h) - x(h/2)| at t_end
  double diff_fine = 0.0;    ///< |x(h/2) - x(h/4)| at t_end
  [[nodiscard]] double ratio() const noexcept { return diff_coarse / diff_fine; }
};

/// Step-halving error ratio of the reference integrator at t_end.
template <typename Real = long double>
SelfConvergence rk4_self_convergence(const MotorParams& p, const TheveninSource& src, const MotorState& x0,
                                     double t_end, double step) {
  // Sample only at events and t_end so no extra stops shorten the steps.
  auto end_state = [&](double h) {
    const auto traj = oracle::integrate<Real>(p, src, x0, {h, t_end, t_end});
    return traj.states.back();
  };
  auto diff = [](const MotorState& a, const MotorState& b) {
    return std::max({std::abs(a.s - b.s), std::abs(a.vre_p - b.vre_p), std::abs(a.vim_p - b.vim_p)});
  };
  const auto a = end_state(step), b = end_state(step / 2), c = end_state(step / 4);
  return {step, diff(a, b), diff(b, c)};
}

}  // namespace motordt
