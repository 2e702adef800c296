// motordt: scenario runner and verification harness for the series motor simulator.
//
//   motordt run SCENARIO --out PATH [--method dt|oracle] [--oracle-step S] [--compare]
//   motordt verify-proposition [--trials N] [--seed N]
//   motordt convergence-study SCENARIO [--orders 2,4] [--steps 0.004,...] [--out PATH]
//
// Exit codes: 0 ok, 1 usage/parse/validation error, 2 simulation failure,
// 3 affine-map deviation above tolerance.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motordt/oracle.hpp"
#include "motordt/scenario.hpp"
#include "motordt/simulator.hpp"
#include "motordt/verify.hpp"

namespace {

using namespace motordt;

constexpr int kExitUsage = 1;
constexpr int kExitSimulation = 2;
constexpr int kExitDeviation = 3;

struct RunArgs {
  std::string scenario;
  std::string out;
  std::string method = "dt";
  double oracle_step = 1e-5;
  bool compare = false;
};

struct ProofArgs {
  std::size_t trials = 1000;
  std::uint64_t seed = 42;
};

struct StudyArgs {
  std::string scenario;
  std::string out;
  std::vector<std::size_t> orders{2, 4};
  std::vector<double> steps{4e-3, 2e-3, 1e-3, 5e-4};
};

Trajectory run_method(const Scenario& sc, const std::string& method, double oracle_step, const MotorState& x0) {
  if (method == "oracle")
    return oracle::integrate<double>(sc.motor, sc.source, x0, {oracle_step, sc.sim.t_end, sc.sim.sample_dt});
  return simulate(sc.motor, sc.source, sc.sim, x0);
}

int cmd_run(const RunArgs& a) {
  Scenario sc;
  try {
    sc = load_scenario(a.scenario);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const auto init = init_steady_state(sc.motor, sc.source);
    for (const auto& w : init.warnings) std::cerr << "warning: " << w << '\n';
    const auto traj = run_method(sc, a.method, a.oracle_step, init.state);
    for (const auto& w : traj.meta.warnings) std::cerr << "warning: " << w << '\n';
    write_text(a.out, trajectory_csv(traj));
    if (a.method == "dt")
      std::cout << "windows " << traj.meta.windows.size() << ", max series residual "
                << traj.meta.max_series_residual() << ", max two-path deviation "
                << traj.meta.max_two_path_deviation() << '\n';
    if (a.compare) {
      const auto other = run_method(sc, a.method == "dt" ? "oracle" : "dt", a.oracle_step, init.state);
      const auto d = compare(traj, other);
      std::cout << "max |dt - oracle|: s " << d.s << ", vre_p " << d.vre_p << ", vim_p " << d.vim_p << ", vx "
                << d.vx << ", vy " << d.vy << ", ire " << d.ire << ", iim " << d.iim << '\n';
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "simulation failed: " << e.what() << '\n';
    return kExitSimulation;
  }
  return 0;
}

int cmd_verify(const ProofArgs& a) {
  const auto rep = verify_proposition(a.trials, a.seed);
  std::cout << "trials " << rep.trials << ", seed " << rep.seed << ", orders 0.." << rep.max_order << ", checks "
            << rep.checks << '\n';
  std::printf("max relative deviation %.6e (tolerance %.0e)\n", rep.worst.deviation, kPropositionTolerance);
  if (rep.passed()) return 0;
  const auto& p = rep.worst.params;
  std::cerr << "deviation above tolerance: seed " << rep.seed << ", trial " << rep.worst.trial << ", order "
            << rep.worst.order << '\n';
  std::fprintf(stderr,
               "params H=%.17g a1=%.17g b1=%.17g c1=%.17g r_s=%.17g x_s=%.17g x_sp=%.17g r_r=%.17g x_r=%.17g "
               "w_s=%.17g\n",
               p.H, p.a1, p.b1, p.c1, p.r_s, p.x_s, p.x_sp, p.r_r, p.x_r, p.w_s);
  return kExitDeviation;
}

int cmd_study(const StudyArgs& a) {
  Scenario sc;
  try {
    sc = load_scenario(a.scenario);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const auto init = init_steady_state(sc.motor, sc.source);
    const auto rep = convergence_study(sc.motor, sc.source, init.state, a.orders, a.steps);

    std::string csv = "K,h,error\n";
    for (const auto& r : rep.rows) {
      csv += std::to_string(r.order) + ',';
      append_number(csv, r.h);
      csv += ',';
      append_number(csv, r.error);
      csv += '\n';
    }
    if (!a.out.empty()) write_text(a.out, csv);

    std::printf("single-window error from t = %g s\n", rep.t_ref);
    std::printf("%4s %12s %14s\n", "K", "h [s]", "error");
    for (const auto& r : rep.rows) std::printf("%4zu %12.6g %14.6e\n", r.order, r.h, r.error);
    for (const auto& f : rep.fits) {
      if (f.slope)
        std::printf("K=%zu: fitted slope %.3f (expected %zu)\n", f.order, *f.slope, f.order + 1);
      else
        std::printf("K=%zu: slope omitted (fewer than two usable step sizes)\n", f.order);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "simulation failed: " << e.what() << '\n';
    return kExitSimulation;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Series-expansion (differential transformation) simulator for an induction motor load"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write a CSV trajectory");
  run_cmd->add_option("scenario", run.scenario, "scenario JSON file")->required();
  run_cmd->add_option("--out", run.out, "output CSV path")->required();
  run_cmd->add_option("--method", run.method, "dt or oracle")->check(CLI::IsMember({"dt", "oracle"}));
  run_cmd->add_option("--oracle-step", run.oracle_step, "RK4 step for the oracle [s]")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--compare", run.compare, "also run the other method and report the max deviation");

  ProofArgs proof;
  auto* proof_cmd = app.add_subcommand("verify-proposition", "fuzz the affine current/voltage map");
  proof_cmd->add_option("--trials", proof.trials, "number of random trials")->check(CLI::PositiveNumber);
  proof_cmd->add_option("--seed", proof.seed, "random seed");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("convergence-study", "single-window error vs h against the RK4 reference");
  study_cmd->add_option("scenario", study.scenario, "scenario JSON file")->required();
  study_cmd->add_option("--orders", study.orders, "series orders K")->delimiter(',');
  study_cmd->add_option("--steps", study.steps, "window lengths h [s]")->delimiter(',');
  study_cmd->add_option("--out", study.out, "CSV table path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (run_cmd->parsed()) return cmd_run(run);
  if (proof_cmd->parsed()) return cmd_verify(proof);
  return cmd_study(study);
}
