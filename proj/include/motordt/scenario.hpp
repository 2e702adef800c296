#pragma once

// Scenario files (JSON) and trajectory CSV output.
//
//   {
//     "motor":  {"H":..., "a1":..., "b1":..., "c1":..., "r_s":..., "x_s":...,
//                "x_sp":..., "r_r":..., "x_r":..., "w_s":...},
//     "source": {"e_mag":..., "e_ang":..., "r":..., "x":...,
//                "schedule": [[t, e_mag, e_ang], ...]},
//     "sim":    {"h":..., "K":..., "t_end":..., "sample_dt":...}
//   }
//
// Unknown keys are rejected; "schedule" may be omitted.

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "motordt/circuit.hpp"
#include "motordt/error.hpp"
#include "motordt/motor.hpp"
#include "motordt/simulator.hpp"
#include "motordt/trajectory.hpp"

namespace motordt {

struct Scenario {
  MotorParams motor;
  TheveninSource source;
  SimConfig sim;
};

namespace detail {

using nlohmann::json;

inline void expect_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> required,
                        std::initializer_list<std::string_view> optional = {}) {
  if (!obj.is_object()) throw InvalidInput(std::string(where) + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto k : required) known = known || it.key() == k;
    for (auto k : optional) known = known || it.key() == k;
    if (!known) throw InvalidInput(std::string(where) + ": unknown key '" + it.key() + "'");
  }
  for (auto k : required)
    if (!obj.contains(std::string(k)))
      throw InvalidInput(std::string(where) + ": missing key '" + std::string(k) + "'");
}

inline double number(const json& obj, std::string_view where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw InvalidInput(std::string(where) + "." + key + ": expected a number");
  return v.get<double>();
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("scenario: malformed JSON: ") + e.what());
  }
  detail::expect_keys(root, "scenario", {"motor", "source", "sim"});

  Scenario sc;
  const auto& m = root["motor"];
  detail::expect_keys(m, "motor", {"H", "a1", "b1", "c1", "r_s", "x_s", "x_sp", "r_r", "x_r", "w_s"});
  auto& mp = sc.motor;
  mp.H = detail::number(m, "motor", "H");
  mp.a1 = detail::number(m, "motor", "a1");
  mp.b1 = detail::number(m, "motor", "b1");
  mp.c1 = detail::number(m, "motor", "c1");
  mp.r_s = detail::number(m, "motor", "r_s");
  mp.x_s = detail::number(m, "motor", "x_s");
  mp.x_sp = detail::number(m, "motor", "x_sp");
  mp.r_r = detail::number(m, "motor", "r_r");
  mp.x_r = detail::number(m, "motor", "x_r");
  mp.w_s = detail::number(m, "motor", "w_s");

  const auto& s = root["source"];
  detail::expect_keys(s, "source", {"e_mag", "e_ang", "r", "x"}, {"schedule"});
  sc.source.e_mag = detail::number(s, "source", "e_mag");
  sc.source.e_ang = detail::number(s, "source", "e_ang");
  sc.source.r = detail::number(s, "source", "r");
  sc.source.x = detail::number(s, "source", "x");
  if (s.contains("schedule")) {
    const auto& sched = s["schedule"];
    if (!sched.is_array()) throw InvalidInput("source.schedule: expected an array");
    for (const auto& ev : sched) {
      if (!ev.is_array() || ev.size() != 3 || !ev[0].is_number() || !ev[1].is_number() || !ev[2].is_number())
        throw InvalidInput("source.schedule: each event must be [t, e_mag, e_ang]");
      sc.source.schedule.push_back({ev[0].get<double>(), ev[1].get<double>(), ev[2].get<double>()});
    }
  }

  const auto& c = root["sim"];
  detail::expect_keys(c, "sim", {"h", "K", "t_end", "sample_dt"});
  sc.sim.h = detail::number(c, "sim", "h");
  if (!c["K"].is_number_integer() || c["K"].get<long long>() < 1)
    throw InvalidInput("sim.K: expected a positive integer");
  sc.sim.order = c["K"].get<std::size_t>();
  sc.sim.t_end = detail::number(c, "sim", "t_end");
  sc.sim.sample_dt = detail::number(c, "sim", "sample_dt");

  sc.motor.validate();
  sc.source.validate();
  sc.sim.validate();
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open scenario file '" + path + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_scenario(text);
}

/// Locale-independent rendering with 17 significant digits.
inline void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

inline constexpr std::string_view kCsvHeader = "t,s,vre_p,vim_p,vx,vy,ire,iim";

/// CSV text of a trajectory, LF line endings.
inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out(kCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& x = traj.states[i];
    const auto& y = traj.algebraics[i];
    for (double v : {traj.times[i], x.s, x.vre_p, x.vim_p, y.vx, y.vy, y.ire, y.iim}) {
      append_number(out, v);
      out += ',';
    }
    out.back() = '\n';
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw InvalidInput("failed writing '" + path + "'");
}

}  // namespace motordt
