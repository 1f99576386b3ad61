#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pjipm/characteristics.hpp"
#include "pjipm/instability.hpp"
#include "pjipm/ipm.hpp"
#include "pjipm/modulation.hpp"
#include "pjipm/steady.hpp"
#include "pjipm/weights.hpp"

namespace pjipm {

using json = nlohmann::ordered_json;

inline std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path);
  require(static_cast<bool>(os), "cannot open " + path + " for writing", ErrorCode::IoError);
  return os;
}

inline void write_json(const json& j, const std::string& path) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot open " + path, ErrorCode::IoError);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::IoError, path + ": " + e.what());
  }
}

inline void write_series_csv(const Series& s, const std::string& path) {
  auto os = open_output(path);
  os << "t,value\n";
  for (std::size_t k = 0; k < s.size(); ++k) os << format_double(s.t[k]) << ',' << format_double(s.v[k]) << '\n';
}

inline json series_pairs(const Series& s) {
  json arr = json::array();
  for (std::size_t k = 0; k < s.size(); ++k) arr.push_back({s.t[k], s.v[k]});
  return arr;
}

/// Snapshot file name carrying the sample time at full precision.
inline std::string snapshot_name(const std::string& stem, double t) {
  return stem + "_t" + format_double(t) + ".csv";
}

/// One CSV per series, one per snapshot, and "<stem>_manifest.json". Returns the manifest.
inline json write_trajectory(const Trajectory& traj, const std::string& dir, const std::string& stem,
                             const json& parameters = json::object()) {
  std::filesystem::create_directories(dir);
  json files = json::array();
  for (const auto& [name, s] : traj.series) {
    const std::string f = stem + "_" + name + ".csv";
    write_series_csv(s, (std::filesystem::path(dir) / f).string());
    files.push_back(f);
  }
  for (const auto& smp : traj.samples) {
    const std::string f = snapshot_name(stem, smp.t);
    write_csv(smp.a, (std::filesystem::path(dir) / f).string());
    files.push_back(f);
  }
  json m;
  m["files"] = files;
  m["parameters"] = parameters;
  m["grid_n"] = traj.grid.n();
  m["status"] = to_string(traj.status);
  m["message"] = traj.message;
  m["steps"] = traj.steps;
  write_json(m, (std::filesystem::path(dir) / (stem + "_manifest.json")).string());
  return m;
}

inline json to_json(const BlowupReport& r) {
  return json{{"tau_star", r.tau_star},
              {"rate_coefficient", r.rate_coefficient},
              {"status", to_string(r.status)},
              {"fit_residual", r.fit_residual},
              {"profile_error", series_pairs(r.profile_error)}};
}

/// Verdict: rate >= target - slack.
inline json to_json(const DecayFit& f, double target, double slack = 0.0) {
  return json{{"rate", f.rate},
              {"intercept", f.intercept},
              {"window", {f.window_lo, f.window_hi}},
              {"residual", f.residual},
              {"theta_prime", f.theta_prime},
              {"verdict", f.rate >= target - slack ? "PASS" : "FAIL"}};
}

inline json to_json(const SteadyMatch& m) {
  return json{{"family", to_string(m.family)},
              {"k", m.k},
              {"mu", m.mu},
              {"residual", m.residual},
              {"match_error", m.match_error}};
}

inline json to_json(const InstabilityReport& r) {
  return json{{"z0", r.z0},
              {"epsilon", r.epsilon},
              {"D_series", series_pairs(r.D)},
              {"identity_residual", r.identity_residual},
              {"growth_rate", r.growth_rate},
              {"horizon_t0", r.horizon_t0},
              {"refinement_delta", r.refinement_delta}};
}

inline json to_json(const TransportedReport& r) {
  return json{{"z0", r.z0},
              {"dxa_drift", r.dxa_drift},
              {"dxxa_drift", r.dxxa_drift},
              {"tracks_max", r.tracks_max},
              {"argmax_gap", r.argmax_gap},
              {"argmax_distance", r.argmax_distance}};
}

inline void write_frames_csv(const std::vector<ModulationFrame>& frames, const std::string& path,
                             const WeightSpec& w = {}) {
  auto os = open_output(path);
  os << "s,mu,x_star,alpha_m1,alpha_1,xi_sup,xi_weighted_sup\n";
  for (const auto& f : frames) {
    os << format_double(f.s) << ',' << format_double(f.mu) << ',' << format_double(f.x_star) << ','
       << format_double(f.alpha_m1) << ',' << format_double(f.alpha_1) << ',' << format_double(sup_norm(f.xi)) << ','
       << format_double(weighted_sup(f.xi, w)) << '\n';
  }
}

}  // namespace pjipm
