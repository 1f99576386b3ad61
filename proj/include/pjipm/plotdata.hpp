#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "pjipm/runner.hpp"

namespace pjipm {

/// Two-column .dat per non-empty series ("decay" as (t, log value)), a gnuplot script
/// referencing them, and "plot_manifest.json" listing written and absent series.
inline json emit_plotdata(const RunReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  json written = json::array(), absent = json::array();
  std::string script = "set terminal pngcairo size 900,600\nset grid\n";
  for (const auto& [name, s] : report.series) {
    if (s.empty()) {
      absent.push_back(name);
      continue;
    }
    const bool log_col = name == "decay";
    const std::string file = name + ".dat";
    auto os = open_output((std::filesystem::path(dir) / file).string());
    os << "# t " << (log_col ? "log(value)" : "value") << '\n';
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (log_col && !(s.v[k] > 0.0)) continue;
      os << format_double(s.t[k]) << ' ' << format_double(log_col ? std::log(s.v[k]) : s.v[k]) << '\n';
    }
    written.push_back(file);
    script += "set output '" + name + ".png'\nset xlabel 't'\nset ylabel '" + (log_col ? "log " : "") + name +
              "'\nplot '" + file + "' using 1:2 with lines title '" + name + "'\n";
  }
  const std::string gp = "plot.gp";
  auto os = open_output((std::filesystem::path(dir) / gp).string());
  os << script;
  json m{{"files", written}, {"script", gp}, {"absent_series", absent}};
  write_json(m, (std::filesystem::path(dir) / "plot_manifest.json").string());
  return m;
}

}  // namespace pjipm
