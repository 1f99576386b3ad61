#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "pjipm/io.hpp"
#include "pjipm/plotdata.hpp"
#include "pjipm/runner.hpp"

using namespace pjipm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Io, SeriesCsvRoundTripsBitExact) {
  const fs::path d = fresh_dir("io_series");
  Series s;
  s.push(0.0, 1.0 / 3.0);
  s.push(0.1, std::exp(1.0));
  s.push(0.30000000000000004, -1e-300);
  write_series_csv(s, (d / "s.csv").string());
  std::ifstream is(d / "s.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,value");
  for (std::size_t k = 0; k < s.size(); ++k) {
    ASSERT_TRUE(std::getline(is, line));
    const auto comma = line.find(',');
    EXPECT_EQ(std::strtod(line.substr(0, comma).c_str(), nullptr), s.t[k]);
    EXPECT_EQ(std::strtod(line.substr(comma + 1).c_str(), nullptr), s.v[k]);
  }
}

TEST(Io, JsonDoublesRoundTrip) {
  const fs::path d = fresh_dir("io_json");
  const json j{{"x", 0.1 + 0.2}, {"y", 1.0 / 7.0}};
  write_json(j, (d / "a.json").string());
  const json back = read_json((d / "a.json").string());
  EXPECT_EQ(back["x"].get<double>(), 0.1 + 0.2);
  EXPECT_EQ(back["y"].get<double>(), 1.0 / 7.0);
  EXPECT_THROW(read_json((d / "missing.json").string()), Error);
}

TEST(Io, TrajectoryManifestListsWrittenFiles) {
  const fs::path d = fresh_dir("io_traj");
  const Grid g(32);
  StepPolicy p;
  p.sample_dt = 0.25;
  const Trajectory tr = evolve_pj(GridFunction::sample(g, [](double x) { return std::cos(x); }), 0.5, p);
  const json m = write_trajectory(tr, d.string(), "pj", json{{"horizon", 0.5}});
  for (const char* key : {"files", "parameters", "grid_n", "status", "message", "steps"}) EXPECT_TRUE(m.contains(key));
  EXPECT_EQ(m["grid_n"], 32);
  EXPECT_EQ(m["status"], "COMPLETED");
  for (const auto& f : m["files"]) EXPECT_TRUE(fs::exists(d / f.get<std::string>())) << f;
  EXPECT_TRUE(fs::exists(d / snapshot_name("pj", 0.25)));
  EXPECT_TRUE(fs::exists(d / "pj_manifest.json"));
}

TEST(Io, ReportJsonKeys) {
  BlowupReport b;
  const json jb = to_json(b);
  for (const char* k : {"tau_star", "rate_coefficient", "status", "fit_residual", "profile_error"})
    EXPECT_TRUE(jb.contains(k)) << k;
  DecayFit f;
  f.rate = 0.69;
  EXPECT_EQ(to_json(f, 0.7)["verdict"], "FAIL");
  EXPECT_EQ(to_json(f, 0.7, 0.02)["verdict"], "PASS");
  for (const char* k : {"rate", "intercept", "window", "residual", "theta_prime", "verdict"})
    EXPECT_TRUE(to_json(f, 0.7).contains(k)) << k;
  InstabilityReport r;
  for (const char* k : {"z0", "epsilon", "D_series", "identity_residual", "growth_rate", "horizon_t0", "refinement_delta"})
    EXPECT_TRUE(to_json(r).contains(k)) << k;
}

TEST(Io, FramesCsvHeader) {
  const fs::path d = fresh_dir("io_frames");
  const Grid g(64);
  const auto a = GridFunction::sample(g, [](double x) { return std::cos(x) + 0.01 * std::cos(2 * x); });
  write_frames_csv({prepare_initial_frame(a)}, (d / "frames.csv").string());
  std::ifstream is(d / "frames.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "s,mu,x_star,alpha_m1,alpha_1,xi_sup,xi_weighted_sup");
  ASSERT_TRUE(std::getline(is, line));
  EXPECT_EQ(line.substr(0, 2), "0,");
}

TEST(Io, IdenticalRunsWriteIdenticalFiles) {
  ExperimentConfig c;
  c.experiment = Experiment::PjStability;
  c.grid_n = 64;
  c.horizon = 3.0;
  c.output_dir = fresh_dir("io_det_a").string();
  const RunReport a = run(c);
  c.output_dir = fresh_dir("io_det_b").string();
  const RunReport b = run(c);
  ASSERT_EQ(a.status, "OK") << a.error;
  ASSERT_EQ(a.files, b.files);
  for (const auto& f : a.files) {
    if (f == "report.json") continue;  // embeds the output directory
    EXPECT_EQ(slurp(fs::path(a.output_dir) / f), slurp(fs::path(b.output_dir) / f)) << f;
  }
}

TEST(PlotData, EmptySeriesAreListedNotWritten) {
  const fs::path d = fresh_dir("io_plot");
  RunReport rep;
  Series dec;
  for (int k = 0; k < 5; ++k) dec.push(k, std::exp(-double(k)));
  rep.series["decay"] = dec;
  rep.series["profile_err"] = Series{};
  const json m = emit_plotdata(rep, d.string());
  EXPECT_EQ(m["absent_series"], json::array({"profile_err"}));
  EXPECT_EQ(m["files"], json::array({"decay.dat"}));
  EXPECT_FALSE(fs::exists(d / "profile_err.dat"));
  EXPECT_TRUE(fs::exists(d / "plot.gp"));
  EXPECT_TRUE(fs::exists(d / "plot_manifest.json"));
  std::ifstream is(d / "decay.dat");
  std::string line;
  std::getline(is, line);
  double t = 0, v = 0;
  for (int k = 0; k < 5; ++k) {
    is >> t >> v;
    EXPECT_NEAR(v, -double(k), 1e-15);
  }
}
