#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "pjipm/config.hpp"

using namespace pjipm;

namespace {

std::string config_error(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config_text(text, "cfg.yaml", overrides);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

}  // namespace

TEST(Config, MinimalConfigTakesDefaults) {
  const ExperimentConfig c = parse_config_text("experiment: PJ_STABILITY\n");
  EXPECT_EQ(c.experiment, Experiment::PjStability);
  EXPECT_EQ(c.grid_n, 512);
  EXPECT_EQ(c.initial_data.family, "default");
  EXPECT_TRUE(c == ExperimentConfig{});
}

TEST(Config, SectionsAreRead) {
  const ExperimentConfig c = parse_config_text(R"(experiment: LINEAR_DECAY
grid_n: 256
horizon: 4.5
initial_data: "sin3: {amplitude: 2}"
policy:
  cfl: 0.25
  sample_dt: 0.1
weights:
  kind: W_MINUS1
  rule: SKIP
linear:
  tag: QUASI
  x_star_0: 0.05
instability:
  refine: false
)");
  EXPECT_EQ(c.experiment, Experiment::LinearDecay);
  EXPECT_EQ(c.grid_n, 256);
  EXPECT_EQ(c.horizon, 4.5);
  EXPECT_EQ(c.initial_data.family, "sin3");
  EXPECT_EQ(c.initial_data.param("amplitude", 0.0), 2.0);
  EXPECT_EQ(c.policy.cfl, 0.25);
  EXPECT_EQ(c.weights.kind, WeightKind::WMinus1);
  EXPECT_EQ(c.weights.rule, ExclusionRule::Skip);
  EXPECT_EQ(c.linear.tag, LinearTag::Quasi);
  EXPECT_EQ(c.linear.x_star_0, 0.05);
  EXPECT_FALSE(c.instability.refine);
}

TEST(Config, MissingExperimentIsAnError) {
  EXPECT_NE(config_error("grid_n: 64\n").find("experiment"), std::string::npos);
}

TEST(Config, OddGridSizeNamesTheField) {
  const std::string msg = config_error("experiment: PJ_STABILITY\ngrid_n: 513\n");
  EXPECT_NE(msg.find("grid_n"), std::string::npos);
}

TEST(Config, UnknownKeyReportsItsLine) {
  const std::string msg = config_error("experiment: PJ_STABILITY\npolicy:\n  cfl: 0.5\n  bogus: 1\n");
  EXPECT_NE(msg.find("cfg.yaml:4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
}

TEST(Config, InvalidEnumListsChoices) {
  const std::string msg = config_error("experiment: PJ_STABILITY\nweights:\n  kind: SQUARE\n");
  EXPECT_NE(msg.find("cfg.yaml:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("W_THETA"), std::string::npos) << msg;
}

TEST(Config, WrongTypeIsAnError) {
  const std::string msg = config_error("experiment: PJ_STABILITY\nhorizon: soon\n");
  EXPECT_NE(msg.find("horizon"), std::string::npos) << msg;
}

TEST(Config, UnknownFamilyIsAnError) {
  EXPECT_NE(config_error("experiment: PJ_STABILITY\ninitial_data: gaussian\n").find("gaussian"), std::string::npos);
}

TEST(Config, MissingCsvIsAnError) {
  const std::string msg = config_error("experiment: PJ_STABILITY\ninitial_data: nowhere/absent.csv\n");
  EXPECT_NE(msg.find("absent.csv"), std::string::npos) << msg;
}

TEST(Config, OverridesApplyBeforeValidation) {
  const ExperimentConfig c =
      parse_config_text("experiment: PJ_STABILITY\n", "<t>", {"grid_n=128", "policy.cfl=0.1", "steady.tol=1e-8"});
  EXPECT_EQ(c.grid_n, 128);
  EXPECT_EQ(c.policy.cfl, 0.1);
  EXPECT_EQ(c.steady.tol, 1e-8);
  EXPECT_NE(config_error("experiment: PJ_STABILITY\n", {"grid_n"}).find("key=value"), std::string::npos);
  EXPECT_NE(config_error("experiment: PJ_STABILITY\n", {"policy.nope=1"}).find("nope"), std::string::npos);
}

TEST(Config, SerializationRoundTrips) {
  ExperimentConfig c;
  c.experiment = Experiment::Instability;
  c.grid_n = 4096;
  c.horizon = 0.1 + 0.2;
  c.output_dir = "out dir";
  c.seed = 42;
  c.initial_data.family = "cos_plus";
  c.initial_data.params = {{"amplitude", 1.0 / 3.0}, {"mode", 3.0}};
  c.policy.dt_max = 1e-3;
  c.weights.kind = WeightKind::Omega;
  c.weights.exclusion_radius = 0.07;
  c.ipm.nu0 = 2.5;
  c.ipm.sample_dt = 0.01;
  c.linear.tag = LinearTag::Deriv;
  c.instability.refine = false;
  c.instability.z0 = 3e-3;
  c.characteristics.crit_tol = 1e-9;
  const std::string text = serialize_config(c);
  const ExperimentConfig back = parse_config_text(text);
  EXPECT_TRUE(back == c) << text;
  EXPECT_EQ(serialize_config(back), text);
}

TEST(Config, ConfigFileResolvesCsvRelativeToItself) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "cfg_rel";
  std::filesystem::create_directories(dir);
  const Grid g(64);
  const auto f = GridFunction::sample(g, [](double x) { return std::sin(x); });
  write_csv(f, (dir / "a0.csv").string());
  std::ofstream(dir / "run.yaml") << "experiment: PJ_STABILITY\ngrid_n: 64\ninitial_data: a0.csv\n";
  const ExperimentConfig c = parse_config((dir / "run.yaml").string());
  EXPECT_EQ(c.initial_data.csv_path, (dir / "a0.csv").string());
  const GridFunction back = build_initial_data(c.initial_data, g);
  for (int j = 0; j < g.size(); ++j) EXPECT_EQ(back[j], f[j]);
  EXPECT_THROW(build_initial_data(c.initial_data, Grid(128)), Error);
}

TEST(InitialData, DescriptorsMatchHandwrittenSamples) {
  const Grid g(128);
  InitialData d;
  d.family = "cos_plus";
  d.params = {{"amplitude", 0.01}, {"mode", 2.0}};
  const GridFunction a = build_initial_data(d, g);
  for (int j = 0; j < g.size(); ++j) EXPECT_EQ(a[j], std::cos(g.x(j)) + 0.01 * std::cos(2.0 * g.x(j)));

  d.family = "sin_half";
  d.params = {{"amplitude", -2.0}, {"k", 1.0}};
  const GridFunction s = build_initial_data(d, g);
  for (int j = 0; j < g.size(); ++j) EXPECT_NEAR(s[j], -2.0 * std::sin(1.5 * g.x(j)), 1e-15);

  d.family = "sin3";
  d.params.clear();
  const GridFunction w = build_initial_data(d, g, 0.05);
  for (int j = 0; j < g.size(); ++j) EXPECT_NEAR(w[j], std::pow(std::sin(g.x(j) - 0.05), 3), 1e-15);

  d.family = "cusp";
  EXPECT_THROW(build_initial_data(d, g), Error);
}
