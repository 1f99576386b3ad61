#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "pjipm/instability.hpp"
#include "pjipm/ipm.hpp"
#include "pjipm/linear.hpp"
#include "pjipm/weights.hpp"

namespace pjipm {

enum class Experiment {
  PjStability,
  IpmBlowup,
  LinearDecay,
  QuasiDecay,
  SteadyClassify,
  Instability,
  BridgeRoundtrip,
  Acceptance,
};

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::PjStability: return "PJ_STABILITY";
    case Experiment::IpmBlowup: return "IPM_BLOWUP";
    case Experiment::LinearDecay: return "LINEAR_DECAY";
    case Experiment::QuasiDecay: return "QUASI_DECAY";
    case Experiment::SteadyClassify: return "STEADY_CLASSIFY";
    case Experiment::Instability: return "INSTABILITY";
    case Experiment::BridgeRoundtrip: return "BRIDGE_ROUNDTRIP";
    case Experiment::Acceptance: return "ACCEPTANCE";
  }
  return "UNKNOWN";
}

/// Named family plus parameters, or a CSV file ("x,value"). "default" lets the experiment choose.
struct InitialData {
  std::string family = "default";
  std::map<std::string, double> params;
  std::string csv_path;  // non-empty: load from file instead

  bool operator==(const InitialData&) const = default;

  double param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

struct LinearSection {
  LinearTag tag = LinearTag::L0;
  double x_star_0 = 0.0;
  double fit_lo = 1.0;
  double fit_hi = 10.0;
  // QUASI background: PJ run from cos x + amplitude cos(mode x)
  double background_amplitude = 0.01;
  double background_mode = 2.0;
  bool operator==(const LinearSection&) const = default;
};

struct SteadySection {
  double tol = 1e-6;
  bool operator==(const SteadySection&) const = default;
};

struct InstabilitySection {
  double epsilon = 1.0;
  double z0 = 1e-2;
  double sigma = 1.0;
  double support_radius = 0.1;
  double annulus_factor = 8.0;
  double kappa0 = 0.5;
  double delta = 0.1;
  bool refine = true;
  bool operator==(const InstabilitySection&) const = default;

  CuspSpec cusp() const { return CuspSpec{epsilon, sigma, support_radius, annulus_factor}; }
  InstabilityOptions options() const { return InstabilityOptions{kappa0, delta, refine}; }
};

struct CharacteristicsSection {
  double z0 = 0.0;
  double crit_tol = 1e-6;
  bool operator==(const CharacteristicsSection&) const = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::PjStability;
  int grid_n = 512;
  double horizon = 12.0;
  std::string output_dir;  // empty: PJIPM_OUTPUT_DIR, else "pjipm_out"
  std::uint64_t seed = 1;
  InitialData initial_data;
  StepPolicy policy;
  WeightSpec weights;
  IpmPolicy ipm;
  LinearSection linear;
  SteadySection steady;
  InstabilitySection instability;
  CharacteristicsSection characteristics;

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
    if (grid_n < 16 || grid_n % 2 != 0) bad("grid_n must be an even integer >= 16 (got " + std::to_string(grid_n) + ")");
    if (!(horizon >= 0.0)) bad("horizon must be nonnegative");
    if (!initial_data.csv_path.empty() && !std::filesystem::exists(initial_data.csv_path))
      bad("initial_data: file not found: " + initial_data.csv_path);
    try {
      policy.validate();
      ipm.step.validate();
    } catch (const Error& e) {
      bad(e.what());
    }
    if (!(std::abs(linear.x_star_0) < pi / 2.0)) bad("linear: |x_star_0| must be below pi/2");
    if (!(linear.fit_hi > linear.fit_lo)) bad("linear: fit_hi must exceed fit_lo");
    if (!(weights.theta > 0.0) || !(weights.C > 0.0)) bad("weights: theta and C must be positive");
    if (!(steady.tol > 0.0)) bad("steady: tol must be positive");
    if (!(ipm.growth_cfl > 0.0) || !(ipm.nu0 > 0.0)) bad("ipm: growth_cfl and nu0 must be positive");
    if (!(instability.kappa0 > 0.0) || !(instability.delta > 0.0)) bad("instability: kappa0 and delta must be positive");
  }

  bool operator==(const ExperimentConfig& o) const {
    auto pol_eq = [](const StepPolicy& a, const StepPolicy& b) {
      return a.cfl == b.cfl && a.dt_max == b.dt_max && a.dt_min == b.dt_min && a.sup_cap == b.sup_cap &&
             a.sample_dt == b.sample_dt && a.mean_tol == b.mean_tol &&
             a.accuracy.diff_order == b.accuracy.diff_order && a.accuracy.quad_order == b.accuracy.quad_order &&
             a.accuracy.interp_order == b.accuracy.interp_order;
    };
    auto w_eq = [](const WeightSpec& a, const WeightSpec& b) {
      return a.kind == b.kind && a.theta == b.theta && a.C == b.C && a.exclusion_radius == b.exclusion_radius &&
             a.rule == b.rule;
    };
    return experiment == o.experiment && grid_n == o.grid_n && horizon == o.horizon && output_dir == o.output_dir &&
           seed == o.seed && initial_data == o.initial_data && pol_eq(policy, o.policy) && w_eq(weights, o.weights) &&
           ipm.nu0 == o.ipm.nu0 && ipm.growth_cfl == o.ipm.growth_cfl && ipm.sample_dt == o.ipm.sample_dt &&
           pol_eq(ipm.step, o.ipm.step) && linear == o.linear && steady == o.steady &&
           instability == o.instability && characteristics == o.characteristics;
  }
};

namespace detail {

template <class E>
struct EnumName {
  E value;
  const char* name;
};

inline const std::vector<EnumName<Experiment>> kExperiments = {
    {Experiment::PjStability, "PJ_STABILITY"},     {Experiment::IpmBlowup, "IPM_BLOWUP"},
    {Experiment::LinearDecay, "LINEAR_DECAY"},     {Experiment::QuasiDecay, "QUASI_DECAY"},
    {Experiment::SteadyClassify, "STEADY_CLASSIFY"}, {Experiment::Instability, "INSTABILITY"},
    {Experiment::BridgeRoundtrip, "BRIDGE_ROUNDTRIP"}, {Experiment::Acceptance, "ACCEPTANCE"}};
inline const std::vector<EnumName<LinearTag>> kTags = {
    {LinearTag::L0, "L0"}, {LinearTag::L, "L"}, {LinearTag::Quasi, "QUASI"}, {LinearTag::Deriv, "DERIV"}};
inline const std::vector<EnumName<WeightKind>> kWeights = {{WeightKind::WMinus1, "W_MINUS1"},
                                                           {WeightKind::WTildeTheta, "W_TILDE_THETA"},
                                                           {WeightKind::WTheta, "W_THETA"},
                                                           {WeightKind::Omega, "OMEGA"}};
inline const std::vector<EnumName<ExclusionRule>> kRules = {{ExclusionRule::LeadingOrder, "LEADING_ORDER"},
                                                            {ExclusionRule::Skip, "SKIP"}};

inline const std::set<std::string> kFamilies = {"cos", "cos_plus", "cos_k", "sin_half", "sin3", "cusp", "zero", "default"};

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    std::string where = source_;
    if (n.IsDefined() && n.Mark().line >= 0) where += ":" + std::to_string(n.Mark().line + 1);
    throw Error(ErrorCode::ConfigError, where + ": " + msg);
  }

  void keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section) const {
    if (!map.IsMap()) fail(map, (section.empty() ? std::string("top level") : "section '" + section + "'") + " must be a mapping");
    for (auto it = map.begin(); it != map.end(); ++it) {
      const std::string k = it->first.as<std::string>();
      if (!allowed.count(k)) fail(it->first, "unknown key '" + k + "'" + (section.empty() ? "" : " in section '" + section + "'"));
    }
  }

  template <class T>
  void get(const YAML::Node& map, const char* key, T& out, const std::string& section = "") const {
    const YAML::Node n = map[key];
    if (!n) return;
    const std::string name = section.empty() ? key : section + "." + key;
    if (!n.IsScalar()) fail(n, name + " must be a scalar");
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "invalid value '" + n.Scalar() + "' for " + name);
    }
  }

  template <class E>
  void get_enum(const YAML::Node& map, const char* key, E& out, const std::vector<EnumName<E>>& names,
                const std::string& section = "") const {
    std::string s;
    const bool had = static_cast<bool>(map[key]);
    get(map, key, s, section);
    if (!had) return;
    for (const auto& e : names)
      if (s == e.name) {
        out = e.value;
        return;
      }
    std::string opts;
    for (const auto& e : names) opts += std::string(opts.empty() ? "" : ", ") + e.name;
    fail(map[key], "invalid value '" + s + "' for " + (section.empty() ? key : section + "." + key) + " (one of " + opts + ")");
  }

 private:
  std::string source_;
};

inline void read_accuracy(const Reader& r, const YAML::Node& n, AccuracyPolicy& a, const std::string& sec) {
  r.get(n, "diff_order", a.diff_order, sec);
  r.get(n, "quad_order", a.quad_order, sec);
  r.get(n, "interp_order", a.interp_order, sec);
}

inline const std::set<std::string> kPolicyKeys = {"cfl",      "dt_max",     "dt_min",     "sup_cap",     "sample_dt",
                                                  "mean_tol", "diff_order", "quad_order", "interp_order"};

inline void read_policy(const Reader& r, const YAML::Node& n, StepPolicy& p, const std::string& sec) {
  r.get(n, "cfl", p.cfl, sec);
  r.get(n, "dt_max", p.dt_max, sec);
  r.get(n, "dt_min", p.dt_min, sec);
  r.get(n, "sup_cap", p.sup_cap, sec);
  r.get(n, "sample_dt", p.sample_dt, sec);
  r.get(n, "mean_tol", p.mean_tol, sec);
  read_accuracy(r, n, p.accuracy, sec);
}

inline InitialData read_initial_data(const Reader& r, const YAML::Node& n, const std::filesystem::path& base) {
  InitialData d;
  d.params.clear();
  YAML::Node desc = n;
  if (n.IsScalar()) {
    const std::string s = n.Scalar();
    if (s.size() > 4 && s.substr(s.size() - 4) == ".csv") {
      std::filesystem::path p(s);
      if (p.is_relative() && !base.empty()) p = base / p;
      d.family.clear();
      d.csv_path = p.string();
      return d;
    }
    try {
      desc = YAML::Load(s);
    } catch (const YAML::Exception& e) {
      r.fail(n, std::string("initial_data: ") + e.what());
    }
  }
  if (desc.IsScalar()) {
    d.family = desc.Scalar();
  } else if (desc.IsMap() && desc.size() == 1) {
    const auto it = desc.begin();
    d.family = it->first.as<std::string>();
    if (it->second.IsMap()) {
      for (auto p = it->second.begin(); p != it->second.end(); ++p) {
        try {
          d.params[p->first.as<std::string>()] = p->second.as<double>();
        } catch (const YAML::Exception&) {
          r.fail(n, "initial_data: parameter '" + p->first.as<std::string>() + "' must be a number");
        }
      }
    } else if (!it->second.IsNull()) {
      r.fail(n, "initial_data: parameters of '" + d.family + "' must be a mapping");
    }
  } else {
    r.fail(n, "initial_data must be a family name, 'family: {params}', or a .csv path");
  }
  if (!kFamilies.count(d.family)) r.fail(n, "initial_data: unknown family '" + d.family + "'");
  return d;
}

/// "section.key=value" or "key=value" applied onto the parsed tree.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::ConfigError, "override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
  YAML::Node v;
  try {
    v = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ConfigError, "override '" + assignment + "': " + e.what());
  }
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    root[key] = v;
  } else {
    YAML::Node sec = root[key.substr(0, dot)];
    sec[key.substr(dot + 1)] = v;
  }
}

}  // namespace detail

/// Parses YAML text. `source` names the origin in error messages; relative CSV paths resolve against `base`.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>",
                                          const std::vector<std::string>& overrides = {},
                                          const std::filesystem::path& base = {}) {
  using namespace detail;
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);

  r.keys(root, {"experiment", "grid_n", "horizon", "output_dir", "seed", "initial_data", "policy", "weights", "ipm",
                "linear", "steady", "instability", "characteristics"},
         "");
  ExperimentConfig c;
  if (!root["experiment"]) r.fail(root, "missing required key 'experiment'");
  r.get_enum(root, "experiment", c.experiment, kExperiments);
  r.get(root, "grid_n", c.grid_n);
  r.get(root, "horizon", c.horizon);
  r.get(root, "output_dir", c.output_dir);
  r.get(root, "seed", c.seed);
  if (root["initial_data"]) c.initial_data = read_initial_data(r, root["initial_data"], base);

  if (const YAML::Node n = root["policy"]) {
    r.keys(n, kPolicyKeys, "policy");
    read_policy(r, n, c.policy, "policy");
  }
  if (const YAML::Node n = root["weights"]) {
    r.keys(n, {"kind", "theta", "C", "exclusion_radius", "rule"}, "weights");
    r.get_enum(n, "kind", c.weights.kind, kWeights, "weights");
    r.get(n, "theta", c.weights.theta, "weights");
    r.get(n, "C", c.weights.C, "weights");
    r.get(n, "exclusion_radius", c.weights.exclusion_radius, "weights");
    r.get_enum(n, "rule", c.weights.rule, kRules, "weights");
  }
  if (const YAML::Node n = root["ipm"]) {
    std::set<std::string> allowed = kPolicyKeys;
    allowed.insert({"nu0", "growth_cfl", "ipm_sample_dt"});
    r.keys(n, allowed, "ipm");
    read_policy(r, n, c.ipm.step, "ipm");
    r.get(n, "nu0", c.ipm.nu0, "ipm");
    r.get(n, "growth_cfl", c.ipm.growth_cfl, "ipm");
    r.get(n, "ipm_sample_dt", c.ipm.sample_dt, "ipm");
  }
  if (const YAML::Node n = root["linear"]) {
    r.keys(n, {"tag", "x_star_0", "fit_lo", "fit_hi", "background_amplitude", "background_mode"}, "linear");
    r.get_enum(n, "tag", c.linear.tag, kTags, "linear");
    r.get(n, "x_star_0", c.linear.x_star_0, "linear");
    r.get(n, "fit_lo", c.linear.fit_lo, "linear");
    r.get(n, "fit_hi", c.linear.fit_hi, "linear");
    r.get(n, "background_amplitude", c.linear.background_amplitude, "linear");
    r.get(n, "background_mode", c.linear.background_mode, "linear");
  }
  if (const YAML::Node n = root["steady"]) {
    r.keys(n, {"tol"}, "steady");
    r.get(n, "tol", c.steady.tol, "steady");
  }
  if (const YAML::Node n = root["instability"]) {
    r.keys(n, {"epsilon", "z0", "sigma", "support_radius", "annulus_factor", "kappa0", "delta", "refine"},
           "instability");
    auto& s = c.instability;
    r.get(n, "epsilon", s.epsilon, "instability");
    r.get(n, "z0", s.z0, "instability");
    r.get(n, "sigma", s.sigma, "instability");
    r.get(n, "support_radius", s.support_radius, "instability");
    r.get(n, "annulus_factor", s.annulus_factor, "instability");
    r.get(n, "kappa0", s.kappa0, "instability");
    r.get(n, "delta", s.delta, "instability");
    r.get(n, "refine", s.refine, "instability");
  }
  if (const YAML::Node n = root["characteristics"]) {
    r.keys(n, {"z0", "crit_tol"}, "characteristics");
    r.get(n, "z0", c.characteristics.z0, "characteristics");
    r.get(n, "crit_tol", c.characteristics.crit_tol, "characteristics");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, source + ": " + e.what());
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot read config " + path, ErrorCode::ConfigError);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path, overrides, std::filesystem::path(path).parent_path());
}

/// Emits every field, so parse_config_text(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto policy = [&](const StepPolicy& p) {
    e << YAML::Key << "cfl" << YAML::Value << p.cfl << YAML::Key << "dt_max" << YAML::Value << p.dt_max
      << YAML::Key << "dt_min" << YAML::Value << p.dt_min << YAML::Key << "sup_cap" << YAML::Value << p.sup_cap
      << YAML::Key << "sample_dt" << YAML::Value << p.sample_dt << YAML::Key << "mean_tol" << YAML::Value
      << p.mean_tol << YAML::Key << "diff_order" << YAML::Value << p.accuracy.diff_order << YAML::Key
      << "quad_order" << YAML::Value << p.accuracy.quad_order << YAML::Key << "interp_order" << YAML::Value
      << p.accuracy.interp_order;
  };
  auto enum_name = [](auto v, const auto& names) {
    for (const auto& n : names)
      if (n.value == v) return std::string(n.name);
    return std::string("UNKNOWN");
  };
  e << YAML::BeginMap;
  e << YAML::Key << "experiment" << YAML::Value << to_string(c.experiment);
  e << YAML::Key << "grid_n" << YAML::Value << c.grid_n;
  e << YAML::Key << "horizon" << YAML::Value << c.horizon;
  e << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << c.output_dir;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "initial_data" << YAML::Value;
  if (!c.initial_data.csv_path.empty()) {
    e << YAML::DoubleQuoted << c.initial_data.csv_path;
  } else {
    e << YAML::BeginMap << YAML::Key << c.initial_data.family << YAML::Value << YAML::Flow << YAML::BeginMap;
    for (const auto& [k, v] : c.initial_data.params) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap << YAML::EndMap;
  }
  e << YAML::Key << "policy" << YAML::Value << YAML::BeginMap;
  policy(c.policy);
  e << YAML::EndMap;
  e << YAML::Key << "weights" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
    << enum_name(c.weights.kind, detail::kWeights) << YAML::Key << "theta" << YAML::Value << c.weights.theta
    << YAML::Key << "C" << YAML::Value << c.weights.C << YAML::Key << "exclusion_radius" << YAML::Value
    << c.weights.exclusion_radius << YAML::Key << "rule" << YAML::Value << enum_name(c.weights.rule, detail::kRules)
    << YAML::EndMap;
  e << YAML::Key << "ipm" << YAML::Value << YAML::BeginMap;
  policy(c.ipm.step);
  e << YAML::Key << "nu0" << YAML::Value << c.ipm.nu0 << YAML::Key << "growth_cfl" << YAML::Value
    << c.ipm.growth_cfl << YAML::Key << "ipm_sample_dt" << YAML::Value << c.ipm.sample_dt << YAML::EndMap;
  e << YAML::Key << "linear" << YAML::Value << YAML::BeginMap << YAML::Key << "tag" << YAML::Value
    << enum_name(c.linear.tag, detail::kTags) << YAML::Key << "x_star_0" << YAML::Value << c.linear.x_star_0
    << YAML::Key << "fit_lo" << YAML::Value << c.linear.fit_lo << YAML::Key << "fit_hi" << YAML::Value
    << c.linear.fit_hi << YAML::Key << "background_amplitude" << YAML::Value << c.linear.background_amplitude
    << YAML::Key << "background_mode" << YAML::Value << c.linear.background_mode << YAML::EndMap;
  e << YAML::Key << "steady" << YAML::Value << YAML::BeginMap << YAML::Key << "tol" << YAML::Value << c.steady.tol
    << YAML::EndMap;
  const auto& s = c.instability;
  e << YAML::Key << "instability" << YAML::Value << YAML::BeginMap << YAML::Key << "epsilon" << YAML::Value
    << s.epsilon << YAML::Key << "z0" << YAML::Value << s.z0 << YAML::Key << "sigma" << YAML::Value << s.sigma
    << YAML::Key << "support_radius" << YAML::Value << s.support_radius << YAML::Key << "annulus_factor"
    << YAML::Value << s.annulus_factor << YAML::Key << "kappa0" << YAML::Value << s.kappa0 << YAML::Key << "delta"
    << YAML::Value << s.delta << YAML::Key << "refine" << YAML::Value << s.refine << YAML::EndMap;
  e << YAML::Key << "characteristics" << YAML::Value << YAML::BeginMap << YAML::Key << "z0" << YAML::Value
    << c.characteristics.z0 << YAML::Key << "crit_tol" << YAML::Value << c.characteristics.crit_tol
    << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

/// Grid samples of a named family. "cusp" needs the instability section and is built by the runner.
inline GridFunction build_initial_data(const InitialData& d, const Grid& g, double x_star = 0.0) {
  if (!d.csv_path.empty()) {
    GridFunction f = read_csv(d.csv_path);
    require(f.grid() == g, "initial_data: CSV has n = " + std::to_string(f.grid().n()) + ", config grid_n = " +
                               std::to_string(g.n()),
            ErrorCode::ConfigError);
    return f;
  }
  const std::string& fam = d.family;
  if (fam == "cos") {
    const double mu = d.param("amplitude", 1.0);
    return GridFunction::sample(g, [=](double x) { return mu * std::cos(x); });
  }
  if (fam == "cos_plus") {
    const double amp = d.param("amplitude", 0.01), mode = d.param("mode", 2.0);
    return GridFunction::sample(g, [=](double x) { return std::cos(x) + amp * std::cos(mode * x); });
  }
  if (fam == "cos_k") {
    const double mu = d.param("amplitude", 1.0), k = d.param("k", 1.0);
    return GridFunction::sample(g, [=](double x) { return mu * std::cos(k * x); });
  }
  if (fam == "sin_half") {
    const double mu = d.param("amplitude", 1.0), k = d.param("k", 0.0);
    return GridFunction::sample(g, [=](double x) { return mu * std::sin((2.0 * k + 1.0) * x / 2.0); });
  }
  if (fam == "sin3") {
    const double amp = d.param("amplitude", 1.0);
    return sample_on_window(g, x_star, [=](double y) { return amp * std::pow(std::sin(y), 3); });
  }
  if (fam == "zero") return GridFunction(g, 0.0);
  throw Error(ErrorCode::ConfigError, "initial_data: family '" + fam + "' cannot be sampled directly");
}

}  // namespace pjipm
