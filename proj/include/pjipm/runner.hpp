#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pjipm/acceptance.hpp"
#include "pjipm/config.hpp"
#include "pjipm/io.hpp"

namespace pjipm {

struct Verdict {
  int criterion = 0;  // acceptance criterion number, 1..12
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  ExperimentConfig config;
  std::string status = "OK";  // OK or ERROR
  std::string error;
  json metrics = json::object();
  std::vector<Verdict> verdicts;
  std::vector<std::string> files;  // relative to the output directory
  std::map<std::string, Series> series;
  std::string output_dir;

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
  int exit_code() const { return status == "OK" && all_pass() ? 0 : 1; }

  json to_json() const {
    json vs = json::array();
    for (const auto& v : verdicts)
      vs.push_back({{"criterion", v.criterion}, {"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    return json{{"experiment", pjipm::to_string(config.experiment)},
                {"config", serialize_config(config)},
                {"status", status},
                {"error", error},
                {"metrics", metrics},
                {"verdicts", vs},
                {"files", files}};
  }
};

inline std::string resolve_output_dir(const ExperimentConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("PJIPM_OUTPUT_DIR"); env && *env) return env;
  return "pjipm_out";
}

/// Replaces the "default" family by the experiment's natural initial data.
inline InitialData resolved_initial_data(const ExperimentConfig& c) {
  InitialData d = c.initial_data;
  if (d.family != "default" || !d.csv_path.empty()) return d;
  d.params.clear();
  switch (c.experiment) {
    case Experiment::LinearDecay:
    case Experiment::QuasiDecay: d.family = "sin3"; break;
    case Experiment::Instability: d.family = "cusp"; break;
    case Experiment::IpmBlowup: d.family = "cos"; break;
    default:
      d.family = "cos_plus";
      d.params = {{"amplitude", 0.01}, {"mode", 2.0}};
  }
  return d;
}

inline GridFunction initial_field(const ExperimentConfig& c, const Grid& g, double x_star = 0.0) {
  const InitialData d = resolved_initial_data(c);
  if (d.family == "cusp" && d.csv_path.empty()) return build_cusp_data(c.instability.cusp(), g, c.policy.accuracy).a0;
  return build_initial_data(d, g, x_star);
}

namespace detail {

class ReportWriter {
 public:
  explicit ReportWriter(RunReport& r) : r_(r) {}

  std::string path(const std::string& rel) const { return (std::filesystem::path(r_.output_dir) / rel).string(); }

  void series(const std::string& name, const Series& s) {
    r_.series[name] = s;
    if (s.empty()) return;
    const std::string f = name + ".csv";
    write_series_csv(s, path(f));
    r_.files.push_back(f);
  }
  void json_file(const std::string& rel, const json& j) {
    write_json(j, path(rel));
    r_.files.push_back(rel);
  }
  void trajectory(const Trajectory& tr, const std::string& stem, const json& params) {
    const json m = write_trajectory(tr, r_.output_dir, stem, params);
    for (const auto& f : m["files"]) r_.files.push_back(f.get<std::string>());
    r_.files.push_back(stem + "_manifest.json");
  }
  void file(const std::string& rel) { r_.files.push_back(rel); }
  void verdict(int criterion, const std::string& name, bool pass, const std::string& detail) {
    r_.verdicts.push_back({criterion, name, pass, detail});
  }

 private:
  RunReport& r_;
};

inline void run_pj_stability(const ExperimentConfig& c, RunReport& rep, ReportWriter& w) {
  const Grid g(c.grid_n);
  const GridFunction a0 = initial_field(c, g);
  const Trajectory tr = evolve_pj(a0, c.horizon, c.policy);
  w.trajectory(tr, "pj", json{{"horizon", c.horizon}});
  rep.metrics["run_status"] = to_string(tr.status);
  const ModulationFrame f0 = prepare_initial_frame(a0, c.policy.accuracy);
  rep.metrics["mu_star"] = f0.mu;
  rep.metrics["x_star_0"] = f0.x_star;

  Series err;
  for (const auto& s : tr.samples) {
    const GridFunction limit = GridFunction::sample(g, [&](double x) { return f0.mu * std::cos(x - f0.x_star); });
    err.push(s.t, sup_norm(s.a - limit));
  }
  w.series("profile_err", err);

  const double res0 = stationary_residual(a0, c.policy.mean_tol, c.policy.accuracy);
  rep.metrics["initial_stationary_residual"] = res0;
  if (res0 <= c.steady.tol) {
    double drift = 0.0;
    for (const auto& s : tr.samples) drift = std::max(drift, sup_norm(s.a - a0));
    rep.metrics["decay_fit"] = "degenerate: initial data is stationary";
    rep.metrics["steady_drift"] = drift;
    w.verdict(2, "Steady-state drift", drift <= 1e-6 && tr.status == RunStatus::Completed,
              "max sup drift " + format_double(drift));
    return;
  }

  w.series("decay", err);
  const double hi = std::min(10.0, c.horizon);
  try {
    const DecayFit fit = fit_decay(err, 2.0, hi);
    rep.metrics["decay_fit"] = to_json(fit, 0.45);
    w.verdict(4, "Decay to the steady profile", fit.rate >= 0.45, "sup-norm decay rate " + format_double(fit.rate));
  } catch (const Error& e) {
    rep.metrics["decay_fit"] = std::string("not fitted: ") + e.what();
    w.verdict(4, "Decay to the steady profile", false, e.what());
  }

  const auto frames = modulation_frames(tr, c.policy.accuracy);
  write_frames_csv(frames, w.path("frames.csv"), c.weights);
  w.file("frames.csv");
  const ModulationResiduals mr = modulation_residuals(frames, c.policy.accuracy);
  rep.metrics["modulation"] = json{{"mu_drift", mr.mu_drift},
                                   {"alpha1_identity", mr.alpha1_identity},
                                   {"alpha_m1_residual", mr.alpha_m1},
                                   {"alpha_1_residual", mr.alpha_1},
                                   {"x_star_gap", mr.x_star_gap}};
  const bool mod_ok = mr.mu_drift <= 1e-3 && mr.alpha1_identity <= 1e-6 && mr.alpha_m1 <= 1e-3 && mr.alpha_1 <= 1e-3;
  w.verdict(5, "Modulation identities", mod_ok,
            "mu drift " + format_double(mr.mu_drift) + ", alpha_1 identity " + format_double(mr.alpha1_identity));

  try {
    const TransportedReport t =
        transported_report(tr, c.characteristics.z0, c.characteristics.crit_tol, c.policy.accuracy);
    write_csv(t.path, w.path("characteristic.csv"));
    w.file("characteristic.csv");
    rep.metrics["transported"] = to_json(t);
    const bool ok = t.dxa_drift <= 1e-4 && t.dxxa_drift <= 1e-3 && (!t.tracks_max || t.argmax_gap <= 1e-6);
    w.verdict(6, "Transported quantities", ok,
              "d_x a drift " + format_double(t.dxa_drift) + ", d_xx a drift " + format_double(t.dxxa_drift));
  } catch (const Error& e) {
    rep.metrics["transported"] = std::string("skipped: ") + e.what();
  }
}

inline void run_ipm_blowup(const ExperimentConfig& c, RunReport& rep, ReportWriter& w) {
  const Grid g(c.grid_n);
  const InitialData d = resolved_initial_data(c);
  const GridFunction b0 = initial_field(c, g);
  IpmPolicy p = c.ipm;
  const IpmTrajectory tr = evolve_ipm(b0, c.horizon, p);
  rep.metrics["run_status"] = to_string(tr.status);
  for (const char* name : {"sup", "bmax", "nu", "memory"}) w.series(std::string("ipm_") + name, tr.series.at(name));
  const BlowupReport br = detect_blowup(tr, p.step.sup_cap);
  w.json_file("blowup.json", to_json(br));
  w.series("profile_err", br.profile_error);
  rep.metrics["tau_star"] = br.tau_star;
  rep.metrics["rate_coefficient"] = br.rate_coefficient;
  rep.metrics["blowup_status"] = to_string(br.status);
  const bool blew = br.status == BlowupStatus::Blowup;
  if (d.family == "cos" && d.csv_path.empty()) {
    const double mu = d.param("amplitude", 1.0);
    const double expected = pi / (2.0 * mu);
    w.verdict(1, "Explicit blow-up reproduction", blew && std::abs(br.tau_star - expected) <= 1e-3,
              "tau* " + format_double(br.tau_star) + " vs pi/(2 mu) " + format_double(expected));
    return;
  }
  const Series& sup = tr.series.at("sup");
  const Series& bmax = tr.series.at("bmax");
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 0; k < sup.size(); ++k) {
    if (sup.v[k] < br.window_lo || sup.v[k] > br.window_hi) continue;
    const double q = (br.tau_star - sup.t[k]) * bmax.v[k];
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  bool ok = blew && lo >= 0.97 && hi <= 1.03;
  std::string detail = "(tau*-tau) b(max) in [" + format_double(lo) + ", " + format_double(hi) + "]";
  if (blew) {
    const double slope = acceptance::remainder_trend(br);
    rep.metrics["remainder_trend_slope"] = slope;
    ok = ok && slope >= 0.0;
    detail += ", remainder trend slope " + format_double(slope);
  }
  w.verdict(10, "IPM stability bridge", ok, detail);
}

inline void run_linear(const ExperimentConfig& c, RunReport& rep, ReportWriter& w, bool quasi) {
  const Grid g(c.grid_n);
  LinearVariant v;
  v.tag = quasi ? LinearTag::Quasi : c.linear.tag;
  require(quasi || (v.tag == LinearTag::L0 || v.tag == LinearTag::L),
          "LINEAR_DECAY runs the L0 and L variants; use QUASI_DECAY for QUASI", ErrorCode::ConfigError);
  v.x_star_0 = c.linear.x_star_0;
  double horizon = c.horizon;
  if (quasi) {
    const double amp = c.linear.background_amplitude, mode = c.linear.background_mode;
    const GridFunction a0 = GridFunction::sample(g, [&](double x) { return std::cos(x) + amp * std::cos(mode * x); });
    StepPolicy bp = c.policy;
    bp.sample_dt = std::min(bp.sample_dt > 0.0 ? bp.sample_dt : 0.05, 0.05);
    const Trajectory bg = evolve_pj(a0, c.horizon, bp);
    const auto frames = modulation_frames(bg, c.policy.accuracy);
    std::vector<double> shifts;
    for (const auto& f : frames) shifts.push_back(f.x_star);
    const auto eta = std::make_shared<TrajectoryEta>(bg, frames.front().mu, shifts, c.policy.accuracy);
    v.eta = eta;
    horizon = eta->s_end();
    rep.metrics["background_mu"] = frames.front().mu;
  }
  const GridFunction u0 = initial_field(c, g, v.x_star_0);
  const Trajectory tr = evolve_linear(v, u0, horizon, c.policy);
  w.trajectory(tr, "linear", json{{"tag", to_string(v.tag)}, {"x_star_0", v.x_star_0}, {"horizon", horizon}});
  w.series("x_star", tr.series.at("x_star"));
  const Series wn = weighted_norm_series(tr, c.weights);
  w.series("decay", wn);
  const double resolved = resolved_until(tr, c.weights);
  rep.metrics["resolved_until"] = resolved;
  const double target = quasi ? 0.5 : 1.0 - c.weights.theta;
  try {
    const DecayFit fit = fit_decay(wn, c.linear.fit_lo, std::min(c.linear.fit_hi, resolved));
    const json fj = to_json(fit, target);
    w.json_file("decay_fit.json", fj);
    rep.metrics["decay_fit"] = fj;
    w.verdict(7, "Weighted linear damping", fit.rate >= target && tr.status == RunStatus::Completed,
              std::string(to_string(v.tag)) + " rate " + format_double(fit.rate) + " (target " +
                  format_double(target) + ")");
  } catch (const Error& e) {
    rep.metrics["decay_fit"] = std::string("not fitted: ") + e.what();
    w.verdict(7, "Weighted linear damping", false, e.what());
  }
}

inline void run_steady(const ExperimentConfig& c, RunReport& rep, ReportWriter& w) {
  const Grid g(c.grid_n);
  const GridFunction a = initial_field(c, g);
  const SteadyMatch m = classify_steady(a, c.steady.tol, c.policy.mean_tol, c.policy.accuracy);
  w.json_file("steady_match.json", to_json(m));
  rep.metrics["match"] = to_json(m);
  int ok = 0, total = 0;
  json corpus = json::array();
  for (const auto& sc : steady_family_corpus(g, c.seed)) {
    const SteadyMatch r = classify_steady(sc.a, c.steady.tol, c.policy.mean_tol, c.policy.accuracy);
    const bool hit = r.family == sc.family && r.k == sc.k && std::abs(r.mu - sc.mu) <= 1e-6 * std::abs(sc.mu);
    ok += hit;
    ++total;
    corpus.push_back({{"case", sc.label}, {"result", to_json(r)}, {"correct", hit}});
  }
  for (const auto& [name, f] : non_steady_corpus(g, c.policy.accuracy)) {
    const SteadyMatch r = classify_steady(f, c.steady.tol, c.policy.mean_tol, c.policy.accuracy);
    const bool hit = r.family == SteadyFamily::NotSteady;
    ok += hit;
    ++total;
    corpus.push_back({{"case", name}, {"result", to_json(r)}, {"correct", hit}});
  }
  w.json_file("steady_corpus.json", corpus);
  w.verdict(12, "Classification oracle", ok == total,
            std::to_string(ok) + "/" + std::to_string(total) + " corpus members correct");
}

inline void run_instability(const ExperimentConfig& c, RunReport& rep, ReportWriter& w) {
  const auto& s = c.instability;
  const CuspData data = build_cusp_data(s.cusp(), Grid(c.grid_n), c.policy.accuracy);
  rep.metrics["holder_norm"] = data.holder_norm;
  const InstabilityReport r = instability_experiment(s.cusp(), s.z0, c.horizon, c.policy, c.grid_n, s.options());
  w.json_file("instability.json", to_json(r));
  w.series("D", r.D);
  w.series("z", r.z);
  rep.metrics["status"] = to_string(r.status);
  rep.metrics["growth_factor"] = r.growth_factor;
  rep.metrics["identity_residual"] = r.identity_residual;
  rep.metrics["horizon_t0"] = r.horizon_t0;
  const bool ok = r.status == InstabilityStatus::Ok && r.identity_residual <= 1e-3 && r.growth_factor >= 10.0;
  w.verdict(9, "Instability mechanism", ok,
            "identity residual " + format_double(r.identity_residual) + ", growth factor " +
                format_double(r.growth_factor));
}

inline void run_bridge(const ExperimentConfig& c, RunReport& rep, ReportWriter& w) {
  const Grid g(c.grid_n);
  const GridFunction b0 = initial_field(c, g);
  const IpmTrajectory ipm = evolve_ipm(b0, c.horizon, c.ipm);
  const Trajectory bridged = to_pj(ipm);
  rep.metrics["pj_residual"] = pj_residual(bridged, c.policy.accuracy);
  w.series("ipm_nu", bridged.series.at("nu"));
  const double nu0 = c.ipm.nu0;
  const GridFunction a0 = (1.0 / nu0) * b0;
  const Trajectory pj = evolve_pj(a0, std::min(c.horizon, bridged.samples.back().t), c.policy);
  const NuReconstruction nr = reconstruct_nu(pj, nu0);
  w.series("nu_reconstructed", nr.nu);
  rep.metrics["mu_star"] = nr.mu_star;
  rep.metrics["nu_star"] = nr.nu_star;
  const Series& nu = bridged.series.at("nu");
  double worst = 0.0;
  std::size_t shared = 0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    if (nu.t[k] > nr.nu.t.back()) break;
    worst = std::max(worst, std::abs(nr.nu.at(nu.t[k]) / nu.v[k] - 1.0));
    ++shared;
  }
  rep.metrics["nu_max_rel_mismatch"] = worst;
  w.verdict(11, "nu-ODE consistency", shared >= 8 && worst <= 0.02,
            "max relative nu mismatch " + format_double(worst) + " over " + std::to_string(shared) + " samples");
}

inline void run_acceptance_experiment(RunReport& rep, ReportWriter& w) {
  json table = json::array();
  for (const auto& r : run_acceptance()) {
    w.verdict(r.id, r.title, r.pass, r.detail);
    table.push_back({{"criterion", r.id}, {"name", r.title}, {"pass", r.pass}, {"detail", r.detail}});
  }
  w.json_file("acceptance.json", table);
  rep.metrics["criteria"] = table.size();
}

}  // namespace detail

/// Runs one configured experiment, writes its files and "report.json" into the output directory.
inline RunReport run(const ExperimentConfig& config) {
  RunReport rep;
  rep.config = config;
  rep.output_dir = resolve_output_dir(config);
  detail::ReportWriter w(rep);
  try {
    config.validate();
    std::filesystem::create_directories(rep.output_dir);
    switch (config.experiment) {
      case Experiment::PjStability: detail::run_pj_stability(config, rep, w); break;
      case Experiment::IpmBlowup: detail::run_ipm_blowup(config, rep, w); break;
      case Experiment::LinearDecay: detail::run_linear(config, rep, w, false); break;
      case Experiment::QuasiDecay: detail::run_linear(config, rep, w, true); break;
      case Experiment::SteadyClassify: detail::run_steady(config, rep, w); break;
      case Experiment::Instability: detail::run_instability(config, rep, w); break;
      case Experiment::BridgeRoundtrip: detail::run_bridge(config, rep, w); break;
      case Experiment::Acceptance: detail::run_acceptance_experiment(rep, w); break;
    }
  } catch (const Error& e) {
    rep.status = "ERROR";
    rep.error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    rep.status = "ERROR";
    rep.error = e.what();
  }
  try {
    std::filesystem::create_directories(rep.output_dir);
    rep.files.push_back("report.json");
    write_json(rep.to_json(), w.path("report.json"));
  } catch (const std::exception& e) {
    rep.status = "ERROR";
    rep.error += std::string(rep.error.empty() ? "" : "; ") + e.what();
  }
  return rep;
}

}  // namespace pjipm
