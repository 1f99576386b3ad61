#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pjipm/config.hpp"
#include "pjipm/plotdata.hpp"
#include "pjipm/runner.hpp"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool plot = false;
  bool print_config = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "YAML config file")->check(CLI::ExistingFile);
  sub->add_option("-s,--set", c.overrides, "override a config key, e.g. --set policy.cfl=0.4")->take_all();
  sub->add_option("-o,--output", c.output_dir, "output directory (default: PJIPM_OUTPUT_DIR or ./pjipm_out)");
  sub->add_flag("--plot", c.plot, "also write gnuplot data into <output>/plot");
  sub->add_flag("--print-config", c.print_config, "print the effective config and exit");
}

int execute(pjipm::Experiment fallback, const Common& c) {
  using namespace pjipm;
  std::vector<std::string> ov = c.overrides;
  if (!c.output_dir.empty()) ov.push_back("output_dir=" + c.output_dir);
  ExperimentConfig cfg;
  if (c.config_path.empty()) {
    cfg = parse_config_text(std::string("experiment: ") + to_string(fallback) + "\n", "<defaults>", ov);
  } else {
    cfg = parse_config(c.config_path, ov);
    // the subcommand decides the experiment; linear-decay also accepts QUASI_DECAY configs
    const bool quasi_ok = fallback == Experiment::LinearDecay && cfg.experiment == Experiment::QuasiDecay;
    if (!quasi_ok) cfg.experiment = fallback;
  }
  if (fallback == Experiment::LinearDecay && cfg.linear.tag == LinearTag::Quasi) cfg.experiment = Experiment::QuasiDecay;
  if (c.print_config) {
    std::cout << serialize_config(cfg);
    return 0;
  }
  const RunReport rep = run(cfg);
  std::printf("experiment %s -> %s\n", to_string(cfg.experiment), rep.output_dir.c_str());
  if (rep.status != "OK") std::printf("ERROR %s\n", rep.error.c_str());
  for (const auto& v : rep.verdicts)
    std::printf("[%s] criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", v.criterion, v.name.c_str(),
                v.detail.c_str());
  if (c.plot) {
    const json m = emit_plotdata(rep, rep.output_dir + "/plot");
    std::printf("plot data: %zu files\n", m["files"].size());
  }
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proudman-Johnson / reduced IPM numerical lab"};
  app.require_subcommand(1);
  struct Entry {
    const char* name;
    const char* help;
    pjipm::Experiment experiment;
  };
  const std::vector<Entry> entries = {
      {"simulate-pj", "evolve PJ data, fit decay, modulation frames and characteristics",
       pjipm::Experiment::PjStability},
      {"simulate-ipm", "evolve the reduced IPM equation and fit the blow-up", pjipm::Experiment::IpmBlowup},
      {"linear-decay", "weighted decay of the linear (L0, L) or quasilinear problem", pjipm::Experiment::LinearDecay},
      {"steady-classify", "classify initial data against the steady families", pjipm::Experiment::SteadyClassify},
      {"characteristics", "PJ run with characteristic tracing from characteristics.z0",
       pjipm::Experiment::PjStability},
      {"instability", "cusp-data instability experiment", pjipm::Experiment::Instability},
      {"bridge", "IPM to PJ round trip and nu reconstruction", pjipm::Experiment::BridgeRoundtrip},
      {"verify", "run the acceptance suite", pjipm::Experiment::Acceptance},
  };
  std::vector<Common> opts(entries.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    subs.push_back(app.add_subcommand(entries[i].name, entries[i].help));
    add_common(subs.back(), opts[i]);
  }
  CLI11_PARSE(app, argc, argv);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      return execute(entries[i].experiment, opts[i]);
    } catch (const pjipm::Error& e) {
      std::fprintf(stderr, "%s: %s\n", pjipm::to_string(e.code()), e.what());
      return 2;
    }
  }
  return 1;
}
