#pragma once

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pjipm/characteristics.hpp"
#include "pjipm/corpus.hpp"
#include "pjipm/instability.hpp"
#include "pjipm/ipm.hpp"
#include "pjipm/linear.hpp"
#include "pjipm/modulation.hpp"
#include "pjipm/steady.hpp"
#include "pjipm/weights.hpp"

namespace pjipm {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;  // thread CPU time; stdout only, never written to files
  double budget = 0.0;   // 0: no runtime limit
};

/// Shared runs reused by several criteria.
struct AcceptanceRuns {
  Trajectory perturbed_pj;    // a0 = cos + 0.01 cos 2x, n = 512, T = 12
  IpmTrajectory perturbed_ipm;  // b0 = cos + 0.01 cos 2x, n = 512
  double pj_seconds = 0.0, ipm_seconds = 0.0;
};

namespace acceptance {

inline constexpr int kN = 512;
inline constexpr double kPerturbedMu = 1.04;

// CPU time of the calling thread, so budgets hold regardless of how many criteria share a core.
inline double thread_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

inline GridFunction perturbed_cos(const Grid& g) {
  return GridFunction::sample(g, [](double x) { return std::cos(x) + 0.01 * std::cos(2.0 * x); });
}

inline Trajectory perturbed_pj_run() {
  StepPolicy p;
  p.sample_dt = 0.05;
  return evolve_pj(perturbed_cos(Grid(kN)), 12.0, p);
}

inline IpmTrajectory ipm_run(const GridFunction& b0) {
  IpmPolicy p;
  p.sample_dt = 0.0;
  return evolve_ipm(b0, 3.0, p);
}

/// Accumulates named checks into one verdict and a readable detail string.
class Checks {
 public:
  void add(const std::string& what, double value, bool ok) {
    std::ostringstream os;
    os.precision(4);
    os << what << " = " << value << (ok ? "" : " [FAIL]");
    parts_.push_back(os.str());
    pass_ = pass_ && ok;
  }
  void fail(const std::string& what) {
    parts_.push_back(what + " [FAIL]");
    pass_ = false;
  }
  bool pass() const { return pass_; }
  std::string detail() const {
    std::string s;
    for (const auto& p : parts_) s += (s.empty() ? "" : "; ") + p;
    return s;
  }

 private:
  std::vector<std::string> parts_;
  bool pass_ = true;
};

template <class F>
CriterionResult timed(int id, const std::string& title, double budget, double shared_seconds, F&& body) {
  CriterionResult r;
  r.id = id;
  r.title = title;
  r.budget = budget;
  const double t0 = thread_seconds();
  Checks c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.fail(std::string("error: ") + e.what());
  }
  r.seconds = thread_seconds() - t0 + shared_seconds;
  if (budget > 0.0 && r.seconds > budget) c.fail("runtime " + format_double(r.seconds) + " s over budget");
  r.pass = c.pass();
  r.detail = c.detail();
  return r;
}

inline CriterionResult explicit_blowup() {
  return timed(1, "Explicit blow-up reproduction", 30.0, 0.0, [](Checks& c) {
    const Grid g(kN);
    const IpmTrajectory tr = ipm_run(GridFunction::sample(g, [](double x) { return std::cos(x); }));
    const BlowupReport rep = detect_blowup(tr);
    c.add("status blowup", rep.status == BlowupStatus::Blowup, rep.status == BlowupStatus::Blowup);
    c.add("|tau* - pi/2|", std::abs(rep.tau_star - pi / 2.0), std::abs(rep.tau_star - pi / 2.0) <= 1e-3);
    const Series& sup = tr.series.at("sup");
    double sec_err = 0.0, lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k < sup.size(); ++k) {
      const double tau = sup.t[k];
      if (tau <= 1.4) sec_err = std::max(sec_err, std::abs(sup.v[k] * std::cos(tau) - 1.0));
      if (sup.v[k] >= rep.window_lo && sup.v[k] <= rep.window_hi) {
        const double q = (rep.tau_star - tau) * sup.v[k];
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
    }
    c.add("max rel error vs sec(tau) on tau <= 1.4", sec_err, sec_err <= 0.01);
    c.add("min (tau*-tau) sup", lo, lo >= 0.98);
    c.add("max (tau*-tau) sup", hi, hi <= 1.02);
  });
}

inline CriterionResult steady_drift() {
  return timed(2, "Steady-state drift", 60.0, 0.0, [](Checks& c) {
    const Grid g(kN);
    StepPolicy p;
    p.sample_dt = 0.5;
    double worst = 0.0;
    for (SteadyFamily fam : {SteadyFamily::CosK, SteadyFamily::SinHalfK}) {
      const int k_lo = fam == SteadyFamily::CosK ? 1 : 0, k_hi = fam == SteadyFamily::CosK ? 3 : 2;
      for (int k = k_lo; k <= k_hi; ++k) {
        GridFunction a0 = GridFunction::sample(g, [&](double x) { return steady_profile(fam, k, x); });
        a0 += -mean(a0);
        const Trajectory tr = evolve_pj(a0, 5.0, p);
        if (tr.status != RunStatus::Completed) c.fail(std::string(to_string(fam)) + " run " + to_string(tr.status));
        for (const auto& s : tr.samples) worst = std::max(worst, sup_norm(s.a - a0));
      }
    }
    c.add("max sup drift", worst, worst <= 1e-6);
  });
}

inline CriterionResult eigen_identities() {
  return timed(3, "Eigen-identities", 5.0, 0.0, [](Checks& c) {
    const Grid g(2048);
    const GridFunction one(g, 1.0), zero(g, 0.0);
    const auto ysin = GridFunction::sample(g, [](double y) { return y * std::sin(y); });
    const auto dysin = GridFunction::sample(g, [](double y) { return std::sin(y) + y * std::cos(y); });
    const Eigenmode e0 = eigenmode(g, 0), em = eigenmode(g, -1), e1 = eigenmode(g, 1);
    auto L = [&](const GridFunction& f, const GridFunction& df) {
      return apply_L(f, IntegrationBase::Zero, true, &df);
    };
    auto check = [&](const std::string& name, const GridFunction& got, const GridFunction& want) {
      const double e = sup_norm(got - want);
      c.add(name, e, e <= 1e-6);
    };
    check("L cos", L(e0.values, e0.derivative), zero);
    check("L 1 - (2cos + y sin)", L(one, zero), GridFunction::sample(g, [](double y) {
            return 2.0 * std::cos(y) + y * std::sin(y);
          }));
    check("L(y sin) - 1", L(ysin, dysin), one);
    check("L phi_-1 + phi_-1", L(em.values, em.derivative), -1.0 * em.values);
    check("L phi_1 - phi_1", L(e1.values, e1.derivative), e1.values);
  });
}

inline CriterionResult main_decay(const AcceptanceRuns& runs) {
  return timed(4, "Decay to the steady profile", 120.0, runs.pj_seconds, [&](Checks& c) {
    const Trajectory& tr = runs.perturbed_pj;
    const Grid& g = tr.grid;
    c.add("run completed", tr.status == RunStatus::Completed, tr.status == RunStatus::Completed);
    const ModulationFrame f0 = prepare_initial_frame(tr.samples.front().a);
    c.add("|mu* - 1.04|", std::abs(f0.mu - kPerturbedMu), std::abs(f0.mu - kPerturbedMu) <= 1e-3);
    const GridFunction limit = GridFunction::sample(g, [](double x) { return kPerturbedMu * std::cos(x); });
    Series sup_err, c1_err;
    for (const auto& s : tr.samples) {
      const GridFunction e = s.a - limit;
      sup_err.push(s.t, sup_norm(e));
      c1_err.push(s.t, ck_norm(e, 1));
    }
    const DecayFit fs = fit_decay(sup_err, 2.0, 10.0), f1 = fit_decay(c1_err, 2.0, 10.0);
    c.add("sup-norm decay rate on [2,10]", fs.rate, fs.rate >= 0.45);
    c.add("C1-norm decay rate on [2,10]", f1.rate, f1.rate >= 0.40);
  });
}

inline CriterionResult modulation_identities(const AcceptanceRuns& runs) {
  return timed(5, "Modulation identities", 120.0, runs.pj_seconds, [&](Checks& c) {
    const auto frames = modulation_frames(runs.perturbed_pj);
    const ModulationResiduals r = modulation_residuals(frames);
    c.add("relative mu drift", r.mu_drift, r.mu_drift <= 1e-3);
    c.add("alpha_1 identity residual", r.alpha1_identity, r.alpha1_identity <= 1e-6);
    c.add("alpha_-1 law residual", r.alpha_m1, r.alpha_m1 <= 1e-3);
    c.add("alpha_1 law residual", r.alpha_1, r.alpha_1 <= 1e-3);
  });
}

inline CriterionResult transported(const AcceptanceRuns& runs) {
  return timed(6, "Transported quantities", 0.0, 0.0, [&](Checks& c) {
    const TransportedReport r = transported_report(runs.perturbed_pj, 0.0);
    c.add("d_x a drift", r.dxa_drift, r.dxa_drift <= 1e-4);
    c.add("d_xx a drift", r.dxxa_drift, r.dxxa_drift <= 1e-3);
    c.add("tracks argmax", r.tracks_max, r.tracks_max);
    c.add("argmax gap", r.argmax_gap, r.argmax_gap <= 1e-6);
  });
}

/// Fit on [1, min(10, resolved_until)]; see resolved_until for the upper end.
inline DecayFit linear_decay_fit(const Trajectory& tr, const WeightSpec& w, double lo = 1.0, double hi = 10.0) {
  const Series s = weighted_norm_series(tr, w);
  return fit_decay(s, lo, std::min(hi, resolved_until(tr, w)));
}

inline CriterionResult weighted_damping(const AcceptanceRuns& runs) {
  return timed(7, "Weighted linear damping", 120.0, runs.pj_seconds, [&](Checks& c) {
    const Grid g(kN);
    WeightSpec w;
    w.kind = WeightKind::WTheta;
    w.theta = 0.3;
    w.C = 12.0;
    const auto frames = modulation_frames(runs.perturbed_pj);
    std::vector<double> shifts;
    for (const auto& f : frames) shifts.push_back(f.x_star);
    const auto eta = std::make_shared<TrajectoryEta>(runs.perturbed_pj, frames.front().mu, shifts);
    StepPolicy lp;
    lp.sample_dt = 0.1;
    for (LinearTag tag : {LinearTag::L0, LinearTag::L, LinearTag::Quasi}) {
      for (double xs : {0.0, 0.05}) {
        LinearVariant v;
        v.tag = tag;
        v.x_star_0 = xs;
        if (tag == LinearTag::Quasi) v.eta = eta;
        const GridFunction u0 = sample_on_window(g, xs, [](double y) { return std::pow(std::sin(y), 3); });
        const double horizon = tag == LinearTag::Quasi ? std::min(10.0, eta->s_end()) : 10.0;
        const Trajectory tr = evolve_linear(v, u0, horizon, lp);
        const DecayFit f = linear_decay_fit(tr, w);
        const double target = tag == LinearTag::Quasi ? 0.5 : 1.0 - w.theta;
        char label[96];
        std::snprintf(label, sizeof label, "%s x*0=%g rate on [1,%.3g]", to_string(tag), xs, f.window_hi);
        c.add(label,
              f.rate, f.rate >= target && tr.status == RunStatus::Completed);
      }
    }
  });
}

inline CriterionResult nonlocal_contraction() {
  return timed(8, "Nonlocal contraction", 0.0, 0.0, [](Checks& c) {
    const Grid g(kN);
    WeightSpec w;
    double worst = 0.0;
    int failures = 0;
    for (const auto& [name, f] : contraction_corpus(g)) {
      const double r = nonlocal_contraction_ratio(f, w);
      worst = std::max(worst, r);
      if (r > 0.3 * 1.05) ++failures;
    }
    c.add("worst ratio over 20 functions", worst, failures == 0);
  });
}

inline CriterionResult instability_mechanism() {
  return timed(9, "Instability mechanism", 300.0, 0.0, [](Checks& c) {
    CuspSpec spec;
    spec.epsilon = 1.0;
    spec.sigma = 1.0;
    spec.support_radius = 0.1;
    StepPolicy p;
    p.sample_dt = 1.0;
    InstabilityOptions opt;
    const InstabilityReport big = instability_experiment(spec, 1e-2, 5.0, p, 4096, opt);
    opt.refine = false;
    const InstabilityReport small = instability_experiment(spec, 3e-3, 5.0, p, 16384, opt);
    c.add("z0=1e-2 status ok", big.status == InstabilityStatus::Ok, big.status == InstabilityStatus::Ok);
    c.add("identity residual", big.identity_residual, big.identity_residual <= 1e-3);
    c.add("growth factor", big.growth_factor, big.growth_factor >= 10.0);
    c.add("z0=3e-3 status ok", small.status == InstabilityStatus::Ok, small.status == InstabilityStatus::Ok);
    c.add("D(t0) at z0=3e-3 over D(t0) at z0=1e-2", small.D_at_window_end / big.D_at_window_end,
          small.D_at_window_end > big.D_at_window_end);
  });
}

/// Last decade of tau* - tau: slope of log(err (tau*-tau)^{3/4}) against log(tau*-tau), >= 0 means
/// the weighted error does not grow towards the blow-up time.
inline double remainder_trend(const BlowupReport& rep) {
  const Series& pe = rep.profile_error;
  double dmin = 1e300;
  for (double t : pe.t) dmin = std::min(dmin, rep.tau_star - t);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < pe.size(); ++k) {
    const double d = rep.tau_star - pe.t[k];
    if (d <= 10.0 * dmin && pe.v[k] > 0.0) {
      xs.push_back(std::log(d));
      ys.push_back(std::log(pe.v[k] * std::pow(d, 0.75)));
    }
  }
  require(xs.size() >= 3, "remainder_trend: too few resolved points");
  return fit_line(xs, ys).slope;
}

inline CriterionResult ipm_bridge(const AcceptanceRuns& runs) {
  return timed(10, "IPM stability bridge", 120.0, runs.ipm_seconds, [&](Checks& c) {
    const IpmTrajectory& tr = runs.perturbed_ipm;
    const BlowupReport rep = detect_blowup(tr);
    c.add("status blowup", rep.status == BlowupStatus::Blowup, rep.status == BlowupStatus::Blowup);
    const Series& sup = tr.series.at("sup");
    const Series& bmax = tr.series.at("bmax");
    double lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k < sup.size(); ++k) {
      if (sup.v[k] < rep.window_lo || sup.v[k] > rep.window_hi) continue;
      const double q = (rep.tau_star - sup.t[k]) * bmax.v[k];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    c.add("min (tau*-tau) b(max)", lo, lo >= 0.97);
    c.add("max (tau*-tau) b(max)", hi, hi <= 1.03);
    const double slope = remainder_trend(rep);
    c.add("remainder trend slope (>= 0: non-increasing)", slope, slope >= 0.0);
  });
}

inline CriterionResult nu_consistency(const AcceptanceRuns& runs) {
  return timed(11, "nu-ODE consistency", 0.0, 0.0, [&](Checks& c) {
    const NuReconstruction nr = reconstruct_nu(runs.perturbed_pj, 1.0);
    c.add("|mu* - 1.04|", std::abs(nr.mu_star - kPerturbedMu), std::abs(nr.mu_star - kPerturbedMu) <= 1e-2);
    const Trajectory bridged = to_pj(runs.perturbed_ipm);
    const Series& nu = bridged.series.at("nu");
    const double t_end = nr.nu.t.back();
    double worst = 0.0;
    std::size_t shared = 0;
    for (std::size_t k = 0; k < nu.size(); ++k) {
      if (nu.t[k] > t_end) break;
      worst = std::max(worst, std::abs(nr.nu.at(nu.t[k]) / nu.v[k] - 1.0));
      ++shared;
    }
    c.add("shared samples", static_cast<double>(shared), shared >= 8);
    c.add("max relative nu mismatch", worst, worst <= 0.02);
  });
}

inline CriterionResult classification() {
  return timed(12, "Classification oracle", 10.0, 0.0, [](Checks& c) {
    const Grid g(1024);
    int ok = 0, total = 0;
    for (const auto& sc : steady_family_corpus(g, 1)) {
      const SteadyMatch m = classify_steady(sc.a);
      ++total;
      if (m.family == sc.family && m.k == sc.k && std::abs(m.mu - sc.mu) <= 1e-6 * std::abs(sc.mu)) ++ok;
    }
    c.add("family corpus correct", ok, ok == total);
    int ns = 0, ntotal = 0;
    for (const auto& [name, a] : non_steady_corpus(g)) {
      ++ntotal;
      if (classify_steady(a).family == SteadyFamily::NotSteady) ++ns;
    }
    c.add("non-steady corpus rejected", ns, ns == ntotal);
  });
}

}  // namespace acceptance

/// Runs all twelve criteria; independent groups execute concurrently when `parallel` is set.
inline std::vector<CriterionResult> run_acceptance(bool parallel = true) {
  using namespace acceptance;
  const auto policy = parallel && std::thread::hardware_concurrency() > 1 ? std::launch::async : std::launch::deferred;
  auto pj = std::async(policy, [] {
    const double t0 = thread_seconds();
    Trajectory tr = perturbed_pj_run();
    return std::make_pair(std::move(tr), thread_seconds() - t0);
  });
  auto ipm = std::async(policy, [] {
    const double t0 = thread_seconds();
    IpmTrajectory tr = ipm_run(perturbed_cos(Grid(kN)));
    return std::make_pair(std::move(tr), thread_seconds() - t0);
  });
  std::vector<std::future<CriterionResult>> independent;
  independent.push_back(std::async(policy, instability_mechanism));
  independent.push_back(std::async(policy, explicit_blowup));
  independent.push_back(std::async(policy, steady_drift));
  independent.push_back(std::async(policy, eigen_identities));
  independent.push_back(std::async(policy, nonlocal_contraction));
  independent.push_back(std::async(policy, classification));

  AcceptanceRuns runs;
  std::tie(runs.perturbed_pj, runs.pj_seconds) = pj.get();
  std::tie(runs.perturbed_ipm, runs.ipm_seconds) = ipm.get();
  std::vector<std::future<CriterionResult>> dependent;
  dependent.push_back(std::async(policy, [&] { return main_decay(runs); }));
  dependent.push_back(std::async(policy, [&] { return modulation_identities(runs); }));
  dependent.push_back(std::async(policy, [&] { return transported(runs); }));
  dependent.push_back(std::async(policy, [&] { return weighted_damping(runs); }));
  dependent.push_back(std::async(policy, [&] { return ipm_bridge(runs); }));
  dependent.push_back(std::async(policy, [&] { return nu_consistency(runs); }));

  std::vector<CriterionResult> out;
  for (auto& f : independent) out.push_back(f.get());
  for (auto& f : dependent) out.push_back(f.get());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

inline std::string format_result_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] criterion %2d  %-32s", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str());
  return std::string(head) + " " + r.detail;
}

}  // namespace pjipm
