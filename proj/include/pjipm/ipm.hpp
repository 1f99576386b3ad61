#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pjipm/pj.hpp"

namespace pjipm {

struct IpmState {
  double tau = 0.0;
  GridFunction b;
  double memory = 0.0;   // (1/pi) int_0^tau int b^2
  double nu = 1.0;       // d nu / d tau = nu * memory
  double t_accum = 0.0;  // d t / d tau = nu
};

struct IpmPolicy {
  StepPolicy step{};
  double nu0 = 1.0;
  double growth_cfl = 0.05;  // dt <= growth_cfl / sup|b|
  double sample_dt = 0.0;    // in tau; 0 stores every step
};

struct IpmTrajectory {
  Grid grid;
  std::vector<IpmState> samples;
  std::map<std::string, Series> series;  // per step, abscissa tau
  RunStatus status = RunStatus::Completed;
  std::string message;
  long steps = 0;
};

/// Tendencies of (b, memory) at fixed memory.
inline std::pair<GridFunction, double> ipm_rhs(const GridFunction& b, double memory, const AccuracyPolicy& pol = {}) {
  require(b.all_finite(), "ipm_rhs: non-finite input");
  PjOperator op(b.grid(), pol);
  GridFunction out(b.grid()), B(b.grid());
  const double l2 = op.rhs(b.span(), out.span(), B.span(), memory);
  return {out, l2};
}

inline IpmTrajectory evolve_ipm(const GridFunction& b0, double tau_max, const IpmPolicy& policy = {}) {
  policy.step.validate();
  require(policy.nu0 > 0.0, "nu0 must be positive");
  require(b0.all_finite(), "initial data must be finite");
  require(std::abs(mean(b0, policy.step.accuracy)) <= policy.step.mean_tol, "initial data must be mean-free");
  const Grid& g = b0.grid();
  const int m = g.size();
  PjOperator op(g, policy.step.accuracy);
  const auto& pol = policy.step;

  // layout: [b (m) | memory | nu | t_accum]
  std::vector<double> y(m + 3);
  std::copy(b0.values().begin(), b0.values().end(), y.begin());
  y[m] = 0.0;
  y[m + 1] = policy.nu0;
  y[m + 2] = 0.0;
  GridFunction B(g);
  FlatRhs f = [&](double, std::span<const double> yy, std::span<double> dy) {
    const double M = yy[m];
    const double l2 = op.rhs(yy.first(m), dy.first(m), B.span(), M);
    dy[m] = l2;
    dy[m + 1] = yy[m + 1] * M;
    dy[m + 2] = yy[m + 1];
  };

  IpmTrajectory traj;
  traj.grid = g;
  const DiffOperator d1(g, 1, pol.accuracy), d2(g, 2, pol.accuracy);
  auto record = [&](double tau) {
    GridFunction b(g, std::vector<double>(y.begin(), y.begin() + m));
    traj.series["sup"].push(tau, sup_norm(b));
    const Extremum e = refine_max(b, d1(b), d2(b), argmax_node(b), pol.accuracy);
    traj.series["bmax"].push(tau, e.value);
    traj.series["bmax_x"].push(tau, e.x);
    traj.series["memory"].push(tau, y[m]);
    traj.series["nu"].push(tau, y[m + 1]);
    traj.series["t_accum"].push(tau, y[m + 2]);
  };
  auto store = [&](double tau) {
    traj.samples.push_back({tau, GridFunction(g, std::vector<double>(y.begin(), y.begin() + m)), y[m], y[m + 1],
                            y[m + 2]});
  };

  double tau = 0.0;
  record(tau);
  store(tau);
  double next_sample = policy.sample_dt;
  Rk4Workspace ws;
  std::vector<double> last_good;
  const double eps = 1e-12 * std::max(1.0, tau_max);
  while (tau < tau_max - eps) {
    std::span<const double> b(y.data(), m);
    op.quad().apply(b, B.span());
    const double sup = max_abs(b);
    double dt = std::min({pol.dt_max, pol.cfl * g.h() / std::max(1.0, max_abs(B.span())),
                          policy.growth_cfl / std::max(1.0, sup), policy.growth_cfl / std::max(1.0, std::abs(y[m]))});
    if (dt < pol.dt_min) {
      traj.status = RunStatus::BlowupSuspected;
      traj.message = "time step fell below dt_min";
      break;
    }
    bool hit = false;
    if (policy.sample_dt > 0.0 && tau + dt >= next_sample - eps) {
      dt = next_sample - tau;
      hit = true;
    }
    if (tau + dt > tau_max - eps) {
      dt = tau_max - tau;
      hit = true;
    }
    last_good = y;
    rk4_step(f, tau, y, dt, ws);
    ++traj.steps;
    if (!all_finite(y)) {
      y = last_good;
      traj.status = RunStatus::NumericalFailure;
      traj.message = "non-finite values at tau = " + format_double(tau + dt);
      break;
    }
    std::span<double> bb(y.data(), m);
    const double mbar = op.quad().total(bb) / (2.0 * pi);
    for (double& v : bb) v -= mbar;
    tau += dt;
    record(tau);
    if (policy.sample_dt == 0.0 || hit) {
      store(tau);
      if (policy.sample_dt > 0.0)
        while (next_sample <= tau + eps) next_sample += policy.sample_dt;
    }
    if (max_abs(bb) > pol.sup_cap) {
      traj.status = RunStatus::BlowupSuspected;
      traj.message = "sup norm exceeded cap";
      break;
    }
  }
  if (traj.samples.back().tau != tau) store(tau);
  return traj;
}

/// PJ trajectory a = b / nu on the accumulated time axis.
inline Trajectory to_pj(const IpmTrajectory& ipm) {
  Trajectory out;
  out.grid = ipm.grid;
  out.status = ipm.status;
  out.message = ipm.message;
  out.steps = ipm.steps;
  for (const auto& s : ipm.samples) {
    require(s.nu > 0.0, "to_pj: nu must be positive");
    out.samples.push_back({s.t_accum, (1.0 / s.nu) * s.b});
  }
  const Series& nu = ipm.series.at("nu");
  const Series& tt = ipm.series.at("t_accum");
  const Series& sup = ipm.series.at("sup");
  const Series& mem = ipm.series.at("memory");
  for (std::size_t k = 0; k < nu.size(); ++k) {
    out.series["nu"].push(tt.v[k], nu.v[k]);
    out.series["sup"].push(tt.v[k], sup.v[k] / nu.v[k]);
    out.series["memory"].push(tt.v[k], mem.v[k]);
  }
  return out;
}

/// Max over interior samples of |a_t - pj_rhs(a)|, with a_t from three-point
/// differences on the (nonuniform) sample times.
inline double pj_residual(const Trajectory& traj, const AccuracyPolicy& pol = {}) {
  const auto& s = traj.samples;
  require(s.size() >= 3, "pj_residual needs at least three samples");
  PjOperator op(traj.grid, pol);
  GridFunction r(traj.grid), A(traj.grid);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double h0 = s[k].t - s[k - 1].t, h1 = s[k + 1].t - s[k].t;
    if (h0 <= 0.0 || h1 <= 0.0) continue;
    op.rhs(s[k].a.span(), r.span(), A.span());
    const double c0 = -h1 / (h0 * (h0 + h1)), c1 = (h1 - h0) / (h0 * h1), c2 = h0 / (h1 * (h0 + h1));
    for (int j = 0; j < r.size(); ++j) {
      const double at = c0 * s[k - 1].a[j] + c1 * s[k].a[j] + c2 * s[k + 1].a[j];
      worst = std::max(worst, std::abs(at - r[j]));
    }
  }
  return worst;
}

struct NuReconstruction {
  Series nu;        // nu(t)
  Series dnu;       // nu'(t)
  double mu_star = 0.0;
  double nu_star = 0.0;
  double fit_residual = 0.0;
  double fit_from = 0.0;
};

/// Integrates nu'' = ((1/pi) int a^2) nu, nu(0) = mu, nu'(0) = 0, along the
/// per-step "l2" series of a PJ run, then fits log nu ~ log nu* + mu* t on the tail half.
inline NuReconstruction reconstruct_nu(const Trajectory& traj, double mu, double tail_from = -1.0) {
  require(mu > 0.0, "reconstruct_nu: mu must be positive");
  const Series& q = traj.series.at("l2");
  require(q.size() >= 8, "reconstruct_nu: too few samples");
  NuReconstruction out;
  double nu = mu, dnu = 0.0;
  out.nu.push(q.t[0], nu);
  out.dnu.push(q.t[0], dnu);
  for (std::size_t k = 0; k + 1 < q.size(); ++k) {
    const double t0 = q.t[k], h = q.t[k + 1] - t0;
    if (h <= 0.0) continue;
    const double qa = q.v[k], qb = q.v[k + 1], qm = 0.5 * (qa + qb);
    const double k1n = dnu, k1d = qa * nu;
    const double k2n = dnu + 0.5 * h * k1d, k2d = qm * (nu + 0.5 * h * k1n);
    const double k3n = dnu + 0.5 * h * k2d, k3d = qm * (nu + 0.5 * h * k2n);
    const double k4n = dnu + h * k3d, k4d = qb * (nu + h * k3n);
    nu += h / 6.0 * (k1n + 2 * k2n + 2 * k3n + k4n);
    dnu += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    out.nu.push(q.t[k + 1], nu);
    out.dnu.push(q.t[k + 1], dnu);
  }
  const double tend = out.nu.t.back();
  out.fit_from = tail_from >= 0.0 ? tail_from : 0.5 * tend;
  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < out.nu.size(); ++k)
    if (out.nu.t[k] >= out.fit_from) {
      ts.push_back(out.nu.t[k]);
      ls.push_back(std::log(out.nu.v[k]));
    }
  const LineFit fit = fit_line(ts, ls);
  out.mu_star = fit.slope;
  out.nu_star = std::exp(fit.intercept);
  out.fit_residual = fit.rms_residual;
  return out;
}

enum class BlowupStatus { Blowup, NoBlowup, Inconclusive };

inline const char* to_string(BlowupStatus s) {
  switch (s) {
    case BlowupStatus::Blowup: return "BLOWUP";
    case BlowupStatus::NoBlowup: return "NO_BLOWUP";
    case BlowupStatus::Inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

struct BlowupReport {
  double tau_star = 0.0;
  double tau_star_fit = 0.0;      // regression intercept before tail refinement
  double rate_coefficient = 0.0;  // sup|b| ~ rate_coefficient / (tau* - tau)
  double fit_residual = 0.0;      // rms relative residual of the 1/sup fit
  double window_lo = 10.0, window_hi = 0.0;
  double x_shift = 0.0;
  std::size_t fit_points = 0;
  Series profile_error;  // tau -> |(tau*-tau) b - cos(. - x_shift)|_inf
  BlowupStatus status = BlowupStatus::Inconclusive;
};

/// Fits 1/sup|b| = k (tau* - tau) on sup in [10, cap/10]. The regression is
/// weighted by sup^2, i.e. it minimizes relative residuals.
inline BlowupReport detect_blowup(const IpmTrajectory& ipm, double sup_cap = 1e6, double max_rel_residual = 0.05) {
  BlowupReport rep;
  rep.window_hi = sup_cap / 10.0;
  const Series& sup = ipm.series.at("sup");
  double smax = 0.0;
  for (double v : sup.v) smax = std::max(smax, v);
  if (smax < rep.window_lo) {
    rep.status = BlowupStatus::NoBlowup;
    return rep;
  }
  std::vector<double> x, y, w;
  for (std::size_t k = 0; k < sup.size(); ++k)
    if (sup.v[k] >= rep.window_lo && sup.v[k] <= rep.window_hi) {
      x.push_back(sup.t[k]);
      y.push_back(1.0 / sup.v[k]);
      w.push_back(sup.v[k] * sup.v[k]);
    }
  rep.fit_points = x.size();
  if (x.size() < 8) return rep;
  const LineFit fit = fit_line(x, y, w);
  if (!(fit.slope < 0.0)) return rep;
  rep.tau_star_fit = -fit.intercept / fit.slope;
  rep.tau_star = rep.tau_star_fit;
  rep.rate_coefficient = -1.0 / fit.slope;
  // Past the window, tau* - tau = 1/memory up to O((tau* - tau)^2).
  const double mem_end = ipm.series.at("memory").v.back();
  if (sup.v.back() > rep.window_hi && mem_end > 0.0) rep.tau_star = sup.t.back() + 1.0 / mem_end;
  double r2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = (fit.slope * x[k] + fit.intercept) / y[k] - 1.0;
    r2 += r * r;
  }
  rep.fit_residual = std::sqrt(r2 / x.size());
  rep.x_shift = ipm.series.at("bmax_x").v.back();
  for (const auto& s : ipm.samples) {
    const double sp = sup_norm(s.b);
    if (sp < rep.window_lo || sp > rep.window_hi || s.tau >= rep.tau_star) continue;
    const double d = rep.tau_star - s.tau;
    double e = 0.0;
    for (int j = 0; j < s.b.size(); ++j)
      e = std::max(e, std::abs(d * s.b[j] - std::cos(s.b.grid().x(j) - rep.x_shift)));
    rep.profile_error.push(s.tau, e);
  }
  rep.status = rep.fit_residual <= max_rel_residual ? BlowupStatus::Blowup : BlowupStatus::Inconclusive;
  return rep;
}

}  // namespace pjipm
