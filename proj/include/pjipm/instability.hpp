#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pjipm/characteristics.hpp"
#include "pjipm/pj.hpp"

namespace pjipm {

struct CuspSpec {
  double epsilon = 1.0;
  double sigma = 0.5;
  double support_radius = 0.1;  // cutoff scale r0
  double annulus_factor = 8.0;  // mass correction lives in r0 < |x| < factor * r0

  double exponent() const { return 2.0 - 0.5 * epsilon; }
  double annulus_outer() const { return annulus_factor * support_radius; }

  void validate() const {
    require(epsilon > 0.0 && epsilon <= 2.0, "cusp: epsilon must lie in (0, 2]");
    require(sigma > 0.0, "cusp: sigma must be positive");
    require(support_radius > 0.0, "cusp: support radius must be positive");
    require(annulus_factor > 1.0 && annulus_outer() < pi, "cusp: correction annulus must fit inside (r0, pi)");
  }
};

namespace detail {

inline double smooth_exp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
inline double smooth_exp_d(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// 0 for t <= 0, 1 for t >= 1, C-infinity in between.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return smooth_exp(t) / (smooth_exp(t) + smooth_exp(1.0 - t));
}

inline double smooth_step_d(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double p = smooth_exp(t), q = smooth_exp(1.0 - t);
  return (smooth_exp_d(t) * q + p * smooth_exp_d(1.0 - t)) / ((p + q) * (p + q));
}

// Cutoff in r = |x|: 1 on r <= r0/2, 0 on r >= r0.
inline double cutoff(double r, double r0) { return 1.0 - smooth_step(2.0 * r / r0 - 1.0); }
inline double cutoff_d(double r, double r0) { return -2.0 / r0 * smooth_step_d(2.0 * r / r0 - 1.0); }

// Bump on lo < r < hi with peak 1.
inline double annulus_bump(double r, double lo, double hi) {
  const double u = (r - lo) / (hi - lo);
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::exp(4.0 - 1.0 / (u * (1.0 - u)));
}

inline double annulus_bump_d(double r, double lo, double hi) {
  const double u = (r - lo) / (hi - lo);
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (1.0 - u);
  return annulus_bump(r, lo, hi) * (1.0 - 2.0 * u) / (w * w) / (hi - lo);
}

// sup over node pairs of |f_i - f_j| / |x_i - x_j|^alpha
inline double holder_quotient(const std::vector<double>& x, const std::vector<double>& f, double alpha) {
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double d = std::abs(f[i] - f[j]);
      if (d > 0.0) q = std::max(q, d / std::pow(std::abs(x[i] - x[j]), alpha));
    }
  return q;
}

}  // namespace detail

struct CuspData {
  GridFunction a0;
  double mass_coefficient = 0.0;  // c in a0 = cos - chi |x|^p + c m
  double holder_quotient = 0.0;   // top-order quotient of a0 - cos
  double holder_norm = 0.0;       // full C^{2-epsilon} norm of a0 - cos on the grid
};

/// a0 = cos x - chi(|x|) |x|^p + c m(|x|), p = 2 - epsilon/2. The minus sign keeps the
/// maximum at 0; c makes a0 mean-free on the grid. Throws CONSTRUCTION_FAILED when the
/// maximum moves or the measured C^{2-epsilon} norm of a0 - cos exceeds sigma.
inline CuspData build_cusp_data(const CuspSpec& spec, const Grid& g, const AccuracyPolicy& pol = {}) {
  spec.validate();
  const double p = spec.exponent(), r0 = spec.support_radius, r1 = spec.annulus_outer();
  auto cusp = [&](double x) {
    const double r = std::abs(x);
    return detail::cutoff(r, r0) * std::pow(r, p);
  };
  auto cusp_d = [&](double x) {
    const double r = std::abs(x);
    if (r == 0.0) return 0.0;
    const double s = x > 0.0 ? 1.0 : -1.0;
    return s * (detail::cutoff_d(r, r0) * std::pow(r, p) + detail::cutoff(r, r0) * p * std::pow(r, p - 1.0));
  };
  auto bump = [&](double x) { return detail::annulus_bump(std::abs(x), r0, r1); };
  auto bump_d = [&](double x) { return (x >= 0.0 ? 1.0 : -1.0) * detail::annulus_bump_d(std::abs(x), r0, r1); };

  const GridFunction base = GridFunction::sample(g, [&](double x) { return std::cos(x) - cusp(x); });
  const GridFunction m = GridFunction::sample(g, bump);
  const double mass = integral(m, pol);
  require(mass > 0.0, "cusp: correction annulus holds no nodes", ErrorCode::ConstructionFailed);
  CuspData out;
  out.mass_coefficient = -integral(base, pol) / mass;
  const double c = out.mass_coefficient;
  out.a0 = base + c * m;

  const int mid = g.n() / 2;
  for (int j = 0; j < out.a0.size(); ++j)
    if (j != mid && out.a0[j] >= out.a0[mid])
      throw Error(ErrorCode::ConstructionFailed,
                  "cusp: maximum is not at the origin (node x = " + format_double(g.x(j)) + ")");

  // Holder scan over the support plus one node beyond it.
  std::vector<double> xs, f, df;
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    if (std::abs(x) > r1 + g.h()) continue;
    xs.push_back(x);
    f.push_back(-cusp(x) + c * bump(x));
    df.push_back(-cusp_d(x) + c * bump_d(x));
  }
  const double s = 2.0 - spec.epsilon;
  double sup_f = 0.0, sup_df = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sup_f = std::max(sup_f, std::abs(f[i]));
    sup_df = std::max(sup_df, std::abs(df[i]));
  }
  if (s <= 0.0) {
    out.holder_quotient = sup_f;
    out.holder_norm = sup_f;
  } else if (s <= 1.0) {
    out.holder_quotient = detail::holder_quotient(xs, f, s);
    out.holder_norm = sup_f + out.holder_quotient;
  } else {
    out.holder_quotient = detail::holder_quotient(xs, df, s - 1.0);
    out.holder_norm = sup_f + sup_df + out.holder_quotient;
  }
  if (out.holder_norm > spec.sigma)
    throw Error(ErrorCode::ConstructionFailed,
                "cusp: measured C^{2-eps} norm " + format_double(out.holder_norm) + " exceeds sigma " +
                    format_double(spec.sigma));
  return out;
}

struct InstabilityOptions {
  double kappa0 = 0.5;  // neighbourhood radius that defines the horizon t0
  double delta = 0.1;   // horizon margin: t0 = (1/mu - delta) ln(kappa0 / |z0|)
  bool refine = true;   // rerun at 2n for the sensitivity figure
};

enum class InstabilityStatus { Ok, Trivial, Inconclusive };

inline const char* to_string(InstabilityStatus s) {
  switch (s) {
    case InstabilityStatus::Ok: return "OK";
    case InstabilityStatus::Trivial: return "TRIVIAL";
    case InstabilityStatus::Inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

struct InstabilityReport {
  double z0 = 0.0;
  double epsilon = 0.0;
  int n = 0;
  InstabilityStatus status = InstabilityStatus::Ok;
  std::string message;
  Series D;         // a(t, 0) - a(t, z(t))
  Series exponent;  // int_0^t a(s, 0) + a(s, z(s)) ds
  Series z;         // z(t)
  double mu_scale = 0.0;  // running mean of sup|a| at t0, stands in for the limit amplitude
  double horizon_t0 = 0.0;
  double window_end = 0.0;
  double z_max = 0.0;
  bool z_within_kappa = false;
  double identity_residual = 0.0;  // max |log D - log D(0) - exponent| on the window
  double growth_rate = 0.0;        // slope of log D on the window
  double predicted_rate = 0.0;     // window average of a(t,0) + a(t,z(t))
  double rate_rel_error = 0.0;
  double growth_factor = 0.0;      // max D / D(0) on the window
  double D_at_window_end = 0.0;
  double refinement_delta = -1.0;  // relative change of D(window_end) at 2n; -1 if not run
};

namespace detail {

inline InstabilityReport instability_run(const CuspSpec& spec, double z0, double T, const StepPolicy& policy,
                                         int n, const InstabilityOptions& opt) {
  const Grid g(n);
  const auto& pol = policy.accuracy;
  if (z0 != 0.0) {
    require(std::abs(z0) <= 0.1, "instability: |z0| must be at most 0.1");
    require(std::abs(z0) >= 4.0 * g.h(), "instability: |z0| must be at least 4h (" + format_double(4.0 * g.h()) +
                                             "); refine the grid");
    require(opt.kappa0 > std::abs(z0), "instability: kappa0 must exceed |z0|");
  }
  require(T > 0.0, "instability: horizon must be positive");
  require(opt.delta > 0.0, "instability: delta must be positive");
  const CuspData data = build_cusp_data(spec, g, pol);
  const int mid = g.n() / 2;

  InstabilityReport r;
  r.z0 = z0;
  r.epsilon = spec.epsilon;
  r.n = n;
  const double L = z0 != 0.0 ? std::log(opt.kappa0 / std::abs(z0)) : 0.0;
  // t0: first time with t >= (1/mu(t) - delta) L, mu(t) the running mean of sup|a|
  double area = 0.0, prev_t = 0.0, prev_sup = sup_norm(data.a0);
  r.mu_scale = prev_sup;
  r.horizon_t0 = -1.0;

  AuxOde aux;
  aux.y0 = {z0, 0.0};
  aux.rhs = [&](double, const GridFunction& a, const GridFunction& A, std::span<const double> y, std::span<double> dy) {
    const double X = std::clamp(y[0], -pi, pi);
    // even data: A is odd, so the origin is a fixed point; keep roundoff from moving it
    dy[0] = z0 == 0.0 ? 0.0 : interpolate(A, X, pol);
    dy[1] = a[mid] + interpolate(a, X, pol);
  };
  aux.observe = [&](double t, const GridFunction& a, std::span<const double> y) {
    const double X = std::clamp(y[0], -pi, pi);
    r.D.push(t, a[mid] - interpolate(a, X, pol));
    r.exponent.push(t, y[1]);
    r.z.push(t, y[0]);
    const double s = sup_norm(a);
    area += 0.5 * (s + prev_sup) * (t - prev_t);
    prev_t = t;
    prev_sup = s;
    if (t > 0.0 && r.horizon_t0 < 0.0 && z0 != 0.0) {
      const double mu = area / t;
      if (t >= (1.0 / mu - opt.delta) * L) {
        r.mu_scale = mu;
        r.horizon_t0 = t;
      }
    }
  };
  EvolveOptions eo;
  eo.aux = aux;
  eo.stop = [&](double) { return r.horizon_t0 >= 0.0 || (z0 != 0.0 && std::abs(r.z.v.back()) > opt.kappa0); };
  const Trajectory traj = evolve_pj(data.a0, T, policy, eo);

  if (z0 == 0.0) {
    r.status = InstabilityStatus::Trivial;
    r.message = "z0 = 0: D vanishes identically";
    r.window_end = prev_t;
    r.z_within_kappa = true;
    return r;
  }
  if (r.horizon_t0 < 0.0) {
    r.mu_scale = prev_t > 0.0 ? area / prev_t : prev_sup;
    r.horizon_t0 = (1.0 / r.mu_scale - opt.delta) * L;
  }

  const double D0 = r.D.v.front();
  std::vector<double> ts, ls;
  std::size_t last = 0;
  for (std::size_t k = 0; k < r.D.size(); ++k) {
    const double t = r.D.t[k];
    if (t > r.horizon_t0 + 1e-12) break;
    if (!(r.D.v[k] > 0.0) || std::abs(r.z.v[k]) > opt.kappa0) break;
    last = k;
    ts.push_back(t);
    ls.push_back(std::log(r.D.v[k]));
    r.z_max = std::max(r.z_max, std::abs(r.z.v[k]));
    r.growth_factor = std::max(r.growth_factor, r.D.v[k] / D0);
    r.identity_residual = std::max(r.identity_residual, std::abs(ls.back() - std::log(D0) - r.exponent.v[k]));
  }
  r.window_end = r.D.t[last];
  r.D_at_window_end = r.D.v[last];
  r.z_within_kappa = r.z_max <= opt.kappa0;
  if (ts.size() < 8 || r.window_end < r.horizon_t0 - 1e-9) {
    r.status = InstabilityStatus::Inconclusive;
    r.message = traj.status != RunStatus::Completed ? std::string("run stopped early: ") + traj.message
                                                   : "resolved window ends at t = " + format_double(r.window_end) +
                                                         " before t0 = " + format_double(r.horizon_t0);
    if (ts.size() < 2) return r;
  }
  const LineFit fit = fit_line(ts, ls);
  r.growth_rate = fit.slope;
  r.predicted_rate = r.exponent.v[last] / r.window_end;
  r.rate_rel_error = std::abs(r.growth_rate - r.predicted_rate) / std::abs(r.predicted_rate);
  return r;
}

}  // namespace detail

/// Evolves cusp data, follows the characteristic from z0 and checks the exponential
/// identity for D(t) = a(t,0) - a(t,z(t)) on the window t <= t0 with |z| <= kappa0.
inline InstabilityReport instability_experiment(const CuspSpec& spec, double z0, double T, const StepPolicy& policy,
                                                int n, const InstabilityOptions& opt = {}) {
  InstabilityReport r = detail::instability_run(spec, z0, T, policy, n, opt);
  if (opt.refine && r.status == InstabilityStatus::Ok) {
    const InstabilityReport fine = detail::instability_run(spec, z0, T, policy, 2 * n, opt);
    const double te = std::min(r.window_end, fine.window_end);
    const double coarse = r.D.at(te);
    r.refinement_delta = std::abs(fine.D.at(te) - coarse) / std::abs(coarse);
  }
  return r;
}

}  // namespace pjipm
