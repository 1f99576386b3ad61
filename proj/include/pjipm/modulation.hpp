#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "pjipm/pj.hpp"
#include "pjipm/weights.hpp"

namespace pjipm {

/// Linearized operator in the y variable:
/// 2cos(y) eta - sin(y) eta' + sin(y) int_base^y eta [- (2/pi) int cos eta].
inline GridFunction apply_L(const GridFunction& eta, IntegrationBase base, bool with_mean_term,
                            const GridFunction* deta = nullptr, const AccuracyPolicy& pol = {}) {
  const Grid& g = eta.grid();
  const GridFunction d = deta ? *deta : derivative(eta, 1, pol);
  const GridFunction F = antiderivative_from(eta, base, pol);
  double c = 0.0;
  if (with_mean_term) c = 2.0 / pi * inner(GridFunction::sample(g, [](double y) { return std::cos(y); }), eta, pol);
  GridFunction out(g);
  for (int j = 0; j < g.size(); ++j) {
    const double y = g.x(j);
    out[j] = 2.0 * std::cos(y) * eta[j] - std::sin(y) * d[j] + std::sin(y) * F[j] - c;
  }
  return out;
}

struct Eigenmode {
  int l = 0;
  double eigenvalue = 0.0;
  GridFunction values;
  GridFunction derivative;  // analytic
};

inline double phi_m1(double y) { return -2.0 * std::cos(y) + 1.0 - y * std::sin(y); }
inline double phi_1(double y) { return 2.0 * std::cos(y) + 1.0 + y * std::sin(y); }

/// l = -1: phi_{-1}, l = 0: cos, l = 1: phi_1, with eigenvalue l.
inline Eigenmode eigenmode(const Grid& g, int l) {
  require(l >= -1 && l <= 1, "eigenmode index must be -1, 0 or 1");
  Eigenmode e;
  e.l = l;
  e.eigenvalue = l;
  switch (l) {
    case -1:
      e.values = GridFunction::sample(g, phi_m1);
      e.derivative = GridFunction::sample(g, [](double y) { return std::sin(y) - y * std::cos(y); });
      break;
    case 0:
      e.values = GridFunction::sample(g, [](double y) { return std::cos(y); });
      e.derivative = GridFunction::sample(g, [](double y) { return -std::sin(y); });
      break;
    default:
      e.values = GridFunction::sample(g, phi_1);
      e.derivative = GridFunction::sample(g, [](double y) { return -std::sin(y) + y * std::cos(y); });
  }
  return e;
}

/// (1/pi) int cos * xi
inline double project_P(const GridFunction& xi, const AccuracyPolicy& pol = {}) {
  return inner(GridFunction::sample(xi.grid(), [](double y) { return std::cos(y); }), xi, pol) / pi;
}

/// (1/2pi) int eta^2
inline double project_Q(const GridFunction& eta, const AccuracyPolicy& pol = {}) {
  return inner(eta, eta, pol) / (2.0 * pi);
}

inline double q1(double alpha_m1, double alpha_1) {
  return alpha_m1 * alpha_m1 - 6.0 * alpha_m1 * alpha_1 + 9.0 * alpha_1 * alpha_1;
}

/// beta^2 + Q1 phi_{-1} with beta = alpha_{-1} phi_{-1} + alpha_1 phi_1; O(y^4) at the origin.
inline GridFunction n1_remainder(const Grid& g, double alpha_m1, double alpha_1) {
  const double q = q1(alpha_m1, alpha_1);
  return GridFunction::sample(g, [&](double y) {
    const double b = alpha_m1 * phi_m1(y) + alpha_1 * phi_1(y);
    return b * b + q * phi_m1(y);
  });
}

struct ModulationFrame {
  double t = 0.0;
  double s = 0.0;
  double mu = 0.0;
  double x_star = 0.0;
  double alpha_m1 = 0.0;
  double alpha_1 = 0.0;
  GridFunction xi;
  GridFunction eta;
  // diagnostics carried to the next frame
  double eta0 = 0.0;
  double P_eta = 0.0;
  double Q_eta = 0.0;
  double P_xi = 0.0;
  double mu_measured = 0.0;  // -a''(x*) at this frame
  double x_star_rate = 0.0;  // -sin x* + int_{-pi-x*}^0 eta
  double x_star_ode = 0.0;   // x* integrated from its law along the frames

  double forcing() const { return 1.5 * eta0 - P_eta - Q_eta; }
  double tol() const { return 1e-6 * sup_norm(xi) + 1e-10; }
};

namespace detail {

inline int nearest_local_max(const GridFunction& a, double x_ref) {
  const Grid& g = a.grid();
  int best = -1;
  for (int j = 1; j < g.n(); ++j) {
    if (a[j] >= a[j - 1] && a[j] >= a[j + 1]) {
      if (best < 0 || std::abs(g.x(j) - x_ref) < std::abs(g.x(best) - x_ref)) best = j;
    }
  }
  return best < 0 ? argmax_node(a) : best;
}

// Fills eta, xi-independent diagnostics and the shift law for a located maximum.
inline void fill_eta(ModulationFrame& f, const GridFunction& a, const AccuracyPolicy& pol) {
  const Grid& g = a.grid();
  f.eta = GridFunction(g);
  for (int j = 0; j < g.size(); ++j) {
    const double y = g.x(j);
    f.eta[j] = interpolate_periodic(a, f.x_star + y, pol) / f.mu - std::cos(y);
  }
  f.eta0 = f.eta[g.n() / 2];
  f.P_eta = project_P(f.eta, pol);
  f.Q_eta = project_Q(f.eta, pol);
  const GridFunction G = antiderivative_from(f.eta, IntegrationBase::Zero, pol);
  f.x_star_rate = -std::sin(f.x_star) - interpolate_periodic(G, -pi - f.x_star, pol);
}

inline void fill_xi(ModulationFrame& f, const AccuracyPolicy& pol) {
  const Grid& g = f.eta.grid();
  f.xi = GridFunction(g);
  for (int j = 0; j < g.size(); ++j) {
    const double y = g.x(j);
    f.xi[j] = f.eta[j] - f.alpha_m1 * phi_m1(y) - f.alpha_1 * phi_1(y);
  }
  f.P_xi = project_P(f.xi, pol);
}

}  // namespace detail

/// Initial frame: x* at the maximum, mu = -a0''(x*), alpha_1 = 0, alpha_{-1} = 1 + a0(x*)/a0''(x*).
inline ModulationFrame prepare_initial_frame(const GridFunction& a0, const AccuracyPolicy& pol = {}) {
  const Grid& g = a0.grid();
  const GridFunction d1 = derivative(a0, 1, pol), d2 = derivative(a0, 2, pol);
  const int j = argmax_node(a0);
  if (j <= 1 || j >= g.n() - 1)
    throw Error(ErrorCode::PreparationFailed, "maximum lies within one cell of the boundary");
  const Extremum e = refine_max(a0, d1, d2, j, pol);
  const double a2 = interpolate(d2, e.x, pol);
  if (!(a2 < 0.0)) throw Error(ErrorCode::PreparationFailed, "second derivative at the maximum is not negative");
  ModulationFrame f;
  f.t = 0.0;
  f.s = 0.0;
  f.x_star = e.x;
  f.mu = -a2;
  f.mu_measured = f.mu;
  detail::fill_eta(f, a0, pol);
  f.alpha_1 = 0.0;
  f.alpha_m1 = 1.0 + e.value / a2;
  detail::fill_xi(f, pol);
  f.x_star_ode = f.x_star;
  return f;
}

/// Decomposition of a(t) relative to the previous frame. alpha_1 follows
/// d alpha_1/ds = -2 alpha_1 + (3/2) eta(0) - P(eta) - Q(eta), which is the alpha_1 law
/// with P(xi) eliminated through alpha_{-1} = 3 alpha_1 - eta(0); the mean identity then holds.
inline ModulationFrame decompose_frame(const GridFunction& a, double t, const ModulationFrame& prev,
                                       const AccuracyPolicy& pol = {}) {
  const GridFunction d1 = derivative(a, 1, pol), d2 = derivative(a, 2, pol);
  const int j = detail::nearest_local_max(a, prev.x_star);
  const Extremum e = refine_max(a, d1, d2, j, pol);
  ModulationFrame f;
  f.t = t;
  f.mu = prev.mu;
  f.s = prev.mu * t;
  f.x_star = e.x;
  f.mu_measured = -interpolate(d2, e.x, pol);
  detail::fill_eta(f, a, pol);
  const double ds = f.s - prev.s;
  const double f0 = prev.forcing(), f1 = f.forcing();
  if (ds > 0.0) {
    const double ex = std::exp(-2.0 * ds);
    f.alpha_1 = prev.alpha_1 * ex + f0 * (1.0 - ex) / 2.0 + (f1 - f0) * (ds / 2.0 - (1.0 - ex) / 4.0) / ds;
  } else {
    f.alpha_1 = prev.alpha_1;
  }
  f.alpha_m1 = 3.0 * f.alpha_1 - f.eta0;
  detail::fill_xi(f, pol);
  f.x_star_ode = prev.x_star_ode + 0.5 * ds * (prev.x_star_rate + f.x_star_rate);
  return f;
}

inline std::vector<ModulationFrame> modulation_frames(const Trajectory& traj, const AccuracyPolicy& pol = {}) {
  std::vector<ModulationFrame> out;
  out.push_back(prepare_initial_frame(traj.samples.front().a, pol));
  for (std::size_t k = 1; k < traj.samples.size(); ++k)
    out.push_back(decompose_frame(traj.samples[k].a, traj.samples[k].t, out.back(), pol));
  return out;
}

/// xi(0), xi'(0), xi''(0)
inline std::array<double, 3> frame_vanishing(const ModulationFrame& f, const AccuracyPolicy& pol = {}) {
  const int c = f.xi.grid().n() / 2;
  return {f.xi[c], derivative(f.xi, 1, pol)[c], derivative(f.xi, 2, pol)[c]};
}

inline double alpha1_identity_residual(const ModulationFrame& f, const AccuracyPolicy& pol = {}) {
  return std::abs(f.alpha_1 + integral(f.xi, pol) / (4.0 * pi));
}

struct ModulationResiduals {
  double alpha_m1 = 0.0;  // max |d alpha_{-1}/ds - (-alpha_{-1} - P(xi) - Q(eta) - Q1)|
  double alpha_1 = 0.0;   // max |d alpha_1/ds - (alpha_1 - P(xi) - Q(eta))|
  double mu_drift = 0.0;  // max |mu_measured - mu| / mu
  double alpha1_identity = 0.0;
  double x_star_gap = 0.0;  // max |x*_argmax - x*_ode|
};

/// Centered-difference residuals of the modulation laws along consecutive frames.
inline ModulationResiduals modulation_residuals(const std::vector<ModulationFrame>& fr,
                                                const AccuracyPolicy& pol = {}) {
  ModulationResiduals r;
  auto rhs_m1 = [](const ModulationFrame& f) {
    return -f.alpha_m1 - f.P_xi - f.Q_eta - q1(f.alpha_m1, f.alpha_1);
  };
  auto rhs_1 = [](const ModulationFrame& f) { return f.alpha_1 - f.P_xi - f.Q_eta; };
  for (std::size_t k = 0; k < fr.size(); ++k) {
    r.mu_drift = std::max(r.mu_drift, std::abs(fr[k].mu_measured - fr[k].mu) / fr[k].mu);
    r.alpha1_identity = std::max(r.alpha1_identity, alpha1_identity_residual(fr[k], pol));
    r.x_star_gap = std::max(r.x_star_gap, std::abs(fr[k].x_star - fr[k].x_star_ode));
    if (k + 1 < fr.size()) {
      const double ds = fr[k + 1].s - fr[k].s;
      if (ds <= 0.0) continue;
      const double dm1 = (fr[k + 1].alpha_m1 - fr[k].alpha_m1) / ds;
      const double d1 = (fr[k + 1].alpha_1 - fr[k].alpha_1) / ds;
      r.alpha_m1 = std::max(r.alpha_m1, std::abs(dm1 - 0.5 * (rhs_m1(fr[k]) + rhs_m1(fr[k + 1]))));
      r.alpha_1 = std::max(r.alpha_1, std::abs(d1 - 0.5 * (rhs_1(fr[k]) + rhs_1(fr[k + 1]))));
    }
  }
  return r;
}

}  // namespace pjipm
