#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pjipm/pj.hpp"

namespace pjipm {

struct CharSample {
  double t = 0.0;
  double X = 0.0;
  double a = 0.0;
  double dxa = 0.0;
  double dxxa = 0.0;
};

struct CharPath {
  double z0 = 0.0;
  std::vector<CharSample> samples;
};

namespace detail {

// Cubic Lagrange weights in time for the four samples starting at index k0.
inline std::array<double, 4> time_weights(const std::vector<PjState>& s, std::size_t k0, double t) {
  std::array<double, 4> w{};
  for (int i = 0; i < 4; ++i) {
    double v = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) v *= (t - s[k0 + j].t) / (s[k0 + i].t - s[k0 + j].t);
    w[i] = v;
  }
  return w;
}

}  // namespace detail

/// Follows dX/dt = int_{-pi}^X a(t) through a stored run. The velocity field is
/// interpolated in space per sample and cubically in time between samples.
inline CharPath trace(const Trajectory& traj, double z0, const AccuracyPolicy& pol = {}) {
  require(z0 >= -pi && z0 <= pi, "trace: z0 must lie in [-pi, pi]");
  require(!traj.samples.empty(), "trace: empty trajectory");
  const Grid& g = traj.grid;
  const auto& smp = traj.samples;
  const CumulativeQuadrature quad(g, pol);
  const DiffOperator d1(g, 1, pol), d2(g, 2, pol);
  std::vector<GridFunction> vel;
  vel.reserve(smp.size());
  double vmax = 1.0;
  for (const auto& s : smp) {
    GridFunction A(g);
    quad.apply(s.a.span(), A.span());
    vmax = std::max(vmax, sup_norm(A));
    vel.push_back(std::move(A));
  }

  CharPath path;
  path.z0 = z0;
  auto push = [&](std::size_t k, double X) {
    const GridFunction& a = smp[k].a;
    path.samples.push_back({smp[k].t, X, interpolate(a, X, pol), interpolate(d1(a), X, pol), interpolate(d2(a), X, pol)});
  };
  auto clamp_checked = [&](double X, double t) {
    if (X < -pi - g.h() || X > pi + g.h() || !std::isfinite(X))
      throw Error(ErrorCode::NumericalFailure, "characteristic left [-pi, pi] at t = " + format_double(t));
    return std::clamp(X, -pi, pi);
  };

  double X = z0;
  push(0, X);
  const std::size_t m = smp.size();
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double t0 = smp[k].t, t1 = smp[k + 1].t;
    std::size_t k0 = 0;
    int nt = static_cast<int>(std::min<std::size_t>(4, m));
    if (m >= 4) k0 = std::min(k > 0 ? k - 1 : 0, m - 4);
    auto velocity = [&](double t, double x) {
      x = clamp_checked(x, t);
      if (nt < 4) {  // too few samples for cubic: linear
        const double w = (t - t0) / (t1 - t0);
        return (1.0 - w) * interpolate(vel[k], x, pol) + w * interpolate(vel[k + 1], x, pol);
      }
      const auto w = detail::time_weights(smp, k0, t);
      double v = 0.0;
      for (int i = 0; i < 4; ++i) v += w[i] * interpolate(vel[k0 + i], x, pol);
      return v;
    };
    const int sub = std::max(1, static_cast<int>(std::ceil((t1 - t0) * vmax / (0.5 * g.h()))));
    const double dt = (t1 - t0) / sub;
    for (int i = 0; i < sub; ++i) {
      const double t = t0 + i * dt;
      const double k1 = velocity(t, X);
      const double k2 = velocity(t + 0.5 * dt, X + 0.5 * dt * k1);
      const double k3 = velocity(t + 0.5 * dt, X + 0.5 * dt * k2);
      const double k4 = velocity(t + dt, X + dt * k3);
      X = clamp_checked(X + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + dt);
    }
    push(k + 1, X);
  }
  return path;
}

inline void write_csv(const CharPath& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "t,X,a,dxa,dxxa\n";
  for (const auto& s : p.samples)
    out << format_double(s.t) << ',' << format_double(s.X) << ',' << format_double(s.a) << ','
        << format_double(s.dxa) << ',' << format_double(s.dxxa) << '\n';
}

struct TransportedReport {
  double z0 = 0.0;
  double dxa_drift = 0.0;
  double dxxa_drift = 0.0;
  bool tracks_max = false;
  double argmax_gap = 0.0;  // max_t (sup a - a(X)), only when z0 is the argmax of a0
  double argmax_distance = 0.0;  // max_t |argmax a - X|
  CharPath path;
};

/// Quantities carried by the flow from a critical point z0 of a0.
inline TransportedReport transported_report(const Trajectory& traj, double z0, double crit_tol = 1e-6,
                                            const AccuracyPolicy& pol = {}) {
  require(!traj.samples.empty(), "transported_report: empty trajectory");
  const GridFunction& a0 = traj.samples.front().a;
  const Grid& g = traj.grid;
  const double da0 = interpolate(derivative(a0, 1, pol), z0, pol);
  require(std::abs(da0) <= crit_tol, "transported_report: z0 is not a critical point of a0 (|a0'(z0)| = " +
                                         format_double(std::abs(da0)) + ")");
  TransportedReport r;
  r.z0 = z0;
  r.path = trace(traj, z0, pol);
  const int jmax = argmax_node(a0);
  r.tracks_max = std::abs(g.x(jmax) - z0) <= g.h();
  const CharSample& first = r.path.samples.front();
  for (std::size_t k = 0; k < r.path.samples.size(); ++k) {
    const CharSample& s = r.path.samples[k];
    r.dxa_drift = std::max(r.dxa_drift, std::abs(s.dxa - first.dxa));
    r.dxxa_drift = std::max(r.dxxa_drift, std::abs(s.dxxa - first.dxxa));
    if (r.tracks_max) {
      const GridFunction& a = traj.samples[k].a;
      const int j = argmax_node(a);
      const Extremum e = refine_max(a, derivative(a, 1, pol), derivative(a, 2, pol), j, pol);
      r.argmax_gap = std::max(r.argmax_gap, std::abs(e.value - s.a));
      r.argmax_distance = std::max(r.argmax_distance, std::abs(e.x - s.X));
    }
  }
  return r;
}

}  // namespace pjipm
