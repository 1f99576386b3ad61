#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pjipm/error.hpp"

namespace pjipm {

/// Scalar time series (t_k, v_k) with nondecreasing t.
struct Series {
  std::vector<double> t;
  std::vector<double> v;

  void push(double tt, double vv) {
    t.push_back(tt);
    v.push_back(vv);
  }
  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }

  /// Piecewise linear value; clamps outside the sampled range.
  double at(double tt) const {
    require(!t.empty(), "empty series");
    if (tt <= t.front()) return v.front();
    if (tt >= t.back()) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), tt);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double w = (tt - t[k - 1]) / (t[k] - t[k - 1]);
    return (1.0 - w) * v[k - 1] + w * v[k];
  }
};

/// Ordinary least squares fit v = slope * t + intercept with optional weights.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::size_t count = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w = {}) {
  require(x.size() == y.size() && x.size() >= 2, "fit_line needs at least two samples");
  require(w.empty() || w.size() == x.size(), "fit_line weight size mismatch");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double r2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    r2 += (w.empty() ? 1.0 : w[i]) * r * r;
  }
  f.rms_residual = std::sqrt(r2 / sw);
  f.count = x.size();
  return f;
}

/// Classical RK4 step for y' = f(t, y) on a flat state vector.
using FlatRhs = std::function<void(double, std::span<const double>, std::span<double>)>;

struct Rk4Workspace {
  std::vector<double> k1, k2, k3, k4, tmp;
  void resize(std::size_t n) {
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    k4.resize(n);
    tmp.resize(n);
  }
};

inline void rk4_step(const FlatRhs& f, double t, std::vector<double>& y, double dt, Rk4Workspace& ws) {
  const std::size_t n = y.size();
  ws.resize(n);
  f(t, y, ws.k1);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * dt * ws.k1[i];
  f(t + 0.5 * dt, ws.tmp, ws.k2);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * dt * ws.k2[i];
  f(t + 0.5 * dt, ws.tmp, ws.k3);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + dt * ws.k3[i];
  f(t + dt, ws.tmp, ws.k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

}  // namespace pjipm
