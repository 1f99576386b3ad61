#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pjipm/grid.hpp"
#include "pjipm/series.hpp"

namespace pjipm {

enum class WeightKind { WMinus1, WTildeTheta, WTheta, Omega };

inline const char* to_string(WeightKind k) {
  switch (k) {
    case WeightKind::WMinus1: return "W_MINUS1";
    case WeightKind::WTildeTheta: return "W_TILDE_THETA";
    case WeightKind::WTheta: return "W_THETA";
    case WeightKind::Omega: return "OMEGA";
  }
  return "UNKNOWN";
}

/// How nodes inside the exclusion radius around the weight's zero are treated.
enum class ExclusionRule { LeadingOrder, Skip };

struct WeightSpec {
  WeightKind kind = WeightKind::WTheta;
  double theta = 0.3;
  double C = 12.0;
  double exclusion_radius = -1.0;  // negative: 3h
  ExclusionRule rule = ExclusionRule::LeadingOrder;

  double radius(const Grid& g) const { return exclusion_radius < 0.0 ? 3.0 * g.h() : exclusion_radius; }
  bool vanishes_at_zero() const { return kind != WeightKind::WTildeTheta; }
  // W ~ coeff |y|^power near y = 0
  int leading_power() const { return kind == WeightKind::Omega ? 2 : 3; }
  double leading_coeff() const { return 0.25; }
};

inline constexpr double kPlateauEdge = 2.0 * pi / 3.0;
inline const double kPlateau = 3.0 * std::sqrt(3.0) / 8.0;

inline double w_minus1(double x) {
  x = wrap_angle(x);
  if (std::abs(x) > kPlateauEdge) return kPlateau;
  const double s = std::sin(0.5 * x);
  return std::abs(std::sin(x)) * s * s;
}

inline double w_minus1_derivative(double x) {
  x = wrap_angle(x);
  if (std::abs(x) >= kPlateauEdge) return 0.0;
  const double s = std::sin(0.5 * x), c = std::cos(0.5 * x);
  const double sgn = x >= 0.0 ? 1.0 : -1.0;
  return sgn * (std::cos(x) * s * s + std::sin(x) * s * c);
}

inline double w_tilde(double x, double theta, double C) { return std::exp(C * std::abs(wrap_angle(x)) / theta); }

inline double w_tilde_derivative(double x, double theta, double C) {
  const double y = wrap_angle(x);
  const double sgn = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
  return sgn * (C / theta) * std::exp(C * std::abs(y) / theta);
}

inline double weight_eval(const WeightSpec& w, double x) {
  switch (w.kind) {
    case WeightKind::WMinus1: return w_minus1(x);
    case WeightKind::WTildeTheta: return w_tilde(x, w.theta, w.C);
    case WeightKind::WTheta: return w_minus1(x) * w_tilde(x, w.theta, w.C);
    case WeightKind::Omega: {
      const double s = std::sin(0.5 * x);
      return s * s;
    }
  }
  return 0.0;
}

inline double weight_derivative(const WeightSpec& w, double x) {
  switch (w.kind) {
    case WeightKind::WMinus1: return w_minus1_derivative(x);
    case WeightKind::WTildeTheta: return w_tilde_derivative(x, w.theta, w.C);
    case WeightKind::WTheta:
      return w_minus1_derivative(x) * w_tilde(x, w.theta, w.C) + w_minus1(x) * w_tilde_derivative(x, w.theta, w.C);
    case WeightKind::Omega: return 0.5 * std::sin(x);
  }
  return 0.0;
}

struct WeightedSup {
  double value = 0.0;
  double at = 0.0;        // y location of the maximum
  int leading_nodes = 0;  // nodes evaluated with the leading-order weight
  int skipped_nodes = 0;
  ExclusionRule rule = ExclusionRule::LeadingOrder;
};

/// sup |f / W| over nodes; node j sits at y_j = x_j - shift.
inline WeightedSup weighted_sup_detail(const GridFunction& f, const WeightSpec& w, double shift = 0.0) {
  const Grid& g = f.grid();
  const double r = w.radius(g);
  WeightedSup out;
  out.rule = w.rule;
  for (int j = 0; j < f.size(); ++j) {
    const double y = g.x(j) - shift;
    const double ay = std::abs(y);
    double q;
    if (w.vanishes_at_zero() && ay <= r) {
      if (w.rule == ExclusionRule::Skip || ay < 0.5 * g.h()) {
        ++out.skipped_nodes;
        continue;
      }
      ++out.leading_nodes;
      q = std::abs(f[j]) / (w.leading_coeff() * std::pow(ay, w.leading_power()));
    } else {
      q = std::abs(f[j]) / weight_eval(w, y);
    }
    if (q > out.value) {
      out.value = q;
      out.at = y;
    }
  }
  return out;
}

inline double weighted_sup(const GridFunction& f, const WeightSpec& w, double shift = 0.0) {
  return weighted_sup_detail(f, w, shift).value;
}

/// sup|sin x int_0^x f / W| / sup|f / W| on the centered window.
inline double nonlocal_contraction_ratio(const GridFunction& f, const WeightSpec& w, const AccuracyPolicy& pol = {}) {
  const GridFunction F = antiderivative_from(f, IntegrationBase::Zero, pol);
  GridFunction g(f.grid());
  for (int j = 0; j < g.size(); ++j) g[j] = std::sin(f.grid().x(j)) * F[j];
  const double den = weighted_sup(f, w);
  require(den > 0.0, "contraction ratio undefined for f = 0");
  return weighted_sup(g, w) / den;
}

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  double residual = 0.0;  // rms of log residuals
  double theta_prime = 1.0;
  std::size_t samples = 0;
};

/// Fits log v = intercept - rate t on samples with t in [lo, hi].
inline DecayFit fit_decay(const Series& s, double lo, double hi) {
  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s.t[k] < lo || s.t[k] > hi) continue;
    require(s.v[k] > 0.0, "fit_decay: non-positive sample at t = " + format_double(s.t[k]));
    ts.push_back(s.t[k]);
    ls.push_back(std::log(s.v[k]));
  }
  require(ts.size() >= 8, "fit_decay needs at least 8 samples in the window");
  const LineFit f = fit_line(ts, ls);
  DecayFit d;
  d.rate = -f.slope;
  d.intercept = f.intercept;
  d.window_lo = lo;
  d.window_hi = hi;
  d.residual = f.rms_residual;
  d.theta_prime = 1.0 - d.rate;
  d.samples = ts.size();
  return d;
}

}  // namespace pjipm
