#pragma once

#include <cmath>
#include <string>

#include "pjipm/grid.hpp"

namespace pjipm {

enum class SteadyFamily { Zero, CosK, SinHalfK, NotSteady };

inline const char* to_string(SteadyFamily f) {
  switch (f) {
    case SteadyFamily::Zero: return "ZERO";
    case SteadyFamily::CosK: return "COS_K";
    case SteadyFamily::SinHalfK: return "SIN_HALF_K";
    case SteadyFamily::NotSteady: return "NOT_STEADY";
  }
  return "UNKNOWN";
}

struct SteadyMatch {
  SteadyFamily family = SteadyFamily::NotSteady;
  int k = 0;
  double mu = 0.0;
  double residual = 0.0;
  double match_error = 0.0;
};

/// Family member with unit amplitude: cos(kx) or sin((2k+1)x/2).
inline double steady_profile(SteadyFamily f, int k, double x) {
  if (f == SteadyFamily::CosK) return std::cos(k * x);
  if (f == SteadyFamily::SinHalfK) return std::sin(0.5 * (2 * k + 1) * x);
  return 0.0;
}

/// sup |A a_x - a^2 + (1/pi) int a^2| with A = int_{-pi}^x a.
inline double stationary_residual(const GridFunction& a, double mean_tol = 1e-8, const AccuracyPolicy& pol = {}) {
  require(std::abs(mean(a, pol)) <= mean_tol, "stationary_residual: input is not mean-free");
  const GridFunction A = antiderivative_from(a, IntegrationBase::MinusPi, pol);
  const GridFunction da = derivative(a, 1, pol);
  const double l2 = inner(a, a, pol) / pi;
  double r = 0.0;
  for (int j = 0; j < a.size(); ++j) r = std::max(r, std::abs(A[j] * da[j] - a[j] * a[j] + l2));
  return r;
}

/// Projects onto both families for k <= n/8, keeps the best normalized match, then
/// accepts it only if both the sup distance and the stationary residual are within tol.
inline SteadyMatch classify_steady(const GridFunction& a, double tol = 1e-6, double mean_tol = 1e-8,
                                   const AccuracyPolicy& pol = {}) {
  require(tol > 0.0, "classify_steady: tol must be positive");
  require(std::abs(mean(a, pol)) <= mean_tol, "classify_steady: input is not mean-free");
  const Grid& g = a.grid();
  SteadyMatch out;
  out.residual = stationary_residual(a, mean_tol, pol);
  if (sup_norm(a) <= tol) {
    out.family = SteadyFamily::Zero;
    out.match_error = sup_norm(a);
    return out;
  }
  const double na = std::sqrt(inner(a, a, pol));
  double best = -1.0;
  SteadyFamily best_family = SteadyFamily::NotSteady;
  int best_k = 0;
  double best_mu = 0.0;
  const int kmax = g.n() / 8;
  for (SteadyFamily fam : {SteadyFamily::CosK, SteadyFamily::SinHalfK}) {
    for (int k = fam == SteadyFamily::CosK ? 1 : 0; k <= kmax; ++k) {
      const GridFunction phi = GridFunction::sample(g, [&](double x) { return steady_profile(fam, k, x); });
      const double pp = inner(phi, phi, pol), ap = inner(a, phi, pol);
      const double score = std::abs(ap) / (na * std::sqrt(pp));
      if (score > best) {
        best = score;
        best_family = fam;
        best_k = k;
        best_mu = ap / pp;
      }
    }
  }
  double err = 0.0;
  for (int j = 0; j < g.size(); ++j)
    err = std::max(err, std::abs(a[j] - best_mu * steady_profile(best_family, best_k, g.x(j))));
  out.match_error = err;
  out.k = best_k;
  out.mu = best_mu;
  out.family = (err <= tol && out.residual <= tol) ? best_family : SteadyFamily::NotSteady;
  return out;
}

}  // namespace pjipm
