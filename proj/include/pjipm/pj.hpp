#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pjipm/grid.hpp"
#include "pjipm/series.hpp"

namespace pjipm {

struct PjState {
  double t = 0.0;
  GridFunction a;
};

/// theta(t) in the forced equation a_t + ... = theta(t) a. Empty means unforced.
using ForcingHook = std::function<double(double)>;

struct StepPolicy {
  double cfl = 0.5;
  double dt_max = 0.05;
  double dt_min = 1e-12;
  double sup_cap = 1e6;
  double sample_dt = 0.1;  // 0 stores every step
  double mean_tol = 1e-8;
  AccuracyPolicy accuracy{};

  void validate() const {
    require(cfl > 0.0 && dt_max > 0.0 && dt_min > 0.0 && sup_cap > 0.0, "step policy values must be positive");
    require(sample_dt >= 0.0, "sample_dt must be nonnegative");
    accuracy.validate();
  }
};

enum class RunStatus { Completed, BlowupSuspected, NumericalFailure, ShiftEscape };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "COMPLETED";
    case RunStatus::BlowupSuspected: return "BLOWUP_SUSPECTED";
    case RunStatus::NumericalFailure: return "NUMERICAL_FAILURE";
    case RunStatus::ShiftEscape: return "SHIFT_ESCAPE";
  }
  return "UNKNOWN";
}

/// Stored run: sampled snapshots plus per-step scalar series.
struct Trajectory {
  Grid grid;
  std::vector<PjState> samples;
  std::vector<double> sample_shift;  // domain shift per sample (linear runs), else empty
  std::map<std::string, Series> series;
  RunStatus status = RunStatus::Completed;
  std::string message;
  long steps = 0;

  const PjState& final_state() const { return samples.back(); }
};

/// Extra ODE integrated with the same RK4 stages as the field.
struct AuxOde {
  std::vector<double> y0;
  std::function<void(double t, const GridFunction& a, const GridFunction& A, std::span<const double> y,
                     std::span<double> dy)>
      rhs;
  std::function<void(double t, const GridFunction& a, std::span<const double> y)> observe;
};

/// Evaluates the PJ tendency; reusable across many calls on one grid.
class PjOperator {
 public:
  PjOperator(const Grid& g, const AccuracyPolicy& pol = {}) : grid_(g), d1_(g, pol), quad_(g, pol) {}

  const Grid& grid() const { return grid_; }

  /// out = -A a_x + a^2 - (1/pi) int a^2 + theta a, with A = int_{-pi}^x a. Returns (1/pi) int a^2.
  double rhs(std::span<const double> a, std::span<double> out, std::span<double> A, double theta = 0.0) const {
    const int m = grid_.size();
    quad_.apply(a, A);
    d1_.apply(a, A, out);
    sq_.resize(m);
    for (int j = 0; j < m; ++j) sq_[j] = a[j] * a[j];
    const double l2 = quad_.total(sq_) / pi;
    for (int j = 0; j < m; ++j) out[j] = -A[j] * out[j] + sq_[j] - l2 + theta * a[j];
    return l2;
  }

  const CumulativeQuadrature& quad() const { return quad_; }

 private:
  Grid grid_;
  UpwindOperator d1_;
  CumulativeQuadrature quad_;
  mutable std::vector<double> sq_;
};

inline GridFunction pj_rhs(const GridFunction& a, double mean_tol = 1e-8, const AccuracyPolicy& pol = {}) {
  require(a.all_finite(), "pj_rhs: non-finite input");
  const double m = mean(a, pol);
  require(std::abs(m) <= mean_tol, "pj_rhs: input is not mean-free (mean = " + format_double(m) + ")");
  GridFunction out(a.grid()), A(a.grid());
  PjOperator(a.grid(), pol).rhs(a.span(), out.span(), A.span());
  return out;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

struct EvolveOptions {
  ForcingHook forcing;
  std::optional<AuxOde> aux;
  std::function<bool(double t)> stop;  // checked after every step; true ends the run early
};

inline Trajectory evolve_pj(const GridFunction& a0, double horizon, const StepPolicy& policy = {},
                            const EvolveOptions& opts = {}) {
  policy.validate();
  require(horizon >= 0.0, "horizon must be nonnegative");
  require(a0.all_finite(), "initial data must be finite");
  require(std::abs(mean(a0, policy.accuracy)) <= policy.mean_tol, "initial data must be mean-free");

  const Grid& g = a0.grid();
  const int m = g.size();
  const std::size_t naux = opts.aux ? opts.aux->y0.size() : 0;
  PjOperator op(g, policy.accuracy);

  Trajectory traj;
  traj.grid = g;
  // layout: [a (m) | bkm accumulator | aux...]
  std::vector<double> y(m + 1 + naux);
  std::copy(a0.values().begin(), a0.values().end(), y.begin());
  y[m] = 0.0;
  if (naux) std::copy(opts.aux->y0.begin(), opts.aux->y0.end(), y.begin() + m + 1);

  GridFunction af(g), Af(g);
  FlatRhs f = [&](double t, std::span<const double> yy, std::span<double> dy) {
    const double theta = opts.forcing ? opts.forcing(t) : 0.0;
    op.rhs(yy.first(m), dy.first(m), Af.span(), theta);
    dy[m] = max_abs(yy.first(m));
    if (naux) {
      std::copy(yy.begin(), yy.begin() + m, af.values().begin());
      opts.aux->rhs(t, af, Af, yy.subspan(m + 1, naux), dy.subspan(m + 1, naux));
    }
  };

  auto record = [&](double t) {
    std::span<const double> a(y.data(), m);
    traj.series["sup"].push(t, max_abs(a));
    traj.series["bkm"].push(t, y[m]);
    std::vector<double> sq(m);
    for (int j = 0; j < m; ++j) sq[j] = a[j] * a[j];
    traj.series["l2"].push(t, op.quad().total(sq) / pi);
    if (naux && opts.aux->observe) {
      std::copy(a.begin(), a.end(), af.values().begin());
      opts.aux->observe(t, af, std::span<const double>(y).subspan(m + 1, naux));
    }
  };
  auto store = [&](double t) {
    traj.samples.push_back({t, GridFunction(g, std::vector<double>(y.begin(), y.begin() + m))});
  };

  double t = 0.0;
  traj.series["mean"].push(0.0, mean(a0, policy.accuracy));
  record(t);
  store(t);
  double next_sample = policy.sample_dt > 0.0 ? policy.sample_dt : 0.0;
  Rk4Workspace ws;
  std::vector<double> last_good = y;
  const double t_eps = 1e-12 * std::max(1.0, horizon);

  while (t < horizon - t_eps) {
    op.quad().apply(std::span<const double>(y.data(), m), Af.span());
    const double vmax = max_abs(Af.span());
    const double dt_cfl = std::min(policy.dt_max, policy.cfl * g.h() / std::max(1.0, vmax));
    if (dt_cfl < policy.dt_min) {
      traj.status = RunStatus::BlowupSuspected;
      traj.message = "time step fell below dt_min";
      break;
    }
    double dt = dt_cfl;
    bool hit_sample = false;
    if (policy.sample_dt > 0.0 && t + dt >= next_sample - t_eps) {
      dt = next_sample - t;
      hit_sample = true;
    }
    if (t + dt > horizon - t_eps) {
      dt = horizon - t;
      hit_sample = true;
    }
    last_good = y;
    rk4_step(f, t, y, dt, ws);
    ++traj.steps;
    std::span<double> a(y.data(), m);
    if (!all_finite(y)) {
      y = last_good;
      traj.status = RunStatus::NumericalFailure;
      traj.message = "non-finite values at t = " + format_double(t + dt);
      break;
    }
    const double mbar = op.quad().total(a) / (2.0 * pi);
    for (double& v : a) v -= mbar;
    t = (hit_sample && policy.sample_dt > 0.0 && t + dt >= next_sample - t_eps) ? next_sample : t + dt;
    if (t > horizon - t_eps) t = horizon;
    traj.series["mean"].push(t, mbar);
    record(t);
    if (policy.sample_dt == 0.0 || hit_sample) {
      store(t);
      if (policy.sample_dt > 0.0)
        while (next_sample <= t + t_eps) next_sample += policy.sample_dt;
    }
    if (max_abs(a) > policy.sup_cap) {
      traj.status = RunStatus::BlowupSuspected;
      traj.message = "sup norm exceeded cap";
      break;
    }
    if (opts.stop && opts.stop(t)) {
      traj.message = "stopped by caller at t = " + format_double(t);
      break;
    }
  }
  if (traj.samples.back().t != t) store(t);
  return traj;
}

/// max_{j<=k} sup |d^j f|
inline double ck_norm(const GridFunction& f, int k, const AccuracyPolicy& pol = {}) {
  double m = sup_norm(f);
  for (int j = 1; j <= k; ++j) m = std::max(m, sup_norm(derivative(f, j, pol)));
  return m;
}

/// (|a0|_{C3} + |a0|_{C3}^3) (t+1)^2 exp(C int_0^t |a|_inf), on the per-step time axis.
inline Series bkm_bound(const Trajectory& traj, double C, const AccuracyPolicy& pol = {}) {
  require(!traj.samples.empty(), "bkm_bound: empty trajectory");
  const double n0 = ck_norm(traj.samples.front().a, 3, pol);
  const Series& acc = traj.series.at("bkm");
  Series out;
  for (std::size_t k = 0; k < acc.size(); ++k) {
    const double t = acc.t[k];
    out.push(t, (n0 + n0 * n0 * n0) * (t + 1.0) * (t + 1.0) * std::exp(C * acc.v[k]));
  }
  return out;
}

/// Sample nearest to time t.
inline const PjState& sample_at(const Trajectory& traj, double t) {
  require(!traj.samples.empty(), "empty trajectory");
  const PjState* best = &traj.samples.front();
  for (const auto& s : traj.samples)
    if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
  return *best;
}

}  // namespace pjipm
