#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pjipm/pj.hpp"
#include "pjipm/weights.hpp"

namespace pjipm {

/// Background perturbation eta(s, y) with G(s, y) = int_0^y eta, both extended 2pi-periodically.
class EtaField {
 public:
  virtual ~EtaField() = default;
  virtual void eval(double s, std::span<const double> y, std::span<double> eta, std::span<double> G) const = 0;
};

/// Closed-form eta for tests and synthetic backgrounds.
class AnalyticEta : public EtaField {
 public:
  using Fn = std::function<double(double s, double y)>;
  AnalyticEta(Fn eta, Fn primitive) : eta_(std::move(eta)), prim_(std::move(primitive)) {}
  void eval(double s, std::span<const double> y, std::span<double> eta, std::span<double> G) const override {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double yy = wrap_angle(y[i]);
      eta[i] = eta_(s, yy);
      G[i] = prim_(s, yy);
    }
  }

 private:
  Fn eta_, prim_;
};

/// eta(s, y) = a(s / mu0, x*(t) + y) / mu0 - cos y from a stored PJ run; linear in time between samples.
class TrajectoryEta : public EtaField {
 public:
  TrajectoryEta(const Trajectory& traj, double mu0, std::vector<double> shifts = {},
                const AccuracyPolicy& pol = {})
      : mu0_(mu0), pol_(pol) {
    require(mu0 > 0.0, "TrajectoryEta: mu0 must be positive");
    require(!traj.samples.empty(), "TrajectoryEta: empty trajectory");
    require(shifts.empty() || shifts.size() == traj.samples.size(), "TrajectoryEta: shift count mismatch");
    const Grid& g = traj.grid;
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
      const auto& smp = traj.samples[k];
      const double xs = shifts.empty() ? 0.0 : shifts[k];
      GridFunction eta(g);
      for (int j = 0; j < g.size(); ++j) {
        const double y = g.x(j);
        eta[j] = interpolate_periodic(smp.a, xs + y, pol) / mu0 - std::cos(y);
      }
      times_.push_back(mu0 * smp.t);
      prim_.push_back(antiderivative_from(eta, IntegrationBase::Zero, pol));
      eta_.push_back(std::move(eta));
    }
  }

  void eval(double s, std::span<const double> y, std::span<double> eta, std::span<double> G) const override {
    std::size_t k = 0;
    double w = 0.0;
    if (s >= times_.back()) {
      k = times_.size() - 1;
    } else if (s > times_.front()) {
      k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), s) - times_.begin()) - 1;
      w = (s - times_[k]) / (times_[k + 1] - times_[k]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double yy = wrap_angle(y[i]);
      double e = interpolate(eta_[k], yy, pol_), p = interpolate(prim_[k], yy, pol_);
      if (w > 0.0) {
        e = (1.0 - w) * e + w * interpolate(eta_[k + 1], yy, pol_);
        p = (1.0 - w) * p + w * interpolate(prim_[k + 1], yy, pol_);
      }
      eta[i] = e;
      G[i] = p;
    }
  }

  double s_end() const { return times_.back(); }

 private:
  double mu0_;
  AccuracyPolicy pol_;
  std::vector<double> times_;
  std::vector<GridFunction> eta_, prim_;
};

enum class LinearTag { L0, L, Quasi, Deriv };

inline const char* to_string(LinearTag t) {
  switch (t) {
    case LinearTag::L0: return "L0";
    case LinearTag::L: return "L";
    case LinearTag::Quasi: return "QUASI";
    case LinearTag::Deriv: return "DERIV";
  }
  return "UNKNOWN";
}

struct LinearVariant {
  LinearTag tag = LinearTag::L0;
  std::shared_ptr<const EtaField> eta;
  double x_star_0 = 0.0;
  bool deriv_forcing = true;  // DERIV: include the eta-only source terms

  void validate() const {
    require(std::abs(x_star_0) < pi / 2.0, "|x_star_0| must be below pi/2");
    const bool needs_eta = tag == LinearTag::Quasi || tag == LinearTag::Deriv;
    require(!needs_eta || eta, "QUASI and DERIV variants need an eta source");
  }
};

/// Samples f(y) on the reference grid for the window [-pi - x*, pi - x*]: node j holds f(x_j - x*).
inline GridFunction sample_on_window(const Grid& g, double x_star, const std::function<double(double)>& f) {
  return GridFunction::sample(g, [&](double z) { return f(z - x_star); });
}

/// Linear problems on the moving window. The window is mapped to the fixed reference
/// interval z = y + x*(t), so the shift becomes an extra transport term.
inline Trajectory evolve_linear(const LinearVariant& variant, const GridFunction& u0, double horizon,
                                const StepPolicy& policy = {}) {
  variant.validate();
  policy.validate();
  require(u0.all_finite(), "initial data must be finite");
  const Grid& g = u0.grid();
  const int m = g.size();
  const auto& pol = policy.accuracy;
  const UpwindOperator d1(g, pol);
  const CumulativeQuadrature quad(g, pol);
  const bool nonlocal = variant.tag != LinearTag::L0 && variant.tag != LinearTag::Deriv;
  const bool background = variant.tag == LinearTag::Quasi || variant.tag == LinearTag::Deriv;

  std::vector<double> yv(m), eta(m), G(m), vel(m), ux(m), F(m);
  double vmax_last = 1.0;
  auto shift_rate = [&](double s, double xs) {
    double r = -std::sin(xs);
    if (background) {
      const double yb[1] = {-pi - xs};
      double e[1], p[1];
      variant.eta->eval(s, yb, e, p);
      r -= p[0];
    }
    return r;
  };

  FlatRhs f = [&](double s, std::span<const double> st, std::span<double> ds) {
    const double xs = st[m];
    const double xdot = shift_rate(s, xs);
    std::span<const double> u = st.first(m);
    for (int j = 0; j < m; ++j) yv[j] = g.x(j) - xs;
    if (background) variant.eta->eval(s, yv, eta, G);
    for (int j = 0; j < m; ++j) vel[j] = std::sin(yv[j]) + (background ? G[j] : 0.0) + xdot;
    vmax_last = max_abs(vel);
    d1.apply(u, vel, ux);
    double F0 = 0.0;
    if (nonlocal) {
      quad.apply(u, F);
      F0 = interpolate(F, g, xs, pol);
    }
    for (int j = 0; j < m; ++j) {
      const double y = yv[j];
      double r = -vel[j] * ux[j];
      if (variant.tag == LinearTag::Deriv) {
        r += (eta[j] + std::cos(y)) * u[j];
        if (variant.deriv_forcing) r += std::cos(y) * G[j] - std::sin(y) * eta[j];
      } else {
        r += 2.0 * std::cos(y) * u[j];
        if (nonlocal) r += std::sin(y) * (F[j] - F0);
      }
      ds[j] = r;
    }
    ds[m] = xdot;
  };

  Trajectory traj;
  traj.grid = g;
  std::vector<double> st(m + 1);
  std::copy(u0.values().begin(), u0.values().end(), st.begin());
  st[m] = variant.x_star_0;
  auto record = [&](double s) {
    traj.series["x_star"].push(s, st[m]);
    traj.series["sup"].push(s, max_abs(std::span<const double>(st.data(), m)));
  };
  auto store = [&](double s) {
    traj.samples.push_back({s, GridFunction(g, std::vector<double>(st.begin(), st.begin() + m))});
    traj.sample_shift.push_back(st[m]);
  };
  double s = 0.0;
  record(s);
  store(s);
  {
    std::vector<double> tmp(m + 1);
    f(0.0, st, tmp);
  }
  double next_sample = policy.sample_dt;
  const double eps = 1e-12 * std::max(1.0, horizon);
  Rk4Workspace ws;
  while (s < horizon - eps) {
    const double dt_cfl = std::min(policy.dt_max, policy.cfl * g.h() / std::max(1.0, vmax_last));
    if (dt_cfl < policy.dt_min) {
      traj.status = RunStatus::NumericalFailure;
      traj.message = "time step fell below dt_min";
      break;
    }
    double dt = dt_cfl;
    bool hit = false;
    if (policy.sample_dt > 0.0 && s + dt >= next_sample - eps) {
      dt = next_sample - s;
      hit = true;
    }
    if (s + dt > horizon - eps) {
      dt = horizon - s;
      hit = true;
    }
    const std::vector<double> last = st;
    rk4_step(f, s, st, dt, ws);
    ++traj.steps;
    if (!all_finite(st)) {
      st = last;
      traj.status = RunStatus::NumericalFailure;
      traj.message = "non-finite values at s = " + format_double(s + dt);
      break;
    }
    s = (hit && policy.sample_dt > 0.0 && s + dt >= next_sample - eps) ? next_sample : s + dt;
    if (s > horizon - eps) s = horizon;
    record(s);
    if (policy.sample_dt == 0.0 || hit) {
      store(s);
      if (policy.sample_dt > 0.0)
        while (next_sample <= s + eps) next_sample += policy.sample_dt;
    }
    if (std::abs(st[m]) > pi / 4.0) {
      traj.status = RunStatus::ShiftEscape;
      traj.message = "domain shift left |x*| <= pi/4";
      break;
    }
  }
  if (traj.samples.back().t != s) store(s);
  return traj;
}

/// Weighted sup norm of every sample, measured in its shifted window.
inline Series weighted_norm_series(const Trajectory& traj, const WeightSpec& w) {
  Series out;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const double shift = traj.sample_shift.empty() ? 0.0 : traj.sample_shift[k];
    out.push(traj.samples[k].t, weighted_sup(traj.samples[k].a, w, shift));
  }
  return out;
}

/// Last sample time before the value at the weight's zero, seen through the leading-order
/// weight at distance h, exceeds frac * weighted sup. That value obeys d/dt u(0) = 2 u(0)
/// exactly, so a roundoff seed at an off-node zero eventually swamps the weighted norm.
inline double resolved_until(const Trajectory& traj, const WeightSpec& w, double frac = 0.01,
                             const AccuracyPolicy& pol = {}) {
  require(!traj.samples.empty(), "resolved_until: empty trajectory");
  require(frac > 0.0, "resolved_until: frac must be positive");
  if (!w.vanishes_at_zero()) return traj.samples.back().t;
  const double scale = w.leading_coeff() * std::pow(traj.grid.h(), w.leading_power());
  double last = traj.samples.front().t;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const double shift = traj.sample_shift.empty() ? 0.0 : traj.sample_shift[k];
    const auto& a = traj.samples[k].a;
    const double floor = std::abs(interpolate(a, shift, pol)) / scale;
    if (floor > frac * weighted_sup(a, w, shift)) break;
    last = traj.samples[k].t;
  }
  return last;
}

}  // namespace pjipm
