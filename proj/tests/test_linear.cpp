#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "pjipm/linear.hpp"

using namespace pjipm;

namespace {

double central_error(const Trajectory& tr) {
  // e^{-t} W_-1 solves the local problem on |y| <= pi/2
  const Grid& g = tr.grid;
  double e = 0.0;
  for (const auto& s : tr.samples)
    for (int j = 0; j < g.size(); ++j)
      if (std::abs(g.x(j)) <= pi / 2) e = std::max(e, std::abs(s.a[j] - std::exp(-s.t) * w_minus1(g.x(j))));
  return e;
}

Trajectory run_minus1(int n) {
  const Grid g(n);
  StepPolicy p;
  p.sample_dt = 0.25;
  return evolve_linear(LinearVariant{}, GridFunction::sample(g, w_minus1), 2.0, p);
}

}  // namespace

TEST(Linear, MinusOneWeightDecaysExactly) {
  const double e512 = central_error(run_minus1(512));
  const double e1024 = central_error(run_minus1(1024));
  EXPECT_LT(e512, 1e-6);
  EXPECT_GT(e512 / e1024, 4.0);
}

TEST(Linear, ShiftFollowsClosedForm) {
  const Grid g(256);
  for (double xs : {0.0, 0.05, -0.3}) {
    LinearVariant v;
    v.x_star_0 = xs;
    const auto u0 = sample_on_window(g, xs, [](double y) { return std::pow(std::sin(y), 3); });
    const Trajectory tr = evolve_linear(v, u0, 4.0);
    const Series& X = tr.series.at("x_star");
    for (std::size_t k = 0; k < X.size(); ++k)
      EXPECT_NEAR(X.v[k], 2.0 * std::atan(std::exp(-X.t[k]) * std::tan(xs / 2)), 1e-10);
    EXPECT_EQ(tr.sample_shift.size(), tr.samples.size());
  }
}

TEST(Linear, LocalProblemPreservesSign) {
  const Grid g(256);
  const auto u0 = GridFunction::sample(g, [](double x) { return std::exp(-4.0 * (x - 1.0) * (x - 1.0)); });
  StepPolicy p;
  p.sample_dt = 0.5;
  const Trajectory tr = evolve_linear(LinearVariant{}, u0, 3.0, p);
  for (const auto& s : tr.samples) {
    double lo = 0.0;
    for (int j = 0; j < g.size(); ++j) lo = std::min(lo, s.a[j]);
    EXPECT_GE(lo, -1e-6 * sup_norm(s.a)) << "t = " << s.t;
  }
}

TEST(Linear, WeightedNormDecaysAtUnitRate) {
  const Grid g(512);
  for (LinearTag tag : {LinearTag::L0, LinearTag::L}) {
    LinearVariant v;
    v.tag = tag;
    StepPolicy p;
    p.sample_dt = 0.1;
    const auto u0 = sample_on_window(g, 0.0, [](double y) { return std::pow(std::sin(y), 3); });
    const Trajectory tr = evolve_linear(v, u0, 6.0, p);
    const WeightSpec w;
    EXPECT_DOUBLE_EQ(resolved_until(tr, w), 6.0);
    const DecayFit f = fit_decay(weighted_norm_series(tr, w), 1.0, 6.0);
    EXPECT_NEAR(f.rate, 1.0, 1e-3) << to_string(tag);
  }
}

TEST(Linear, ResolvedWindowIgnoresNonVanishingWeight) {
  const Grid g(128);
  LinearVariant v;
  v.x_star_0 = 0.05;
  const auto u0 = sample_on_window(g, 0.05, [](double y) { return std::pow(std::sin(y), 3); });
  const Trajectory tr = evolve_linear(v, u0, 2.0);
  WeightSpec w;
  w.kind = WeightKind::WTildeTheta;
  EXPECT_DOUBLE_EQ(resolved_until(tr, w), 2.0);
}

TEST(Linear, QuasiWithSteadyBackgroundMatchesL) {
  const Grid g(256);
  StepPolicy bp;
  bp.sample_dt = 0.05;
  const Trajectory bg = evolve_pj(GridFunction::sample(g, [](double x) { return std::cos(x); }), 3.0, bp);
  const auto u0 = sample_on_window(g, 0.0, [](double y) { return std::pow(std::sin(y), 3); });
  LinearVariant lv;
  lv.tag = LinearTag::L;
  LinearVariant qv;
  qv.tag = LinearTag::Quasi;
  qv.eta = std::make_shared<TrajectoryEta>(bg, 1.0);
  StepPolicy p;
  p.sample_dt = 0.5;
  const Trajectory a = evolve_linear(lv, u0, 2.5, p), b = evolve_linear(qv, u0, 2.5, p);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) EXPECT_LT(sup_norm(a.samples[k].a - b.samples[k].a), 1e-8);
}

TEST(Linear, DerivVariantKeepsSineStationaryWithoutBackground) {
  const Grid g(256);
  LinearVariant v;
  v.tag = LinearTag::Deriv;
  v.eta = std::make_shared<AnalyticEta>([](double, double) { return 0.0; }, [](double, double) { return 0.0; });
  const auto u0 = GridFunction::sample(g, [](double y) { return std::sin(y); });
  const Trajectory tr = evolve_linear(v, u0, 2.0);
  EXPECT_LT(sup_norm(tr.final_state().a - u0), 1e-8);
}

TEST(Linear, PreconditionsAreChecked) {
  const Grid g(64);
  const GridFunction u0(g, 0.0);
  LinearVariant q;
  q.tag = LinearTag::Quasi;
  EXPECT_THROW(evolve_linear(q, u0, 1.0), Error);
  LinearVariant far;
  far.x_star_0 = 1.6;
  EXPECT_THROW(evolve_linear(far, u0, 1.0), Error);
}

TEST(Linear, LargeShiftEscapes) {
  const Grid g(64);
  LinearVariant v;
  v.x_star_0 = 1.0;
  const Trajectory tr = evolve_linear(v, GridFunction(g, 0.0), 0.5);
  EXPECT_EQ(tr.status, RunStatus::ShiftEscape);
}
