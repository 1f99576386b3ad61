#include <cmath>

#include <gtest/gtest.h>

#include "pjipm/pj.hpp"

using namespace pjipm;

namespace {

GridFunction perturbed(const Grid& g, double amp = 0.01) {
  return GridFunction::sample(g, [amp](double x) { return std::cos(x) + amp * std::cos(2.0 * x); });
}

}  // namespace

TEST(Pj, RhsVanishesOnSteadyStates) {
  const Grid g(512);
  for (int k = 1; k <= 3; ++k) {
    const auto a = GridFunction::sample(g, [k](double x) { return std::cos(k * x); });
    EXPECT_LT(sup_norm(pj_rhs(a)), 1e-9) << "cos " << k << "x";
  }
  const auto s = GridFunction::sample(g, [](double x) { return std::sin(1.5 * x); });
  EXPECT_LT(sup_norm(pj_rhs(s)), 1e-9);
}

TEST(Pj, RhsMatchesHandComputedTendency) {
  // a = cos x + e cos 2x: A = sin x + (e/2) sin 2x, (1/pi) int a^2 = 1 + e^2
  const Grid g(512);
  const double e = 0.3;
  const auto a = perturbed(g, e);
  const GridFunction r = pj_rhs(a);
  double err = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    const double av = std::cos(x) + e * std::cos(2 * x), ax = -std::sin(x) - 2 * e * std::sin(2 * x);
    const double A = std::sin(x) + 0.5 * e * std::sin(2 * x);
    err = std::max(err, std::abs(r[j] - (-A * ax + av * av - (1 + e * e))));
  }
  EXPECT_LT(err, 1e-10);
}

TEST(Pj, RejectsNonMeanFreeData) {
  const Grid g(64);
  const auto a = GridFunction::sample(g, [](double x) { return std::cos(x) + 0.1; });
  EXPECT_THROW(pj_rhs(a), Error);
  EXPECT_THROW(evolve_pj(a, 1.0), Error);
}

TEST(Pj, SteadyStateDoesNotDrift) {
  const Grid g(256);
  const auto a0 = GridFunction::sample(g, [](double x) { return std::cos(2 * x); });
  StepPolicy p;
  p.sample_dt = 0.5;
  const Trajectory tr = evolve_pj(a0, 3.0, p);
  ASSERT_EQ(tr.status, RunStatus::Completed);
  EXPECT_LT(sup_norm(tr.final_state().a - a0), 1e-8);
}

TEST(Pj, MeanStaysZero) {
  const Grid g(256);
  StepPolicy p;
  p.sample_dt = 0.5;
  const Trajectory tr = evolve_pj(perturbed(g, 0.2), 3.0, p);
  for (const auto& s : tr.samples) EXPECT_LT(std::abs(mean(s.a)), 1e-12) << "t = " << s.t;
}

TEST(Pj, SamplesLandOnRequestedTimes) {
  const Grid g(64);
  StepPolicy p;
  p.sample_dt = 0.25;
  const Trajectory tr = evolve_pj(perturbed(g), 1.0, p);
  ASSERT_EQ(tr.samples.size(), 5u);
  for (std::size_t k = 0; k < tr.samples.size(); ++k) EXPECT_NEAR(tr.samples[k].t, 0.25 * k, 1e-12);
}

TEST(Pj, ScalingSymmetryLambdaTwo) {
  // lambda a(lambda t, x) solves the equation whenever a does
  const Grid g(256);
  const double lambda = 2.0, T = 2.0;
  StepPolicy p;
  p.sample_dt = 0.0;
  p.dt_max = 0.005;
  const auto a0 = perturbed(g, 0.1);
  const Trajectory slow = evolve_pj(a0, T, p);
  StepPolicy q = p;
  q.dt_max = p.dt_max / lambda;
  const Trajectory fast = evolve_pj(lambda * a0, T / lambda, q);
  EXPECT_LT(sup_norm(fast.final_state().a - lambda * slow.final_state().a), 1e-9);
}

TEST(Pj, TemporalConvergenceIsFourthOrder) {
  const Grid g(256);
  const auto a0 = perturbed(g, 0.3);
  auto run = [&](double dt) {
    StepPolicy p;
    p.cfl = 10.0;  // dt_max decides the step
    p.dt_max = dt;
    p.sample_dt = 0.0;
    return evolve_pj(a0, 1.0, p).final_state().a;
  };
  const GridFunction ref = run(0.00125);
  const double e1 = sup_norm(run(0.01) - ref), e2 = sup_norm(run(0.005) - ref);
  EXPECT_GE(e1 / e2, 12.0) << "errors " << e1 << " " << e2;
}

TEST(Pj, PerturbedCosineRelaxesToScaledCosine) {
  const Grid g(256);
  StepPolicy p;
  p.sample_dt = 1.0;
  const Trajectory tr = evolve_pj(perturbed(g), 12.0, p);
  const auto limit = GridFunction::sample(g, [](double x) { return 1.04 * std::cos(x); });
  const double e0 = sup_norm(tr.samples.front().a - limit), e1 = sup_norm(tr.final_state().a - limit);
  EXPECT_LT(e1, 0.01 * e0);
}

TEST(Pj, BkmBoundDominatesC3Norm) {
  const Grid g(256);
  StepPolicy p;
  p.sample_dt = 0.5;
  const Trajectory tr = evolve_pj(perturbed(g, 0.2), 4.0, p);
  const Series bound = bkm_bound(tr, 1.0);
  for (const auto& s : tr.samples) EXPECT_LE(ck_norm(s.a, 3), bound.at(s.t)) << "t = " << s.t;
}

TEST(Pj, ForcingHookScalesSolution) {
  // with theta(t) = c the forced equation is solved by e^{ct} times the unforced
  // solution taken in the time variable (e^{ct} - 1) / c
  const Grid g(128);
  const double c = 0.3, T = 1.0;
  StepPolicy p;
  p.sample_dt = 0.0;
  p.dt_max = 0.002;
  EvolveOptions o;
  o.forcing = [c](double) { return c; };
  const auto a0 = perturbed(g, 0.2);
  const Trajectory forced = evolve_pj(a0, T, p, o);
  const Trajectory plain = evolve_pj(a0, (std::exp(c * T) - 1.0) / c, p);
  EXPECT_LT(sup_norm(forced.final_state().a - std::exp(c * T) * plain.final_state().a), 1e-8);
}

TEST(Pj, StopPredicateEndsRunEarly) {
  const Grid g(64);
  EvolveOptions o;
  o.stop = [](double t) { return t >= 0.5; };
  const Trajectory tr = evolve_pj(perturbed(g), 5.0, {}, o);
  EXPECT_EQ(tr.status, RunStatus::Completed);
  EXPECT_LT(tr.final_state().t, 0.6);
}

TEST(Pj, SupCapFlagsBlowupSuspicion) {
  const Grid g(64);
  StepPolicy p;
  p.sup_cap = 1.005;
  const Trajectory tr = evolve_pj(perturbed(g), 5.0, p);
  EXPECT_EQ(tr.status, RunStatus::BlowupSuspected);
}
