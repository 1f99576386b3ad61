#include <cmath>

#include <gtest/gtest.h>

#include "pjipm/ipm.hpp"

using namespace pjipm;

TEST(Ipm, RhsOfCosineIsMemoryFreeSquare) {
  // b = cos, memory 0: b_tau = -B b_x + b^2 - (1/pi) int b^2 = sin^2 + cos^2 - 1 = 0
  const Grid g(256);
  const auto b = GridFunction::sample(g, [](double x) { return std::cos(x); });
  const auto [db, dmem] = ipm_rhs(b, 0.0);
  EXPECT_LT(sup_norm(db), 1e-10);
  EXPECT_NEAR(dmem, 1.0, 1e-12);
}

class ExplicitBlowup : public ::testing::TestWithParam<double> {};

TEST_P(ExplicitBlowup, BlowupTimeIsPiOverTwoMu) {
  const double mu = GetParam();
  const Grid g(256);
  const auto b0 = GridFunction::sample(g, [mu](double x) { return mu * std::cos(x); });
  const IpmTrajectory tr = evolve_ipm(b0, 4.0);
  EXPECT_EQ(tr.status, RunStatus::BlowupSuspected);
  const BlowupReport rep = detect_blowup(tr);
  ASSERT_EQ(rep.status, BlowupStatus::Blowup);
  EXPECT_NEAR(rep.tau_star, pi / (2.0 * mu), 1e-3);
  EXPECT_NEAR(rep.rate_coefficient, 1.0, 0.02);
  // sup b = mu sec(mu tau) away from the singularity
  const Series& sup = tr.series.at("sup");
  for (std::size_t k = 0; k < sup.size(); k += 50)
    if (mu * sup.t[k] < 1.4) EXPECT_NEAR(sup.v[k] * std::cos(mu * sup.t[k]) / mu, 1.0, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Amplitudes, ExplicitBlowup, ::testing::Values(1.0, 2.0));

TEST(Ipm, ZeroDataDoesNotBlowUp) {
  const Grid g(64);
  const IpmTrajectory tr = evolve_ipm(GridFunction(g, 0.0), 1.0);
  EXPECT_EQ(detect_blowup(tr).status, BlowupStatus::NoBlowup);
}

TEST(Ipm, NuSatisfiesItsOdeAlongTheRun) {
  // d nu / d tau = nu * memory, nu(0) = nu0
  const Grid g(128);
  IpmPolicy p;
  p.nu0 = 1.5;
  const auto b0 = GridFunction::sample(g, [](double x) { return std::cos(x); });
  const IpmTrajectory tr = evolve_ipm(b0, 1.0, p);
  // for b = sec(tau) cos: memory = tan(tau), nu = nu0 sec(tau)
  const Series& nu = tr.series.at("nu");
  for (std::size_t k = 0; k < nu.size(); k += 20) EXPECT_NEAR(nu.v[k] * std::cos(nu.t[k]), 1.5, 1e-7);
}

TEST(Ipm, BridgeToPjSolvesPj) {
  const Grid g(256);
  const auto b0 = GridFunction::sample(g, [](double x) { return std::cos(x) + 0.05 * std::cos(2 * x); });
  IpmPolicy p;
  p.sample_dt = 0.02;
  const IpmTrajectory tr = evolve_ipm(b0, 1.2, p);
  const Trajectory pj = to_pj(tr);
  ASSERT_GE(pj.samples.size(), 10u);
  for (std::size_t k = 1; k < pj.samples.size(); ++k) EXPECT_GT(pj.samples[k].t, pj.samples[k - 1].t);
  EXPECT_LT(pj_residual(pj), 1e-3);
}

TEST(Ipm, ReconstructNuOnSteadyCosineIsCosh) {
  // (1/pi) int cos^2 = 1, so nu'' = nu with nu(0) = 1: nu = cosh t
  const Grid g(128);
  StepPolicy p;
  p.sample_dt = 0.5;
  const Trajectory tr = evolve_pj(GridFunction::sample(g, [](double x) { return std::cos(x); }), 8.0, p);
  const NuReconstruction nr = reconstruct_nu(tr, 1.0);
  for (std::size_t k = 0; k < nr.nu.size(); k += 10) EXPECT_NEAR(nr.nu.v[k] / std::cosh(nr.nu.t[k]), 1.0, 1e-7);
  EXPECT_NEAR(nr.mu_star, 1.0, 1e-3);
  EXPECT_NEAR(nr.nu_star, 0.5, 5e-3);
}

TEST(Ipm, RejectsNonMeanFreeData) {
  const Grid g(64);
  EXPECT_THROW(evolve_ipm(GridFunction(g, 1.0), 1.0), Error);
}
