#include <cmath>

#include <gtest/gtest.h>

#include "pjipm/instability.hpp"

using namespace pjipm;

namespace {

CuspSpec spec_with(double eps, double sigma, double r0) {
  CuspSpec s;
  s.epsilon = eps;
  s.sigma = sigma;
  s.support_radius = r0;
  return s;
}

}  // namespace

TEST(CuspData, IsEvenMeanFreeWithMaximumAtOrigin) {
  const Grid g(4096);
  const CuspData d = build_cusp_data(spec_with(1.0, 1.0, 0.1), g);
  const int n = g.n();
  for (int j = 0; j <= n / 2; ++j) EXPECT_NEAR(d.a0[j], d.a0[n - j], 1e-14);
  EXPECT_LE(std::abs(mean(d.a0)), 1e-10);
  EXPECT_EQ(argmax_node(d.a0), n / 2);
  EXPECT_LE(d.holder_norm, 1.0);
  EXPECT_GT(d.holder_quotient, 0.0);
}

TEST(CuspData, LinearCuspKeepsMaximumForSmallSupport) {
  const Grid g(4096);
  for (double r0 : {0.05, 0.1, 0.2}) {
    const CuspData d = build_cusp_data(spec_with(2.0, 10.0, r0), g);
    EXPECT_EQ(argmax_node(d.a0), g.n() / 2) << "r0 = " << r0;
    EXPECT_LE(std::abs(mean(d.a0)), 1e-10) << "r0 = " << r0;
  }
}

TEST(CuspData, HolderBoundHoldsForHalfSigma) {
  // eps = 1, r0 = 0.1, sigma = 0.5
  const Grid g(4096);
  EXPECT_NO_THROW(build_cusp_data(spec_with(1.0, 0.5, 0.1), g));
}

TEST(CuspData, TightSigmaReportsMeasuredNorm) {
  const Grid g(1024);
  try {
    build_cusp_data(spec_with(1.0, 0.05, 0.1), g);
    FAIL() << "expected CONSTRUCTION_FAILED";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstructionFailed);
    EXPECT_NE(std::string(e.what()).find("exceeds sigma"), std::string::npos);
  }
}

TEST(CuspData, InvalidSpecIsRejected) {
  const Grid g(256);
  EXPECT_THROW(build_cusp_data(spec_with(0.0, 1.0, 0.1), g), Error);
  EXPECT_THROW(build_cusp_data(spec_with(1.0, 1.0, 0.5), g), Error);
}

TEST(Instability, ZeroOffsetIsTrivial) {
  StepPolicy p;
  p.sample_dt = 0.5;
  const InstabilityReport r = instability_experiment(spec_with(1.0, 1.0, 0.1), 0.0, 1.0, p, 1024);
  EXPECT_EQ(r.status, InstabilityStatus::Trivial);
  for (double v : r.D.v) EXPECT_EQ(v, 0.0);
}

TEST(Instability, PreconditionsOnOffset) {
  StepPolicy p;
  InstabilityOptions opt;
  opt.refine = false;
  EXPECT_THROW(instability_experiment(spec_with(1.0, 1.0, 0.1), 0.2, 1.0, p, 1024, opt), Error);
  // 4h = 0.0245 at n = 1024
  EXPECT_THROW(instability_experiment(spec_with(1.0, 1.0, 0.1), 0.01, 1.0, p, 1024, opt), Error);
}

TEST(Instability, ExponentialIdentityAndGrowth) {
  StepPolicy p;
  p.sample_dt = 1.0;
  InstabilityOptions opt;
  opt.refine = false;
  const InstabilityReport r = instability_experiment(spec_with(1.0, 1.0, 0.1), 1e-2, 5.0, p, 4096, opt);
  ASSERT_EQ(r.status, InstabilityStatus::Ok) << r.message;
  EXPECT_LE(r.identity_residual, 1e-3);
  EXPECT_LE(r.rate_rel_error, 0.15);
  EXPECT_GE(r.growth_factor, 10.0);
  EXPECT_TRUE(r.z_within_kappa);
  EXPECT_GT(r.horizon_t0, 0.0);
  // dz/dt = A(z) > 0 near the origin for z > 0, so the point drifts away from the maximum
  for (std::size_t k = 1; k < r.z.size(); ++k) EXPECT_GE(r.z.v[k], r.z.v[k - 1]);
}
