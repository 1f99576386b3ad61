#include <cmath>

#include <gtest/gtest.h>

#include "pjipm/characteristics.hpp"

using namespace pjipm;

namespace {

Trajectory steady_cos(double T) {
  const Grid g(256);
  StepPolicy p;
  p.sample_dt = 0.05;
  return evolve_pj(GridFunction::sample(g, [](double x) { return std::cos(x); }), T, p);
}

}  // namespace

TEST(Characteristics, SteadyCosineFlowHasClosedForm) {
  // dX/dt = sin X
  const Trajectory tr = steady_cos(2.0);
  for (double z0 : {-2.0, -0.5, 0.0, 0.3, 1.0}) {
    const CharPath p = trace(tr, z0);
    ASSERT_EQ(p.samples.size(), tr.samples.size());
    for (const auto& s : p.samples) {
      const double X = 2.0 * std::atan(std::exp(s.t) * std::tan(z0 / 2));
      EXPECT_NEAR(s.X, X, 1e-8) << "z0=" << z0 << " t=" << s.t;
      EXPECT_NEAR(s.a, std::cos(X), 1e-8);
      EXPECT_NEAR(s.dxa, -std::sin(X), 1e-7);
    }
  }
}

TEST(Characteristics, EndpointsAreFixed) {
  const Trajectory tr = steady_cos(1.0);
  for (double z0 : {-pi, pi}) {
    const CharPath p = trace(tr, z0);
    for (const auto& s : p.samples) EXPECT_NEAR(s.X, z0, 1e-10);
  }
}

TEST(Characteristics, RejectsOutOfDomainStart) {
  const Trajectory tr = steady_cos(0.5);
  EXPECT_THROW(trace(tr, 3.5), Error);
}

TEST(Characteristics, ArgmaxIsTransportedOnPerturbedRun) {
  const Grid g(256);
  StepPolicy p;
  p.sample_dt = 0.05;
  const auto a0 = GridFunction::sample(g, [](double x) { return std::cos(x) + 0.01 * std::cos(2 * x); });
  const Trajectory tr = evolve_pj(a0, 4.0, p);
  const TransportedReport r = transported_report(tr, 0.0);
  EXPECT_TRUE(r.tracks_max);
  EXPECT_LT(r.dxa_drift, 1e-6);
  EXPECT_LT(r.dxxa_drift, 1e-3);
  EXPECT_LT(r.argmax_gap, 1e-6);
  EXPECT_LT(r.argmax_distance, 1e-6);
}

TEST(Characteristics, NonCriticalStartIsRejected) {
  const Trajectory tr = steady_cos(0.5);
  EXPECT_THROW(transported_report(tr, 1.0), Error);
}

TEST(Characteristics, CsvHasHeaderAndOneRowPerSample) {
  const Trajectory tr = steady_cos(0.5);
  const CharPath p = trace(tr, 0.2);
  const std::string path = ::testing::TempDir() + "char.csv";
  write_csv(p, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,X,a,dxa,dxxa");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, p.samples.size());
}
