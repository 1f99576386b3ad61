#include <cmath>

#include <gtest/gtest.h>

#include "pjipm/corpus.hpp"
#include "pjipm/weights.hpp"

using namespace pjipm;

TEST(Weights, MinusOneWeightIsCubicAtOrigin) {
  for (double y : {1e-3, -1e-2, 5e-2}) EXPECT_NEAR(w_minus1(y) / (0.25 * std::pow(std::abs(y), 3)), 1.0, y * y);
}

TEST(Weights, MinusOneWeightJoinsPlateauC1) {
  const double e = kPlateauEdge;
  EXPECT_NEAR(w_minus1(e - 1e-12), kPlateau, 1e-11);
  EXPECT_DOUBLE_EQ(w_minus1(e + 1e-9), kPlateau);
  EXPECT_NEAR(w_minus1_derivative(e - 1e-9), 0.0, 1e-8);
  EXPECT_DOUBLE_EQ(w_minus1(pi), kPlateau);
}

TEST(Weights, WeightsAreEven) {
  for (WeightKind k : {WeightKind::WMinus1, WeightKind::WTildeTheta, WeightKind::WTheta, WeightKind::Omega}) {
    WeightSpec w;
    w.kind = k;
    for (double y : {0.1, 0.7, 2.5}) {
      EXPECT_DOUBLE_EQ(weight_eval(w, y), weight_eval(w, -y)) << to_string(k);
      EXPECT_NEAR(weight_derivative(w, y), -weight_derivative(w, -y), 1e-12 * std::abs(weight_derivative(w, y)))
          << to_string(k);
    }
  }
}

TEST(Weights, DerivativesMatchCenteredDifferences) {
  for (WeightKind k : {WeightKind::WMinus1, WeightKind::WTildeTheta, WeightKind::WTheta, WeightKind::Omega}) {
    WeightSpec w;
    w.kind = k;
    for (double y : {-2.9, -1.3, -0.4, 0.2, 0.9, 1.7, 2.3}) {
      const double h = 1e-6;
      const double fd = (weight_eval(w, y + h) - weight_eval(w, y - h)) / (2 * h);
      EXPECT_NEAR(weight_derivative(w, y), fd, 1e-6 * std::max(1.0, std::abs(fd))) << to_string(k) << " y=" << y;
    }
  }
}

TEST(Weights, ThetaWeightIsProductOfFactors) {
  WeightSpec w;
  w.theta = 0.25;
  w.C = 2.0;
  for (double y : {-1.0, 0.3, 2.8}) EXPECT_DOUBLE_EQ(weight_eval(w, y), w_minus1(y) * std::exp(8.0 * std::abs(y)));
}

TEST(WeightedSup, WeightOverItselfIsOne) {
  const Grid g(256);
  WeightSpec w;
  w.kind = WeightKind::WMinus1;
  const auto f = GridFunction::sample(g, w_minus1);
  // inside the exclusion radius W <= |y|^3/4, so the leading-order ratio stays below 1
  EXPECT_NEAR(weighted_sup(f, w), 1.0, 1e-12);
}

TEST(WeightedSup, ExclusionRulesCountNodes) {
  const Grid g(256);
  WeightSpec w;
  w.kind = WeightKind::WMinus1;
  w.exclusion_radius = 3.5 * g.h();
  const auto f = GridFunction::sample(g, [](double x) { return std::pow(std::sin(x), 3); });
  const WeightedSup lead = weighted_sup_detail(f, w);
  EXPECT_EQ(lead.skipped_nodes, 1);
  EXPECT_EQ(lead.leading_nodes, 6);
  w.rule = ExclusionRule::Skip;
  const WeightedSup skip = weighted_sup_detail(f, w);
  EXPECT_EQ(skip.skipped_nodes, 7);
  EXPECT_EQ(skip.leading_nodes, 0);
  EXPECT_LE(skip.value, lead.value);
}

TEST(WeightedSup, NonVanishingWeightExcludesNothing) {
  const Grid g(128);
  WeightSpec w;
  w.kind = WeightKind::WTildeTheta;
  const WeightedSup d = weighted_sup_detail(GridFunction(g, 1.0), w);
  EXPECT_EQ(d.skipped_nodes + d.leading_nodes, 0);
  EXPECT_DOUBLE_EQ(d.value, 1.0);
  EXPECT_DOUBLE_EQ(d.at, g.x(g.n() / 2));
}

TEST(WeightedSup, ShiftMovesTheWeight) {
  const Grid g(256);
  WeightSpec w;
  w.kind = WeightKind::WMinus1;
  const double s = 8 * g.h();
  const auto f = GridFunction::sample(g, [s](double x) { return w_minus1(x - s); });
  EXPECT_NEAR(weighted_sup(f, w, s), 1.0, 1e-12);
  EXPECT_GT(weighted_sup(f, w, 0.0), 10.0);
}

TEST(Contraction, CorpusRatiosStayBelowThreshold) {
  const Grid g(512);
  const WeightSpec w;
  const auto corpus = contraction_corpus(g);
  ASSERT_EQ(corpus.size(), 20u);
  for (const auto& [name, f] : corpus) EXPECT_LE(nonlocal_contraction_ratio(f, w), 0.3 * 1.05) << name;
}

TEST(Contraction, ZeroFunctionIsRejected) {
  const Grid g(64);
  EXPECT_THROW(nonlocal_contraction_ratio(GridFunction(g, 0.0), WeightSpec{}), Error);
}

TEST(DecayFit, RecoversExactExponential) {
  Series s;
  for (int k = 0; k <= 100; ++k) s.push(0.1 * k, 3.0 * std::exp(-0.7 * 0.1 * k));
  const DecayFit d = fit_decay(s, 1.0, 9.0);
  EXPECT_NEAR(d.rate, 0.7, 1e-12);
  EXPECT_NEAR(d.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(d.theta_prime, 0.3, 1e-12);
  EXPECT_LT(d.residual, 1e-12);
  EXPECT_EQ(d.samples, 81u);
}

TEST(DecayFit, RejectsShortOrNonPositiveWindows) {
  Series s;
  for (int k = 0; k <= 20; ++k) s.push(k, k == 10 ? 0.0 : std::exp(-double(k)));
  EXPECT_THROW(fit_decay(s, 0.0, 5.0), Error);
  EXPECT_THROW(fit_decay(s, 0.0, 20.0), Error);
  EXPECT_NO_THROW(fit_decay(s, 11.0, 20.0));
}
