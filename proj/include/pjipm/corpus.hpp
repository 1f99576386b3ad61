#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pjipm/steady.hpp"
#include "pjipm/weights.hpp"

namespace pjipm {

struct SteadyCase {
  std::string label;
  SteadyFamily family = SteadyFamily::NotSteady;
  int k = 0;
  double mu = 0.0;
  GridFunction a;
};

/// 30 members: cos(kx), k = 1..5, and sin((2k+1)x/2), k = 0..4, three amplitudes each.
/// seed 0 uses fixed amplitudes; otherwise |mu| is drawn from [0.2, 5] with a random sign.
inline std::vector<SteadyCase> steady_family_corpus(const Grid& g, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.2, 5.0);
  std::bernoulli_distribution neg(0.5);
  const double fixed[3] = {0.5, -2.0, 3.0};
  std::vector<SteadyCase> out;
  for (SteadyFamily fam : {SteadyFamily::CosK, SteadyFamily::SinHalfK}) {
    for (int i = 0; i < 5; ++i) {
      const int k = fam == SteadyFamily::CosK ? i + 1 : i;
      for (int r = 0; r < 3; ++r) {
        const double mu = seed == 0 ? fixed[r] : (neg(rng) ? -1.0 : 1.0) * mag(rng);
        SteadyCase c;
        c.label = std::string(to_string(fam)) + " k=" + std::to_string(k) + " mu=" + format_double(mu);
        c.family = fam;
        c.k = k;
        c.mu = mu;
        c.a = GridFunction::sample(g, [&](double x) { return mu * steady_profile(fam, k, x); });
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

/// 10 mean-free functions that solve no stationary equation.
inline std::vector<std::pair<std::string, GridFunction>> non_steady_corpus(const Grid& g,
                                                                           const AccuracyPolicy& pol = {}) {
  const std::vector<std::pair<std::string, std::function<double(double)>>> fs = {
      {"cos x + 0.1 sin 2x", [](double x) { return std::cos(x) + 0.1 * std::sin(2 * x); }},
      {"cos x + 0.01 cos 2x", [](double x) { return std::cos(x) + 0.01 * std::cos(2 * x); }},
      {"cos x + 1e-3 cos 3x", [](double x) { return std::cos(x) + 1e-3 * std::cos(3 * x); }},
      {"sin x", [](double x) { return std::sin(x); }},
      {"sin 2x", [](double x) { return std::sin(2 * x); }},
      {"x", [](double x) { return x; }},
      {"sin^3 x", [](double x) { return std::pow(std::sin(x), 3); }},
      {"sin(x/2) + 0.1 sin(3x/2)", [](double x) { return std::sin(0.5 * x) + 0.1 * std::sin(1.5 * x); }},
      {"exp(cos x)", [](double x) { return std::exp(std::cos(x)); }},
      {"cos 2x + 0.3 cos 3x", [](double x) { return std::cos(2 * x) + 0.3 * std::cos(3 * x); }},
  };
  std::vector<std::pair<std::string, GridFunction>> out;
  for (const auto& [name, f] : fs) {
    GridFunction a = GridFunction::sample(g, f);
    a += -mean(a, pol);
    out.emplace_back(name, std::move(a));
  }
  return out;
}

/// 20 functions vanishing at least cubically at 0, for the nonlocal contraction check.
inline std::vector<std::pair<std::string, GridFunction>> contraction_corpus(const Grid& g) {
  const std::vector<std::pair<std::string, std::function<double(double)>>> fs = {
      {"sin^3", [](double x) { return std::pow(std::sin(x), 3); }},
      {"x^3", [](double x) { return x * x * x; }},
      {"|x|^3", [](double x) { return std::abs(x * x * x); }},
      {"x^4", [](double x) { return x * x * x * x; }},
      {"sin^3 cos", [](double x) { return std::pow(std::sin(x), 3) * std::cos(x); }},
      {"sin^3 cos 2x", [](double x) { return std::pow(std::sin(x), 3) * std::cos(2 * x); }},
      {"sin^4", [](double x) { return std::pow(std::sin(x), 4); }},
      {"(1 - cos) sin", [](double x) { return (1 - std::cos(x)) * std::sin(x); }},
      {"W_minus1", [](double x) { return w_minus1(x); }},
      {"W_theta", [](double x) { return weight_eval(WeightSpec{}, x); }},
      {"x^3 exp(-x^2)", [](double x) { return x * x * x * std::exp(-x * x); }},
      {"x^3 / (1 + x^2)", [](double x) { return x * x * x / (1 + x * x); }},
      {"sin^3 exp(x)", [](double x) { return std::pow(std::sin(x), 3) * std::exp(x); }},
      {"x^3 + x^4", [](double x) { return x * x * x + x * x * x * x; }},
      {"sin^5", [](double x) { return std::pow(std::sin(x), 5); }},
      {"x^3 cos 3x", [](double x) { return x * x * x * std::cos(3 * x); }},
      {"sin^2 sin 2x", [](double x) { return std::pow(std::sin(x), 2) * std::sin(2 * x); }},
      {"tanh^3", [](double x) { return std::pow(std::tanh(x), 3); }},
      {"x - sin x", [](double x) { return x - std::sin(x); }},
      {"sin^3 (2 + cos)", [](double x) { return std::pow(std::sin(x), 3) * (2 + std::cos(x)); }},
  };
  std::vector<std::pair<std::string, GridFunction>> out;
  for (const auto& [name, f] : fs) out.emplace_back(name, GridFunction::sample(g, f));
  return out;
}

}  // namespace pjipm
