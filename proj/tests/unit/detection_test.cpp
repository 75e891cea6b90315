// Copyright 2026 The fringelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "fringelab/detection.hpp"
#include "fringelab/errors.hpp"
#include "fringelab/fock.hpp"

namespace fringelab::detection {
namespace {

using std::numbers::pi;

OutcomeDistribution rotated(const fock::MultimodeFockState& s, double theta) {
  return outcome_distribution(fock::apply_path_rotation(s, theta));
}

// Counts assignments of n photons to m bins with all bins distinct, over m^n.
double enumerate_distinct(int n, int m) {
  std::vector<int> bins(static_cast<std::size_t>(n), 0);
  long total = 0, distinct = 0;
  std::function<void(int)> rec = [&](int k) {
    if (k == n) {
      ++total;
      distinct += std::set<int>(bins.begin(), bins.end()).size() == static_cast<std::size_t>(n);
      return;
    }
    for (int b = 0; b < m; ++b) {
      bins[static_cast<std::size_t>(k)] = b;
      rec(k + 1);
    }
  };
  rec(0);
  return static_cast<double>(distinct) / static_cast<double>(total);
}

// Even-polynomial least squares c2 theta^2 + c4 theta^4 on the small-angle stencil.
double quadratic_coefficient(const std::function<double(double)>& f) {
  const double thetas[] = {-0.02, -0.01, 0.01, 0.02};
  double s44 = 0, s46 = 0, s66 = 0, b4 = 0, b6 = 0;  // normal equations in powers of theta
  for (double t : thetas) {
    const double t2 = t * t, t4 = t2 * t2, y = f(t) - f(0.0);
    s44 += t4;
    s46 += t4 * t2;
    s66 += t4 * t4;
    b4 += y * t2;
    b6 += y * t4;
  }
  return (b4 * s66 - b6 * s46) / (s44 * s66 - s46 * s46);
}

TEST(OutcomeDistribution, TwoPhotonFringe) {
  for (double indist : {0.0, 0.3, 1.0}) {
    for (double theta : {0.0, 0.4, 1.2, pi / 2}) {
      const auto d = rotated(fock::dual_fock_mismatched(1, indist), theta);
      EXPECT_NEAR(d.at(1, 1), (3.0 - indist + (1.0 + indist) * std::cos(2 * theta)) / 4.0, 1e-14);
    }
  }
}

TEST(OutcomeDistribution, ZeroAngleIsInputPathDistribution) {
  const auto d = rotated(fock::dual_fock_mismatched(3, 0.4), 0.0);
  EXPECT_NEAR(d.at(3, 3), 1.0, 1e-15);
  EXPECT_EQ(d.probs().size(), 7u);
}

TEST(OutcomeDistribution, TwoTwoThroughBalancedSplitter) {
  const auto s = fock::four_photon_schmidt(spectral::SchmidtSpectrum({1.0}), 1.0);
  const auto d = rotated(s, pi / 2);
  EXPECT_NEAR(d.at(2, 2), 0.25, 1e-14);
  EXPECT_NEAR(d.at(4, 0), 0.375, 1e-14);
  EXPECT_NEAR(d.at(0, 4), 0.375, 1e-14);
  EXPECT_NEAR(d.at(3, 1), 0.0, 1e-14);
  EXPECT_NEAR(d.at(1, 3), 0.0, 1e-14);
  const auto classes = aggregate_by_abs_delta(d);
  EXPECT_NEAR(classes.at(0), 0.25, 1e-14);
  EXPECT_NEAR(classes.at(2), 0.0, 1e-14);
  EXPECT_NEAR(classes.at(4), 0.75, 1e-14);
}

TEST(OutcomeDistribution, ValidatesInvariants) {
  EXPECT_THROW(OutcomeDistribution(2, {{{1, 1}, 0.6}, {{2, 0}, 0.6}}), InvalidArgument);
  EXPECT_THROW(OutcomeDistribution(2, {{{1, 0}, 1.0}}), InvalidArgument);
  EXPECT_THROW(OutcomeDistribution(2, {{{1, 1}, 1.1}, {{2, 0}, -0.1}}), InvalidArgument);
}

TEST(OutcomeDistribution, JsonRoundTrip) {
  const auto d = rotated(fock::dual_fock_mismatched(2, 0.3), 0.9);
  const auto back = distribution_from_json(nlohmann::json::parse(to_json(d).dump()));
  EXPECT_EQ(back.probs(), d.probs());
}

TEST(Aggregate, Examples) {
  const auto c = aggregate_by_abs_delta(OutcomeDistribution(2, {{{1, 1}, 0.7}, {{2, 0}, 0.15}, {{0, 2}, 0.15}}));
  EXPECT_NEAR(c.at(0), 0.7, 1e-15);
  EXPECT_NEAR(c.at(2), 0.3, 1e-15);
  const auto u = aggregate_by_abs_delta(
      OutcomeDistribution(2, {{{1, 1}, 1.0 / 3}, {{2, 0}, 1.0 / 3}, {{0, 2}, 1.0 / 3}}));
  EXPECT_NEAR(u.at(0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(u.at(2), 2.0 / 3, 1e-15);
  const auto s = aggregate_by_signed_delta(OutcomeDistribution(2, {{{1, 1}, 0.7}, {{2, 0}, 0.1}, {{0, 2}, 0.2}}));
  EXPECT_NEAR(s.at(2), 0.1, 1e-15);
  EXPECT_NEAR(s.at(-2), 0.2, 1e-15);
}

TEST(Aggregate, TwoPhotonClassesReproduceFringeEverywhere) {
  for (int i = 0; i <= 10; ++i) {
    const double ip = i / 10.0;
    const auto s = fock::spdc_two_photon(ip);
    for (int j = 0; j < 64; ++j) {
      const double theta = 2 * pi * j / 64;
      const auto c = aggregate_by_abs_delta(rotated(s, theta));
      const double p0 = (3.0 - ip + (1.0 + ip) * std::cos(2 * theta)) / 4.0;
      EXPECT_NEAR(c.at(0), p0, 1e-10);
      EXPECT_NEAR(c.at(2), 1.0 - p0, 1e-10);
    }
  }
}

TEST(SmallAngle, QuadraticCoefficientFollowsIndistinguishability) {
  for (int n = 1; n <= 3; ++n) {
    for (double indist : {0.0, 0.5, 1.0}) {
      const auto s = fock::dual_fock_mismatched(n, indist);
      const double expected = (n + indist * n * n) / 2.0;
      const double stay = quadratic_coefficient([&](double t) { return 1.0 - rotated(s, t).at(n, n); });
      const double hop = quadratic_coefficient([&](double t) {
        const auto d = rotated(s, t);
        return d.at(n + 1, n - 1) + d.at(n - 1, n + 1);
      });
      EXPECT_NEAR(stay, expected, 1e-5) << n << " " << indist;
      EXPECT_NEAR(hop, expected, 1e-5) << n << " " << indist;
    }
  }
}

TEST(Background, Examples) {
  const auto two = add_background({{0, 1.0}, {2, 0.0}}, 0.0119);
  EXPECT_NEAR(two.at(0), 0.99405, 1e-12);
  EXPECT_NEAR(two.at(2), 0.00595, 1e-12);
  const ClassProbabilities any{{0, 0.2}, {2, 0.8}};
  EXPECT_EQ(add_background(any, 0.0), any);
  const auto three = add_background({{0, 0.5}, {2, 0.3}, {4, 0.2}}, 0.3);
  EXPECT_NEAR(three.at(0), 0.45, 1e-12);
  EXPECT_NEAR(three.at(2), 0.31, 1e-12);
  EXPECT_NEAR(three.at(4), 0.24, 1e-12);
  EXPECT_THROW(add_background(any, 1.0), InvalidArgument);
}

TEST(Background, PreservesNormalization) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 1; k <= 6; ++k) {
    ClassProbabilities c;
    double total = 0.0;
    for (int i = 0; i < k; ++i) total += c[2 * i] = u(rng);
    for (auto& [label, p] : c) p /= total;
    double sum = 0.0;
    for (const auto& [label, p] : add_background(c, u(rng) * 0.99)) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Background, FractionFromRates) {
  EXPECT_NEAR(background_fraction(1315, 15.6), 0.011863, 1e-6);
  EXPECT_NEAR(background_fraction(2.297, 0.065), 0.028298, 1e-6);
  EXPECT_EQ(background_fraction(100, 0), 0.0);
  EXPECT_THROW(background_fraction(0.0, 0.0), InvalidArgument);
}

TEST(Multiplex, Examples) {
  EXPECT_EQ(multiplex_efficiency(0, 4), 1.0);
  EXPECT_EQ(multiplex_efficiency(1, 4), 1.0);
  EXPECT_DOUBLE_EQ(multiplex_efficiency(2, 4), 0.75);
  EXPECT_DOUBLE_EQ(multiplex_efficiency(4, 4), 3.0 / 32.0);
  EXPECT_THROW(multiplex_efficiency(5, 4), InvalidArgument);
}

TEST(Multiplex, MatchesExhaustiveEnumeration) {
  for (int m = 1; m <= 6; ++m) {
    for (int n = 0; n <= std::min(4, m); ++n) {
      EXPECT_DOUBLE_EQ(multiplex_efficiency(n, m), enumerate_distinct(n, m)) << n << "/" << m;
    }
  }
}

TEST(Multiplex, ClassAndPatternEfficiency) {
  EXPECT_DOUBLE_EQ(class_efficiency(2, 2, 4), 0.75);
  EXPECT_DOUBLE_EQ(class_efficiency(4, 0, 4), 9.0 / 16.0);
  EXPECT_THROW(class_efficiency(4, 1, 4), InvalidArgument);
  const NoiseAndEfficiencyConfig cfg{0.0, 4};
  EXPECT_DOUBLE_EQ(cfg.pattern_efficiency(2, 2), 9.0 / 16.0);
  EXPECT_THROW((NoiseAndEfficiencyConfig{1.0, 4}.validate()), InvalidArgument);
  EXPECT_THROW((NoiseAndEfficiencyConfig{0.0, 0}.validate()), InvalidArgument);
}

TEST(CorrectCounts, DividesByEfficiency) {
  const NoiseAndEfficiencyConfig cfg{0.0, 4};
  const std::map<Pattern, double> raw{{{1, 1}, 100}, {{2, 0}, 10}, {{0, 2}, 10}};
  std::map<Pattern, double> eta;
  for (const auto& [p, c] : raw) eta[p] = cfg.pattern_efficiency(p.first, p.second);
  const auto out = correct_counts(raw, eta);
  EXPECT_DOUBLE_EQ(out.at({1, 1}), 100.0);
  EXPECT_NEAR(out.at({2, 0}), 40.0 / 3.0, 1e-12);
  EXPECT_NEAR(out.at({0, 2}), 40.0 / 3.0, 1e-12);
  const std::map<Pattern, double> ones{{{1, 1}, 1.0}, {{2, 0}, 1.0}, {{0, 2}, 1.0}};
  EXPECT_EQ(correct_counts(raw, ones), raw);
  EXPECT_NEAR(correct_counts<Pattern>({{{2, 2}, 9.0}}, {{{2, 2}, cfg.pattern_efficiency(2, 2)}}).at({2, 2}),
              16.0, 1e-12);
  EXPECT_THROW(correct_counts<Pattern>({{{1, 1}, 1.0}}, {{{1, 1}, 0.0}}), InvalidArgument);
}

TEST(SampleCounts, EmptyClassStaysEmpty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = sample_counts({{0, 1.0}, {2, 0.0}}, 50.0, seed);
    EXPECT_EQ(c.at(2), 0);
  }
}

TEST(SampleCounts, MeanMatchesExpectation) {
  double m0 = 0.0, m2 = 0.0;
  constexpr int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    const auto c = sample_counts({{0, 0.7}, {2, 0.3}}, 100.0, static_cast<std::uint64_t>(r));
    m0 += static_cast<double>(c.at(0)) / reps;
    m2 += static_cast<double>(c.at(2)) / reps;
  }
  EXPECT_NEAR(m0, 70.0, 0.7);
  EXPECT_NEAR(m2, 30.0, 0.3);
}

TEST(SampleCounts, DeterministicForSeed) {
  const ClassProbabilities p{{0, 0.4}, {2, 0.35}, {4, 0.25}};
  EXPECT_EQ(sample_counts(p, 1e4, 99), sample_counts(p, 1e4, 99));
  EXPECT_NE(sample_counts(p, 1e4, 99), sample_counts(p, 1e4, 100));
  EXPECT_THROW(sample_counts(p, 0.0, 1), InvalidArgument);
}

}  // namespace
}  // namespace fringelab::detection
