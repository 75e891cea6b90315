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
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fringelab/detection.hpp"
#include "fringelab/errors.hpp"
#include "fringelab/estimation.hpp"
#include "fringelab/fock.hpp"
#include "fringelab/metrology.hpp"
#include "fringelab/parallel.hpp"

namespace fringelab::estimation {
namespace {

using std::numbers::pi;

std::vector<double> phases(int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(2 * pi * i / n);
  return out;
}

// Poisson counts with means expected * p(class) * eta(class) from the analytic two-photon fringe.
FringeDataset two_photon_data(double ip, double zeta, double expected, int n_phases, std::uint64_t seed,
                              const std::map<int, double>& eta = {}) {
  const auto family = metrology::two_photon_family(ip, zeta);
  std::vector<FringePoint> points;
  const auto thetas = phases(n_phases);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto p = family.probabilities(thetas[i]);
    detection::ClassProbabilities weighted;
    for (std::size_t c = 0; c < p.size(); ++c) {
      const int label = family.classes[c];
      weighted[label] = p[c] * (eta.count(label) ? eta.at(label) : 1.0);
    }
    points.push_back({thetas[i], detection::sample_counts(weighted, expected, derive_seed(seed, i))});
  }
  return FringeDataset(std::move(points), eta);
}

double true_max_fisher(double ip, double zeta) {
  return metrology::maximize_fisher(metrology::two_photon_family(ip, zeta)).max_fisher;
}

FitOptions quick(std::uint64_t seed, int restarts = 4) {
  FitOptions o;
  o.restarts = restarts;
  o.seed = seed;
  return o;
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0, var = 0.0;
  for (double x : v) mean += x / static_cast<double>(v.size());
  for (double x : v) var += (x - mean) * (x - mean) / static_cast<double>(v.size() - 1);
  return std::sqrt(var);
}

TEST(Dataset, ValidatesAndFillsMissingClasses) {
  EXPECT_THROW(FringeDataset({{0.0, {{0, -1}}}}), InvalidArgument);
  EXPECT_THROW(FringeDataset({{std::nan(""), {{0, 1}}}}), InvalidArgument);
  EXPECT_THROW(FringeDataset({{0.0, {{0, 1}}}}, {{0, 1.5}}), InvalidArgument);
  const FringeDataset d({{0.0, {{0, 3}}}, {1.0, {{2, 4}}}});
  EXPECT_EQ(d.classes(), (std::vector<int>{0, 2}));
  EXPECT_EQ(d.points()[0].counts.at(2), 0);
  EXPECT_EQ(d.efficiency(2), 1.0);
  EXPECT_EQ(d.total_counts(), 7.0);
  EXPECT_FALSE(d.shape_violations().empty());
  EXPECT_TRUE(two_photon_data(0.5, 0.0, 100, 16, 1).shape_violations().empty());
}

TEST(TotalRate, Examples) {
  const FringeDataset d({{0.3, {{0, 90}, {2, 10}}}, {0.6, {{0, 0}, {2, 0}}}}, {{0, 1.0}, {2, 0.75}});
  EXPECT_NEAR(total_rate_estimate(d, 0), 90 + 10 / 0.75, 1e-12);
  EXPECT_NEAR(total_rate_estimate_at(d, 0.3), 90 + 10 / 0.75, 1e-12);
  EXPECT_EQ(total_rate_estimate(d, 1), 0.0);
  const FringeDataset raw({{0.3, {{0, 90}, {2, 10}}}});
  EXPECT_EQ(total_rate_estimate(raw, 0), 100.0);
  EXPECT_THROW(total_rate_estimate_at(d, 0.4), InvalidArgument);
}

TEST(FourierModel, ValidatesInvariants) {
  EXPECT_THROW(FourierFringeModel({0, 2}, {2}, {{0.6, {0.1}, {0.0}}, {0.6, {-0.1}, {0.0}}}), InvalidArgument);
  EXPECT_THROW(FourierFringeModel({0, 2}, {2}, {{0.5, {0.1}, {0.0}}, {0.5, {0.1}, {0.0}}}), InvalidArgument);
  EXPECT_THROW(FourierFringeModel({0, 2}, {2}, {{0.5, {0.7}, {0.0}}, {0.5, {-0.7}, {0.0}}}), InvalidArgument);
  EXPECT_THROW(FourierFringeModel({0, 2}, {4, 2}, {{0.5, {0, 0}, {0, 0}}, {0.5, {0, 0}, {0, 0}}}),
               InvalidArgument);
}

TEST(FourierModel, TwoPhotonModelReproducesFringe) {
  const auto model = two_photon_fourier_model(0.7, 0.02);
  const auto family = metrology::two_photon_family(0.7, 0.02);
  for (double theta : phases(360)) {
    const auto a = model.probabilities(theta);
    const auto b = family.probabilities(theta);
    EXPECT_NEAR(a[0], b[0], 1e-14);
    EXPECT_NEAR(a[0] + a[1], 1.0, 1e-12);
  }
  EXPECT_NEAR(model.period(), pi, 1e-15);
}

TEST(FourierModel, JsonRoundTrip) {
  const auto model = two_photon_fourier_model(0.3, 0.01);
  const auto back = model_from_json(nlohmann::json::parse(to_json(model).dump()));
  EXPECT_EQ(back.flat_coefficients(), model.flat_coefficients());
  EXPECT_EQ(back.classes(), model.classes());
  EXPECT_EQ(back.harmonics(), model.harmonics());
}

TEST(LogLikelihood, HandComputedTwoPoints) {
  const auto model = two_photon_fourier_model(0.5, 0.0);
  const FringeDataset d({{0.3, {{0, 40}, {2, 3}}}, {1.0, {{0, 12}, {2, 25}}}}, {{0, 0.9}, {2, 0.6}});
  double expected = 0.0;
  const double thetas[] = {0.3, 1.0};
  const double x[2][2] = {{40, 3}, {12, 25}};
  const double eta[] = {0.9, 0.6};
  for (int i = 0; i < 2; ++i) {
    const double p0 = (3 - 0.5 + 1.5 * std::cos(2 * thetas[i])) / 4;
    const double p[] = {p0, 1 - p0};
    const double total = x[i][0] / eta[0] + x[i][1] / eta[1];
    for (int c = 0; c < 2; ++c) {
      const double lambda = total * p[c] * eta[c];
      expected += x[i][c] * std::log(lambda) - lambda - std::lgamma(x[i][c] + 1);
    }
  }
  const auto ll = log_likelihood(model, d);
  EXPECT_FALSE(ll.infinite);
  EXPECT_NEAR(ll.value, expected, 1e-12);
}

TEST(LogLikelihood, ZerosAndImpossibleCounts) {
  const FringeDataset zeros({{0.0, {{0, 0}, {2, 0}}}, {1.0, {{0, 0}, {2, 0}}}});
  EXPECT_EQ(log_likelihood(two_photon_fourier_model(0.5, 0.0), zeros).value, 0.0);
  const FringeDataset impossible({{0.0, {{0, 10}, {2, 1}}}});
  const auto ll = log_likelihood(two_photon_fourier_model(1.0, 0.0), impossible);
  EXPECT_TRUE(ll.infinite);
  EXPECT_EQ(ll.value, std::numeric_limits<double>::lowest());
}

TEST(LogLikelihood, LargeCountsUseLogGamma) {
  const FringeDataset big({{0.0, {{0, 200000}, {2, 100000}}}});
  EXPECT_TRUE(std::isfinite(log_likelihood(uniform_model({0, 2}, {2}), big).value));
}

TEST(FitMle, FittedModelIsLocalMaximum) {
  const auto data = two_photon_data(0.6, 0.01, 1e5, 16, 3);
  const auto fit = fit_mle(data, {2}, quick(5));
  ASSERT_TRUE(fit.converged);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (int t = 0; t < 20; ++t) {
    auto coefs = fit.model.coefficients();
    const double d0 = u(rng), dc = u(rng), ds = u(rng);
    coefs[0].c0 += d0;
    coefs[1].c0 -= d0;
    coefs[0].cos[0] += dc;
    coefs[1].cos[0] -= dc;
    coefs[0].sin[0] += ds;
    coefs[1].sin[0] -= ds;
    const FourierFringeModel perturbed(fit.model.classes(), fit.model.harmonics(), coefs);
    EXPECT_LT(log_likelihood(perturbed, data).value, fit.log_likelihood);
  }
}

TEST(FitMle, NoiselessCountsRecoverCoefficients) {
  const auto truth = two_photon_fourier_model(0.8, 0.0);
  std::vector<FringePoint> points;
  for (double theta : phases(16)) {
    const auto p = truth.probabilities(theta);
    points.push_back({theta, {{0, std::llround(1e6 * p[0])}, {2, std::llround(1e6 * p[1])}}});
  }
  const auto fit = fit_mle(FringeDataset(std::move(points)), {2}, quick(1));
  ASSERT_TRUE(fit.converged);
  const auto got = fit.model.flat_coefficients();
  const auto want = truth.flat_coefficients();
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-3) << k;
}

TEST(FitMle, SixteenPhaseRecoveryWithinOnePercent) {
  const auto data = two_photon_data(0.8, 0.0, 1e4, 16, 77);
  const auto fit = fit_mle(data, {2}, quick(9));
  ASSERT_TRUE(fit.converged);
  const auto family = metrology::two_photon_family(0.8, 0.0);
  for (double theta : phases(360)) {
    EXPECT_NEAR(fit.model.probabilities(theta)[0], family.probabilities(theta)[0], 0.01);
  }
}

TEST(FitMle, NormalizedOnDenseGrid) {
  const auto data = two_photon_data(0.4, 0.05, 1e3, 12, 5);
  const auto fit = fit_mle(data, {2, 4}, quick(2));
  for (double theta : phases(360)) {
    double sum = 0.0;
    for (double p : fit.model.probabilities(theta)) {
      EXPECT_GE(p, -1e-12);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(FitMle, ObjectiveTraceIsMonotone) {
  auto options = quick(3, 1);
  options.record_trace = true;
  const auto fit = fit_mle(two_photon_data(0.7, 0.01, 1e4, 32, 8), {2}, options);
  ASSERT_GE(fit.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    EXPECT_GE(fit.objective_trace[i], fit.objective_trace[i - 1]) << i;
  }
}

TEST(FitMle, EfficienciesEnterRatesOnly) {
  const std::map<int, double> eta{{0, 0.5625}, {2, 0.75}};
  const auto data = two_photon_data(0.8, 0.0, 1e5, 32, 21, eta);
  const auto fit = fit_mle(data, {2}, quick(4));
  ASSERT_TRUE(fit.converged);
  const auto family = metrology::two_photon_family(0.8, 0.0);
  for (double theta : phases(64)) {
    EXPECT_NEAR(fit.model.probabilities(theta)[0], family.probabilities(theta)[0], 0.01);
  }
}

TEST(FitMle, UnidentifiableDataIsIllPosed) {
  const FringeDataset one({{0.5, {{0, 100}, {2, 50}}}});
  const auto fit = fit_mle(one, {2}, quick(0));
  EXPECT_TRUE(fit.ill_posed);
  EXPECT_FALSE(fit.converged);
  std::vector<FringePoint> empty;
  for (double theta : phases(16)) empty.push_back({theta, {{0, 0}, {2, 0}}});
  EXPECT_TRUE(fit_mle(FringeDataset(std::move(empty)), {2}, quick(0)).ill_posed);
  EXPECT_THROW(fit_mle(one, {}, quick(0)), InvalidArgument);
}

TEST(FitMle, SignedClassesAggregateToAbsoluteFit) {
  const auto state = fock::spdc_two_photon(0.7);
  std::vector<FringePoint> signed_points, abs_points;
  const auto thetas = phases(32);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto dist = detection::outcome_distribution(fock::apply_path_rotation(state, thetas[i]));
    const auto counts = detection::sample_counts(detection::aggregate_by_signed_delta(dist), 1e4,
                                                 derive_seed(44, i));
    signed_points.push_back({thetas[i], counts});
    abs_points.push_back({thetas[i], {{0, counts.at(0)}, {2, counts.at(2) + counts.at(-2)}}});
  }
  const auto signed_fit = fit_mle(FringeDataset(signed_points), {2}, quick(1));
  const auto abs_fit = fit_mle(FringeDataset(abs_points), {2}, quick(1));
  ASSERT_TRUE(signed_fit.converged);
  ASSERT_TRUE(abs_fit.converged);
  ASSERT_EQ(signed_fit.model.classes(), (std::vector<int>{-2, 0, 2}));
  for (double theta : phases(90)) {
    const auto s = signed_fit.model.probabilities(theta);
    const auto a = abs_fit.model.probabilities(theta);
    EXPECT_NEAR(s[1], a[0], 0.005);
    EXPECT_NEAR(s[0] + s[2], a[1], 0.005);
  }
}

TEST(FisherFromModel, Examples) {
  EXPECT_NEAR(fisher_from_model(two_photon_fourier_model(1.0, 0.0)).max_fisher, 4.0, 1e-8);
  EXPECT_EQ(fisher_from_model(uniform_model({0, 2}, {2})).max_fisher, 0.0);
  EXPECT_NEAR(fisher_from_model(two_photon_fourier_model(0.5, 0.0119)).max_fisher,
              true_max_fisher(0.5, 0.0119), 1e-6);
  EXPECT_EQ(fisher_from_model(two_photon_fourier_model(0.5, 0.0)).photons, 2);
}

TEST(Bootstrap, RequiresHundredTrials) {
  const auto data = two_photon_data(0.5, 0.0, 1e3, 16, 1);
  const auto fit = fit_mle(data, {2}, quick(1));
  BootstrapOptions bo;
  bo.trials = 99;
  EXPECT_THROW(bootstrap_errors(fit, data, {2}, bo), InvalidArgument);
}

TEST(Bootstrap, CalibratedAgainstOuterSimulation) {
  constexpr double ip = 0.8, zeta = 0.0119, counts = 1e4;
  const auto data = two_photon_data(ip, zeta, counts, 32, 1000);
  const auto fit = fit_mle(data, {2}, quick(2));
  ASSERT_TRUE(fit.converged);
  BootstrapOptions bo;
  bo.trials = 500;
  bo.seed = 6;
  bo.restarts = 2;
  const auto report = bootstrap_errors(fit, data, {2}, bo);
  EXPECT_EQ(report.failed_trials, 0);

  std::vector<double> outer;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const auto f = fit_mle(two_photon_data(ip, zeta, counts, 32, 5000 + t), {2}, quick(t, 2));
    outer.push_back(fisher_from_model(f.model).max_fisher);
  }
  const double spread = stddev(outer);
  EXPECT_NEAR(report.sigma_max_fisher, spread, 0.3 * spread);
}

TEST(Bootstrap, FlatFringeHasSmallNonnegativeFisher) {
  std::vector<FringePoint> points;
  for (std::size_t i = 0; i < 32; ++i) {
    points.push_back({2 * pi * static_cast<double>(i) / 32,
                      detection::sample_counts({{0, 0.5}, {2, 0.5}}, 1e4, derive_seed(3, i))});
  }
  const FringeDataset data(std::move(points));
  const auto fit = fit_mle(data, {2}, quick(1));
  BootstrapOptions bo;
  bo.seed = 4;
  const auto report = bootstrap_errors(fit, data, {2}, bo);
  for (double f : report.max_fisher_samples) EXPECT_GE(f, 0.0);
  EXPECT_LT(report.sigma_max_fisher, 0.01);
}

TEST(Bootstrap, ErrorShrinksWithSquareRootOfCounts) {
  BootstrapOptions bo;
  bo.trials = 300;
  bo.seed = 12;
  bo.restarts = 1;
  double sigma[2];
  const double counts[2] = {1e4, 2e4};
  for (int k = 0; k < 2; ++k) {
    const auto data = two_photon_data(0.8, 0.0119, counts[k], 32, 31);
    const auto fit = fit_mle(data, {2}, quick(1));
    sigma[k] = bootstrap_errors(fit, data, {2}, bo).sigma_max_fisher;
  }
  EXPECT_NEAR(sigma[1] / sigma[0], 1.0 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
}

TEST(Determinism, IndependentOfThreadCount) {
  const auto data = two_photon_data(0.8, 0.0119, 1e4, 32, 2);
  BootstrapOptions bo;
  bo.seed = 9;
  set_thread_count(1);
  const auto fit1 = fit_mle(data, {2}, quick(3, 8));
  const auto boot1 = bootstrap_errors(fit1, data, {2}, bo);
  set_thread_count(4);
  const auto fit4 = fit_mle(data, {2}, quick(3, 8));
  const auto boot4 = bootstrap_errors(fit4, data, {2}, bo);
  set_thread_count(1);
  EXPECT_EQ(fit1.model.flat_coefficients(), fit4.model.flat_coefficients());
  EXPECT_EQ(fit1.log_likelihood, fit4.log_likelihood);
  EXPECT_EQ(boot1.max_fisher_samples, boot4.max_fisher_samples);
  EXPECT_EQ(to_json(boot1).dump(), to_json(boot4).dump());
}

}  // namespace
}  // namespace fringelab::estimation
