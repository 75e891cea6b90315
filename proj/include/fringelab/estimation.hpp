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

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fringelab/metrology.hpp"

namespace fringelab::estimation {

struct FringePoint {
  double theta = 0.0;
  std::map<int, std::int64_t> counts;
};

/// Raw counts of one phase scan plus per-class detection efficiencies.
/// Every point carries every class (missing entries are zero counts); classes
/// without an efficiency entry have eta = 1.
class FringeDataset {
 public:
  /// Throws InvalidArgument for negative counts, non-finite phases or
  /// efficiencies outside (0, 1].
  FringeDataset(std::vector<FringePoint> points, std::map<int, double> efficiencies = {});

  const std::vector<FringePoint>& points() const noexcept { return points_; }
  const std::vector<int>& classes() const noexcept { return classes_; }
  const std::map<int, double>& efficiencies() const noexcept { return efficiencies_; }
  double efficiency(int label) const;
  std::size_t distinct_phases() const;
  double total_counts() const;

  /// Scan-shape requirements (>= 8 distinct phases spanning at least pi).
  /// Returns human-readable violations; empty when the dataset is well formed.
  std::vector<std::string> shape_violations() const;

 private:
  std::vector<FringePoint> points_;
  std::vector<int> classes_;
  std::map<int, double> efficiencies_;
};

/// Coefficients of one class: c0 + sum_k cos_k cos(h_k t) + sin_k sin(h_k t).
struct ClassCoefficients {
  double c0 = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;
};

class FourierFringeModel {
 public:
  /// Checks sum c0 = 1 and zero harmonic sums (1e-12) and p >= -1e-12 on a
  /// 360-point grid.
  FourierFringeModel(std::vector<int> classes, std::vector<int> harmonics,
                     std::vector<ClassCoefficients> coefficients);

  const std::vector<int>& classes() const noexcept { return classes_; }
  const std::vector<int>& harmonics() const noexcept { return harmonics_; }
  const std::vector<ClassCoefficients>& coefficients() const noexcept { return coefficients_; }

  double probability(std::size_t class_index, double theta) const;
  std::vector<double> probabilities(double theta) const;
  std::vector<double> derivatives(double theta) const;
  /// 2 pi / gcd(harmonics).
  double period() const;
  /// Coefficients flattened per class as [c0, cos..., sin...].
  std::vector<double> flat_coefficients() const;

 private:
  std::vector<int> classes_;
  std::vector<int> harmonics_;
  std::vector<ClassCoefficients> coefficients_;
};

/// Closed-form noise-mixed two-photon fringe as a harmonic-2 model, classes {0, 2}.
FourierFringeModel two_photon_fourier_model(double iprime, double zeta);

/// Every class equally likely, no modulation.
FourierFringeModel uniform_model(std::vector<int> classes, std::vector<int> harmonics);

/// lambda_t = sum_classes counts / eta at the point with index `point`.
double total_rate_estimate(const FringeDataset& dataset, std::size_t point);
/// Same, looked up by phase. Throws InvalidArgument when theta is absent.
double total_rate_estimate_at(const FringeDataset& dataset, double theta);

struct LogLikelihood {
  double value = 0.0;
  bool infinite = false;  // a class with counts had zero expected rate
};

/// Poisson log-likelihood with lambda = lambda_t p(class | theta) eta_class.
LogLikelihood log_likelihood(const FourierFringeModel& model, const FringeDataset& dataset);

struct FitOptions {
  int restarts = 50;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double gradient_tolerance = 1e-9;  // relative to total counts
  bool record_trace = false;
};

struct FitResult {
  explicit FitResult(FourierFringeModel m) : model(std::move(m)) {}

  FourierFringeModel model;
  double log_likelihood = 0.0;
  bool converged = false;
  bool ill_posed = false;
  int restarts_used = 0;
  int iterations = 0;
  /// Penalized objective after each accepted step of the winning restart.
  std::vector<double> objective_trace;
};

/// Poisson maximum-likelihood fit of a Fourier fringe model.
///
/// One class's coefficients are eliminated so the model sums to one at every
/// phase. Nonnegativity is a quadratic penalty on a 360-point grid plus the
/// data phases; after convergence the continuous minimum is located and, if
/// it dips below zero, that phase joins the penalty grid and the ascent
/// resumes. A residual dip of at most 1e-6 is removed by mixing with the
/// uniform model. Each restart draws c0 = 1/K and harmonic coefficients
/// uniform in [-0.2, 0.2] and runs Newton-preconditioned gradient ascent with
/// backtracking. Restarts run in parallel with seeds derived from
/// (seed, restart); the winner is the highest likelihood, lowest index on ties.
FitResult fit_mle(const FringeDataset& dataset, const std::vector<int>& harmonics,
                  const FitOptions& options = {});

/// Fisher information of the fitted curves with analytic derivatives,
/// maximized over one period. photons <= 0 infers N from the largest |class|.
metrology::FisherReport fisher_from_model(const FourierFringeModel& model, int photons = 0);

/// Adapts a model to the metrology interface. Probabilities under 1e-9 are
/// left out of the Fisher sum; that keeps touching zeros from being dominated
/// by rounding.
metrology::FringeFamily to_family(const FourierFringeModel& model, int photons = 0);

struct BootstrapOptions {
  int trials = 100;
  std::uint64_t seed = 0;
  int restarts = 5;
  int photons = 0;
};

struct BootstrapReport {
  int trials = 0;
  int failed_trials = 0;
  double mean_max_fisher = 0.0;
  double sigma_max_fisher = 0.0;
  std::vector<double> max_fisher_samples;
  /// Standard deviation of each coefficient, laid out as flat_coefficients().
  std::vector<double> sigma_coefficients;
};

/// Parametric bootstrap (trials >= 100): resample counts from the fitted Poisson rates on the
/// same phases, totals and efficiencies, refit, and report the spread.
BootstrapReport bootstrap_errors(const FitResult& fit, const FringeDataset& dataset,
                                 const std::vector<int>& harmonics,
                                 const BootstrapOptions& options = {});

nlohmann::json to_json(const FourierFringeModel& model);
FourierFringeModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const BootstrapReport& report);

}  // namespace fringelab::estimation
