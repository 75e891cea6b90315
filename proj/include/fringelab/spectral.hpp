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

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fringelab::spectral {

/// Schmidt coefficients of a biphoton, non-increasing, with sum of squares 1.
class SchmidtSpectrum {
 public:
  /// Validates and sorts. Throws InvalidArgument on negative entries or when
  /// the squared sum differs from 1 by more than 1e-12.
  explicit SchmidtSpectrum(std::vector<double> lambdas);

  /// Rescales arbitrary nonnegative weights so their squares sum to 1.
  static SchmidtSpectrum normalized(std::vector<double> lambdas);

  const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  std::size_t size() const noexcept { return lambdas_.size(); }

 private:
  std::vector<double> lambdas_;
};

/// Discretized joint spectral amplitude on a uniform square frequency grid.
/// values(i, j) is the amplitude at (axis[i], axis[j]).
class JsaGrid {
 public:
  /// Requires a square matrix matching the axis length, a strictly increasing
  /// uniform axis, and sum |Phi|^2 step^2 = 1 within 1e-9.
  JsaGrid(Eigen::MatrixXcd values, std::vector<double> axis);

  /// Same checks on shape and axis, then rescales to unit norm.
  static JsaGrid normalized(Eigen::MatrixXcd values, std::vector<double> axis);

  const Eigen::MatrixXcd& values() const noexcept { return values_; }
  const std::vector<double>& axis() const noexcept { return axis_; }
  double step() const noexcept { return step_; }
  double norm_squared() const;

 private:
  Eigen::MatrixXcd values_;
  std::vector<double> axis_;
  double step_ = 0.0;
};

/// Orthonormal mode pairs of a JsaGrid: Phi * step = sum_k lambda_k u_k v_k^T.
struct SchmidtDecomposition {
  SchmidtSpectrum spectrum;
  Eigen::MatrixXcd left_modes;   // columns u_k, unit 2-norm
  Eigen::MatrixXcd right_modes;  // columns v_k, unit 2-norm
};

struct HomDipPoint {
  double x = 0.0;
  double p = 0.0;
  double weight = 1.0;
};

struct HomDipParams {
  double a = 0.0;
  double b = 0.0;
  double sigma = 1.0;
};

struct HomDipFit {
  double a = 0.0;
  double b = 0.0;
  double sigma = 1.0;
  double residual = 0.0;  // weighted sum of squared residuals
  bool converged = false;
  bool ill_posed = false;
  int iterations = 0;
};

/// q(x) = 2/Gamma(1/4) * integral exp(-y^4) cos(y x / sigma) dy, the delay
/// overlap of a quartic-Gaussian biphoton spectrum. q(0) = 1.
double quartic_gaussian_overlap(double x, double sigma);

/// dq/dsigma at fixed x.
double quartic_gaussian_overlap_dsigma(double x, double sigma);

/// I' = 1 - 2 p_hom. Not clamped; negative for anti-bunching.
double indistinguishability_from_coincidence(double p_hom);

/// Discretized double integral of Phi(w1, w2) conj(Phi(w2, w1)).
double exchange_symmetry(const JsaGrid& jsa);

SchmidtDecomposition schmidt_decompose(const JsaGrid& jsa);
SchmidtSpectrum schmidt_spectrum_of(const JsaGrid& jsa);

/// Rebuilds the grid from its mode pairs on the original axis.
JsaGrid reassemble(const SchmidtDecomposition& decomposition, std::vector<double> axis);

/// Sum of lambda^4.
double lambda4(const SchmidtSpectrum& spectrum);

struct HomDipFitOptions {
  int restarts = 20;
  int max_iterations = 200;
  double step_tolerance = 1e-10;
  std::uint64_t seed = 0x484f4d;
};

/// Weighted least squares of p ~ a + b q(x; sigma) by damped Gauss-Newton,
/// best of `init` and `restarts` multiplicatively perturbed (+/-20%) starts.
/// Throws InvalidArgument for fewer than 4 points and IllPosedError when all
/// points share one delay.
HomDipFit fit_hom_dip(std::span<const HomDipPoint> points, const HomDipParams& init,
                      const HomDipFitOptions& options = {});

}  // namespace fringelab::spectral
