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

#include "fringelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fringelab/errors.hpp"

namespace fringelab::spectral {

namespace {

// exp(-8^4) is far below the smallest double, so [0, 8] is the whole support.
constexpr double kCutoff = 8.0;
// Relative to the first estimate, which is at most int e^{-y^4} < 1, so the
// absolute error stays below 1e-10.
constexpr double kQuadratureTolerance = 1e-10;
constexpr unsigned kQuadratureDepth = 30;

double overlap_prefactor() {
  // Two halves of an even integrand: 2 * 2 / Gamma(1/4).
  static const double value = 4.0 / std::tgamma(0.25);
  return value;
}

void check_axis(const std::vector<double>& axis, Eigen::Index rows, Eigen::Index cols,
                double& step) {
  if (rows != cols) throw InvalidArgument("JsaGrid: grid must be square");
  if (rows < 1) throw InvalidArgument("JsaGrid: grid is empty");
  if (static_cast<std::size_t>(rows) != axis.size()) {
    throw InvalidArgument("JsaGrid: axis length does not match grid");
  }
  if (axis.size() == 1) {
    step = 1.0;
    return;
  }
  step = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("JsaGrid: axis must be strictly increasing");
  }
  for (std::size_t i = 1; i < axis.size(); ++i) {
    const double d = axis[i] - axis[i - 1];
    if (!(d > 0.0)) throw InvalidArgument("JsaGrid: axis must be strictly increasing");
    if (std::abs(d - step) > 1e-9 * step) {
      throw InvalidArgument("JsaGrid: axis must be uniformly spaced");
    }
  }
}

}  // namespace

SchmidtSpectrum::SchmidtSpectrum(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
  if (lambdas_.empty()) throw InvalidArgument("SchmidtSpectrum: no coefficients");
  double sum_sq = 0.0;
  for (double l : lambdas_) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw InvalidArgument("SchmidtSpectrum: coefficients must be finite and nonnegative");
    }
    sum_sq += l * l;
  }
  if (std::abs(sum_sq - 1.0) > 1e-12) {
    throw InvalidArgument("SchmidtSpectrum: squared coefficients must sum to 1");
  }
  std::sort(lambdas_.begin(), lambdas_.end(), std::greater<>());
}

SchmidtSpectrum SchmidtSpectrum::normalized(std::vector<double> lambdas) {
  double sum_sq = 0.0;
  for (double l : lambdas) sum_sq += l * l;
  if (!(sum_sq > 0.0)) throw InvalidArgument("SchmidtSpectrum: all coefficients are zero");
  const double scale = 1.0 / std::sqrt(sum_sq);
  for (double& l : lambdas) l *= scale;
  return SchmidtSpectrum(std::move(lambdas));
}

JsaGrid::JsaGrid(Eigen::MatrixXcd values, std::vector<double> axis)
    : values_(std::move(values)), axis_(std::move(axis)) {
  check_axis(axis_, values_.rows(), values_.cols(), step_);
  if (std::abs(norm_squared() - 1.0) > 1e-9) {
    throw InvalidArgument("JsaGrid: amplitude is not normalized");
  }
}

JsaGrid JsaGrid::normalized(Eigen::MatrixXcd values, std::vector<double> axis) {
  double step = 0.0;
  check_axis(axis, values.rows(), values.cols(), step);
  const double n2 = values.squaredNorm() * step * step;
  if (!(n2 > 0.0)) throw InvalidArgument("JsaGrid: amplitude is identically zero");
  values /= std::sqrt(n2);
  return JsaGrid(std::move(values), std::move(axis));
}

double JsaGrid::norm_squared() const { return values_.squaredNorm() * step_ * step_; }

double quartic_gaussian_overlap(double x, double sigma) {
  if (!std::isfinite(x)) throw InvalidArgument("quartic_gaussian_overlap: x must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("quartic_gaussian_overlap: sigma must be positive");
  }
  const double u = x / sigma;
  const double r = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [u](double y) { return std::exp(-y * y * y * y) * std::cos(y * u); }, 0.0, kCutoff, kQuadratureDepth,
      kQuadratureTolerance);
  return overlap_prefactor() * r;
}

double quartic_gaussian_overlap_dsigma(double x, double sigma) {
  if (!std::isfinite(x)) throw InvalidArgument("quartic_gaussian_overlap: x must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("quartic_gaussian_overlap: sigma must be positive");
  }
  const double u = x / sigma;
  const double r = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [u](double y) { return y * std::exp(-y * y * y * y) * std::sin(y * u); }, 0.0, kCutoff, kQuadratureDepth,
      kQuadratureTolerance);
  // dq/du = -prefactor * int y e^{-y^4} sin(yu); du/dsigma = -x / sigma^2.
  return overlap_prefactor() * r * x / (sigma * sigma);
}

double indistinguishability_from_coincidence(double p_hom) {
  if (!(p_hom >= 0.0 && p_hom <= 1.0)) {
    throw InvalidArgument("indistinguishability_from_coincidence: p_hom outside [0, 1]");
  }
  return 1.0 - 2.0 * p_hom;
}

double exchange_symmetry(const JsaGrid& jsa) {
  const auto& phi = jsa.values();
  // sum_ij Phi_ij conj(Phi_ji) = sum of elementwise products with the adjoint.
  const std::complex<double> total =
      (phi.array() * phi.adjoint().array()).sum() * (jsa.step() * jsa.step());
  if (std::abs(total.imag()) >= 1e-9) {
    throw InvalidArgument("exchange_symmetry: imaginary residue exceeds 1e-9");
  }
  return total.real();
}

SchmidtDecomposition schmidt_decompose(const JsaGrid& jsa) {
  const Eigen::MatrixXcd scaled = jsa.values() * jsa.step();
  if (scaled.squaredNorm() == 0.0) throw InvalidArgument("schmidt_decompose: zero grid");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = 1e-13 * s(0);
  Eigen::Index kept = 0;
  while (kept < s.size() && s(kept) > cutoff) ++kept;

  std::vector<double> lambdas(s.data(), s.data() + kept);
  SchmidtDecomposition out{SchmidtSpectrum::normalized(std::move(lambdas)),
                           svd.matrixU().leftCols(kept),
                           svd.matrixV().leftCols(kept).conjugate()};
  return out;
}

SchmidtSpectrum schmidt_spectrum_of(const JsaGrid& jsa) { return schmidt_decompose(jsa).spectrum; }

JsaGrid reassemble(const SchmidtDecomposition& d, std::vector<double> axis) {
  const auto& lam = d.spectrum.lambdas();
  if (static_cast<Eigen::Index>(lam.size()) != d.left_modes.cols() ||
      d.left_modes.cols() != d.right_modes.cols()) {
    throw InvalidArgument("reassemble: mode count mismatch");
  }
  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(d.left_modes.rows(), d.right_modes.rows());
  for (std::size_t k = 0; k < lam.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    values += lam[k] * d.left_modes.col(col) * d.right_modes.col(col).transpose();
  }
  return JsaGrid::normalized(std::move(values), std::move(axis));
}

double lambda4(const SchmidtSpectrum& spectrum) {
  double total = 0.0;
  for (double l : spectrum.lambdas()) total += l * l * l * l;
  return total;
}

namespace {

struct DipModel {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;
};

DipModel evaluate_dip(std::span<const HomDipPoint> points, const Eigen::Vector3d& params) {
  const auto n = static_cast<Eigen::Index>(points.size());
  DipModel m{Eigen::VectorXd(n), Eigen::MatrixXd(n, 3), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    const double sw = std::sqrt(pt.weight);
    const double q = quartic_gaussian_overlap(pt.x, params(2));
    const double dq = quartic_gaussian_overlap_dsigma(pt.x, params(2));
    m.residual(i) = sw * (pt.p - params(0) - params(1) * q);
    m.jacobian(i, 0) = -sw;
    m.jacobian(i, 1) = -sw * q;
    m.jacobian(i, 2) = -sw * params(1) * dq;
  }
  m.cost = m.residual.squaredNorm();
  return m;
}

HomDipFit gauss_newton(std::span<const HomDipPoint> points, Eigen::Vector3d params,
                       const HomDipFitOptions& options) {
  DipModel model = evaluate_dip(points, params);
  double damping = 1e-3;
  HomDipFit fit;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::Matrix3d normal = model.jacobian.transpose() * model.jacobian;
    const Eigen::Vector3d gradient = model.jacobian.transpose() * model.residual;
    const double diag_floor = 1e-12 * std::max(normal.diagonal().maxCoeff(), 1e-300);
    bool stepped = false;
    while (damping < 1e16) {
      Eigen::Matrix3d damped = normal;
      for (int k = 0; k < 3; ++k) damped(k, k) += damping * std::max(normal(k, k), diag_floor);
      const Eigen::Vector3d delta = damped.ldlt().solve(-gradient);
      if (!delta.allFinite()) {
        damping *= 4.0;
        continue;
      }
      if (delta.norm() < options.step_tolerance) {
        fit.converged = true;
        break;
      }
      const Eigen::Vector3d candidate = params + delta;
      if (!(candidate(2) > 0.0)) {
        damping *= 4.0;
        continue;
      }
      DipModel trial = evaluate_dip(points, candidate);
      if (trial.cost <= model.cost) {
        params = candidate;
        model = std::move(trial);
        damping = std::max(damping / 3.0, 1e-12);
        stepped = true;
        break;
      }
      damping *= 4.0;
    }
    if (fit.converged) break;
    if (!stepped) {
      // Damping saturated without a decrease: no representable descent step remains.
      fit.converged = true;
      break;
    }
  }
  fit.a = params(0);
  fit.b = params(1);
  fit.sigma = params(2);
  fit.residual = model.cost;
  fit.iterations = it;
  return fit;
}

bool dip_is_ill_posed(std::span<const HomDipPoint> points, const HomDipFit& fit) {
  if (std::abs(fit.b) <= 1e-8 * std::max(1.0, std::abs(fit.a))) return true;
  const DipModel m = evaluate_dip(points, Eigen::Vector3d(fit.a, fit.b, fit.sigma));
  const Eigen::Matrix3d normal = m.jacobian.transpose() * m.jacobian;
  Eigen::Vector3d scale;
  for (int k = 0; k < 3; ++k) {
    if (!(normal(k, k) > 0.0)) return true;
    scale(k) = 1.0 / std::sqrt(normal(k, k));
  }
  const Eigen::Matrix3d corr = scale.asDiagonal() * normal * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(corr);
  const auto ev = eig.eigenvalues();
  return ev(0) <= 1e-12 * ev(2);
}

}  // namespace

HomDipFit fit_hom_dip(std::span<const HomDipPoint> points, const HomDipParams& init,
                      const HomDipFitOptions& options) {
  if (points.size() < 4) throw InvalidArgument("fit_hom_dip: at least 4 points are required");
  for (const auto& pt : points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.p) || !(pt.weight >= 0.0)) {
      throw InvalidArgument("fit_hom_dip: points must be finite with nonnegative weights");
    }
  }
  const bool one_delay = std::all_of(points.begin(), points.end(),
                                     [&](const HomDipPoint& pt) { return pt.x == points[0].x; });
  if (one_delay) throw IllPosedError("fit_hom_dip: all points share one delay");
  if (!(init.sigma > 0.0)) throw InvalidArgument("fit_hom_dip: initial sigma must be positive");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  HomDipFit best;
  bool have_best = false;
  for (int start = 0; start <= options.restarts; ++start) {
    Eigen::Vector3d p0(init.a, init.b, init.sigma);
    if (start > 0) {
      for (int k = 0; k < 3; ++k) p0(k) *= 1.0 + jitter(rng);
    }
    HomDipFit fit = gauss_newton(points, p0, options);
    if (!have_best || fit.residual < best.residual) {
      best = fit;
      have_best = true;
    }
  }
  best.ill_posed = dip_is_ill_posed(points, best);
  return best;
}

}  // namespace fringelab::spectral
