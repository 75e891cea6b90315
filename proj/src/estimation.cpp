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

#include "fringelab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <span>

#include <Eigen/Dense>

#include "fringelab/errors.hpp"
#include "fringelab/parallel.hpp"

namespace fringelab::estimation {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kValidationGrid = 360;
constexpr double kValidationSlack = 1e-12;
constexpr double kModelFloor = 1e-9;
constexpr double kRepairLimit = 1e-6;
constexpr int kPenaltyRounds = 6;
constexpr int kMinimumScan = 3600;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_harmonics(const std::vector<int>& harmonics) {
  if (harmonics.empty()) throw InvalidArgument("harmonics must not be empty");
  for (std::size_t i = 0; i < harmonics.size(); ++i) {
    if (harmonics[i] < 1) throw InvalidArgument("harmonics must be positive");
    if (i > 0 && harmonics[i] <= harmonics[i - 1]) {
      throw InvalidArgument("harmonics must be strictly increasing");
    }
  }
}

// [1, cos h_1 t, ..., cos h_H t, sin h_1 t, ..., sin h_H t]
Eigen::RowVectorXd basis_row(double theta, const std::vector<int>& harmonics) {
  const auto h = static_cast<Eigen::Index>(harmonics.size());
  Eigen::RowVectorXd row(1 + 2 * h);
  row(0) = 1.0;
  for (Eigen::Index k = 0; k < h; ++k) {
    const double arg = harmonics[static_cast<std::size_t>(k)] * theta;
    row(1 + k) = std::cos(arg);
    row(1 + h + k) = std::sin(arg);
  }
  return row;
}

Eigen::MatrixXd basis_matrix(std::span<const double> thetas, const std::vector<int>& harmonics) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(thetas.size()),
                    static_cast<Eigen::Index>(1 + 2 * harmonics.size()));
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = basis_row(thetas[i], harmonics);
  }
  return m;
}

std::vector<double> uniform_grid(int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = 2.0 * kPi * i / n;
  return out;
}

// Free parameters: B coefficients for each of the first K - 1 classes; the
// last class is 1 - sum of the others.
struct Problem {
  Eigen::Index classes = 0;
  Eigen::Index basis = 0;
  std::vector<int> harmonics;
  Eigen::MatrixXd data_basis;  // T x B
  Eigen::MatrixXd counts;      // T x K
  Eigen::MatrixXd scale;       // T x K, lambda_t * eta
  double log_factorials = 0.0;
  double total = 0.0;
  Eigen::MatrixXd penalty_basis;  // G x B
  Eigen::MatrixXd scan_basis;     // kMinimumScan x B
  double mu = 0.0;
};

Eigen::MatrixXd class_probs(const Problem& pr, const Eigen::MatrixXd& basis,
                            const Eigen::VectorXd& beta) {
  const Eigen::Map<const Eigen::MatrixXd> b(beta.data(), pr.basis, pr.classes - 1);
  Eigen::MatrixXd p(basis.rows(), pr.classes);
  p.leftCols(pr.classes - 1) = basis * b;
  p.col(pr.classes - 1) =
      Eigen::VectorXd::Ones(basis.rows()) - p.leftCols(pr.classes - 1).rowwise().sum();
  return p;
}

double objective(const Problem& pr, const Eigen::VectorXd& beta) {
  const Eigen::MatrixXd p = class_probs(pr, pr.data_basis, beta);
  double value = -pr.log_factorials;
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    for (Eigen::Index c = 0; c < pr.classes; ++c) {
      const double lambda = pr.scale(t, c) * p(t, c);
      const double x = pr.counts(t, c);
      if (x > 0.0) {
        if (!(lambda > 0.0)) return kNegInf;
        value += x * std::log(lambda) - lambda;
      } else {
        value -= lambda;
      }
    }
  }
  const Eigen::MatrixXd q = class_probs(pr, pr.penalty_basis, beta);
  const double violation = q.cwiseMin(0.0).squaredNorm();
  return value - pr.mu * violation;
}

// g_c += basis^T (G_c - G_L) and N_cc' += basis^T diag(W_L + [c = c'] W_c) basis
// for the free classes c, c'.
void accumulate(const Problem& pr, const Eigen::MatrixXd& basis, const Eigen::MatrixXd& grad,
                const Eigen::MatrixXd& weight, Eigen::VectorXd& g, Eigen::MatrixXd& n) {
  const Eigen::Index last = pr.classes - 1;
  const Eigen::Index b = pr.basis;
  const Eigen::MatrixXd shared = basis.transpose() * weight.col(last).asDiagonal() * basis;
  for (Eigen::Index c = 0; c < last; ++c) {
    g.segment(c * b, b) += basis.transpose() * (grad.col(c) - grad.col(last));
    for (Eigen::Index c2 = 0; c2 < last; ++c2) n.block(c * b, c2 * b, b, b) += shared;
    n.block(c * b, c * b, b, b) += basis.transpose() * weight.col(c).asDiagonal() * basis;
  }
}

void derivatives(const Problem& pr, const Eigen::VectorXd& beta, Eigen::VectorXd& g,
                 Eigen::MatrixXd& n) {
  const Eigen::Index dim = pr.basis * (pr.classes - 1);
  g = Eigen::VectorXd::Zero(dim);
  n = Eigen::MatrixXd::Zero(dim, dim);

  const Eigen::MatrixXd p = class_probs(pr, pr.data_basis, beta);
  Eigen::MatrixXd grad(p.rows(), p.cols());
  Eigen::MatrixXd weight(p.rows(), p.cols());
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const double x = pr.counts(t, c);
      grad(t, c) = x > 0.0 ? x / p(t, c) - pr.scale(t, c) : -pr.scale(t, c);
      weight(t, c) = x > 0.0 ? x / (p(t, c) * p(t, c)) : 0.0;
    }
  }
  accumulate(pr, pr.data_basis, grad, weight, g, n);

  const Eigen::MatrixXd q = class_probs(pr, pr.penalty_basis, beta);
  const Eigen::MatrixXd qgrad = -2.0 * pr.mu * q.cwiseMin(0.0);
  const Eigen::MatrixXd qweight =
      (q.array() < 0.0).cast<double>().matrix() * (2.0 * pr.mu);
  accumulate(pr, pr.penalty_basis, qgrad, qweight, g, n);
}

struct Ascent {
  Eigen::VectorXd beta;
  double value = kNegInf;
  int iterations = 0;
  bool converged = false;
};

// Newton-preconditioned ascent with Armijo backtracking. Every accepted step
// raises the objective.
Ascent ascend(const Problem& pr, Eigen::VectorXd beta, int max_iterations, double gradient_tol,
              std::vector<double>* trace) {
  Ascent out;
  double value = objective(pr, beta);
  Eigen::VectorXd g;
  Eigen::MatrixXd n;
  for (int it = 0; it < max_iterations; ++it) {
    derivatives(pr, beta, g, n);
    if (g.lpNorm<Eigen::Infinity>() <= gradient_tol) {
      out.converged = true;
      break;
    }
    const double diag = std::max(1.0, n.diagonal().cwiseAbs().maxCoeff());
    n.diagonal().array() += 1e-12 * diag;
    Eigen::VectorXd d = n.ldlt().solve(g);
    double slope = g.dot(d);
    if (!d.allFinite() || !(slope > 0.0)) {
      d = g / diag;
      slope = g.dot(d);
    }
    // Predicted gain below 1e-10 log-likelihood units: nothing left to resolve.
    if (slope <= 2e-10) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    double step = 1.0;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      const Eigen::VectorXd trial = beta + step * d;
      const double trial_value = objective(pr, trial);
      if (std::isfinite(trial_value) && trial_value >= value + 1e-4 * step * slope) {
        beta = trial;
        value = trial_value;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) {
      // No representable ascent left: stationary up to rounding of the objective.
      out.converged = slope <= 1e-10 * std::max(1.0, std::abs(value));
      break;
    }
    if (trace != nullptr) trace->push_back(value);
  }
  out.beta = std::move(beta);
  out.value = value;
  return out;
}

struct Minimum {
  double value = 0.0;
  double theta = 0.0;
};

double golden_min(const std::function<double(double)>& f, double a, double b, double& best) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-12) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  best = std::min(fc, fd);
  return fc <= fd ? c : d;
}

// Continuous minimum of each class over a full turn.
std::vector<Minimum> class_minima(const Problem& pr, const Eigen::VectorXd& beta) {
  static const std::vector<double> scan = uniform_grid(kMinimumScan);
  const Eigen::MatrixXd p = class_probs(pr, pr.scan_basis, beta);
  const double h = 2.0 * kPi / kMinimumScan;
  std::vector<Minimum> out(static_cast<std::size_t>(pr.classes));
  for (Eigen::Index c = 0; c < pr.classes; ++c) {
    Eigen::Index arg = 0;
    const double coarse = p.col(c).minCoeff(&arg);
    auto f = [&](double theta) {
      const Eigen::MatrixXd v = class_probs(pr, basis_row(theta, pr.harmonics), beta);
      return v(0, c);
    };
    double refined = 0.0;
    const double theta = golden_min(f, scan[static_cast<std::size_t>(arg)] - h,
                                    scan[static_cast<std::size_t>(arg)] + h, refined);
    out[static_cast<std::size_t>(c)] =
        refined <= coarse ? Minimum{refined, theta} : Minimum{coarse, scan[static_cast<std::size_t>(arg)]};
  }
  return out;
}

// p -> (1 - alpha) p + alpha / K in parameter space.
void mix_uniform(const Problem& pr, Eigen::VectorXd& beta, double alpha) {
  beta *= 1.0 - alpha;
  for (Eigen::Index c = 0; c + 1 < pr.classes; ++c) {
    beta(c * pr.basis) += alpha / static_cast<double>(pr.classes);
  }
}

FourierFringeModel model_from_beta(const Problem& pr, const std::vector<int>& labels,
                                   const Eigen::VectorXd& beta) {
  const auto h = pr.harmonics.size();
  std::vector<ClassCoefficients> coefs(labels.size());
  ClassCoefficients last{1.0, std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)};
  for (Eigen::Index c = 0; c + 1 < pr.classes; ++c) {
    auto& cc = coefs[static_cast<std::size_t>(c)];
    const Eigen::Index base = c * pr.basis;
    cc.c0 = beta(base);
    last.c0 -= cc.c0;
    cc.cos.resize(h);
    cc.sin.resize(h);
    for (std::size_t k = 0; k < h; ++k) {
      cc.cos[k] = beta(base + 1 + static_cast<Eigen::Index>(k));
      cc.sin[k] = beta(base + 1 + static_cast<Eigen::Index>(h + k));
      last.cos[k] -= cc.cos[k];
      last.sin[k] -= cc.sin[k];
    }
  }
  coefs.back() = std::move(last);
  return FourierFringeModel(labels, pr.harmonics, std::move(coefs));
}

Problem build_problem(const FringeDataset& dataset, const std::vector<int>& harmonics) {
  Problem pr;
  const auto& labels = dataset.classes();
  const auto& points = dataset.points();
  pr.classes = static_cast<Eigen::Index>(labels.size());
  pr.basis = static_cast<Eigen::Index>(1 + 2 * harmonics.size());
  pr.harmonics = harmonics;

  std::vector<double> thetas;
  thetas.reserve(points.size());
  for (const auto& pt : points) thetas.push_back(pt.theta);
  pr.data_basis = basis_matrix(thetas, harmonics);

  const auto t_count = static_cast<Eigen::Index>(points.size());
  pr.counts.resize(t_count, pr.classes);
  pr.scale.resize(t_count, pr.classes);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const auto& pt = points[static_cast<std::size_t>(t)];
    const double rate = total_rate_estimate(dataset, static_cast<std::size_t>(t));
    for (Eigen::Index c = 0; c < pr.classes; ++c) {
      const int label = labels[static_cast<std::size_t>(c)];
      const double x = static_cast<double>(pt.counts.at(label));
      pr.counts(t, c) = x;
      pr.scale(t, c) = rate * dataset.efficiency(label);
      pr.log_factorials += std::lgamma(x + 1.0);
      pr.total += x;
    }
  }

  std::vector<double> penalty = uniform_grid(kValidationGrid);
  penalty.reserve(penalty.size() + thetas.size());
  for (double t : thetas) penalty.push_back(t);
  pr.penalty_basis = basis_matrix(penalty, harmonics);
  pr.scan_basis = basis_matrix(uniform_grid(kMinimumScan), harmonics);
  pr.mu = 1e6 * std::max(1.0, pr.total);
  return pr;
}

struct RestartOutcome {
  Eigen::VectorXd beta;
  double log_likelihood = kNegInf;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
};

RestartOutcome run_restart(Problem pr, const std::vector<int>& labels, const FringeDataset& dataset,
                           const FitOptions& options, std::size_t index) {
  const Eigen::Index dim = pr.basis * (pr.classes - 1);
  std::mt19937_64 rng(derive_seed(options.seed, index));
  std::uniform_real_distribution<double> draw(-0.2, 0.2);
  Eigen::VectorXd beta(dim);
  for (Eigen::Index c = 0; c + 1 < pr.classes; ++c) {
    beta(c * pr.basis) = 1.0 / static_cast<double>(pr.classes);
    for (Eigen::Index k = 1; k < pr.basis; ++k) beta(c * pr.basis + k) = draw(rng);
  }
  // Shrink the modulation until counts are explained everywhere.
  for (int shrink = 0; shrink < 60 && !std::isfinite(objective(pr, beta)); ++shrink) {
    for (Eigen::Index c = 0; c + 1 < pr.classes; ++c) beta.segment(c * pr.basis + 1, pr.basis - 1) *= 0.5;
  }

  RestartOutcome out;
  const double gradient_tol = options.gradient_tolerance * std::max(1.0, pr.total);
  bool converged = false;
  for (int round = 0; round < kPenaltyRounds; ++round) {
    Ascent a = ascend(pr, beta, options.max_iterations - out.iterations, gradient_tol,
                      options.record_trace ? &out.trace : nullptr);
    beta = a.beta;
    out.iterations += a.iterations;
    converged = a.converged;
    const auto minima = class_minima(pr, beta);
    std::vector<double> extra;
    for (const auto& m : minima) {
      if (m.value < -kValidationSlack) extra.push_back(m.theta);
    }
    if (extra.empty() || out.iterations >= options.max_iterations) break;
    const Eigen::MatrixXd more = basis_matrix(extra, pr.harmonics);
    Eigen::MatrixXd grown(pr.penalty_basis.rows() + more.rows(), pr.basis);
    grown << pr.penalty_basis, more;
    pr.penalty_basis = std::move(grown);
    if (options.record_trace) out.trace.push_back(objective(pr, beta));
  }

  double lowest = 0.0;
  for (const auto& m : class_minima(pr, beta)) lowest = std::min(lowest, m.value);
  if (lowest < 0.0) {
    const double uniform = 1.0 / static_cast<double>(pr.classes);
    mix_uniform(pr, beta, -lowest / (uniform - lowest));
    if (lowest < -kRepairLimit) converged = false;
  }
  out.beta = beta;
  out.converged = converged;
  out.log_likelihood = log_likelihood(model_from_beta(pr, labels, beta), dataset).value;
  return out;
}

int infer_photons(const std::vector<int>& classes) {
  int n = 0;
  for (int c : classes) n = std::max(n, std::abs(c));
  return std::max(n, 1);
}

int harmonic_gcd(const std::vector<int>& harmonics) {
  int g = 0;
  for (int h : harmonics) g = std::gcd(g, h);
  return g;
}

double sample_std(const std::vector<double>& v, double& mean) {
  mean = 0.0;
  if (v.empty()) return 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

FringeDataset::FringeDataset(std::vector<FringePoint> points, std::map<int, double> efficiencies)
    : points_(std::move(points)), efficiencies_(std::move(efficiencies)) {
  if (points_.empty()) throw InvalidArgument("FringeDataset: no points");
  std::set<int> labels;
  for (const auto& pt : points_) {
    if (!std::isfinite(pt.theta)) throw InvalidArgument("FringeDataset: phase must be finite");
    for (const auto& [label, count] : pt.counts) {
      if (count < 0) throw InvalidArgument("FringeDataset: counts must be nonnegative");
      labels.insert(label);
    }
  }
  if (labels.empty()) throw InvalidArgument("FringeDataset: no classes");
  classes_.assign(labels.begin(), labels.end());
  for (auto& pt : points_) {
    for (int label : classes_) pt.counts.try_emplace(label, 0);
  }
  for (const auto& [label, eta] : efficiencies_) {
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("FringeDataset: efficiency outside (0, 1]");
  }
}

double FringeDataset::efficiency(int label) const {
  const auto it = efficiencies_.find(label);
  return it == efficiencies_.end() ? 1.0 : it->second;
}

std::size_t FringeDataset::distinct_phases() const {
  std::set<double> phases;
  for (const auto& pt : points_) phases.insert(pt.theta);
  return phases.size();
}

double FringeDataset::total_counts() const {
  double total = 0.0;
  for (const auto& pt : points_) {
    for (const auto& [label, count] : pt.counts) total += static_cast<double>(count);
  }
  return total;
}

std::vector<std::string> FringeDataset::shape_violations() const {
  std::vector<std::string> out;
  if (distinct_phases() < 8) out.emplace_back("fewer than 8 distinct phases");
  const auto [lo, hi] = std::minmax_element(points_.begin(), points_.end(),
                                            [](const auto& a, const auto& b) { return a.theta < b.theta; });
  if (hi->theta - lo->theta < kPi - 1e-12) out.emplace_back("phases span less than pi");
  return out;
}

FourierFringeModel::FourierFringeModel(std::vector<int> classes, std::vector<int> harmonics,
                                       std::vector<ClassCoefficients> coefficients)
    : classes_(std::move(classes)),
      harmonics_(std::move(harmonics)),
      coefficients_(std::move(coefficients)) {
  check_harmonics(harmonics_);
  if (classes_.empty()) throw InvalidArgument("FourierFringeModel: no classes");
  if (std::set<int>(classes_.begin(), classes_.end()).size() != classes_.size()) {
    throw InvalidArgument("FourierFringeModel: duplicate class label");
  }
  if (coefficients_.size() != classes_.size()) {
    throw InvalidArgument("FourierFringeModel: one coefficient set per class required");
  }
  const std::size_t h = harmonics_.size();
  double c0_sum = 0.0;
  std::vector<double> cos_sum(h, 0.0);
  std::vector<double> sin_sum(h, 0.0);
  for (const auto& c : coefficients_) {
    if (c.cos.size() != h || c.sin.size() != h) {
      throw InvalidArgument("FourierFringeModel: one coefficient per harmonic required");
    }
    if (!std::isfinite(c.c0)) throw InvalidArgument("FourierFringeModel: non-finite coefficient");
    c0_sum += c.c0;
    for (std::size_t k = 0; k < h; ++k) {
      if (!std::isfinite(c.cos[k]) || !std::isfinite(c.sin[k])) {
        throw InvalidArgument("FourierFringeModel: non-finite coefficient");
      }
      cos_sum[k] += c.cos[k];
      sin_sum[k] += c.sin[k];
    }
  }
  if (std::abs(c0_sum - 1.0) > 1e-12) throw InvalidArgument("FourierFringeModel: c0 must sum to 1");
  for (std::size_t k = 0; k < h; ++k) {
    if (std::abs(cos_sum[k]) > 1e-12 || std::abs(sin_sum[k]) > 1e-12) {
      throw InvalidArgument("FourierFringeModel: harmonic coefficients must sum to 0");
    }
  }
  for (double theta : uniform_grid(kValidationGrid)) {
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      if (probability(c, theta) < -kValidationSlack) {
        throw InvalidArgument("FourierFringeModel: negative probability");
      }
    }
  }
}

double FourierFringeModel::probability(std::size_t class_index, double theta) const {
  const auto& c = coefficients_.at(class_index);
  double p = c.c0;
  for (std::size_t k = 0; k < harmonics_.size(); ++k) {
    const double arg = harmonics_[k] * theta;
    p += c.cos[k] * std::cos(arg) + c.sin[k] * std::sin(arg);
  }
  return p;
}

std::vector<double> FourierFringeModel::probabilities(double theta) const {
  std::vector<double> out(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) out[c] = probability(c, theta);
  return out;
}

std::vector<double> FourierFringeModel::derivatives(double theta) const {
  std::vector<double> out(classes_.size(), 0.0);
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto& cc = coefficients_[c];
    for (std::size_t k = 0; k < harmonics_.size(); ++k) {
      const double h = harmonics_[k];
      out[c] += h * (cc.sin[k] * std::cos(h * theta) - cc.cos[k] * std::sin(h * theta));
    }
  }
  return out;
}

double FourierFringeModel::period() const { return 2.0 * kPi / harmonic_gcd(harmonics_); }

std::vector<double> FourierFringeModel::flat_coefficients() const {
  std::vector<double> out;
  for (const auto& c : coefficients_) {
    out.push_back(c.c0);
    out.insert(out.end(), c.cos.begin(), c.cos.end());
    out.insert(out.end(), c.sin.begin(), c.sin.end());
  }
  return out;
}

FourierFringeModel two_photon_fourier_model(double iprime, double zeta) {
  if (!(iprime >= 0.0 && iprime <= 1.0)) throw InvalidArgument("iprime outside [0, 1]");
  if (!(zeta >= 0.0 && zeta < 1.0)) throw InvalidArgument("zeta outside [0, 1)");
  const double c0 = (1.0 - zeta) * (3.0 - iprime) / 4.0 + zeta / 2.0;
  const double a2 = (1.0 - zeta) * (1.0 + iprime) / 4.0;
  return FourierFringeModel({0, 2}, {2},
                            {ClassCoefficients{c0, {a2}, {0.0}},
                             ClassCoefficients{1.0 - c0, {-a2}, {0.0}}});
}

FourierFringeModel uniform_model(std::vector<int> classes, std::vector<int> harmonics) {
  check_harmonics(harmonics);
  const double p = 1.0 / static_cast<double>(classes.size());
  std::vector<ClassCoefficients> coefs(
      classes.size(), ClassCoefficients{p, std::vector<double>(harmonics.size(), 0.0),
                                        std::vector<double>(harmonics.size(), 0.0)});
  return FourierFringeModel(std::move(classes), std::move(harmonics), std::move(coefs));
}

double total_rate_estimate(const FringeDataset& dataset, std::size_t point) {
  const auto& pt = dataset.points().at(point);
  double rate = 0.0;
  for (const auto& [label, count] : pt.counts) {
    rate += static_cast<double>(count) / dataset.efficiency(label);
  }
  return rate;
}

double total_rate_estimate_at(const FringeDataset& dataset, double theta) {
  const auto& pts = dataset.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].theta == theta) return total_rate_estimate(dataset, i);
  }
  throw InvalidArgument("total_rate_estimate: phase not in dataset");
}

LogLikelihood log_likelihood(const FourierFringeModel& model, const FringeDataset& dataset) {
  LogLikelihood out;
  const auto& labels = model.classes();
  for (std::size_t i = 0; i < dataset.points().size(); ++i) {
    const auto& pt = dataset.points()[i];
    const double rate = total_rate_estimate(dataset, i);
    for (const auto& [label, count] : pt.counts) {
      const auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) throw InvalidArgument("log_likelihood: class missing from model");
      const double p = model.probability(static_cast<std::size_t>(it - labels.begin()), pt.theta);
      const double lambda = rate * p * dataset.efficiency(label);
      const auto x = static_cast<double>(count);
      if (count > 0) {
        if (!(lambda > 0.0)) {
          out.infinite = true;
          out.value = std::numeric_limits<double>::lowest();
          return out;
        }
        out.value += x * std::log(lambda) - lambda - std::lgamma(x + 1.0);
      } else {
        out.value -= lambda;
      }
    }
  }
  return out;
}

FitResult fit_mle(const FringeDataset& dataset, const std::vector<int>& harmonics,
                  const FitOptions& options) {
  check_harmonics(harmonics);
  const auto& labels = dataset.classes();
  if (labels.size() < 2) throw InvalidArgument("fit_mle: need at least two classes");
  if (options.max_iterations < 1) throw InvalidArgument("fit_mle: max_iterations must be positive");

  const std::size_t params = 1 + 2 * harmonics.size();
  if (dataset.distinct_phases() < params || dataset.total_counts() <= 0.0) {
    FitResult out{uniform_model(labels, harmonics)};
    out.ill_posed = true;
    out.log_likelihood = log_likelihood(out.model, dataset).value;
    return out;
  }

  const Problem pr = build_problem(dataset, harmonics);
  const auto restarts = static_cast<std::size_t>(std::max(1, options.restarts));
  std::vector<RestartOutcome> outcomes(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    outcomes[r] = run_restart(pr, labels, dataset, options, r);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    const auto& a = outcomes[r];
    const auto& b = outcomes[best];
    if ((a.converged && !b.converged) ||
        (a.converged == b.converged && a.log_likelihood > b.log_likelihood)) {
      best = r;
    }
  }
  auto& win = outcomes[best];
  FitResult out{model_from_beta(pr, labels, win.beta)};
  out.log_likelihood = win.log_likelihood;
  out.converged = win.converged;
  out.restarts_used = static_cast<int>(restarts);
  out.iterations = win.iterations;
  out.objective_trace = std::move(win.trace);
  return out;
}

metrology::FringeFamily to_family(const FourierFringeModel& model, int photons) {
  metrology::FringeFamily family;
  family.classes = model.classes();
  family.photons = photons > 0 ? photons : infer_photons(model.classes());
  family.period = model.period();
  family.probability_floor = kModelFloor;
  family.probabilities = [model](double theta) { return model.probabilities(theta); };
  family.derivatives = [model](double theta) { return model.derivatives(theta); };
  return family;
}

metrology::FisherReport fisher_from_model(const FourierFringeModel& model, int photons) {
  return metrology::maximize_fisher(to_family(model, photons));
}

BootstrapReport bootstrap_errors(const FitResult& fit, const FringeDataset& dataset,
                                 const std::vector<int>& harmonics,
                                 const BootstrapOptions& options) {
  if (options.trials < 100) throw InvalidArgument("bootstrap_errors: need at least 100 trials");
  if (fit.model.classes() != dataset.classes()) {
    throw InvalidArgument("bootstrap_errors: model and dataset classes differ");
  }
  const auto trials = static_cast<std::size_t>(options.trials);
  const auto& labels = dataset.classes();
  std::vector<double> max_fisher(trials, 0.0);
  std::vector<std::vector<double>> coefficients(trials);
  std::vector<char> ok(trials, 0);

  parallel_for(trials, [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(options.seed, t));
    std::vector<FringePoint> points;
    points.reserve(dataset.points().size());
    for (std::size_t i = 0; i < dataset.points().size(); ++i) {
      const double theta = dataset.points()[i].theta;
      const double rate = total_rate_estimate(dataset, i);
      FringePoint pt{theta, {}};
      for (std::size_t c = 0; c < labels.size(); ++c) {
        const double mean = rate * fit.model.probability(c, theta) * dataset.efficiency(labels[c]);
        std::int64_t k = 0;
        if (mean > 0.0) k = std::poisson_distribution<std::int64_t>(mean)(rng);
        pt.counts[labels[c]] = k;
      }
      points.push_back(std::move(pt));
    }
    const FringeDataset resampled(std::move(points), dataset.efficiencies());
    FitOptions fo;
    fo.restarts = options.restarts;
    fo.seed = derive_seed(options.seed ^ 0x5bd1e995ULL, t);
    const FitResult refit = fit_mle(resampled, harmonics, fo);
    if (!refit.converged) return;
    max_fisher[t] = fisher_from_model(refit.model, options.photons).max_fisher;
    coefficients[t] = refit.model.flat_coefficients();
    ok[t] = 1;
  });

  BootstrapReport report;
  report.trials = options.trials;
  std::vector<std::vector<double>> per_coefficient(fit.model.flat_coefficients().size());
  for (std::size_t t = 0; t < trials; ++t) {
    if (!ok[t]) {
      ++report.failed_trials;
      continue;
    }
    report.max_fisher_samples.push_back(max_fisher[t]);
    for (std::size_t k = 0; k < per_coefficient.size(); ++k) {
      per_coefficient[k].push_back(coefficients[t][k]);
    }
  }
  report.sigma_max_fisher = sample_std(report.max_fisher_samples, report.mean_max_fisher);
  for (const auto& v : per_coefficient) {
    double mean = 0.0;
    report.sigma_coefficients.push_back(sample_std(v, mean));
  }
  return report;
}

nlohmann::json to_json(const FourierFringeModel& model) {
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t c = 0; c < model.classes().size(); ++c) {
    const auto& cc = model.coefficients()[c];
    coefs.push_back({{"class", model.classes()[c]}, {"c0", cc.c0}, {"cos", cc.cos}, {"sin", cc.sin}});
  }
  return {{"classes", model.classes()}, {"harmonics", model.harmonics()}, {"coefficients", coefs}};
}

FourierFringeModel model_from_json(const nlohmann::json& j) {
  std::vector<int> classes;
  std::vector<ClassCoefficients> coefs;
  for (const auto& c : j.at("coefficients")) {
    classes.push_back(c.at("class").get<int>());
    coefs.push_back({c.at("c0").get<double>(), c.at("cos").get<std::vector<double>>(),
                     c.at("sin").get<std::vector<double>>()});
  }
  return FourierFringeModel(std::move(classes), j.at("harmonics").get<std::vector<int>>(),
                            std::move(coefs));
}

nlohmann::json to_json(const FitResult& fit) {
  return {{"model", to_json(fit.model)},
          {"log_likelihood", fit.log_likelihood},
          {"converged", fit.converged},
          {"ill_posed", fit.ill_posed},
          {"restarts_used", fit.restarts_used},
          {"iterations", fit.iterations}};
}

nlohmann::json to_json(const BootstrapReport& report) {
  return {{"trials", report.trials},
          {"failed_trials", report.failed_trials},
          {"mean_max_fisher", report.mean_max_fisher},
          {"sigma_max_fisher", report.sigma_max_fisher},
          {"sigma_coefficients", report.sigma_coefficients},
          {"max_fisher_samples", report.max_fisher_samples}};
}

}  // namespace fringelab::estimation
