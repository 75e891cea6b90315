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

#include "fringelab/metrology.hpp"

#include <algorithm>
#include <cmath>

#include "fringelab/detection.hpp"
#include "fringelab/errors.hpp"
#include "fringelab/parallel.hpp"

namespace fringelab::metrology {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSlopeFloor = 1e-10;
// Below this probability a class sits near a double zero, where the central
// difference of p is dominated by its O(step^2) error.
constexpr double kNearZero = 1e-6;

std::vector<double> checked(std::vector<double> p, std::size_t expected) {
  if (p.size() != expected) throw EvaluationError("fringe family returned the wrong class count");
  for (double v : p) {
    if (!std::isfinite(v)) throw EvaluationError("fringe family returned a non-finite value");
  }
  return p;
}

struct Differences {
  std::vector<double> slope;
  std::vector<double> curvature;
};

Differences central_difference(const FringeFamily& family, std::span<const double> p, double theta,
                               double step) {
  const std::size_t k = family.classes.size();
  const auto up = checked(family.probabilities(theta + step), k);
  const auto down = checked(family.probabilities(theta - step), k);
  Differences d{std::vector<double>(k), std::vector<double>(k)};
  for (std::size_t r = 0; r < k; ++r) {
    d.slope[r] = (up[r] - down[r]) / (2.0 * step);
    d.curvature[r] = (up[r] - 2.0 * p[r] + down[r]) / (step * step);
  }
  return d;
}

// `curvature` may be empty. When present, terms of nearly vanishing classes are
// capped by 2 p'', since p'^2 <= 2 p sup|p''| for any nonnegative smooth p.
FisherValue fisher_sum(std::span<const double> p, std::span<const double> d, double floor,
                       std::span<const double> curvature = {}) {
  FisherValue out;
  for (std::size_t r = 0; r < p.size(); ++r) {
    if (p[r] < floor) {
      if (std::abs(d[r]) >= kSlopeFloor) out.singular = true;
      continue;
    }
    double term = d[r] * d[r] / p[r];
    if (!curvature.empty() && p[r] < kNearZero) term = std::min(term, 2.0 * std::max(curvature[r], 0.0));
    out.value += term;
  }
  return out;
}

std::vector<double> class_vector(const detection::ClassProbabilities& classes) {
  std::vector<double> out;
  out.reserve(classes.size());
  for (const auto& [label, p] : classes) out.push_back(p);
  return out;
}

std::vector<int> class_labels(int photons, ClassScheme scheme) {
  std::vector<int> labels;
  if (scheme == ClassScheme::kAbsDelta) {
    for (int d = photons % 2; d <= photons; d += 2) labels.push_back(d);
  } else {
    for (int d = -photons; d <= photons; d += 2) labels.push_back(d);
  }
  return labels;
}

template <typename Probe>
FringeFamily family_from_probe(Probe probe, int photons, double zeta, ClassScheme scheme) {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw InvalidArgument("simulated_family: zeta outside [0, 1)");
  FringeFamily family;
  family.classes = class_labels(photons, scheme);
  family.photons = photons;
  family.period = 2.0 * kPi;
  family.probabilities = [probe = std::move(probe), zeta, scheme](double theta) {
    const auto dist = detection::outcome_distribution(fock::apply_path_rotation(probe, theta));
    const auto classes = scheme == ClassScheme::kAbsDelta ? detection::aggregate_by_abs_delta(dist)
                                                          : detection::aggregate_by_signed_delta(dist);
    return class_vector(detection::add_background(classes, zeta));
  };
  return family;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol,
                          double& best_value) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
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
  if (fc >= fd) {
    best_value = fc;
    return c;
  }
  best_value = fd;
  return d;
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " outside [0, 1]");
}

void check_zeta(double zeta) {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw InvalidArgument("zeta outside [0, 1)");
}

}  // namespace

FisherValue fisher_at(const FringeFamily& family, double theta, double step) {
  if (!std::isfinite(theta)) throw InvalidArgument("fisher_at: theta must be finite");
  const std::size_t k = family.classes.size();
  const auto p = checked(family.probabilities(theta), k);
  if (family.derivatives) {
    const auto d = checked(family.derivatives(theta), k);
    return fisher_sum(p, d, family.probability_floor);
  }
  if (!(step > 0.0)) throw InvalidArgument("fisher_at: step must be positive");
  const auto dc = central_difference(family, p, theta, step);
  const auto df = central_difference(family, p, theta, 0.5 * step);
  // Richardson: the combined slope is accurate to O(step^4).
  std::vector<double> slope(k);
  for (std::size_t r = 0; r < k; ++r) slope[r] = (4.0 * df.slope[r] - dc.slope[r]) / 3.0;
  FisherValue out = fisher_sum(p, slope, family.probability_floor, df.curvature);
  const FisherValue fine = fisher_sum(p, df.slope, family.probability_floor, df.curvature);
  const double scale = std::max(std::abs(out.value), 1e-12);
  out.unresolved = std::abs(fine.value - out.value) > 1e-4 * scale;
  return out;
}

FisherReport maximize_fisher(const FringeFamily& family, const MaximizeOptions& options) {
  if (options.grid_points < 3) throw InvalidArgument("maximize_fisher: need at least 3 grid points");
  const bool periodic = !(options.hi > options.lo);
  const double lo = periodic ? 0.0 : options.lo;
  const double hi = periodic ? family.period : options.hi;
  const auto n = static_cast<std::size_t>(options.grid_points);
  const double h = (hi - lo) / static_cast<double>(options.include_hi && !periodic ? n - 1 : n);

  FisherReport report;
  report.photons = family.photons;
  report.theta_grid.resize(n);
  report.fisher_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.theta_grid[i] = lo + h * static_cast<double>(i);
  parallel_for(n, [&](std::size_t i) {
    report.fisher_values[i] = fisher_at(family, report.theta_grid[i], options.step).value;
  });

  const auto best = static_cast<std::size_t>(
      std::max_element(report.fisher_values.begin(), report.fisher_values.end()) -
      report.fisher_values.begin());
  double a = report.theta_grid[best] - h;
  double b = report.theta_grid[best] + h;
  if (!periodic) {
    a = std::max(a, lo);
    b = std::min(b, hi);
  }
  double refined_value = 0.0;
  const double refined = golden_section_max(
      [&](double t) { return fisher_at(family, t, options.step).value; }, a, b, options.tolerance,
      refined_value);

  if (refined_value >= report.fisher_values[best]) {
    report.max_fisher = refined_value;
    report.argmax_theta = refined;
  } else {
    report.max_fisher = report.fisher_values[best];
    report.argmax_theta = report.theta_grid[best];
  }
  if (periodic) {
    report.argmax_theta = std::fmod(report.argmax_theta - lo, family.period);
    if (report.argmax_theta < 0.0) report.argmax_theta += family.period;
    report.argmax_theta += lo;
  }
  report.per_photon = report.max_fisher / static_cast<double>(family.photons);
  return report;
}

FringeFamily two_photon_family(double iprime, double zeta) {
  check_unit(iprime, "two_photon_family: iprime");
  check_zeta(zeta);
  // Written with sin^2 so the bunched class has no cancellation near theta = 0.
  const double visible = (1.0 - zeta) * (1.0 + iprime);
  FringeFamily family;
  family.classes = {0, 2};
  family.photons = 2;
  family.period = kPi;
  family.probabilities = [visible, zeta, iprime](double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double bunched = 0.5 * visible * s * s + 0.5 * zeta;
    const double coincident =
        (1.0 - zeta) * (0.5 * (1.0 - iprime) + 0.5 * (1.0 + iprime) * c * c) + 0.5 * zeta;
    return std::vector<double>{coincident, bunched};
  };
  family.derivatives = [visible](double theta) {
    const double slope = visible * std::sin(theta) * std::cos(theta);
    return std::vector<double>{-slope, slope};
  };
  return family;
}

FringeFamily simulated_family(fock::MultimodeFockState state, double zeta, ClassScheme scheme) {
  const int photons = state.total_photons();
  return family_from_probe(std::move(state), photons, zeta, scheme);
}

FringeFamily simulated_family(fock::StateEnsemble ensemble, double zeta, ClassScheme scheme) {
  const int photons = ensemble.total_photons();
  return family_from_probe(std::move(ensemble), photons, zeta, scheme);
}

FringeFamily four_photon_family(double lambda4, double cross_overlap, double zeta) {
  FringeFamily family =
      simulated_family(fock::four_photon_lambda4_mixture(lambda4, cross_overlap), zeta);
  family.period = kPi;
  return family;
}

double small_angle_fisher(int n, double indist) {
  if (n < 1) throw InvalidArgument("small_angle_fisher: n must be positive");
  check_unit(indist, "small_angle_fisher: indist");
  const double nn = static_cast<double>(n);
  return 2.0 * (nn + indist * nn * nn);
}

double optimal_theta_numeric(double iprime, double zeta) {
  MaximizeOptions opts;
  opts.lo = 0.0;
  opts.hi = kPi / 2.0;
  opts.include_hi = true;
  return maximize_fisher(two_photon_family(iprime, zeta), opts).argmax_theta;
}

double optimal_theta(double iprime, double zeta) {
  check_unit(iprime, "optimal_theta: iprime");
  check_zeta(zeta);
  const double denominator = iprime * iprime * (zeta - 1.0) * (zeta - 1.0) - 1.0;
  if (denominator == 0.0) return optimal_theta_numeric(iprime, zeta);
  const double ratio = (zeta * zeta - 2.0 * zeta) / denominator;
  return std::atan(std::pow(std::max(ratio, 0.0), 0.25));
}

OptimalFisher optimal_fisher_two_photon(double iprime, double zeta) {
  check_unit(iprime, "optimal_fisher_two_photon: iprime");
  check_zeta(zeta);
  MaximizeOptions opts;
  opts.lo = 0.0;
  opts.hi = kPi / 2.0;
  opts.include_hi = true;
  const FisherReport report = maximize_fisher(two_photon_family(iprime, zeta), opts);

  OptimalFisher out;
  out.fisher = report.max_fisher;
  out.theta = report.argmax_theta;
  out.closed_form_theta = optimal_theta(iprime, zeta);
  const double z1 = (1.0 - zeta) * (1.0 - zeta);
  // Both factors under the root are nonpositive on the domain.
  const double radicand = zeta * (zeta - 2.0) * (iprime * iprime * z1 - 1.0);
  const double root = std::sqrt(std::max(radicand, 0.0));
  out.closed_form_positive = 2.0 + 2.0 * iprime * z1 + 2.0 * root;
  out.closed_form_negative = 2.0 + 2.0 * iprime * z1 - 2.0 * root;
  const bool pos = std::abs(out.closed_form_positive - out.fisher) <= 1e-6;
  const bool neg = std::abs(out.closed_form_negative - out.fisher) <= 1e-6;
  out.matched = pos && neg ? SqrtBranch::kBoth
                : pos      ? SqrtBranch::kPositive
                : neg      ? SqrtBranch::kNegative
                           : SqrtBranch::kNeither;
  return out;
}

std::vector<double> predicted_fprime_curve(std::span<const double> iprimes, double zeta) {
  check_zeta(zeta);
  std::vector<double> out(iprimes.size());
  for (std::size_t i = 0; i < iprimes.size(); ++i) {
    check_unit(iprimes[i], "predicted_fprime_curve: iprime");
    const double z1 = (1.0 - zeta) * (1.0 - zeta);
    const double radicand = zeta * (zeta - 2.0) * (iprimes[i] * iprimes[i] * z1 - 1.0);
    // The lower root is the attained maximum; the upper one overshoots.
    out[i] = 1.0 + iprimes[i] * z1 - std::sqrt(std::max(radicand, 0.0));
  }
  return out;
}

double lambda4_from_p4(double p4) {
  if (!(p4 >= 0.5 - 1e-12 && p4 <= 0.75 + 1e-12)) {
    throw InvalidArgument("lambda4_from_p4: p4 outside [1/2, 3/4]");
  }
  return std::max(0.0, (2.0 * p4 - 1.0) / (2.0 - 2.0 * p4));
}

double p4_from_lambda4(double lambda4) {
  if (!(lambda4 > 0.0 && lambda4 <= 1.0)) throw InvalidArgument("p4_from_lambda4: lambda4 outside (0, 1]");
  return (2.0 * lambda4 + 1.0) / (2.0 * lambda4 + 2.0);
}

FourPhotonPrediction predict_four_photon_extremes(double lambda4, double zeta) {
  if (!(lambda4 > 0.0 && lambda4 <= 1.0)) {
    throw InvalidArgument("predict_four_photon_extremes: lambda4 outside (0, 1]");
  }
  check_zeta(zeta);
  MaximizeOptions opts;
  opts.lo = 0.0;
  opts.hi = kPi;
  FourPhotonPrediction out;
  out.full_overlap = maximize_fisher(four_photon_family(lambda4, 1.0, zeta), opts);
  out.zero_overlap = maximize_fisher(four_photon_family(lambda4, 0.0, zeta), opts);
  out.fprime_full_overlap = out.full_overlap.per_photon;
  out.fprime_zero_overlap = out.zero_overlap.per_photon;
  return out;
}

const char* to_string(SqrtBranch branch) {
  switch (branch) {
    case SqrtBranch::kPositive: return "positive";
    case SqrtBranch::kNegative: return "negative";
    case SqrtBranch::kBoth: return "both";
    case SqrtBranch::kNeither: return "neither";
  }
  return "neither";
}

nlohmann::json to_json(const FisherReport& report) {
  return {{"theta", report.theta_grid},
          {"fisher", report.fisher_values},
          {"max", report.max_fisher},
          {"argmax", report.argmax_theta},
          {"per_photon", report.per_photon}};
}

}  // namespace fringelab::metrology
