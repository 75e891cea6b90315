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

#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <json.hpp>

#include "fringelab/fock.hpp"

namespace fringelab::metrology {

inline constexpr double kDefaultStep = 1e-4;
/// Probabilities below this are treated as zero by the Fisher sum.
inline constexpr double kProbabilityFloor = 1e-14;

/// p(class | theta) for an ordered class list. `derivatives` is optional; when
/// present it supplies dp/dtheta analytically and replaces finite differences.
/// Both callables must be free of side effects.
struct FringeFamily {
  std::vector<int> classes;
  std::function<std::vector<double>(double)> probabilities;
  std::function<std::vector<double>(double)> derivatives;
  double period = 2.0 * std::numbers::pi;
  int photons = 2;
  /// Classes below this probability are left out of the Fisher sum.
  double probability_floor = kProbabilityFloor;
};

struct FisherValue {
  double value = 0.0;
  bool singular = false;    // a vanishing probability had a nonvanishing slope
  bool unresolved = false;  // halving the step moved the value by more than 1e-4 (relative)
};

/// sum_r (dp_r/dtheta)^2 / p_r. Slopes come from analytic derivatives when the
/// family has them, else from Richardson-combined central differences of
/// half-widths `step` and `step`/2.
FisherValue fisher_at(const FringeFamily& family, double theta, double step = kDefaultStep);

struct FisherReport {
  std::vector<double> theta_grid;
  std::vector<double> fisher_values;
  double max_fisher = 0.0;
  double argmax_theta = 0.0;
  double per_photon = 0.0;
  int photons = 2;
};

struct MaximizeOptions {
  int grid_points = 256;
  double tolerance = 1e-8;
  double step = kDefaultStep;
  /// Search interval; hi <= lo means [0, period).
  double lo = 0.0;
  double hi = 0.0;
  /// Include hi itself in the grid (closed interval).
  bool include_hi = false;
};

/// Grid scan followed by golden-section refinement around the best grid point.
FisherReport maximize_fisher(const FringeFamily& family, const MaximizeOptions& options = {});

enum class ClassScheme { kAbsDelta, kSignedDelta };

/// Noise-mixed two-photon fringe in closed form, classes {0, 2}:
/// p(0) = (1 - zeta)[3 - I' + (1 + I') cos 2t]/4 + zeta/2, p(2) = 1 - p(0).
FringeFamily two_photon_family(double iprime, double zeta);

/// Rotates the probe, counts photons and mixes in background uniformly over the
/// classes of `scheme`.
FringeFamily simulated_family(fock::MultimodeFockState state, double zeta,
                              ClassScheme scheme = ClassScheme::kAbsDelta);
FringeFamily simulated_family(fock::StateEnsemble ensemble, double zeta,
                              ClassScheme scheme = ClassScheme::kAbsDelta);

/// Lambda4 mixture model of the four-photon probe at tau in {0, 1}, |delta| classes.
FringeFamily four_photon_family(double lambda4, double cross_overlap, double zeta);

/// 2 (n + I n^2), the theta -> 0 limit for |n>|n> with overlap I.
double small_angle_fisher(int n, double indist);

/// Closed-form most sensitive point of the noise-mixed two-photon fringe, in
/// [0, pi/2]. At the 0/0 corner (I' = 1, zeta = 0) returns the numeric argmax.
double optimal_theta(double iprime, double zeta);

/// Numeric argmax of the two-photon Fisher information over [0, pi/2].
double optimal_theta_numeric(double iprime, double zeta);

enum class SqrtBranch { kPositive, kNegative, kBoth, kNeither };

struct OptimalFisher {
  double fisher = 0.0;  // numeric maximum over theta
  double theta = 0.0;   // numeric argmax in [0, pi/2]
  double closed_form_theta = 0.0;
  double closed_form_positive = 0.0;  // 2 + 2I'(1-z)^2 + 2 sqrt(...)
  double closed_form_negative = 0.0;  // 2 + 2I'(1-z)^2 - 2 sqrt(...)
  SqrtBranch matched = SqrtBranch::kNeither;
};

OptimalFisher optimal_fisher_two_photon(double iprime, double zeta);

/// Optimal two-photon Fisher information per photon at each I', from the lower
/// root 1 + I'(1-z)^2 - sqrt(z(2-z)(1 - I'^2 (1-z)^2)).
std::vector<double> predicted_fprime_curve(std::span<const double> iprimes, double zeta);

/// (2 p4 - 1) / (2 - 2 p4); p4 in [1/2, 3/4].
double lambda4_from_p4(double p4);
/// (2 L + 1) / (2 L + 2); L in (0, 1].
double p4_from_lambda4(double lambda4);

struct FourPhotonPrediction {
  double fprime_full_overlap = 0.0;
  double fprime_zero_overlap = 0.0;
  FisherReport full_overlap;
  FisherReport zero_overlap;
};

/// Maximum four-photon Fisher information per photon over theta in [0, pi)
/// at tau = 1 and tau = 0, with K = 3 uniform background mixing.
FourPhotonPrediction predict_four_photon_extremes(double lambda4, double zeta);

const char* to_string(SqrtBranch branch);
nlohmann::json to_json(const FisherReport& report);

}  // namespace fringelab::metrology
