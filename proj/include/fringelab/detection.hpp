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
#include <utility>

#include <json.hpp>

#include "fringelab/errors.hpp"
#include "fringelab/fock.hpp"

namespace fringelab::detection {

/// Pattern (n1, n2) of photon counts on the two output paths.
using Pattern = std::pair<int, int>;

/// Probability per class label (|n1 - n2| or signed n1 - n2).
using ClassProbabilities = std::map<int, double>;
using ClassCounts = std::map<int, std::int64_t>;

/// Number-resolving outcome statistics at fixed total photon number.
class OutcomeDistribution {
 public:
  /// Requires n1 + n2 = total for every key, p >= 0 and sum p = 1 within 1e-10.
  OutcomeDistribution(int total_photons, std::map<Pattern, double> probs);

  int total_photons() const noexcept { return total_photons_; }
  const std::map<Pattern, double>& probs() const noexcept { return probs_; }
  double at(int n1, int n2) const;

 private:
  int total_photons_;
  std::map<Pattern, double> probs_;
};

struct NoiseAndEfficiencyConfig {
  double zeta = 0.0;     // background count fraction in [0, 1)
  int bins_per_arm = 4;  // multiplexed detector bins per output path

  void validate() const;
  /// eta for pattern (n1, n2): D(n1) D(n2). Throws when either exceeds the bins.
  double pattern_efficiency(int n1, int n2) const;
};

/// Sums |amplitude|^2 over internal configurations sharing path totals. Every
/// pattern with n1 + n2 = N appears, including zero-probability ones.
OutcomeDistribution outcome_distribution(const fock::MultimodeFockState& state);
OutcomeDistribution outcome_distribution(const fock::StateEnsemble& ensemble);

/// Classes |n1 - n2| in {N mod 2, N mod 2 + 2, ..., N}.
ClassProbabilities aggregate_by_abs_delta(const OutcomeDistribution& dist);
/// Classes n1 - n2 in {-N, -N + 2, ..., N}.
ClassProbabilities aggregate_by_signed_delta(const OutcomeDistribution& dist);

/// p (1 - zeta) + zeta / K over the K classes present.
ClassProbabilities add_background(const ClassProbabilities& classes, double zeta);

/// Accidental over matched coincidence rate.
double background_fraction(double matched_rate, double accidental_rate);

/// Probability that n photons entering m equal bins land in distinct bins:
/// m! / ((m - n)! m^n).
double multiplex_efficiency(int n, int m);

/// Efficiency of an |n1 - n2| class at total N (the two mirrored patterns share it).
double class_efficiency(int total_photons, int abs_delta, int bins_per_arm);

/// raw / eta per key. Throws InvalidArgument for missing or nonpositive eta.
template <typename Key>
std::map<Key, double> correct_counts(const std::map<Key, double>& raw,
                                     const std::map<Key, double>& eta) {
  std::map<Key, double> out;
  for (const auto& [key, count] : raw) {
    const auto it = eta.find(key);
    if (it == eta.end() || !(it->second > 0.0)) {
      throw InvalidArgument("correct_counts: efficiency must be positive for every outcome");
    }
    out.emplace(key, count / it->second);
  }
  return out;
}

/// Independent Poisson draws with means expected_total * p(class).
ClassCounts sample_counts(const ClassProbabilities& classes, double expected_total,
                          std::uint64_t seed);

nlohmann::json to_json(const OutcomeDistribution& dist);
OutcomeDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace fringelab::detection
