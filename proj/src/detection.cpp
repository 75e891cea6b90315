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

#include "fringelab/detection.hpp"

#include <cmath>
#include <cstdlib>
#include <random>

#include "fringelab/errors.hpp"

namespace fringelab::detection {

OutcomeDistribution::OutcomeDistribution(int total_photons, std::map<Pattern, double> probs)
    : total_photons_(total_photons), probs_(std::move(probs)) {
  if (total_photons_ < 0) throw InvalidArgument("OutcomeDistribution: negative photon number");
  double total = 0.0;
  for (const auto& [pattern, p] : probs_) {
    if (pattern.first < 0 || pattern.second < 0 ||
        pattern.first + pattern.second != total_photons_) {
      throw InvalidArgument("OutcomeDistribution: pattern does not sum to the photon number");
    }
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidArgument("OutcomeDistribution: probabilities must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw InvalidArgument("OutcomeDistribution: not normalized");
}

double OutcomeDistribution::at(int n1, int n2) const {
  const auto it = probs_.find({n1, n2});
  return it == probs_.end() ? 0.0 : it->second;
}

void NoiseAndEfficiencyConfig::validate() const {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw InvalidArgument("zeta must lie in [0, 1)");
  if (bins_per_arm < 1) throw InvalidArgument("bins_per_arm must be positive");
}

double NoiseAndEfficiencyConfig::pattern_efficiency(int n1, int n2) const {
  return multiplex_efficiency(n1, bins_per_arm) * multiplex_efficiency(n2, bins_per_arm);
}

namespace {

std::map<Pattern, double> empty_patterns(int total) {
  std::map<Pattern, double> probs;
  for (int n1 = 0; n1 <= total; ++n1) probs[{n1, total - n1}] = 0.0;
  return probs;
}

void accumulate(const fock::MultimodeFockState& state, double weight,
                std::map<Pattern, double>& probs) {
  const std::size_t m = state.internal_modes();
  for (const auto& [occ, amp] : state.amplitudes()) {
    int n1 = 0;
    for (std::size_t i = 0; i < m; ++i) n1 += occ[i];
    probs[{n1, state.total_photons() - n1}] += weight * std::norm(amp);
  }
}

}  // namespace

OutcomeDistribution outcome_distribution(const fock::MultimodeFockState& state) {
  auto probs = empty_patterns(state.total_photons());
  accumulate(state, 1.0, probs);
  return OutcomeDistribution(state.total_photons(), std::move(probs));
}

OutcomeDistribution outcome_distribution(const fock::StateEnsemble& ensemble) {
  auto probs = empty_patterns(ensemble.total_photons());
  for (const auto& c : ensemble.components()) accumulate(c.state, c.weight, probs);
  return OutcomeDistribution(ensemble.total_photons(), std::move(probs));
}

ClassProbabilities aggregate_by_abs_delta(const OutcomeDistribution& dist) {
  ClassProbabilities out;
  const int n = dist.total_photons();
  for (int d = n % 2; d <= n; d += 2) out[d] = 0.0;
  for (const auto& [pattern, p] : dist.probs()) out[std::abs(pattern.first - pattern.second)] += p;
  return out;
}

ClassProbabilities aggregate_by_signed_delta(const OutcomeDistribution& dist) {
  ClassProbabilities out;
  const int n = dist.total_photons();
  for (int d = -n; d <= n; d += 2) out[d] = 0.0;
  for (const auto& [pattern, p] : dist.probs()) out[pattern.first - pattern.second] += p;
  return out;
}

ClassProbabilities add_background(const ClassProbabilities& classes, double zeta) {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw InvalidArgument("add_background: zeta outside [0, 1)");
  if (classes.empty()) throw InvalidArgument("add_background: no classes");
  const double uniform = zeta / static_cast<double>(classes.size());
  ClassProbabilities out;
  for (const auto& [label, p] : classes) out[label] = p * (1.0 - zeta) + uniform;
  return out;
}

double background_fraction(double matched_rate, double accidental_rate) {
  if (!(matched_rate > 0.0)) throw InvalidArgument("background_fraction: matched rate must be positive");
  if (!(accidental_rate >= 0.0) || accidental_rate >= matched_rate) {
    throw InvalidArgument("background_fraction: need 0 <= accidental < matched");
  }
  return accidental_rate / matched_rate;
}

double multiplex_efficiency(int n, int m) {
  if (m < 1) throw InvalidArgument("multiplex_efficiency: bin count must be positive");
  if (n < 0 || n > m) throw InvalidArgument("multiplex_efficiency: pattern undetectable (n > m)");
  double eta = 1.0;
  for (int k = 0; k < n; ++k) eta *= static_cast<double>(m - k) / static_cast<double>(m);
  return eta;
}

double class_efficiency(int total_photons, int abs_delta, int bins_per_arm) {
  if (abs_delta < 0 || abs_delta > total_photons || (total_photons - abs_delta) % 2 != 0) {
    throw InvalidArgument("class_efficiency: |delta| incompatible with photon number");
  }
  const int n1 = (total_photons + abs_delta) / 2;
  return multiplex_efficiency(n1, bins_per_arm) *
         multiplex_efficiency(total_photons - n1, bins_per_arm);
}

ClassCounts sample_counts(const ClassProbabilities& classes, double expected_total,
                          std::uint64_t seed) {
  if (!(expected_total > 0.0) || !std::isfinite(expected_total)) {
    throw InvalidArgument("sample_counts: expected total must be positive");
  }
  std::mt19937_64 rng(seed);
  ClassCounts out;
  for (const auto& [label, p] : classes) {
    if (!(p >= 0.0)) throw InvalidArgument("sample_counts: negative probability");
    const double mean = expected_total * p;
    if (mean > 0.0) {
      std::poisson_distribution<std::int64_t> draw(mean);
      out[label] = draw(rng);
    } else {
      out[label] = 0;
    }
  }
  return out;
}

nlohmann::json to_json(const OutcomeDistribution& dist) {
  nlohmann::json probs = nlohmann::json::array();
  for (const auto& [pattern, p] : dist.probs()) probs.push_back({pattern.first, pattern.second, p});
  return {{"n_total", dist.total_photons()}, {"probs", std::move(probs)}};
}

OutcomeDistribution distribution_from_json(const nlohmann::json& j) {
  std::map<Pattern, double> probs;
  for (const auto& row : j.at("probs")) {
    probs[{row.at(0).get<int>(), row.at(1).get<int>()}] += row.at(2).get<double>();
  }
  return OutcomeDistribution(j.at("n_total").get<int>(), std::move(probs));
}

}  // namespace fringelab::detection
