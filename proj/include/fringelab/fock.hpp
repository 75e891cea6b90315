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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fringelab/spectral.hpp"

namespace fringelab::fock {

inline constexpr int kMaxPhotons = 8;
inline constexpr std::size_t kMaxInternalModes = 24;
inline constexpr std::size_t kMaxSchmidtModes = 12;

enum class Path : std::uint8_t { kOne = 1, kTwo = 2 };

struct ModeLabel {
  Path path = Path::kOne;
  std::size_t internal = 0;
};

/// Photon counts indexed by (path - 1) * internal_modes + internal.
using Occupation = std::vector<std::uint8_t>;
using Amplitude = std::complex<double>;
using AmplitudeMap = std::map<Occupation, Amplitude>;

/// Normalized superposition of occupation configurations over two paths and
/// `internal_modes` orthonormal internal modes. Immutable once built.
class MultimodeFockState {
 public:
  /// Validates sizes, photon-number conservation and unit norm (1e-10).
  /// Throws ResourceLimitError past kMaxPhotons / kMaxInternalModes.
  MultimodeFockState(std::size_t internal_modes, AmplitudeMap amplitudes);

  /// Drops exact zeros and rescales to unit norm before validation.
  static MultimodeFockState normalized(std::size_t internal_modes, AmplitudeMap amplitudes);

  std::size_t internal_modes() const noexcept { return internal_modes_; }
  std::size_t mode_count() const noexcept { return 2 * internal_modes_; }
  int total_photons() const noexcept { return total_photons_; }
  const AmplitudeMap& amplitudes() const noexcept { return amplitudes_; }
  Amplitude amplitude(const Occupation& occupation) const;
  double norm() const;

  std::size_t index_of(ModeLabel label) const;
  /// Occupation with the given (label, count) entries and zeros elsewhere.
  Occupation occupation(std::initializer_list<std::pair<ModeLabel, int>> entries) const;

 private:
  std::size_t internal_modes_;
  int total_photons_ = 0;
  AmplitudeMap amplitudes_;
};

/// Convex mixture of states sharing one photon number.
class StateEnsemble {
 public:
  struct Component {
    double weight;
    MultimodeFockState state;
  };

  /// Weights must lie in (0, 1] and sum to 1 within 1e-12.
  explicit StateEnsemble(std::vector<Component> components);

  const std::vector<Component>& components() const noexcept { return components_; }
  int total_photons() const { return components_.front().state.total_photons(); }

 private:
  std::vector<Component> components_;
};

/// |n>_{f,1} sum_k sqrt(C(n, n-k) I^(n-k) (1-I)^k) |n-k>_{f,2} |k>_{fperp,2}.
/// Internal mode 0 is f and 1 is f-perp.
MultimodeFockState dual_fock_mismatched(int n, double indist);

/// One photon in f on path 1 and one in sqrt(I') f + sqrt(1 - I') f-perp on path 2.
MultimodeFockState spdc_two_photon(double iprime);

struct FourPhotonState {
  MultimodeFockState state;
  double unnormalized_norm;  // sqrt(2 + 2 Lambda4) for tau in {0, 1}
};

/// (sum_i lambda_i a1[f_i] a2[g_i])^2 |0> with g_i = tau f_i + sqrt(1 - tau^2) f_i-perp,
/// normalized. Internal modes 0..S-1 are f_i and S..2S-1 are f_i-perp.
FourPhotonState four_photon_schmidt_expanded(const spectral::SchmidtSpectrum& spectrum,
                                             double cross_overlap);
MultimodeFockState four_photon_schmidt(const spectral::SchmidtSpectrum& spectrum,
                                       double cross_overlap);

/// Applies a1_i -> cos(t/2) a1_i + sin(t/2) a2_i, a2_i -> -sin(t/2) a1_i + cos(t/2) a2_i
/// to every internal mode i.
MultimodeFockState apply_path_rotation(const MultimodeFockState& state, double theta);

/// As apply_path_rotation with an individual angle for each internal mode.
MultimodeFockState apply_path_rotation_per_mode(const MultimodeFockState& state,
                                                std::span<const double> thetas);

StateEnsemble apply_path_rotation(const StateEnsemble& ensemble, double theta);

/// Validating passthrough; throws InvalidArgument when empty.
StateEnsemble mix(std::vector<StateEnsemble::Component> components);

/// Two-component Lambda4 mixture reproducing the outcome statistics of the
/// four-photon state for tau in {0, 1}: weight 2L/(1+L) on two photon pairs in
/// one Schmidt mode and (1-L)/(1+L) on pairs in distinct modes.
StateEnsemble four_photon_lambda4_mixture(double lambda4, double cross_overlap);

/// Permutes internal labels: new label of internal mode i is permutation[i].
MultimodeFockState relabel_internal(const MultimodeFockState& state,
                                    std::span<const std::size_t> permutation);

nlohmann::json to_json(const MultimodeFockState& state);
/// Accepts the object form written by to_json, or a bare list of terms
/// (internal mode count then inferred from the largest label).
MultimodeFockState state_from_json(const nlohmann::json& j);

}  // namespace fringelab::fock
