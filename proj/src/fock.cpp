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

#include "fringelab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fringelab/errors.hpp"

namespace fringelab::fock {

namespace {

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

void check_internal_modes(std::size_t internal_modes) {
  if (internal_modes == 0) throw InvalidArgument("MultimodeFockState: no internal modes");
  if (internal_modes > kMaxInternalModes) {
    throw ResourceLimitError("MultimodeFockState: more than " + std::to_string(kMaxInternalModes) +
                             " internal modes");
  }
}

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " outside [0, 1]");
}

// One internal mode's share of a rotated term: photons (n1, n2) on the two
// paths become a superposition over (p, q) with p + q = n1 + n2.
struct SplitTerm {
  int p;
  int q;
  double amplitude;
};

std::vector<SplitTerm> rotate_mode(int n1, int n2, double c, double s) {
  const int total = n1 + n2;
  std::vector<double> poly(static_cast<std::size_t>(total) + 1, 0.0);
  // (c x + s y)^n1 (-s x + c y)^n2, indexed by the power of x.
  for (int a = 0; a <= n1; ++a) {
    const double left = binomial(n1, a) * std::pow(c, a) * std::pow(s, n1 - a);
    for (int b = 0; b <= n2; ++b) {
      const double right = binomial(n2, b) * std::pow(-s, b) * std::pow(c, n2 - b);
      poly[static_cast<std::size_t>(a + b)] += left * right;
    }
  }
  std::vector<SplitTerm> out;
  const double inv = 1.0 / std::sqrt(factorial(n1) * factorial(n2));
  for (int p = 0; p <= total; ++p) {
    const double coeff = poly[static_cast<std::size_t>(p)];
    if (coeff == 0.0) continue;
    out.push_back({p, total - p, coeff * std::sqrt(factorial(p) * factorial(total - p)) * inv});
  }
  return out;
}

// a^dagger on `mode`, scaled by coeff, accumulated into out.
void add_creation(const AmplitudeMap& in, std::size_t mode, Amplitude coeff, AmplitudeMap& out) {
  for (const auto& [occ, amp] : in) {
    Occupation next = occ;
    next[mode] = static_cast<std::uint8_t>(next[mode] + 1);
    out[next] += coeff * std::sqrt(static_cast<double>(next[mode])) * amp;
  }
}

}  // namespace

MultimodeFockState::MultimodeFockState(std::size_t internal_modes, AmplitudeMap amplitudes)
    : internal_modes_(internal_modes), amplitudes_(std::move(amplitudes)) {
  check_internal_modes(internal_modes_);
  if (amplitudes_.empty()) throw InvalidArgument("MultimodeFockState: no terms");
  bool first = true;
  for (const auto& [occ, amp] : amplitudes_) {
    if (occ.size() != mode_count()) {
      throw InvalidArgument("MultimodeFockState: occupation vector has wrong length");
    }
    if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag())) {
      throw InvalidArgument("MultimodeFockState: non-finite amplitude");
    }
    const int n = std::accumulate(occ.begin(), occ.end(), 0);
    if (first) {
      total_photons_ = n;
      first = false;
    } else if (n != total_photons_) {
      throw InvalidArgument("MultimodeFockState: terms have different photon numbers");
    }
  }
  if (total_photons_ > kMaxPhotons) {
    throw ResourceLimitError("MultimodeFockState: more than " + std::to_string(kMaxPhotons) +
                             " photons");
  }
  if (std::abs(norm() - 1.0) > 1e-10) throw InvalidArgument("MultimodeFockState: not normalized");
}

MultimodeFockState MultimodeFockState::normalized(std::size_t internal_modes,
                                                  AmplitudeMap amplitudes) {
  std::erase_if(amplitudes, [](const auto& kv) { return kv.second == Amplitude{}; });
  double n2 = 0.0;
  for (const auto& [occ, amp] : amplitudes) n2 += std::norm(amp);
  if (!(n2 > 0.0)) throw InvalidArgument("MultimodeFockState: zero vector");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& [occ, amp] : amplitudes) amp *= scale;
  return MultimodeFockState(internal_modes, std::move(amplitudes));
}

Amplitude MultimodeFockState::amplitude(const Occupation& occupation) const {
  const auto it = amplitudes_.find(occupation);
  return it == amplitudes_.end() ? Amplitude{} : it->second;
}

double MultimodeFockState::norm() const {
  double n2 = 0.0;
  for (const auto& [occ, amp] : amplitudes_) n2 += std::norm(amp);
  return std::sqrt(n2);
}

std::size_t MultimodeFockState::index_of(ModeLabel label) const {
  if (label.internal >= internal_modes_) throw InvalidArgument("ModeLabel: internal index out of range");
  return (label.path == Path::kOne ? 0 : internal_modes_) + label.internal;
}

Occupation MultimodeFockState::occupation(
    std::initializer_list<std::pair<ModeLabel, int>> entries) const {
  Occupation occ(mode_count(), 0);
  for (const auto& [label, count] : entries) {
    occ[index_of(label)] = static_cast<std::uint8_t>(count);
  }
  return occ;
}

StateEnsemble::StateEnsemble(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("StateEnsemble: empty ensemble");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw InvalidArgument("StateEnsemble: weights must lie in (0, 1]");
    }
    if (c.state.total_photons() != components_.front().state.total_photons()) {
      throw InvalidArgument("StateEnsemble: components have different photon numbers");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("StateEnsemble: weights must sum to 1");
}

MultimodeFockState dual_fock_mismatched(int n, double indist) {
  if (n < 1) throw InvalidArgument("dual_fock_mismatched: n must be positive");
  check_unit_interval(indist, "dual_fock_mismatched: indistinguishability");
  if (2 * n > kMaxPhotons) throw ResourceLimitError("dual_fock_mismatched: too many photons");
  AmplitudeMap terms;
  for (int k = 0; k <= n; ++k) {
    const double w = binomial(n, n - k) * std::pow(indist, n - k) * std::pow(1.0 - indist, k);
    if (w == 0.0) continue;
    // modes: [f1, fperp1, f2, fperp2]
    Occupation occ{static_cast<std::uint8_t>(n), 0, static_cast<std::uint8_t>(n - k),
                   static_cast<std::uint8_t>(k)};
    terms.emplace(std::move(occ), std::sqrt(w));
  }
  return MultimodeFockState(2, std::move(terms));
}

MultimodeFockState spdc_two_photon(double iprime) {
  check_unit_interval(iprime, "spdc_two_photon: iprime");
  return dual_fock_mismatched(1, iprime);
}

FourPhotonState four_photon_schmidt_expanded(const spectral::SchmidtSpectrum& spectrum,
                                             double cross_overlap) {
  check_unit_interval(cross_overlap, "four_photon_schmidt: cross_overlap");
  const std::size_t s = spectrum.size();
  if (s > kMaxSchmidtModes) {
    throw ResourceLimitError("four_photon_schmidt: more than " + std::to_string(kMaxSchmidtModes) +
                             " Schmidt modes");
  }
  const std::size_t internal = 2 * s;
  const double tau = cross_overlap;
  const double perp = std::sqrt(std::max(0.0, 1.0 - tau * tau));
  const auto& lam = spectrum.lambdas();

  AmplitudeMap state{{Occupation(2 * internal, 0), Amplitude{1.0}}};
  for (int pair = 0; pair < 2; ++pair) {
    AmplitudeMap next;
    for (std::size_t i = 0; i < s; ++i) {
      if (lam[i] == 0.0) continue;
      AmplitudeMap created;
      add_creation(state, i, lam[i], created);
      if (tau != 0.0) add_creation(created, internal + i, tau, next);
      if (perp != 0.0) add_creation(created, internal + s + i, perp, next);
    }
    state = std::move(next);
  }
  double n2 = 0.0;
  for (const auto& [occ, amp] : state) n2 += std::norm(amp);
  return {MultimodeFockState::normalized(internal, std::move(state)), std::sqrt(n2)};
}

MultimodeFockState four_photon_schmidt(const spectral::SchmidtSpectrum& spectrum,
                                       double cross_overlap) {
  return four_photon_schmidt_expanded(spectrum, cross_overlap).state;
}

MultimodeFockState apply_path_rotation_per_mode(const MultimodeFockState& state,
                                                std::span<const double> thetas) {
  const std::size_t m = state.internal_modes();
  if (thetas.size() != m) throw InvalidArgument("apply_path_rotation: one angle per internal mode");
  std::vector<double> c(m), s(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(thetas[i])) throw InvalidArgument("apply_path_rotation: non-finite angle");
    c[i] = std::cos(0.5 * thetas[i]);
    s[i] = std::sin(0.5 * thetas[i]);
  }

  AmplitudeMap out;
  std::vector<std::vector<SplitTerm>> per_mode(m);
  std::vector<std::size_t> cursor(m);
  for (const auto& [occ, amp] : state.amplitudes()) {
    for (std::size_t i = 0; i < m; ++i) per_mode[i] = rotate_mode(occ[i], occ[m + i], c[i], s[i]);
    // Odometer over the per-mode expansions.
    std::fill(cursor.begin(), cursor.end(), 0);
    Occupation next(occ.size(), 0);
    for (;;) {
      Amplitude a = amp;
      for (std::size_t i = 0; i < m; ++i) {
        const SplitTerm& t = per_mode[i][cursor[i]];
        next[i] = static_cast<std::uint8_t>(t.p);
        next[m + i] = static_cast<std::uint8_t>(t.q);
        a *= t.amplitude;
      }
      out[next] += a;
      std::size_t i = 0;
      for (; i < m; ++i) {
        if (++cursor[i] < per_mode[i].size()) break;
        cursor[i] = 0;
      }
      if (i == m) break;
    }
  }
  return MultimodeFockState(m, std::move(out));
}

MultimodeFockState apply_path_rotation(const MultimodeFockState& state, double theta) {
  const std::vector<double> thetas(state.internal_modes(), theta);
  return apply_path_rotation_per_mode(state, thetas);
}

StateEnsemble apply_path_rotation(const StateEnsemble& ensemble, double theta) {
  std::vector<StateEnsemble::Component> out;
  out.reserve(ensemble.components().size());
  for (const auto& c : ensemble.components()) {
    out.push_back({c.weight, apply_path_rotation(c.state, theta)});
  }
  return StateEnsemble(std::move(out));
}

StateEnsemble mix(std::vector<StateEnsemble::Component> components) {
  if (components.empty()) throw InvalidArgument("mix: empty ensemble");
  return StateEnsemble(std::move(components));
}

StateEnsemble four_photon_lambda4_mixture(double lambda4, double cross_overlap) {
  check_unit_interval(lambda4, "four_photon_lambda4_mixture: lambda4");
  if (cross_overlap != 0.0 && cross_overlap != 1.0) {
    throw InvalidArgument("four_photon_lambda4_mixture: cross_overlap must be 0 or 1");
  }
  const double same_mode = 2.0 * lambda4 / (1.0 + lambda4);
  const double distinct = 1.0 - same_mode;
  std::vector<StateEnsemble::Component> parts;
  if (cross_overlap == 1.0) {
    // modes: [a1, b1, a2, b2]
    if (same_mode > 0.0) parts.push_back({same_mode, MultimodeFockState(2, {{{2, 0, 2, 0}, 1.0}})});
    if (distinct > 0.0) parts.push_back({distinct, MultimodeFockState(2, {{{1, 1, 1, 1}, 1.0}})});
  } else {
    // modes: [a1, b1, a'1, b'1, a2, b2, a'2, b'2] with primes orthogonal partners
    if (same_mode > 0.0) {
      parts.push_back({same_mode, MultimodeFockState(4, {{{2, 0, 0, 0, 0, 0, 2, 0}, 1.0}})});
    }
    if (distinct > 0.0) {
      parts.push_back({distinct, MultimodeFockState(4, {{{1, 1, 0, 0, 0, 0, 1, 1}, 1.0}})});
    }
  }
  return StateEnsemble(std::move(parts));
}

MultimodeFockState relabel_internal(const MultimodeFockState& state,
                                    std::span<const std::size_t> permutation) {
  const std::size_t m = state.internal_modes();
  if (permutation.size() != m) throw InvalidArgument("relabel_internal: permutation size mismatch");
  std::vector<bool> seen(m, false);
  for (std::size_t target : permutation) {
    if (target >= m || seen[target]) throw InvalidArgument("relabel_internal: not a permutation");
    seen[target] = true;
  }
  AmplitudeMap out;
  for (const auto& [occ, amp] : state.amplitudes()) {
    Occupation next(occ.size(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      next[permutation[i]] = occ[i];
      next[m + permutation[i]] = occ[m + i];
    }
    out.emplace(std::move(next), amp);
  }
  return MultimodeFockState(m, std::move(out));
}

nlohmann::json to_json(const MultimodeFockState& state) {
  const std::size_t m = state.internal_modes();
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [occ, amp] : state.amplitudes()) {
    nlohmann::json occupations = nlohmann::json::array();
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (occ[k] == 0) continue;
      const int path = k < m ? 1 : 2;
      occupations.push_back({path, k % m, occ[k]});
    }
    terms.push_back({{"occupations", std::move(occupations)}, {"re", amp.real()}, {"im", amp.imag()}});
  }
  return {{"internal_modes", m}, {"terms", std::move(terms)}};
}

MultimodeFockState state_from_json(const nlohmann::json& j) {
  const nlohmann::json* terms = &j;
  std::size_t m = 0;
  if (j.is_object()) {
    m = j.at("internal_modes").get<std::size_t>();
    terms = &j.at("terms");
  }
  if (!terms->is_array()) throw InvalidArgument("state_from_json: expected a list of terms");
  if (m == 0) {
    for (const auto& t : *terms) {
      for (const auto& o : t.at("occupations")) m = std::max(m, o.at(1).get<std::size_t>() + 1);
    }
  }
  check_internal_modes(m);
  AmplitudeMap amplitudes;
  for (const auto& t : *terms) {
    Occupation occ(2 * m, 0);
    for (const auto& o : t.at("occupations")) {
      const int path = o.at(0).get<int>();
      const auto internal = o.at(1).get<std::size_t>();
      const int count = o.at(2).get<int>();
      if ((path != 1 && path != 2) || internal >= m || count < 0 || count > kMaxPhotons) {
        throw InvalidArgument("state_from_json: bad occupation entry");
      }
      occ[(path == 1 ? 0 : m) + internal] = static_cast<std::uint8_t>(count);
    }
    amplitudes[occ] += Amplitude(t.at("re").get<double>(), t.at("im").get<double>());
  }
  return MultimodeFockState(m, std::move(amplitudes));
}

}  // namespace fringelab::fock
