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

#include "fringelab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>

#include "fringelab/detection.hpp"
#include "fringelab/errors.hpp"
#include "fringelab/estimation.hpp"
#include "fringelab/fock.hpp"
#include "fringelab/io.hpp"
#include "fringelab/metrology.hpp"
#include "fringelab/parallel.hpp"
#include "fringelab/spectral.hpp"

namespace fringelab::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Typed access to one JSON object; keys never read are rejected by finish().
class Fields {
 public:
  Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "config" : prefix_, "must be an object");
  }

  std::string name(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(name(key), "required");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(name(key), "required");
      return *fallback;
    }
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(name(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(name(key), "must be finite");
    return d;
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(name(key), "required");
      return *fallback;
    }
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(name(key), "must be an integer");
    return v.get<std::int64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(name(key), "required");
      return *fallback;
    }
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(name(key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(name(key), "must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        throw ConfigError(name(key), "must be a non-empty array of numbers");
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(name(key), "must be a non-empty array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ConfigError(name(key), "must be a non-empty array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(name(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

struct ProbeConfig {
  std::string type;
  double iprime = 0.0;
  std::vector<double> lambdas;
  double tau = 1.0;
  int n = 1;
  double indist = 0.0;
  json raw;
};

struct PhaseGrid {
  int count = 32;
  double lo = 0.0;
  double hi = kTwoPi;

  std::vector<double> thetas() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / count;
    }
    return out;
  }
};

struct ExperimentConfig {
  ProbeConfig probe;
  double zeta = 0.0;
  int bins_per_arm = 4;
  PhaseGrid phases;
  double expected_counts_per_point = 1e5;
  std::uint64_t seed = 0;
  int restarts = 50;
  int bootstrap_trials = 100;
  metrology::ClassScheme scheme = metrology::ClassScheme::kAbsDelta;
};

ProbeConfig parse_probe(const json& j) {
  Fields f(j, "probe");
  ProbeConfig p;
  p.raw = j;
  p.type = f.text("type");
  if (p.type == "two_photon") {
    p.iprime = f.number("iprime");
    require(p.iprime >= 0.0 && p.iprime <= 1.0, "probe.iprime", "must lie in [0, 1]");
  } else if (p.type == "four_photon") {
    p.lambdas = f.numbers("lambdas");
    p.tau = f.number("tau");
    require(p.tau >= 0.0 && p.tau <= 1.0, "probe.tau", "must lie in [0, 1]");
    require(p.lambdas.size() <= fock::kMaxSchmidtModes, "probe.lambdas",
            "at most " + std::to_string(fock::kMaxSchmidtModes) + " Schmidt modes");
    for (double l : p.lambdas) require(l >= 0.0, "probe.lambdas", "must be nonnegative");
    require(std::any_of(p.lambdas.begin(), p.lambdas.end(), [](double l) { return l > 0.0; }),
            "probe.lambdas", "must not all vanish");
  } else if (p.type == "dual_fock") {
    const auto n = f.integer("n");
    require(n >= 1 && 2 * n <= fock::kMaxPhotons, "probe.n",
            "must lie in [1, " + std::to_string(fock::kMaxPhotons / 2) + "]");
    p.n = static_cast<int>(n);
    p.indist = f.number("indist");
    require(p.indist >= 0.0 && p.indist <= 1.0, "probe.indist", "must lie in [0, 1]");
  } else {
    throw ConfigError("probe.type", "must be two_photon, four_photon or dual_fock");
  }
  f.finish();
  return p;
}

int probe_photons(const ProbeConfig& p) {
  if (p.type == "two_photon") return 2;
  if (p.type == "four_photon") return 4;
  return 2 * p.n;
}

PhaseGrid parse_phases(Fields& parent) {
  PhaseGrid g;
  if (!parent.has("phases")) return g;
  Fields f(parent.at("phases"), "phases");
  const auto count = f.integer("count", 32);
  require(count >= 1 && count <= 100000, "phases.count", "must lie in [1, 100000]");
  g.count = static_cast<int>(count);
  if (f.has("range")) {
    const auto range = f.numbers("range");
    require(range.size() == 2 && range[1] > range[0], "phases.range", "must be [lo, hi] with hi > lo");
    g.lo = range[0];
    g.hi = range[1];
  }
  f.finish();
  return g;
}

// Shared experiment fields; `with_probe` is false for the I' sweep.
ExperimentConfig parse_experiment(Fields& f, bool with_probe) {
  ExperimentConfig c;
  if (with_probe) c.probe = parse_probe(f.at("probe"));
  c.zeta = f.number("zeta", 0.0);
  require(c.zeta >= 0.0 && c.zeta < 1.0, "zeta", "must lie in [0, 1)");
  const auto bins = f.integer("bins_per_arm", 4);
  require(bins >= 1 && bins <= 1024, "bins_per_arm", "must lie in [1, 1024]");
  c.bins_per_arm = static_cast<int>(bins);
  const int photons = with_probe ? probe_photons(c.probe) : 2;
  require(c.bins_per_arm >= photons, "bins_per_arm",
          "must be at least the photon number so every pattern is detectable");
  c.phases = parse_phases(f);
  c.expected_counts_per_point = f.number("expected_counts_per_point", 1e5);
  require(c.expected_counts_per_point > 0.0, "expected_counts_per_point", "must be positive");
  const auto seed = f.integer("seed", 0);
  require(seed >= 0, "seed", "must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);
  const auto restarts = f.integer("restarts", 50);
  require(restarts >= 1 && restarts <= 10000, "restarts", "must lie in [1, 10000]");
  c.restarts = static_cast<int>(restarts);
  const auto trials = f.integer("bootstrap_trials", 100);
  require(trials == 0 || (trials >= 100 && trials <= 100000), "bootstrap_trials",
          "must be 0 or lie in [100, 100000]");
  c.bootstrap_trials = static_cast<int>(trials);
  const std::string classes = f.text("classes", "abs_delta");
  if (classes == "signed_delta") {
    c.scheme = metrology::ClassScheme::kSignedDelta;
  } else {
    require(classes == "abs_delta", "classes", "must be abs_delta or signed_delta");
  }
  return c;
}

metrology::FringeFamily probe_family(const ExperimentConfig& c) {
  const auto& p = c.probe;
  if (p.type == "two_photon") return metrology::simulated_family(fock::spdc_two_photon(p.iprime), c.zeta, c.scheme);
  if (p.type == "dual_fock") {
    return metrology::simulated_family(fock::dual_fock_mismatched(p.n, p.indist), c.zeta, c.scheme);
  }
  return metrology::simulated_family(
      fock::four_photon_schmidt(spectral::SchmidtSpectrum::normalized(p.lambdas), p.tau), c.zeta,
      c.scheme);
}

struct Simulation {
  estimation::FringeDataset dataset;
  json truth;
};

Simulation simulate(const ExperimentConfig& c) {
  const metrology::FringeFamily family = probe_family(c);
  const int photons = family.photons;
  const auto thetas = c.phases.thetas();

  std::vector<std::vector<double>> probs(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t i) { probs[i] = family.probabilities(thetas[i]); });

  std::map<int, double> eta;
  for (int label : family.classes) {
    eta[label] = detection::class_efficiency(photons, std::abs(label), c.bins_per_arm);
  }

  std::vector<estimation::FringePoint> points;
  json truth_points = json::array();
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    detection::ClassProbabilities detected;
    for (std::size_t k = 0; k < family.classes.size(); ++k) {
      const int label = family.classes[k];
      detected[label] = std::max(probs[i][k], 0.0) * eta[label];
    }
    const auto counts = detection::sample_counts(detected, c.expected_counts_per_point,
                                                 derive_seed(c.seed, i));
    points.push_back({thetas[i], {counts.begin(), counts.end()}});
    truth_points.push_back({{"theta", thetas[i]}, {"probabilities", probs[i]}});
  }

  metrology::FisherReport fisher =
      c.probe.type == "two_photon"
          ? metrology::maximize_fisher(metrology::two_photon_family(c.probe.iprime, c.zeta))
          : metrology::maximize_fisher(family);
  json truth = {{"probe", c.probe.raw},
                {"zeta", c.zeta},
                {"bins_per_arm", c.bins_per_arm},
                {"expected_counts_per_point", c.expected_counts_per_point},
                {"seed", c.seed},
                {"photons", photons},
                {"classes", family.classes},
                {"efficiencies", io::to_json(eta)},
                {"points", std::move(truth_points)},
                {"fisher",
                 {{"max", fisher.max_fisher},
                  {"argmax", fisher.argmax_theta},
                  {"per_photon", fisher.per_photon}}}};
  return {estimation::FringeDataset(std::move(points), eta), std::move(truth)};
}

std::vector<int> default_harmonics(const std::vector<int>& classes) {
  int n = 0;
  for (int c : classes) n = std::max(n, std::abs(c));
  std::vector<int> h;
  for (int k = 2; k <= std::max(n, 2); k += 2) h.push_back(k);
  return h;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

json fisher_summary(const metrology::FisherReport& r) {
  return {{"max", r.max_fisher}, {"argmax", r.argmax_theta}, {"per_photon", r.per_photon},
          {"photons", r.photons}};
}

CommandResult emit(CommandResult result, const fs::path& path, const std::string& text) {
  io::write_text_file(path, text);
  result.written.push_back(path);
  return result;
}

}  // namespace

CommandResult cmd_hom(const json& config, const fs::path& base_dir, const Invocation& inv) {
  Fields f(config, "");
  const fs::path input = resolve(base_dir, f.text("input"));
  spectral::HomDipFitOptions options;
  const auto restarts = f.integer("restarts", options.restarts);
  require(restarts >= 1 && restarts <= 10000, "restarts", "must lie in [1, 10000]");
  options.restarts = static_cast<int>(restarts);
  const auto seed = f.integer("seed", 0);
  require(seed >= 0, "seed", "must be nonnegative");
  options.seed = inv.seed.value_or(static_cast<std::uint64_t>(seed));
  std::optional<spectral::HomDipParams> init;
  if (f.has("init")) {
    Fields g(f.at("init"), "init");
    init = spectral::HomDipParams{g.number("a"), g.number("b"), g.number("sigma")};
    require(init->sigma > 0.0, "init.sigma", "must be positive");
    g.finish();
  }
  f.finish();

  const auto points = io::parse_hom_csv(io::read_text_file(input));
  if (!init) {
    // Baseline from the quarter of points farthest from zero delay.
    std::vector<spectral::HomDipPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return std::abs(a.x) > std::abs(b.x); });
    const std::size_t far = std::max<std::size_t>(1, sorted.size() / 4);
    double a = 0.0;
    for (std::size_t i = 0; i < far; ++i) a += sorted[i].p;
    a /= static_cast<double>(far);
    double p_min = points.front().p;
    double x_lo = points.front().x;
    double x_hi = points.front().x;
    for (const auto& pt : points) {
      p_min = std::min(p_min, pt.p);
      x_lo = std::min(x_lo, pt.x);
      x_hi = std::max(x_hi, pt.x);
    }
    init = spectral::HomDipParams{a, p_min - a, x_hi > x_lo ? (x_hi - x_lo) / 6.0 : 1.0};
  }

  const spectral::HomDipFit fit = spectral::fit_hom_dip(points, *init, options);
  const json report = {{"a", fit.a},          {"b", fit.b},
                       {"sigma", fit.sigma},  {"residual", fit.residual},
                       {"ill_posed", fit.ill_posed}, {"converged", fit.converged}};
  CommandResult result;
  result = emit(std::move(result), inv.out_dir / "hom_fit.json", io::dump_json(report));

  std::vector<std::vector<double>> rows;
  for (const auto& pt : points) {
    const double q = spectral::quartic_gaussian_overlap(pt.x, fit.sigma);
    const double p_fit = fit.a + fit.b * q;
    const double iprime = fit.a != 0.0 ? -fit.b * q / fit.a : 0.0;
    rows.push_back({pt.x, p_fit, iprime});
  }
  result = emit(std::move(result), inv.out_dir / "hom_iprime.csv",
                io::numeric_csv({"x", "p_fit", "iprime"}, rows));
  if (fit.ill_posed || !fit.converged) {
    result.exit_code = kNotConverged;
    result.message = fit.ill_posed ? "HOM dip fit is ill-posed" : "HOM dip fit did not converge";
  }
  return result;
}

CommandResult cmd_simulate(const json& config, const Invocation& inv) {
  Fields f(config, "");
  ExperimentConfig c = parse_experiment(f, true);
  f.finish();
  if (inv.seed) c.seed = *inv.seed;

  const Simulation sim = simulate(c);
  CommandResult result;
  result = emit(std::move(result), inv.out_dir / "fringe.csv", io::fringe_csv(sim.dataset));
  result = emit(std::move(result), inv.out_dir / "truth.json", io::dump_json(sim.truth));
  result = emit(std::move(result), inv.out_dir / "efficiencies.json",
                io::dump_json(io::to_json(sim.dataset.efficiencies())));
  return result;
}

CommandResult cmd_fit(const json& config, const fs::path& base_dir, const Invocation& inv) {
  Fields f(config, "");
  const fs::path input = resolve(base_dir, f.text("input"));
  std::optional<fs::path> eff_path;
  if (f.has("efficiencies")) eff_path = resolve(base_dir, f.text("efficiencies"));
  std::optional<std::vector<int>> harmonics;
  if (f.has("harmonics")) harmonics = f.integers("harmonics");
  const auto restarts = f.integer("restarts", 50);
  require(restarts >= 1 && restarts <= 10000, "restarts", "must lie in [1, 10000]");
  const auto trials = f.integer("bootstrap_trials", 100);
  require(trials == 0 || (trials >= 100 && trials <= 100000), "bootstrap_trials",
          "must be 0 or lie in [100, 100000]");
  const auto seed = f.integer("seed", 0);
  require(seed >= 0, "seed", "must be nonnegative");
  const auto photons = f.integer("photons", 0);
  require(photons >= 0 && photons <= fock::kMaxPhotons, "photons", "must lie in [0, 8]");
  f.finish();

  std::map<int, double> eta;
  if (eff_path) eta = io::efficiencies_from_json(io::read_json_file(*eff_path));
  const auto dataset = io::parse_fringe_csv(io::read_text_file(input), eta);
  if (!harmonics) harmonics = default_harmonics(dataset.classes());
  for (std::size_t i = 0; i < harmonics->size(); ++i) {
    require((*harmonics)[i] >= 1 && (i == 0 || (*harmonics)[i] > (*harmonics)[i - 1]), "harmonics",
            "must be positive and strictly increasing");
  }
  require(dataset.classes().size() >= 2, "input", "needs at least two classes");

  const std::uint64_t base_seed = inv.seed.value_or(static_cast<std::uint64_t>(seed));
  estimation::FitOptions fo;
  fo.restarts = static_cast<int>(restarts);
  fo.seed = derive_seed(base_seed, 0);
  const auto fit = estimation::fit_mle(dataset, *harmonics, fo);

  json report = {{"fit", estimation::to_json(fit)}, {"harmonics", *harmonics},
                 {"warnings", dataset.shape_violations()}};
  if (!fit.ill_posed) {
    const auto fisher = estimation::fisher_from_model(fit.model, static_cast<int>(photons));
    report["fisher"] = metrology::to_json(fisher);
    if (fit.converged && trials > 0) {
      estimation::BootstrapOptions bo;
      bo.trials = static_cast<int>(trials);
      bo.seed = derive_seed(base_seed, 1);
      bo.photons = static_cast<int>(photons);
      report["bootstrap"] = estimation::to_json(estimation::bootstrap_errors(fit, dataset, *harmonics, bo));
    }
  }
  CommandResult result;
  result = emit(std::move(result), inv.out_dir / "fit.json", io::dump_json(report));
  if (!fit.converged) {
    result.exit_code = kNotConverged;
    result.message = fit.ill_posed ? "fit is ill-posed: too few distinct phases or no counts"
                                   : "maximum-likelihood fit did not converge";
  }
  return result;
}

CommandResult cmd_predict(const json& config, const Invocation& inv) {
  Fields f(config, "");
  const std::string mode = f.text("mode");
  CommandResult result;
  if (mode == "two_photon_curve") {
    const double zeta = f.number("zeta", 0.0);
    require(zeta >= 0.0 && zeta < 1.0, "zeta", "must lie in [0, 1)");
    const auto points = f.integer("points", 101);
    require(points >= 2 && points <= 1000000, "points", "must lie in [2, 1000000]");
    f.finish();
    std::vector<double> iprimes(static_cast<std::size_t>(points));
    for (std::size_t i = 0; i < iprimes.size(); ++i) {
      iprimes[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    }
    const auto curve = metrology::predicted_fprime_curve(iprimes, zeta);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < iprimes.size(); ++i) rows.push_back({iprimes[i], curve[i]});
    return emit(std::move(result), inv.out_dir / "predict.csv",
                io::numeric_csv({"iprime", "fprime"}, rows));
  }
  if (mode == "four_photon_extremes") {
    const double lambda4 = f.number("lambda4");
    require(lambda4 > 0.0 && lambda4 <= 1.0, "lambda4", "must lie in (0, 1]");
    const double zeta = f.number("zeta", 0.0);
    require(zeta >= 0.0 && zeta < 1.0, "zeta", "must lie in [0, 1)");
    f.finish();
    const auto pred = metrology::predict_four_photon_extremes(lambda4, zeta);
    result = emit(std::move(result), inv.out_dir / "predict.csv",
                  io::numeric_csv({"tau", "fprime"},
                                  {{1.0, pred.fprime_full_overlap}, {0.0, pred.fprime_zero_overlap}}));
    return emit(std::move(result), inv.out_dir / "predict.json",
                io::dump_json({{"lambda4", lambda4},
                               {"zeta", zeta},
                               {"full_overlap", fisher_summary(pred.full_overlap)},
                               {"zero_overlap", fisher_summary(pred.zero_overlap)}}));
  }
  if (mode == "small_angle") {
    const auto n = f.integer("n");
    require(n >= 1 && n <= fock::kMaxPhotons / 2, "n", "must lie in [1, 4]");
    const double indist = f.number("indist");
    require(indist >= 0.0 && indist <= 1.0, "indist", "must lie in [0, 1]");
    f.finish();
    const double fisher = metrology::small_angle_fisher(static_cast<int>(n), indist);
    return emit(std::move(result), inv.out_dir / "predict.csv",
                io::numeric_csv({"n", "indist", "fisher"},
                                {{static_cast<double>(n), indist, fisher}}));
  }
  throw ConfigError("mode", "must be two_photon_curve, four_photon_extremes or small_angle");
}

CommandResult cmd_reproduce_fig3(const json& config, const Invocation& inv) {
  Fields f(config, "");
  ExperimentConfig c = parse_experiment(f, false);
  std::vector<double> iprimes = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  if (f.has("iprimes")) iprimes = f.numbers("iprimes");
  for (double v : iprimes) require(v >= 0.0 && v <= 1.0, "iprimes", "entries must lie in [0, 1]");
  require(c.bootstrap_trials >= 100, "bootstrap_trials", "must be at least 100");
  f.finish();
  if (inv.seed) c.seed = *inv.seed;

  const std::vector<double> predicted = metrology::predicted_fprime_curve(iprimes, c.zeta);
  const std::vector<int> harmonics = {2};
  std::vector<std::vector<double>> rows;
  json points = json::array();
  json failed = nullptr;
  double worst = 0.0;
  int exit_code = kSuccess;
  std::string message;

  for (std::size_t i = 0; i < iprimes.size(); ++i) {
    const std::uint64_t point_seed = derive_seed(c.seed, i);
    ExperimentConfig pc = c;
    pc.probe.type = "two_photon";
    pc.probe.iprime = iprimes[i];
    pc.probe.raw = {{"type", "two_photon"}, {"iprime", iprimes[i]}};
    pc.seed = derive_seed(point_seed, 0);
    const Simulation sim = simulate(pc);

    estimation::FitOptions fo;
    fo.restarts = c.restarts;
    fo.seed = derive_seed(point_seed, 1);
    const auto fit = estimation::fit_mle(sim.dataset, harmonics, fo);
    if (!fit.converged) {
      failed = iprimes[i];
      exit_code = kNotConverged;
      message = "fit did not converge at iprime = " + io::format_double(iprimes[i]);
      break;
    }
    const double measured = estimation::fisher_from_model(fit.model, 2).per_photon;
    estimation::BootstrapOptions bo;
    bo.trials = c.bootstrap_trials;
    bo.seed = derive_seed(point_seed, 2);
    bo.photons = 2;
    const auto boot = estimation::bootstrap_errors(fit, sim.dataset, harmonics, bo);
    const double sigma = boot.sigma_max_fisher / 2.0;
    const double deviation = sigma > 0.0 ? (measured - predicted[i]) / sigma : 0.0;
    worst = std::max(worst, std::abs(deviation));
    rows.push_back({iprimes[i], measured, sigma, predicted[i], deviation});
    points.push_back({{"iprime", iprimes[i]},
                      {"fprime_measured", measured},
                      {"sigma", sigma},
                      {"fprime_predicted", predicted[i]},
                      {"deviation_sigma", deviation},
                      {"bootstrap_failed_trials", boot.failed_trials}});
  }

  CommandResult result;
  result = emit(std::move(result), inv.out_dir / "fig3.csv",
                io::numeric_csv({"iprime", "fprime_measured", "sigma", "fprime_predicted",
                                 "deviation_sigma"},
                                rows));
  const json summary = {{"zeta", c.zeta},
                        {"seed", c.seed},
                        {"expected_counts_per_point", c.expected_counts_per_point},
                        {"max_abs_deviation_sigma", worst},
                        {"failed_iprime", failed},
                        {"points", std::move(points)}};
  result = emit(std::move(result), inv.out_dir / "fig3_summary.json", io::dump_json(summary));
  result.exit_code = exit_code;
  result.message = message;
  return result;
}

CommandResult run(const Invocation& inv) {
  CommandResult result;
  try {
    const json config = io::read_json_file(inv.config);
    const fs::path base = inv.config.has_parent_path() ? inv.config.parent_path() : fs::path(".");
    if (inv.command == "hom") return cmd_hom(config, base, inv);
    if (inv.command == "simulate") return cmd_simulate(config, inv);
    if (inv.command == "fit") return cmd_fit(config, base, inv);
    if (inv.command == "predict") return cmd_predict(config, inv);
    if (inv.command == "reproduce-fig3") return cmd_reproduce_fig3(config, inv);
    throw ConfigError("command", "unknown command '" + inv.command + "'");
  } catch (const ParseError& e) {
    result.exit_code = kParseError;
    result.message = "parse error at line " + std::to_string(e.line()) + ": " + e.what();
  } catch (const ConfigError& e) {
    result.exit_code = kConfigError;
    result.message = std::string("config error: ") + e.what();
  } catch (const IllPosedError& e) {
    result.exit_code = kNotConverged;
    result.message = std::string("ill-posed: ") + e.what();
  } catch (const InvalidArgument& e) {
    result.exit_code = kConfigError;
    result.message = std::string("config error: ") + e.what();
  } catch (const ResourceLimitError& e) {
    result.exit_code = kConfigError;
    result.message = std::string("config error: ") + e.what();
  } catch (const nlohmann::json::exception& e) {
    result.exit_code = kConfigError;
    result.message = std::string("config error: ") + e.what();
  } catch (const std::exception& e) {
    result.exit_code = kFailure;
    result.message = e.what();
  }
  return result;
}

}  // namespace fringelab::cli
