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

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fringelab/cli.hpp"
#include "fringelab/detection.hpp"
#include "fringelab/errors.hpp"
#include "fringelab/estimation.hpp"
#include "fringelab/fock.hpp"
#include "fringelab/io.hpp"
#include "fringelab/metrology.hpp"
#include "fringelab/parallel.hpp"
#include "fringelab/spectral.hpp"

namespace py = pybind11;
using namespace fringelab;

namespace {

py::dict pattern_dict(const detection::OutcomeDistribution& dist) {
  py::dict out;
  for (const auto& [pattern, p] : dist.probs()) out[py::make_tuple(pattern.first, pattern.second)] = p;
  return out;
}

py::dict fisher_dict(const metrology::FisherReport& r) {
  py::dict d;
  d["max"] = r.max_fisher;
  d["argmax"] = r.argmax_theta;
  d["per_photon"] = r.per_photon;
  d["photons"] = r.photons;
  return d;
}

estimation::FringeDataset make_dataset(const std::vector<double>& thetas,
                                       const std::map<int, std::vector<std::int64_t>>& counts,
                                       const std::map<int, double>& efficiencies) {
  std::vector<estimation::FringePoint> points(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) points[i].theta = thetas[i];
  for (const auto& [label, column] : counts) {
    if (column.size() != thetas.size()) {
      throw InvalidArgument("every class needs one count per phase");
    }
    for (std::size_t i = 0; i < thetas.size(); ++i) points[i].counts[label] = column[i];
  }
  return estimation::FringeDataset(std::move(points), efficiencies);
}

}  // namespace

PYBIND11_MODULE(_fringelab, m) {
  m.doc() = "Compiled core of fringelab";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ResourceLimitError>(m, "ResourceLimitError", PyExc_ValueError);
  py::register_exception<IllPosedError>(m, "IllPosedError", PyExc_ArithmeticError);

  m.def("set_thread_count", &set_thread_count, py::arg("n"));

  m.def("quartic_gaussian_overlap", &spectral::quartic_gaussian_overlap, py::arg("x"),
        py::arg("sigma"));
  m.def("indistinguishability_from_coincidence", &spectral::indistinguishability_from_coincidence,
        py::arg("p_hom"));
  m.def(
      "lambda4",
      [](std::vector<double> lambdas) {
        return spectral::lambda4(spectral::SchmidtSpectrum::normalized(std::move(lambdas)));
      },
      py::arg("lambdas"), "Sum of lambda^4 after normalizing the weights.");
  m.def(
      "fit_hom_dip",
      [](const std::vector<std::tuple<double, double, double>>& rows, double a, double b,
         double sigma, int restarts, std::uint64_t seed) {
        std::vector<spectral::HomDipPoint> points;
        for (const auto& [x, p, w] : rows) points.push_back({x, p, w});
        spectral::HomDipFitOptions options;
        options.restarts = restarts;
        options.seed = seed;
        const auto fit = spectral::fit_hom_dip(points, {a, b, sigma}, options);
        py::dict d;
        d["a"] = fit.a;
        d["b"] = fit.b;
        d["sigma"] = fit.sigma;
        d["residual"] = fit.residual;
        d["converged"] = fit.converged;
        d["ill_posed"] = fit.ill_posed;
        return d;
      },
      py::arg("rows"), py::arg("a"), py::arg("b"), py::arg("sigma"), py::arg("restarts") = 20,
      py::arg("seed") = 0, "Fit p(x) = a + b q(x) to (x, p, weight) rows.");

  m.def(
      "dual_fock_outcomes",
      [](int n, double indist, double theta) {
        return pattern_dict(detection::outcome_distribution(
            fock::apply_path_rotation(fock::dual_fock_mismatched(n, indist), theta)));
      },
      py::arg("n"), py::arg("indist"), py::arg("theta"),
      "Pattern probabilities {(n1, n2): p} for |n>|n> with overlap indist after rotation.");
  m.def(
      "four_photon_outcomes",
      [](std::vector<double> lambdas, double tau, double theta) {
        const auto state =
            fock::four_photon_schmidt(spectral::SchmidtSpectrum::normalized(std::move(lambdas)), tau);
        return pattern_dict(detection::outcome_distribution(fock::apply_path_rotation(state, theta)));
      },
      py::arg("lambdas"), py::arg("tau"), py::arg("theta"));
  m.def("multiplex_efficiency", &detection::multiplex_efficiency, py::arg("n"), py::arg("m"));

  m.def(
      "two_photon_probabilities",
      [](double iprime, double zeta, double theta) {
        return metrology::two_photon_family(iprime, zeta).probabilities(theta);
      },
      py::arg("iprime"), py::arg("zeta"), py::arg("theta"), "[p(|delta|=0), p(|delta|=2)].");
  m.def("small_angle_fisher", &metrology::small_angle_fisher, py::arg("n"), py::arg("indist"));
  m.def("optimal_theta", &metrology::optimal_theta, py::arg("iprime"), py::arg("zeta"));
  m.def(
      "optimal_fisher_two_photon",
      [](double iprime, double zeta) {
        const auto r = metrology::optimal_fisher_two_photon(iprime, zeta);
        py::dict d;
        d["fisher"] = r.fisher;
        d["theta"] = r.theta;
        d["closed_form_theta"] = r.closed_form_theta;
        d["closed_form_positive"] = r.closed_form_positive;
        d["closed_form_negative"] = r.closed_form_negative;
        d["matched_branch"] = metrology::to_string(r.matched);
        return d;
      },
      py::arg("iprime"), py::arg("zeta"));
  m.def(
      "predicted_fprime_curve",
      [](const std::vector<double>& iprimes, double zeta) {
        return metrology::predicted_fprime_curve(iprimes, zeta);
      },
      py::arg("iprimes"), py::arg("zeta"));
  m.def("p4_from_lambda4", &metrology::p4_from_lambda4, py::arg("lambda4"));
  m.def("lambda4_from_p4", &metrology::lambda4_from_p4, py::arg("p4"));
  m.def(
      "predict_four_photon_extremes",
      [](double lambda4, double zeta) {
        const auto r = metrology::predict_four_photon_extremes(lambda4, zeta);
        return std::make_pair(r.fprime_full_overlap, r.fprime_zero_overlap);
      },
      py::arg("lambda4"), py::arg("zeta"), "(F' at full overlap, F' at zero overlap).");

  m.def(
      "fit_fringe",
      [](const std::vector<double>& thetas, const std::map<int, std::vector<std::int64_t>>& counts,
         const std::vector<int>& harmonics, const std::map<int, double>& efficiencies, int restarts,
         std::uint64_t seed, int bootstrap_trials) {
        const auto dataset = make_dataset(thetas, counts, efficiencies);
        estimation::FitOptions fo;
        fo.restarts = restarts;
        fo.seed = seed;
        const auto fit = estimation::fit_mle(dataset, harmonics, fo);
        py::dict d;
        d["converged"] = fit.converged;
        d["ill_posed"] = fit.ill_posed;
        d["log_likelihood"] = fit.log_likelihood;
        d["model"] = io::dump_json(estimation::to_json(fit.model), -1);
        if (!fit.ill_posed) d["fisher"] = fisher_dict(estimation::fisher_from_model(fit.model));
        if (fit.converged && bootstrap_trials > 0) {
          estimation::BootstrapOptions bo;
          bo.trials = bootstrap_trials;
          bo.seed = seed + 1;
          d["sigma_max_fisher"] =
              estimation::bootstrap_errors(fit, dataset, harmonics, bo).sigma_max_fisher;
        }
        return d;
      },
      py::arg("thetas"), py::arg("counts"), py::arg("harmonics") = std::vector<int>{2},
      py::arg("efficiencies") = std::map<int, double>{}, py::arg("restarts") = 20,
      py::arg("seed") = 0, py::arg("bootstrap_trials") = 0,
      "Poisson maximum-likelihood Fourier fit; counts maps class -> one count per phase.");

  m.def(
      "run_cli",
      [](const std::string& command, const std::filesystem::path& config,
         const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed) {
        cli::Invocation inv;
        inv.command = command;
        inv.config = config;
        inv.out_dir = out_dir;
        inv.seed = seed;
        const auto r = cli::run(inv);
        return std::make_pair(r.exit_code, r.message);
      },
      py::arg("command"), py::arg("config"), py::arg("out_dir") = ".", py::arg("seed") = py::none(),
      "Runs a fringelab subcommand; returns (exit_code, message).");
}
