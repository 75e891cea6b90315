# Copyright 2026 The fringelab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import random

import pytest

import fringelab as fl


def test_two_photon_fringe_endpoints():
    p0, p2 = fl.two_photon_probabilities(0.5, 0.0, math.pi / 2)
    assert p0 == pytest.approx(0.25, abs=1e-12)
    assert fl.two_photon_probabilities(0.5, 0.0, math.pi / 4)[0] == pytest.approx(0.625, abs=1e-12)
    assert p0 + p2 == pytest.approx(1.0, abs=1e-15)


def test_hom_overlap_peak_and_symmetry():
    assert fl.quartic_gaussian_overlap(0.0, 1.3) == pytest.approx(1.0, abs=1e-9)
    assert fl.quartic_gaussian_overlap(0.7, 1.3) == pytest.approx(
        fl.quartic_gaussian_overlap(-0.7, 1.3), abs=1e-12
    )


def test_dual_fock_hom_bunching():
    probs = fl.dual_fock_outcomes(1, 1.0, math.pi / 2)
    assert probs[(1, 1)] == pytest.approx(0.0, abs=1e-12)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)


def test_predictions():
    assert fl.small_angle_fisher(3, 1.0) == pytest.approx(24.0)
    assert fl.p4_from_lambda4(0.479) == pytest.approx(0.6619, abs=5e-4)
    full, zero = fl.predict_four_photon_extremes(0.479, 0.0282)
    assert full == pytest.approx(2.246, rel=0.05)
    assert zero == pytest.approx(0.7547, rel=0.05)
    assert fl.predicted_fprime_curve([0.0, 1.0], 0.0) == pytest.approx([1.0, 2.0], abs=1e-12)


def test_bad_arguments_raise():
    with pytest.raises(ValueError):
        fl.two_photon_probabilities(1.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        fl.dual_fock_outcomes(5, 0.5, 0.0)


def test_fit_recovers_noiseless_fringe():
    thetas = [2 * math.pi * k / 32 for k in range(32)]
    total = 1e6
    counts = {0: [], 2: []}
    for t in thetas:
        p0, p2 = fl.two_photon_probabilities(0.8, 0.0119, t)
        counts[0].append(round(total * p0))
        counts[2].append(round(total * p2))
    fit = fl.fit_fringe(thetas, counts, restarts=4, seed=3)
    assert fit["converged"]
    truth = fl.optimal_fisher_two_photon(0.8, 0.0119)["fisher"]
    assert fit["fisher"]["max"] == pytest.approx(truth, rel=1e-2)
    model = json.loads(fit["model"])
    assert model["harmonics"] == [2]


def test_fit_with_two_phases_is_ill_posed():
    fit = fl.fit_fringe([0.0, 1.0], {0: [10, 20], 2: [5, 3]}, restarts=2)
    assert fit["ill_posed"] and not fit["converged"]


def test_cli_predict_round_trip(tmp_path):
    config = tmp_path / "predict.json"
    config.write_text(json.dumps({"mode": "small_angle", "n": 3, "indist": 1.0}))
    code, message = fl.run_cli("predict", str(config), str(tmp_path))
    assert code == 0, message
    lines = (tmp_path / "predict.csv").read_text().splitlines()
    assert lines[0] == "n,indist,fisher"
    assert float(lines[1].split(",")[2]) == 24.0


def test_cli_rejects_unknown_key(tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"mode": "small_angle", "n": 1, "indist": 0.0, "bogus": 1}))
    code, message = fl.run_cli("predict", str(config), str(tmp_path))
    assert code == 2
    assert "bogus" in message
