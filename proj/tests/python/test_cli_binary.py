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
import os
import subprocess

import pytest

CLI = os.environ.get("FRINGELAB_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="FRINGELAB_CLI not set")


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)


def test_predict_writes_csv(tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"mode": "small_angle", "n": 2, "indist": 1.0}))
    r = run("predict", "--config", cfg, "--out", tmp_path / "out")
    assert r.returncode == 0, r.stderr
    lines = (tmp_path / "out" / "predict.csv").read_text().splitlines()
    assert lines == ["n,indist,fisher", "2,1,12"]


def test_exit_codes(tmp_path):
    bad_key = tmp_path / "k.json"
    bad_key.write_text(json.dumps({"mode": "small_angle", "n": 2, "indist": 1.0, "typo": 0}))
    assert run("predict", "--config", bad_key).returncode == 2

    broken = tmp_path / "b.json"
    broken.write_text("{")
    assert run("predict", "--config", broken).returncode == 3

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    fit_cfg = tmp_path / "f.json"
    fit_cfg.write_text(json.dumps({"input": "empty.csv"}))
    assert run("fit", "--config", fit_cfg).returncode == 3

    flat = tmp_path / "flat.csv"
    flat.write_text("x,p,weight\n" + "".join(f"{i},0.5,1\n" for i in range(12)))
    hom_cfg = tmp_path / "h.json"
    hom_cfg.write_text(json.dumps({"input": "flat.csv"}))
    assert run("hom", "--config", hom_cfg).returncode == 4

    assert run("predict").returncode == 2
    assert run("nonsense", "--config", bad_key).returncode == 2


def test_seed_override_is_deterministic(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"probe": {"type": "two_photon", "iprime": 0.4},
                               "phases": {"count": 8}, "expected_counts_per_point": 500}))
    for out in ("a", "b"):
        assert run("simulate", "--config", cfg, "--seed", 5, "--out", tmp_path / out).returncode == 0
    assert (tmp_path / "a" / "fringe.csv").read_bytes() == (tmp_path / "b" / "fringe.csv").read_bytes()
