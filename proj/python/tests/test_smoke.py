# Copyright 2026 The runfuzz Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import pathlib

import pytest

import runfuzz

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "fixtures"


def test_figure_critical_blocks():
    p = runfuzz.load_program(str(FIXTURES / "figure.json"))
    assert p.targets == ["1", "2"]
    covered = (FIXTURES / "figure_covered.txt").read_text().split()
    crit = p.critical_blocks(covered)
    assert sorted(crit["1"]) == ["C", "D"]
    assert crit["2"] == ["2"]


def test_distances_on_the_figure():
    p = runfuzz.load_program(str(FIXTURES / "figure.json"))
    d = p.distances()
    assert d["1"]["1"] == 0.0
    assert d["1"]["C"] == 1.0
    assert "H" not in d["1"]


def test_showmap_straight_line():
    p = runfuzz.load_program(str(FIXTURES / "straight.json"))
    m = p.showmap(b"x")
    assert m["edges"] == {0: 1, 1: 1}
    assert m["blocks"] == ["A", "B", "C"]
    assert not m["crashed"]


def test_approach_ratio_spends_budget():
    x = runfuzz.approach_ratio(1.0, [10.0, 0.0], [0.5, 0.5])
    assert x == pytest.approx([0.0, 1.0])
    assert sum(runfuzz.approach_ratio(7.0, [1, 2, 3], [0.2, 0.3, 0.5])) == pytest.approx(7.0)


def test_parse_errors_raise():
    with pytest.raises(runfuzz.Error, match="entry"):
        runfuzz.parse_program(json.dumps({"blocks": ["a"], "entry": "b"}))


def test_campaign_runs_and_is_deterministic():
    p = runfuzz.load_program(str(FIXTURES / "figure.json"))

    def run():
        cfg = runfuzz.Config()
        cfg.rng_seed = 3
        cfg.max_cycles = 5
        c = runfuzz.Campaign(p, cfg)
        assert c.add_seed(bytes(8))
        c.run()
        return c

    a, b = run(), run()
    assert a.corpus == b.corpus
    assert a.cycles == 5
    assert set(a.covered_targets) <= {"1", "2"}
    assert len(a.history) == 5
    last = a.history[-1]
    assert last["energy_total"] == pytest.approx(a.execs)


def test_cli_exit_codes(tmp_path):
    code, _, err = runfuzz.cli(["run", "--program", str(FIXTURES / "figure.json"),
                                "--out", str(tmp_path / "o")])
    assert code == 1 and "--execs" in err
    code, out, _ = runfuzz.cli(["run", "--program", str(FIXTURES / "figure.json"),
                                "--out", str(tmp_path / "o"), "--execs", "0"])
    assert code == 0 and "corpus 1" in out
