import json
import os

import numpy as np
import pytest

from magbumps import config_to_dict, reference_pair
from magbumps.cli import main


@pytest.fixture(scope="module")
def pair_json(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "pair.json"
    path.write_text(json.dumps(config_to_dict(reference_pair())))
    return str(path)


@pytest.fixture(scope="module")
def bad_json(tmp_path_factory):
    # two unit discs whose supports overlap
    path = tmp_path_factory.mktemp("cfg") / "bad.json"
    cfg = json.loads(json.dumps(config_to_dict(reference_pair())))
    cfg["bumps"][1]["center"] = [1.5, 0.0]
    path.write_text(json.dumps(cfg))
    return str(path)


class TestAnalyze:
    def test_values_and_exit_code(self, pair_json, tmp_path, capsys):
        out = str(tmp_path)
        rc = main(["analyze", "--config", pair_json, "--energy", "0.5",
                   "--out", out])
        assert rc == 0
        data = json.load(open(os.path.join(out, "analysis.json")))
        rec = data["bumps"][0]
        assert rec["R_plus"] == pytest.approx(0.5710705686, abs=1e-6)
        assert rec["I_plus"] == pytest.approx(-0.8392297, abs=1e-5)

    def test_energy_above_threshold_is_validation_error(self, pair_json):
        rc = main(["analyze", "--config", pair_json, "--energy", "5.0"])
        assert rc == 2

    def test_missing_config(self, tmp_path):
        rc = main(["analyze", "--config", str(tmp_path / "nope.json"),
                   "--energy", "0.5"])
        assert rc == 2

    def test_overlapping_discs(self, bad_json):
        rc = main(["analyze", "--config", bad_json, "--energy", "0.5"])
        assert rc == 2


class TestCheckGp:
    def test_holds(self, pair_json, tmp_path):
        rc = main(["check-gp", "--config", pair_json, "--energy", "0.5",
                   "--out", str(tmp_path)])
        assert rc == 0
        rep = json.load(open(tmp_path / "general_position.json"))
        assert rep["holds"] is True

    def test_violation_exits_2(self, tmp_path):
        from magbumps import config_to_dict, reference_triangle

        cfg = config_to_dict(reference_triangle(side=2.2))
        path = tmp_path / "tight.json"
        path.write_text(json.dumps(cfg))
        rc = main(["check-gp", "--config", str(path), "--energy", "0.5",
                   "--out", str(tmp_path)])
        assert rc == 2
        rep = json.load(open(tmp_path / "general_position.json"))
        assert rep["holds"] is False
        assert rep["violations"]


class TestSimulateAndSection:
    def test_simulate_csv(self, pair_json, tmp_path):
        rc = main(["simulate", "--config", pair_json, "--energy", "0.5",
                   "--entry", "1,0.3,-0.9", "--t-max", "20",
                   "--out", str(tmp_path)])
        assert rc == 0
        rows = open(tmp_path / "trajectory.csv").read().splitlines()
        assert rows[0].startswith("t,")
        assert len(rows) > 10

    def test_bad_entry_string(self, pair_json):
        rc = main(["simulate", "--config", pair_json, "--energy", "0.5",
                   "--entry", "1,0.3"])
        assert rc == 2

    def test_section_table(self, pair_json, tmp_path):
        rc = main(["section", "--config", pair_json, "--energy", "0.5",
                   "--entry", "1,-1.5708,-0.8392", "--count", "5",
                   "--out", str(tmp_path)])
        assert rc == 0
        rows = open(tmp_path / "crossings.csv").read().splitlines()
        assert len(rows) >= 2


class TestShootAndEntropy:
    def test_shoot_json(self, pair_json, tmp_path):
        rc = main(["shoot", "--config", pair_json, "--energy", "0.5",
                   "--word", "1,2", "--out", str(tmp_path)])
        assert rc == 0
        data = json.load(open(tmp_path / "shoot.json"))
        assert data["word"] == [1, 2]
        assert data["verified"] is True

    def test_verify_shift(self, pair_json, tmp_path):
        rc = main(["verify-shift", "--config", pair_json, "--energy", "0.5",
                   "--length", "1", "--out", str(tmp_path)])
        assert rc == 0
        rep = json.load(open(tmp_path / "shift_report.json"))
        assert rep["realized"] == rep["total"] == 2

    def test_entropy(self, pair_json, tmp_path):
        rc = main(["entropy", "--config", pair_json, "--energy", "0.5",
                   "--length", "2", "--out", str(tmp_path)])
        assert rc == 0
        data = json.load(open(tmp_path / "entropy.json"))
        assert data["h_lower"] > 0.0
        assert data["c_prime"] > 0.0


class TestDeterminism:
    def test_repeat_runs_byte_identical(self, pair_json, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            out.mkdir()
            rc = main(["shoot", "--config", pair_json, "--energy", "0.5",
                       "--word", "2,1", "--csv", "--plot",
                       "--out", str(out)])
            assert rc == 0
            outs.append(out)
        for fname in ("shoot.json", "shoot_trajectory.csv",
                      "shoot_trajectory.svg"):
            a = (outs[0] / fname).read_bytes()
            b = (outs[1] / fname).read_bytes()
            assert a == b, fname

    def test_levelsets_deterministic(self, pair_json, tmp_path):
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            out.mkdir()
            rc = main(["levelsets", "--config", pair_json, "--energy",
                       "0.5", "--bump", "1", "--out", str(out)])
            assert rc == 0
            blobs.append((out / "levelsets_1.svg").read_bytes())
        assert blobs[0] == blobs[1]
