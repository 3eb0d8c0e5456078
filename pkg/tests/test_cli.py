import json
from pathlib import Path

import pytest

from clineshoot import __version__
from clineshoot.cli import main

REPO_CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture()
def prop1_config(tmp_path, prop1):
    path = tmp_path / "prop1.json"
    path.write_text(prop1.problem.to_json())
    return str(path)


@pytest.fixture()
def prop2_config(tmp_path, prop2):
    path = tmp_path / "prop2.json"
    path.write_text(prop2.problem.to_json())
    return str(path)


@pytest.fixture()
def out_dir(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv("CLINE_SEED_DIR", str(d))
    return d


def data_lines(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


class TestCheckF:
    def test_in_scope_config(self, prop1_config, capsys):
        assert main(["check-f", prop1_config]) == 0
        out = capsys.readouterr().out
        assert "in conjecture scope: True" in out

    def test_positive_mean_fails_hypotheses(self, tmp_path, capsys):
        cfg = tmp_path / "posmean.json"
        cfg.write_text(json.dumps({
            "weight": {"alpha": 0.1, "omega1": -0.21, "omega2": 0.2},
            "f": {"kind": "degree_of_dominance", "k": 0.0},
            "lambda": 45.0,
        }))
        assert main(["check-f", str(cfg)]) == 1
        out = capsys.readouterr().out
        assert "(negative: False)" in out
        assert "in conjecture scope: False" in out

    def test_truncated_json(self, tmp_path, capsys):
        cfg = tmp_path / "broken.json"
        cfg.write_text('{"weight": {')
        assert main(["check-f", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "line" in err and "column" in err

    def test_missing_file(self, tmp_path):
        assert main(["check-f", str(tmp_path / "nope.json")]) == 2

    def test_unknown_kind(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({
            "weight": {"alpha": 1.0, "omega1": -0.21, "omega2": 0.2},
            "f": {"kind": "cubic"}, "lambda": 45.0,
        }))
        assert main(["check-f", str(cfg)]) == 2


class TestShoot:
    def test_probe_trajectory(self, prop1_config, out_dir, capsys):
        assert main(["shoot", prop1_config, "--r", "0.1"]) == 0
        out = capsys.readouterr().out
        assert "terminal point: (0.230" in out
        csv = out_dir / "shoot_r0.1.csv"
        rows = data_lines(csv)
        assert rows[0] == "x,u,v"
        assert csv.read_text().startswith("# config_digest: sha256:")

    def test_zero_initial_height(self, prop1_config, out_dir, capsys):
        assert main(["shoot", prop1_config, "--r", "0"]) == 0
        assert "terminal point: (0, 0)" in capsys.readouterr().out

    def test_blowup_exit_code(self, prop1_config, out_dir, capsys):
        assert main(["shoot", prop1_config, "--r", "5"]) == 3
        assert "blow-up at x" in capsys.readouterr().err


class TestGamma:
    def test_rows_and_first_entry(self, prop1_config, out_dir):
        assert main(["gamma", prop1_config, "--resolution", "101"]) == 0
        rows = data_lines(out_dir / "gamma.csv")
        assert rows[0] == "r,u_end,v_end,status"
        assert rows[1] == "0,0,0,ok"
        assert len(rows) == 1 + 101

    def test_sign_alternations_reported(self, prop1_config, out_dir, capsys):
        assert main(["gamma", prop1_config, "--resolution", "401"]) == 0
        out = capsys.readouterr().out
        changes = int(out.split("rows,")[1].split("interior sign changes")[0])
        assert changes >= 3

    def test_bad_resolution(self, prop1_config, out_dir):
        assert main(["gamma", prop1_config, "--resolution", "10"]) == 2


class TestFind:
    def test_first_instance_outputs(self, prop1_config, out_dir):
        assert main(["find", prop1_config, "--resolution", "201"]) == 0
        payload = json.loads((out_dir / "clines.json").read_text())
        assert len(payload["clines"]) == 3
        assert payload["manifest"]["version"] == __version__
        assert payload["manifest"]["config_digest"].startswith("sha256:")
        assert payload["trajectory_files"] == ["cline_1.csv", "cline_2.csv",
                                               "cline_3.csv"]
        for name in payload["trajectory_files"]:
            assert (out_dir / name).exists()
        cs = [c["c"] for c in payload["clines"]]
        for c, ref in zip(cs, (0.125, 0.479, 0.683)):
            assert abs(c - ref) < 0.005

    def test_trivial_profiles_written(self, prop1_config, out_dir):
        assert main(["find", prop1_config, "--resolution", "201"]) == 0
        for name, level in (("trivial_0.csv", "0"), ("trivial_1.csv", "1")):
            rows = data_lines(out_dir / name)
            assert rows[0] == "x,u,v"
            assert all(r.split(",")[1] == level for r in rows[1:])

    def test_no_brackets_exit_code(self, tmp_path, out_dir):
        cfg = tmp_path / "flat.json"
        cfg.write_text(json.dumps({
            "weight": {"alpha": 1.0, "omega1": -0.21, "omega2": 0.2},
            "f": {"kind": "degree_of_dominance", "k": 0.0},
            "lambda": 0.001,
        }))
        assert main(["find", str(cfg)]) == 4

    def test_determinism(self, prop1_config, tmp_path, monkeypatch):
        outputs = []
        for sub in ("a", "b"):
            d = tmp_path / sub
            monkeypatch.setenv("CLINE_SEED_DIR", str(d))
            assert main(["find", prop1_config, "--resolution", "201"]) == 0
            outputs.append({p.name: p.read_bytes()
                            for p in sorted(d.iterdir())})
        assert outputs[0] == outputs[1]


class TestReproduce:
    def test_reports_and_exit(self, out_dir, capsys):
        code = main(["reproduce", "--resolution", "801", "--step", "5e-4"])
        out = capsys.readouterr().out
        # first instance reproduces; the second's published initial heights
        # are terminal abscissae, so its c comparison honestly fails
        assert "instance proposition-1" in out
        assert "verdict: PASS" in out
        assert "instance proposition-2" in out
        assert "verdict: FAIL" in out
        assert code == 1
        payload = json.loads((out_dir / "reproduce.json").read_text())
        assert payload["reports"][0]["passed"] is True
        assert payload["reports"][1]["passed"] is False


@pytest.mark.skipif(not REPO_CONFIGS.exists(), reason="repo configs not present")
class TestShippedConfigs:
    def test_bundled_configs_parse_and_validate(self, capsys):
        for name in ("prop1.json", "prop2.json", "remark_concave.json"):
            assert main(["check-f", str(REPO_CONFIGS / name)]) == 0
