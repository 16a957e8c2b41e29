"""Command-line interface: outputs, exit codes, determinism."""

import json

import numpy as np
import pytest

from conjrisk.cli import run_command
from conjrisk.errors import NumericalError


@pytest.fixture()
def head_on_file(tmp_path):
    """Head-on encounter with s1 = s2 = 10 m and combined radius 1 m."""
    doc = {
        "object1": {
            "position_m": [0.0, 0.0, 0.0],
            "velocity_mps": [0.0, 0.0, -3500.0],
            "radius_m": 0.5,
        },
        "object2": {
            "position_m": [0.0, 0.0, 0.0],
            "velocity_mps": [0.0, 0.0, 4000.0],
            "radius_m": 0.5,
        },
        "covariance": {
            "object1_cov6": list(np.diag([50.0] * 3 + [1e-4] * 3).ravel()),
            "object2_cov6": list(np.diag([50.0] * 3 + [1e-4] * 3).ravel()),
        },
    }
    path = tmp_path / "head_on.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


class TestPcCommand:
    def test_head_on_reference_value(self, head_on_file, capsys):
        status = run_command(["pc", "--input", str(head_on_file)])
        assert status == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(4.9875e-3, rel=1e-4)

    def test_json_output(self, head_on_file, tmp_path, capsys):
        out = tmp_path / "pc.json"
        status = run_command(
            ["pc", "--input", str(head_on_file), "--output", str(out)]
        )
        assert status == 0
        capsys.readouterr()
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["pc"] == pytest.approx(1.0 - np.exp(-1.0 / 200.0), rel=1e-9)
        assert doc["n_quad"] >= 64
        assert doc["quad_error_est"] >= 0.0

    def test_csv_output(self, head_on_file, tmp_path, capsys):
        out = tmp_path / "pc.csv"
        status = run_command(
            [
                "pc", "--input", str(head_on_file),
                "--output", str(out), "--format", "csv",
            ]
        )
        assert status == 0
        capsys.readouterr()
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "pc,n_quad,quad_error_est"

    def test_kvn_input(self, head_on_file, tmp_path, capsys):
        # convert the JSON fixture to KVN and reuse it
        from conjrisk import conjunction_kvn_text, parse_conjunction

        cf = parse_conjunction(head_on_file.read_bytes(), "json")
        kvn_path = tmp_path / "head_on.kvn"
        kvn_path.write_text(conjunction_kvn_text(cf), encoding="utf-8")
        status = run_command(["pc", "--input", str(kvn_path)])
        assert status == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(4.9875e-3, rel=1e-4)


class TestScreenCommand:
    def test_four_sigma_risk_cap(self, head_on_file, capsys):
        status = run_command(
            ["screen", "--input", str(head_on_file), "--k-sigma", "4"]
        )
        assert status == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["risk_cap"] == pytest.approx(0.00227, abs=1e-5)
        assert doc["overlap"] is True
        assert set(doc) == {
            "min_distance_m", "overlap", "k", "confidence",
            "joint_confidence", "frechet_bound", "risk_cap",
        }


class TestDetectionCurveCommand:
    def test_default_grid_upper_threshold_rate(self, capsys):
        status = run_command(
            ["detection-curve", "--s-over-r", "10", "--d-true", "0"]
        )
        assert status == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "threshold,detection_rate,failure_probability"
        by_threshold = {
            float(row.split(",")[0]): (
                float(row.split(",")[1]),
                float(row.split(",")[2]),
            )
            for row in lines[1:]
        }
        rate, failure = by_threshold[4.4e-4]
        assert rate == pytest.approx(0.912, abs=2e-3)
        assert failure == pytest.approx(1.0 - 0.912, abs=2e-3)

    def test_monte_carlo_requires_seed(self, capsys):
        status = run_command(
            [
                "detection-curve", "--s-over-r", "10", "--d-true", "0",
                "--method", "monte-carlo", "--n-trials", "2000",
            ]
        )
        assert status == 2
        assert "seed" in capsys.readouterr().err

    def test_monte_carlo_with_seed(self, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        status = run_command(
            [
                "detection-curve", "--s-over-r", "10", "--d-true", "0",
                "--method", "monte-carlo", "--n-trials", "20000",
                "--seed", "7", "--threshold-grid", "1e-7,4.4e-4",
                "--output", str(out), "--format", "csv",
            ]
        )
        assert status == 0
        capsys.readouterr()
        assert len(out.read_text(encoding="utf-8").splitlines()) == 3


class TestBoundaryCommand:
    def test_reference_values(self, capsys):
        status = run_command(
            ["boundary", "--threshold", "4.4e-4", "--combined-radius", "5"]
        )
        assert status == 0
        lines = capsys.readouterr().out.splitlines()
        assert float(lines[0]) == pytest.approx(33.71, abs=0.1)
        assert float(lines[1]) == pytest.approx(168.5, abs=0.5)


class TestValidityCommand:
    def test_ksigma_passes(self, capsys):
        status = run_command(
            [
                "validity", "--rule", "ksigma", "--halfwidth", "0.1",
                "--alpha-grid", "0.05,0.2", "--n-trials", "1000", "--seed", "3",
            ]
        )
        assert status == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "alpha,rate,stderr,verdict"
        assert all(row.endswith("pass") for row in lines[1:])

    def test_additive_fails_on_proof_width(self, capsys):
        # constructive halfwidth for alpha = 0.05, sigma = 1
        status = run_command(
            [
                "validity", "--rule", "additive", "--halfwidth", "0.0626",
                "--alpha-grid", "0.05", "--n-trials", "1000", "--seed", "4",
            ]
        )
        assert status == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].endswith("fail")


class TestFalseConfidenceCommand:
    def test_default_halfwidth_rate_one(self, capsys):
        status = run_command(
            ["false-confidence", "--n-trials", "2000", "--seed", "8"]
        )
        assert status == 0
        out = capsys.readouterr().out
        assert "empirical_rate=1" in out

    def test_seed_from_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("seed = 12\n", encoding="utf-8")
        status = run_command(
            [
                "--config", str(cfg),
                "false-confidence", "--n-trials", "2000",
            ]
        )
        assert status == 0
        assert "empirical_rate=1" in capsys.readouterr().out


class TestErrorPaths:
    def test_unknown_subcommand(self, capsys):
        assert run_command(["frobnicate"]) == 2

    def test_unknown_flag(self, capsys):
        assert run_command(["boundary", "--threshold", "0.1", "--bogus"]) == 2

    def test_missing_input_file(self, tmp_path, capsys):
        status = run_command(["pc", "--input", str(tmp_path / "nope.json")])
        assert status == 2

    def test_malformed_input_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        assert run_command(["pc", "--input", str(bad)]) == 2
        assert "error" in capsys.readouterr().err

    def test_unknown_suffix_needs_explicit_format(self, tmp_path, capsys):
        path = tmp_path / "data.txt"
        path.write_text("{}", encoding="utf-8")
        assert run_command(["pc", "--input", str(path)]) == 2

    def test_numerical_failure_maps_to_three(self, monkeypatch, capsys):
        import conjrisk.cli as cli

        def boom(args, config):
            raise NumericalError("synthetic failure")

        monkeypatch.setattr(cli, "_cmd_boundary", boom)
        parser_cmds = ["boundary", "--threshold", "0.1"]
        # rebuild the parser binding to the patched handler
        status = cli.run_command(parser_cmds)
        assert status == 3

    def test_bad_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nonsense = 1\n", encoding="utf-8")
        assert run_command(["--config", str(cfg), "boundary", "--threshold", "0.1"]) == 2


class TestDeterminism:
    def test_repeated_runs_byte_identical(self, tmp_path, capsys):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            status = run_command(
                [
                    "detection-curve", "--s-over-r", "10", "--d-true", "0",
                    "--method", "monte-carlo", "--n-trials", "20000",
                    "--seed", "99", "--threshold-grid", "1e-7,4.4e-4,1e-2",
                    "--output", str(out), "--format", "csv",
                ]
            )
            assert status == 0
            outs.append(out.read_bytes())
        capsys.readouterr()
        assert outs[0] == outs[1]
