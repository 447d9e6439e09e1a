import csv
import json
import subprocess

import pytest

from qmimo import cli
from qmimo.cli import CliError, main, parse_args


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_fidelity_defaults(self):
        cfg = parse_args(["fidelity", "--mode", "div", "--eps", "0.2", "--lambda", "0.2"])
        assert cfg.command == "fidelity"
        assert cfg.mode == "div"
        assert cfg.engine == "analytic"
        assert cfg.params.eps == 0.2
        assert cfg.params.lam == 0.2
        assert cfg.params.eta == 0.0
        assert cfg.seed == 42

    def test_simulate_defaults_to_density(self):
        cfg = parse_args(["simulate", "--mode", "mux", "--eta", "0.3"])
        assert cfg.engine == "density"
        assert cfg.n_samples == 200

    def test_general_builds_schedule(self):
        cfg = parse_args(
            ["fidelity", "--mode", "general", "--m", "3", "--x", "1",
             "--eta0", "0.4", "--decay", "1.2"]
        )
        assert cfg.mimo.eta_schedule == pytest.approx((0.4, 0.4 / 1.2, 0.4 / 1.44))

    def test_explicit_schedule_beats_geometric(self):
        cfg = parse_args(
            ["fidelity", "--mode", "general", "--m", "2", "--x", "0",
             "--eta0", "0.4", "--decay", "1.2", "--eta-schedule", "0.5,0.1"]
        )
        assert cfg.mimo.eta_schedule == (0.5, 0.1)

    def test_schedule_monotonicity_enforced(self):
        argv = ["fidelity", "--mode", "general", "--m", "2", "--x", "0",
                "--eta-schedule", "0.1,0.5"]
        with pytest.raises(CliError) as err:
            parse_args(argv)
        assert err.value.code == cli.EXIT_RANGE
        cfg = parse_args(argv + ["--allow-any-schedule"])
        assert cfg.mimo.eta_schedule == (0.1, 0.5)

    @pytest.mark.parametrize(
        "argv,code",
        [
            (["fidelity", "--eps", "1.5"], cli.EXIT_RANGE),
            (["fidelity", "--eta", "-0.2"], cli.EXIT_RANGE),
            (["simulate", "--n-samples", "0"], cli.EXIT_RANGE),
            (["fidelity", "--mode", "general", "--x", "1", "--eta0", "0.4"], cli.EXIT_MISSING),
            (["fidelity", "--mode", "general", "--m", "2", "--eta0", "0.4"], cli.EXIT_MISSING),
            (["fidelity", "--mode", "general", "--m", "2", "--x", "1"], cli.EXIT_MISSING),
            (["dmt"], cli.EXIT_MISSING),
        ],
    )
    def test_error_codes(self, argv, code):
        with pytest.raises(CliError) as err:
            parse_args(argv)
        assert err.value.code == code

    def test_error_messages_name_the_field(self):
        with pytest.raises(CliError, match="eps"):
            parse_args(["fidelity", "--eps", "1.5"])
        with pytest.raises(CliError, match="m is required"):
            parse_args(["dmt"])

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            parse_args(["fidelity", "--bogus"])
        assert exc.value.code == 2

    def test_config_file_merge_and_override(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "mode": "general", "m": 3, "x": 1, "eps": 0.1, "lambda": 0.1,
            "eta0": 0.4, "decay": 1.2,
        }))
        cfg = parse_args(["fidelity", "--config", str(path)])
        assert cfg.mode == "general"
        assert cfg.mimo.m == 3 and cfg.mimo.x == 1
        # flags win over config values
        override = parse_args(["fidelity", "--config", str(path), "--x", "2"])
        assert override.mimo.x == 2

    def test_config_rejects_unknown_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"mode": "div", "bogus": 1}))
        with pytest.raises(CliError) as err:
            parse_args(["fidelity", "--config", str(path)])
        assert err.value.code == cli.EXIT_USAGE
        assert "bogus" in str(err.value)

    def test_config_accepts_schedule_list(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "mode": "general", "m": 2, "x": 1, "eta_schedule": [0.4, 0.3],
        }))
        cfg = parse_args(["fidelity", "--config", str(path)])
        assert cfg.mimo.eta_schedule == (0.4, 0.3)


class TestCommands:
    def test_fidelity_general_prints_reference_value(self, capsys):
        code, out, _ = run_cli(capsys, [
            "fidelity", "--mode", "general", "--m", "3", "--x", "1",
            "--eps", "0.1", "--lambda", "0.1", "--eta0", "0.4", "--decay", "1.2",
        ])
        assert code == 0
        assert out.splitlines()[0] == "0.63800"

    def test_fidelity_mux_prints_both_receivers(self, capsys):
        code, out, _ = run_cli(capsys, [
            "fidelity", "--mode", "mux", "--eta", "0.2", "--eps", "0.2", "--lambda", "0.2",
        ])
        assert code == 0
        assert out.splitlines() == ["0.65600", "f12 0.46400"]

    def test_capacity_error_suggests_trajectory(self, capsys):
        code, _, err = run_cli(capsys, [
            "simulate", "--mode", "general", "--engine", "density",
            "--m", "4", "--x", "1", "--eta0", "0.4", "--decay", "1.2",
        ])
        assert code == cli.EXIT_CAPACITY
        assert "trajectory" in err

    def test_fidelity_json_out(self, capsys, tmp_path):
        out_file = tmp_path / "result.json"
        code, _, _ = run_cli(capsys, [
            "fidelity", "--mode", "div", "--eps", "0.2", "--lambda", "0.2",
            "--out", str(out_file),
        ])
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert payload["f11"] == pytest.approx(0.736, abs=1e-15)
        assert payload["engine"] == "analytic"

    def test_region_summary_and_rows(self, capsys, tmp_path):
        rows_file = tmp_path / "rows.csv"
        code, out, _ = run_cli(capsys, [
            "region", "--points-per-axis", "12", "--out", str(rows_file),
        ])
        assert code == 0
        summary = json.loads(out)
        assert summary["grid_points"] == 12**3
        assert 0.0 <= summary["fraction"] <= 1.0
        assert summary["runtime_seconds"] >= 0.0
        with rows_file.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 12**3
        assert list(rows[0]) == ["eta", "eps", "lambda", "f_mux", "f_div", "gain"]
        gains = sum(int(r["gain"]) for r in rows)
        assert gains / len(rows) == pytest.approx(summary["fraction"], abs=1e-15)

    def test_dmt_csv_round_trips(self, capsys, tmp_path):
        out_file = tmp_path / "dmt.csv"
        code, _, _ = run_cli(capsys, [
            "dmt", "--m", "7", "--eps", "0.1", "--lambda", "0.1",
            "--eta0", "0.4", "--decay", "1.2", "--out", str(out_file),
        ])
        assert code == 0
        from qmimo import dmt_sweep

        points = dmt_sweep(7, eps=0.1, lam=0.1, eta0=0.4, decay=1.2)
        with out_file.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        for row, pt in zip(rows, points):
            assert int(row["m"]) == 7
            assert int(row["streams"]) == pt.streams
            # shortest round-trip serialization is lossless
            assert float(row["fidelity"]) == pt.fidelity

    def test_dmt_writes_csv_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, [
            "dmt", "--m", "1", "--eps", "0.1", "--lambda", "0.1",
            "--eta0", "0.4", "--decay", "1.2",
        ])
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "m,x,streams,diversity_order,log2_streams,fidelity"
        assert len(lines) == 3

    def test_simulate_trajectory_reports_stderr(self, capsys):
        code, out, _ = run_cli(capsys, [
            "simulate", "--mode", "general", "--engine", "trajectory",
            "--m", "5", "--x", "2", "--eps", "0.1", "--lambda", "0.1",
            "--eta0", "0.4", "--decay", "1.2", "--n-samples", "20000", "--seed", "7",
        ])
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 2 and lines[1].startswith("stderr ")

    def test_seeded_runs_are_byte_identical(self, capsys):
        argv = ["simulate", "--mode", "mux", "--eta", "0.3", "--eps", "0.1",
                "--lambda", "0.2", "--n-samples", "40", "--seed", "9"]
        _, out_a, _ = run_cli(capsys, argv)
        _, out_b, _ = run_cli(capsys, argv)
        assert out_a == out_b


def test_console_script_installed():
    out = subprocess.run(["qmimo", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "fidelity" in out.stdout
