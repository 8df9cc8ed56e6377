import csv
import json
from pathlib import Path

import pytest

import afdrkit as ak
from afdrkit.cli import EXIT_DIVERGED, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main

PAPER_CONFIG = str(Path(__file__).resolve().parent.parent / "configs" / "paper.json")


@pytest.fixture()
def short_config(tmp_path):
    """Paper experiment shrunk to a 4 second run for CLI round trips."""
    exp = json.loads(Path(PAPER_CONFIG).read_text())
    exp["duration"] = 4.0
    exp["t_on"] = 2.0
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(exp))
    return str(path)


def write_system(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


class TestNorm:
    def test_static_gain(self, tmp_path, capsys):
        path = write_system(tmp_path, "g.json",
                            {"type": "tf", "num": [2.0], "den": [1.0], "ts": 0.01})
        assert main(["norm", path]) == EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(2.0)

    def test_fir_taps(self, tmp_path, capsys):
        path = write_system(tmp_path, "g.json",
                            {"type": "tf", "num": [1.0, 0.5],
                             "den": [1.0, 0.0], "ts": 0.01})
        assert main(["norm", path]) == EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(1.5, rel=1e-6)

    def test_unstable_system(self, tmp_path, capsys):
        path = write_system(tmp_path, "g.json",
                            {"type": "tf", "num": [1.0],
                             "den": [1.0, -1.5], "ts": 0.01})
        assert main(["norm", path]) == EXIT_INFEASIBLE

    def test_missing_file(self, tmp_path):
        assert main(["norm", str(tmp_path / "nope.json")]) == EXIT_USAGE


class TestBetaStar:
    def test_paper_config(self, capsys):
        assert main(["beta-star", "--config", PAPER_CONFIG]) == EXIT_OK
        obj = json.loads(capsys.readouterr().out)
        assert obj["feasible"] is True
        assert obj["beta_star"] == pytest.approx(4.651, rel=0.05)
        assert set(obj["norms"]) == {"h11", "h12", "h21", "h22"}

    def test_infeasible_delta(self, tmp_path, capsys):
        exp = json.loads(Path(PAPER_CONFIG).read_text())
        exp["delta"] = 1.0
        path = tmp_path / "big.json"
        path.write_text(json.dumps(exp))
        assert main(["beta-star", "--config", str(path)]) == EXIT_INFEASIBLE
        assert json.loads(capsys.readouterr().out)["feasible"] is False


class TestSimulate:
    def test_nominal_writes_outputs(self, short_config, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["simulate", "--config", short_config,
                     "--out-dir", str(out)])
        assert code == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        printed = json.loads(capsys.readouterr().out)
        assert summary["stable"] is True
        assert printed["std_pre"] == pytest.approx(summary["std_pre"])
        with open(out / "trace.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0][0] == "k"
        assert len(rows) - 1 == 401

    def test_paper_uncertainty_diverges(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["simulate", "--config", PAPER_CONFIG,
                     "--uncertain", "paper", "--safety", "off",
                     "--out-dir", str(out)])
        assert code == EXIT_DIVERGED
        summary = json.loads((out / "summary.json").read_text())
        assert summary["stable"] is False
        assert summary["std_post"] is None

    def test_bad_uncertain_flag(self, short_config, tmp_path):
        assert main(["simulate", "--config", short_config,
                     "--uncertain", "weird",
                     "--out-dir", str(tmp_path / "o")]) == EXIT_USAGE

    def test_seed_override_changes_trace(self, short_config, tmp_path):
        outs = []
        for seed in (0, 1):
            out = tmp_path / f"o{seed}"
            assert main(["simulate", "--config", short_config,
                         "--seed", str(seed), "--out-dir", str(out)]) == EXIT_OK
            outs.append((out / "trace.csv").read_text())
        assert outs[0] != outs[1]


class TestMonteCarlo:
    def test_small_batch(self, short_config, tmp_path, capsys):
        out = tmp_path / "mc"
        code = main(["monte-carlo", "--config", short_config,
                     "--n", "3", "--seed", "100", "--jobs", "1",
                     "--out-dir", str(out)])
        assert code == EXIT_OK
        with open(out / "runs.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["run", "delta_seed", "std_pre", "std_post",
                           "stable", "diverged_at"]
        assert len(rows) - 1 == 3
        assert [r[1] for r in rows[1:]] == ["100", "101", "102"]
        agg = json.loads((out / "aggregate.json").read_text())
        assert agg["runs"] == 3
        assert agg == json.loads(capsys.readouterr().out)

    def test_zero_delta_matches_simulate(self, short_config, tmp_path, capsys):
        exp = json.loads(Path(short_config).read_text())
        exp["delta"] = 0.0
        cfg_path = tmp_path / "nodelta.json"
        cfg_path.write_text(json.dumps(exp))
        sim_out = tmp_path / "sim"
        assert main(["simulate", "--config", str(cfg_path),
                     "--out-dir", str(sim_out)]) == EXIT_OK
        capsys.readouterr()
        mc_out = tmp_path / "mc"
        assert main(["monte-carlo", "--config", str(cfg_path),
                     "--n", "1", "--jobs", "1",
                     "--out-dir", str(mc_out)]) == EXIT_OK
        capsys.readouterr()
        summary = json.loads((sim_out / "summary.json").read_text())
        with open(mc_out / "runs.csv", newline="") as f:
            row = list(csv.reader(f))[1]
        assert float(row[2]) == pytest.approx(summary["std_pre"], rel=1e-8)
        assert float(row[3]) == pytest.approx(summary["std_post"], rel=1e-8)


class TestUsage:
    def test_no_arguments(self):
        assert main([]) == EXIT_USAGE

    def test_unknown_command(self):
        assert main(["frobnicate"]) == EXIT_USAGE
