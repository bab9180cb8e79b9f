"""End-to-end subcommand runs through pite_lab.main."""

import csv
import io
import json
import math

import pytest

from pite_lab.main import main
from pite_lab.storage.database import list_runs
from tests.conftest import GOLDEN_DIR

SMALL = {
    "hamiltonian": {"kind": "heisenberg", "n": 3, "J": 1.0, "h": 0.5},
    "schedule": {"type": "linear", "s_dtau_min": 1e-4, "s_dtau_max": "0.5pi", "K": 10},
    "sweep": {"param": "s_dtau_max", "from": 0, "to": "2pi", "points": 21},
    "sample": {"shots": 500},
}


@pytest.fixture
def small_config(write_config):
    return write_config(SMALL)


def read_rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


class TestSpectrumCommand:
    def test_writes_spectrum_and_dos(self, small_config, tmp_path):
        out = tmp_path / "spectrum.csv"
        assert main(["spectrum", "--config", str(small_config), "--output", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 8
        assert list(rows[0]) == ["index", "eigenvalue", "weight"]
        dos = read_rows(tmp_path / "spectrum_dos.csv")
        assert sum(int(r["count"]) for r in dos) == 8

    def test_stdout_without_output(self, small_config, capsys):
        assert main(["spectrum", "--config", str(small_config)]) == 0
        assert capsys.readouterr().out.startswith("index,eigenvalue,weight\n")


class TestRunCommand:
    def test_summary_json(self, small_config, tmp_path, capsys):
        out = tmp_path / "run.json"
        assert main(["run", "--config", str(small_config), "--output", str(out), "--alphas", "0,1", "--damping"]) == 0
        summary = json.loads(out.read_text())
        assert summary["schedule"]["K"] == 10
        assert len(summary["damping"]) == 8
        assert [r["alpha"] for r in summary["alpha_sweep"]] == [0.0, 1.0]
        assert json.loads(capsys.readouterr().out)["seed"] == 0


class TestSweepCommand:
    def test_outputs(self, small_config, tmp_path):
        out = tmp_path / "sweep.csv"
        status = main([
            "sweep", "--config", str(small_config), "--output", str(out),
            "--window", "0.25pi", "--window-centre", "pi", "--threads", "2",
        ])
        assert status == 0
        rows = read_rows(out)
        assert len(rows) == 21
        assert out.read_text().splitlines()[0] == (
            "param,value,K,s_dtau_min,s_dtau_max,kappa_bar,"
            "ln_error_tilde,error,total_success_prob,fidelity,cumulative_tau"
        )
        mirror = json.loads(out.with_suffix(".json").read_text())
        assert len(mirror) == 21
        assert "s_dtau_final" in mirror[0]
        window = read_rows(tmp_path / "sweep_window.csv")
        assert float(window[0]["value"]) == pytest.approx(math.pi)
        assert int(window[0]["samples"]) >= 3

    def test_window_on_analytic_minimum(self, write_config, tmp_path):
        config = {
            **SMALL,
            "schedule": {"type": "linear", "s_dtau_min": 1e-4, "s_dtau_max": "0.5pi", "K": 10, "gap_units": True},
            "sweep": {"param": "s_dtau_max", "from": 0, "to": "2pi", "points": 41},
        }
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", str(write_config(config)), "--output", str(out), "--window", "0.2pi"]) == 0
        window = read_rows(tmp_path / "sweep_window.csv")[0]
        assert 0 < float(window["value"]) <= math.pi
        assert int(window["samples"]) >= 3

    def test_window_needs_a_centre(self, write_config, tmp_path):
        config = {**SMALL, "sweep": {"param": "K", "from": 5, "to": 10, "points": 6}}
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", str(write_config(config)), "--output", str(out), "--window", "2"]) == 2
        assert main([
            "sweep", "--config", str(write_config(config)), "--output", str(out), "--window", "2", "--window-centre", "7",
        ]) == 0


    def test_byte_identical_across_threads(self, small_config, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["sweep", "--config", str(small_config), "--output", str(a), "--threads", "1"])
        main(["sweep", "--config", str(small_config), "--output", str(b), "--threads", "3"])
        assert a.read_bytes() == b.read_bytes()

    def test_golden_match_and_mismatch(self, small_config, tmp_path):
        out = tmp_path / "sweep.csv"
        main(["sweep", "--config", str(small_config), "--output", str(out)])
        assert main(["sweep", "--config", str(small_config), "--output", str(tmp_path / "again.csv"), "--golden", str(out)]) == 0
        tampered = tmp_path / "tampered.csv"
        lines = out.read_text().splitlines()
        lines[5] = lines[5].replace("s_dtau_max", "K", 1)
        tampered.write_text("\n".join(lines) + "\n")
        assert main(["sweep", "--config", str(small_config), "--output", str(tmp_path / "x.csv"), "--golden", str(tampered)]) == 1


class TestSampleCommand:
    def test_outputs(self, small_config, tmp_path):
        out = tmp_path / "sample.csv"
        assert main(["sample", "--config", str(small_config), "--output", str(out), "--shots", "200", "--seed", "4"]) == 0
        assert len(read_rows(out)) == 200
        summary = json.loads((tmp_path / "sample_summary.json").read_text())
        assert summary["shots"] == 200
        assert summary["seed"] == 4


class TestChecks:
    def test_bounds_without_config(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert main(["bounds", "--K", "50", "--kappa-bar", "0.5", "--output", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 500
        assert "caveat" in json.loads(out.with_suffix(".json").read_text())[0]

    def test_circuit_check(self, small_config, capsys):
        assert main(["circuit-check", "--config", str(small_config)]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_cost(self, capsys):
        assert main(["cost", "--w1-sq", "0.5", "--eps-tilde", "1e-6"]) == 0
        assert "K = 10" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# Committed golden tables
# ---------------------------------------------------------------------------


class TestGoldenTables:
    @pytest.fixture
    def two_level_config(self, write_config, tmp_path):
        (tmp_path / "levels.csv").write_text("index,eigenvalue,weight\n0,0.0,\n1,1.0,\n")
        return write_config({
            "hamiltonian": {"kind": "spectrum_file", "path": "levels.csv"},
            "gamma": 0.8,
            "schedule": {"type": "constant", "s_dtau_min": 0, "s_dtau_max": 0.5, "K": 2},
            "sweep": {"param": "s_dtau_max", "from": 0, "to": 1.0471975511965976, "points": 3},
        })

    @pytest.fixture
    def mixed_config(self, write_config, tmp_path):
        levels = [-2.5, -1.0, -1.0, 0.2, 1.5, 1.5, 1.5, 3.0]
        body = "".join(f"{i},{lam},\n" for i, lam in enumerate(levels))
        (tmp_path / "levels.csv").write_text("index,eigenvalue,weight\n" + body)
        return write_config({"hamiltonian": {"kind": "spectrum_file", "path": "levels.csv"}, "bin_width": 1.0})

    def test_two_level_sweep(self, two_level_config, tmp_path, golden):
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", str(two_level_config), "--output", str(out)]) == 0
        golden("two_level_constant_sweep.csv", out.read_text())

    def test_two_level_sweep_golden_flag(self, two_level_config, tmp_path):
        args = ["sweep", "--config", str(two_level_config), "--output", str(tmp_path / "sweep.csv")]
        assert main([*args, "--golden", str(GOLDEN_DIR / "two_level_constant_sweep.csv")]) == 0

    def test_spectrum_and_histogram(self, mixed_config, tmp_path, golden):
        out = tmp_path / "mixed.csv"
        assert main(["spectrum", "--config", str(mixed_config), "--output", str(out)]) == 0
        golden("mixed_spectrum.csv", out.read_text())
        golden("mixed_spectrum_dos.csv", (tmp_path / "mixed_dos.csv").read_text())


# ---------------------------------------------------------------------------
# Exit codes and the run ledger
# ---------------------------------------------------------------------------


class TestExitCodes:
    def test_config_error(self, write_config, capsys):
        path = write_config({"hamiltonian": {"kind": "heisenberg", "n": 3}, "bogus": True})
        assert main(["run", "--config", str(path)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_config(self):
        assert main(["run"]) == 2

    def test_cost_without_weight(self):
        assert main(["cost"]) == 2

    def test_invalid_cost_override(self):
        assert main(["cost", "--w1-sq", "2"]) == 2

    def test_numeric_error(self, write_config):
        path = write_config({"hamiltonian": {"kind": "heisenberg", "n": 3}, "gamma": 0.7071067811865476})
        assert main(["run", "--config", str(path)]) == 3

    def test_output_error(self, small_config, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        assert main(["spectrum", "--config", str(small_config), "--output", str(blocker / "x.csv")]) == 4

    def test_resource_limit(self, write_config):
        path = write_config({"hamiltonian": {"kind": "heisenberg", "n": 20}})
        assert main(["spectrum", "--config", str(path)]) == 2


class TestRecord:
    def test_record_flag(self, small_config, tmp_path, monkeypatch):
        url = f"sqlite:///{tmp_path / 'runs.db'}"
        monkeypatch.setattr("pite_lab.config.settings.database_url", url)
        assert main(["run", "--config", str(small_config), "--output", str(tmp_path / "r.json"), "--record"]) == 0
        runs = list_runs(url=url)
        assert len(runs) == 1
        assert runs[0].command == "run"
        assert runs[0].config_dict["hamiltonian"]["n"] == 3
