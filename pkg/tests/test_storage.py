import csv
import io
import json
import math

import numpy as np
import pytest

from pite_lab.core.hamiltonians import Spectrum, dos_histogram
from pite_lab.errors import ConfigError, InvalidArgumentError, OutputError
from pite_lab.storage.database import get_engine, list_runs, record_run
from pite_lab.storage.files import (
    SWEEP_HEADER,
    emit_outputs,
    format_value,
    read_spectrum,
    read_weights,
    render_csv,
    render_json,
    sibling,
    write_spectrum,
)


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------


class TestFormatting:
    @pytest.mark.parametrize(
        "value, text",
        [
            (None, ""),
            (True, "1"),
            (np.bool_(False), "0"),
            (np.int64(7), "7"),
            (0.1, "0.10000000000000001"),
            (-math.inf, "-inf"),
            (math.nan, "nan"),
            ("s_dtau_max", "s_dtau_max"),
        ],
    )
    def test_format_value(self, value, text):
        assert format_value(value) == text

    def test_floats_reparse_exactly(self, rng):
        for x in rng.normal(size=100) * 10.0 ** rng.integers(-20, 20, size=100):
            assert float(format_value(float(x))) == x

    def test_csv_header_order(self):
        text = render_csv([{"value": 1.0, "param": "K"}], SWEEP_HEADER)
        header, row = text.splitlines()
        assert header.split(",") == SWEEP_HEADER
        assert row.startswith("K,1,")

    def test_json_non_finite(self):
        payload = json.loads(render_json({"a": math.inf, "b": [np.float64(0.5), np.nan]}))
        assert payload == {"a": "inf", "b": [0.5, "nan"]}


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


class TestEmitOutputs:
    def test_csv_and_json(self, tmp_path):
        rows = [{"param": "K", "value": 50, "ln_error_tilde": -3.5}]
        csv_path = emit_outputs(rows, "csv", tmp_path / "sweep.csv")
        json_path = emit_outputs(rows, "json", tmp_path / "sweep.json")
        parsed = list(csv.DictReader(io.StringIO(csv_path.read_text())))
        assert parsed[0]["ln_error_tilde"] == "-3.5"
        assert json.loads(json_path.read_text())[0]["value"] == 50

    def test_creates_parent_directories(self, tmp_path):
        path = emit_outputs([{"param": "K"}], "csv", tmp_path / "a" / "b" / "out.csv")
        assert path.exists()

    def test_empty_rows(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            emit_outputs([], "csv", tmp_path / "out.csv")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            emit_outputs([{"param": "K"}], "xml", tmp_path / "out.xml")

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OutputError):
            emit_outputs([{"param": "K"}], "csv", blocker / "out.csv")

    def test_sibling(self, tmp_path):
        assert sibling(tmp_path / "out.csv", "_dos") == tmp_path / "out_dos.csv"
        assert sibling(tmp_path / "out.csv", "_summary", ".json") == tmp_path / "out_summary.json"


# ---------------------------------------------------------------------------
# Spectrum files
# ---------------------------------------------------------------------------


class TestSpectrumFiles:
    def test_write_then_read(self, tmp_path):
        spec = Spectrum([-1.0, 0.25, 3.0, 3.0])
        weights = np.array([0.1, 0.2, 0.3, 0.4])
        written = write_spectrum(spec, tmp_path / "spec.csv", weights, dos_histogram(spec, 1.0))
        assert [p.name for p in written] == ["spec.csv", "spec_dos.csv"]
        loaded, loaded_weights = read_spectrum(tmp_path / "spec.csv")
        np.testing.assert_array_equal(loaded.eigenvalues, spec.eigenvalues)
        np.testing.assert_array_equal(loaded_weights, weights)
        np.testing.assert_array_equal(read_weights(tmp_path / "spec.csv"), weights)

    def test_blank_weights_column(self, tmp_path):
        path = tmp_path / "spec.csv"
        path.write_text("index,eigenvalue,weight\n1,2.0,\n0,1.0,\n")
        spec, weights = read_spectrum(path)
        assert weights is None
        np.testing.assert_array_equal(spec.eigenvalues, [1.0, 2.0])

    @pytest.mark.parametrize(
        "text",
        [
            "index,value\n0,1.0\n",
            "index,eigenvalue\n",
            "index,eigenvalue\n0,abc\n",
            "index,eigenvalue\n0,2.0\n1,1.0\n",
        ],
    )
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "spec.csv"
        path.write_text(text)
        with pytest.raises(ConfigError):
            read_spectrum(path)


# ---------------------------------------------------------------------------
# Run ledger
# ---------------------------------------------------------------------------


class TestRunLedger:
    def test_record_and_list(self, tmp_path):
        url = f"sqlite:///{tmp_path / 'db' / 'runs.db'}"
        record_run("sweep", {"seed": 3, "gamma": 0.9}, 3, {"points": 500, "best": math.nan}, tmp_path / "out.csv", url=url)
        record_run("run", {"seed": 0}, 0, url=url)
        runs = list_runs(url=url)
        assert [r.command for r in runs] == ["sweep", "run"]
        assert runs[0].config_dict == {"gamma": 0.9, "seed": 3}
        assert runs[0].summary_dict["best"] == "nan"
        assert runs[0].output_path.endswith("out.csv")
        assert [r.command for r in list_runs("run", url=url)] == ["run"]

    def test_engine_is_cached(self, tmp_path):
        url = f"sqlite:///{tmp_path / 'cached.db'}"
        assert get_engine(url) is get_engine(url)
