"""CSV and JSON formats for spectra, sweep tables and run summaries.

Floats are written with 17 significant digits so they re-parse exactly;
non-finite values are written as "-inf", "inf" or "nan".
"""

import csv
import io
import json
import logging
import math
from pathlib import Path

import numpy as np

from pite_lab.core.hamiltonians import DosHistogram, Spectrum
from pite_lab.errors import ConfigError, InvalidArgumentError, OutputError

logger = logging.getLogger(__name__)

SWEEP_HEADER = [
    "param", "value", "K", "s_dtau_min", "s_dtau_max", "kappa_bar",
    "ln_error_tilde", "error", "total_success_prob", "fidelity", "cumulative_tau",
]
WINDOW_HEADER = ["param", "value", "mean_ln_error_tilde", "std_ln_error_tilde", "samples"]
BOUNDS_HEADER = [
    "dlambda_s_dtau_max", "lower_bound", "upper_bound",
    "arith_mean_linear", "arith_mean_exp", "amplitude", "phase",
]
SPECTRUM_HEADER = ["index", "eigenvalue", "weight"]
DOS_HEADER = ["bin_left", "bin_right", "count", "density"]
SAMPLE_HEADER = ["shot", "succeeded", "steps_survived"]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def to_jsonable(value):
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else format_value(v)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, Path):
        return str(value)
    return value


def render_csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in header])
    return buf.getvalue()


def render_json(payload) -> str:
    return json.dumps(to_jsonable(payload), indent=2) + "\n"


def _write(path: Path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    logger.info("wrote %s", path)


def emit_outputs(rows: list[dict], fmt: str, path: Path, header: list[str] | None = None) -> Path:
    """Write rows as CSV (exact header order) or as a JSON list of objects."""
    if not rows:
        raise InvalidArgumentError("no rows to emit")
    header = header or SWEEP_HEADER
    path = Path(path)
    if fmt == "csv":
        _write(path, render_csv(rows, header))
    elif fmt == "json":
        _write(path, render_json(rows))
    else:
        raise InvalidArgumentError(f"unknown output format {fmt!r}")
    return path


def emit_json(payload, path: Path) -> Path:
    _write(Path(path), render_json(payload))
    return Path(path)


def sibling(path: Path, suffix: str, ext: str | None = None) -> Path:
    """<stem><suffix><ext> next to path, e.g. out.csv -> out_window.csv."""
    path = Path(path)
    return path.with_name(f"{path.stem}{suffix}{ext or path.suffix}")


# ---------------------------------------------------------------------------
# Spectrum files
# ---------------------------------------------------------------------------

def spectrum_rows(spec: Spectrum, weights=None) -> list[dict]:
    w = np.full(len(spec), 1.0 / len(spec)) if weights is None else np.asarray(weights)
    return [
        {"index": i, "eigenvalue": float(lam), "weight": float(wi)}
        for i, (lam, wi) in enumerate(zip(spec.eigenvalues, w))
    ]


def dos_rows(dos: DosHistogram) -> list[dict]:
    density = dos.normalized
    return [
        {
            "bin_left": float(dos.bin_edges[i]),
            "bin_right": float(dos.bin_edges[i + 1]),
            "count": int(dos.counts[i]),
            "density": float(density[i]),
        }
        for i in range(dos.counts.size)
    ]


def _read_table(path: Path, required: list[str]) -> list[dict]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise ConfigError(f"{path}: missing column(s) {', '.join(missing)}")
    rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return rows


def read_spectrum(path: Path) -> tuple[Spectrum, np.ndarray | None]:
    """Eigenvalues (and weights when the column is filled) from a spectrum CSV."""
    rows = _read_table(path, ["index", "eigenvalue"])
    try:
        rows.sort(key=lambda r: int(r["index"]))
        vals = np.array([float(r["eigenvalue"]) for r in rows])
        raw_w = [r.get("weight", "") for r in rows]
        weights = np.array([float(x) for x in raw_w]) if all(raw_w) else None
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e
    if np.any(np.diff(vals) < 0):
        raise ConfigError(f"{path}: eigenvalues must be listed in ascending order")
    return Spectrum(vals), weights


def read_weights(path: Path) -> np.ndarray:
    rows = _read_table(path, ["index", "weight"])
    try:
        rows.sort(key=lambda r: int(r["index"]))
        return np.array([float(r["weight"]) for r in rows])
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e


def write_spectrum(spec: Spectrum, path: Path, weights=None, dos: DosHistogram | None = None) -> list[Path]:
    written = [emit_outputs(spectrum_rows(spec, weights), "csv", path, SPECTRUM_HEADER)]
    if dos is not None:
        written.append(emit_outputs(dos_rows(dos), "csv", sibling(path, "_dos"), DOS_HEADER))
    return written
