import math
from difflib import SequenceMatcher
from pathlib import Path

from pite_lab.config import settings
from pite_lab.errors import ConfigError


def compare_tables(actual: str, expected: str, rel_tol: float | None = None) -> dict:
    """Compare emitted CSV text against a golden table with float tolerance."""
    rel_tol = settings.golden_rel_tol if rel_tol is None else rel_tol
    if actual == expected:
        return {"match": True, "feedback": "identical"}

    actual_lines = _normalize(actual).split("\n")
    expected_lines = _normalize(expected).split("\n")

    if actual_lines[0] != expected_lines[0]:
        return {
            "match": False,
            "feedback": f"header differs. Expected: '{expected_lines[0]}' but got: '{actual_lines[0]}'",
        }

    if len(actual_lines) != len(expected_lines):
        line_diff = len(actual_lines) - len(expected_lines)
        direction = "more" if line_diff > 0 else "fewer"
        return {"match": False, "feedback": f"table has {abs(line_diff)} {direction} row(s) than expected."}

    for i, (a_line, e_line) in enumerate(zip(actual_lines, expected_lines)):
        if a_line == e_line:
            continue
        column = _first_mismatch(a_line, e_line, rel_tol)
        if column is not None:
            return {"match": False, "feedback": _generate_feedback(i, column, a_line, e_line, expected_lines[0])}

    return {"match": True, "feedback": f"equal within rel_tol={rel_tol:g}"}


def compare_files(actual_path: Path, golden_path: Path, rel_tol: float | None = None) -> dict:
    try:
        actual = Path(actual_path).read_text()
        expected = Path(golden_path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read table for comparison: {e}") from e
    return compare_tables(actual, expected, rel_tol)


def _normalize(text: str) -> str:
    """Normalize line endings and drop trailing blank lines."""
    lines = text.replace("\r\n", "\n").split("\n")
    lines = [line.rstrip() for line in lines]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)


def _cells_close(a: str, e: str, rel_tol: float) -> bool:
    if a == e:
        return True
    try:
        a_val, e_val = float(a), float(e)
    except ValueError:
        return False
    if math.isnan(a_val) or math.isnan(e_val):
        return math.isnan(a_val) and math.isnan(e_val)
    return math.isclose(a_val, e_val, rel_tol=rel_tol, abs_tol=rel_tol * 1e-3)


def _first_mismatch(a_line: str, e_line: str, rel_tol: float) -> int | None:
    a_cells, e_cells = a_line.split(","), e_line.split(",")
    if len(a_cells) != len(e_cells):
        return min(len(a_cells), len(e_cells))
    for j, (a, e) in enumerate(zip(a_cells, e_cells)):
        if not _cells_close(a, e, rel_tol):
            return j
    return None


def _generate_feedback(line_no: int, column: int, actual: str, expected: str, header: str) -> str:
    names = header.split(",")
    name = names[column] if column < len(names) else f"column {column + 1}"
    ratio = SequenceMatcher(None, actual, expected).ratio()
    hint = f"line {line_no + 1}, {name}: expected '{expected}' but got '{actual}'"
    if ratio < 0.5:
        hint += " (row differs substantially)"
    return hint
