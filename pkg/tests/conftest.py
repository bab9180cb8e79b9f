import json
import os
from pathlib import Path

import numpy as np
import pytest

from pite_lab.core.engine import InitialWeights, gamma_params
from pite_lab.core.hamiltonians import build_heisenberg_chain, diagonalize
from pite_lab.services.validation_service import compare_tables

ROOT = Path(__file__).parent.parent
CONFIG_DIR = ROOT / "data" / "configs"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def heisenberg10():
    """The n=10, J=1, h=3 chain used by most reproduction configs."""
    return diagonalize(build_heisenberg_chain(10, 1.0, 3.0))


@pytest.fixture(scope="session")
def uniform10():
    return InitialWeights.uniform(1 << 10)


@pytest.fixture
def gp():
    return gamma_params(0.9)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict as JSON under tmp_path and return its path."""

    def _write(payload: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return _write


@pytest.fixture
def golden():
    """Compare text against the committed tests/golden/<name>.

    PITE_LAB_UPDATE_GOLDEN=1 rewrites the fixture instead.
    """

    def _check(name: str, text: str):
        path = GOLDEN_DIR / name
        if os.environ.get("PITE_LAB_UPDATE_GOLDEN"):
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            return
        if not path.exists():
            pytest.fail(f"missing golden fixture {path}; set PITE_LAB_UPDATE_GOLDEN=1 to write it")
        verdict = compare_tables(text, path.read_text())
        assert verdict["match"], verdict["feedback"]

    return _check
