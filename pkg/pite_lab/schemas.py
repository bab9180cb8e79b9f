"""Pydantic models for the JSON experiment config.

Every model forbids unknown keys. Angles and ranges accept floats or
"<number>pi" strings such as "5pi" or "0.25pi".
"""

import json
import math
import re
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    model_validator,
)

from pite_lab.errors import ConfigError

_PI_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*$")


def parse_pi(value):
    """Accept 1.5, "1.5", "1.5pi" or "pi"."""
    if isinstance(value, str):
        m = _PI_PATTERN.match(value)
        if m:
            coeff = m.group(1)
            return (float(coeff) if coeff else 1.0) * math.pi
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"expected a number or '<number>pi', got {value!r}") from None
    return value


PiFloat = Annotated[float, BeforeValidator(parse_pi)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# ---------------------------------------------------------------------------
# Hamiltonian sources
# ---------------------------------------------------------------------------

class HeisenbergConfig(_Strict):
    kind: Literal["heisenberg"]
    n: int = Field(ge=2)
    J: float = 1.0
    h: float = 0.0


class DoubleWellConfig(_Strict):
    kind: Literal["double_well"]
    n_qubits: int = Field(ge=3)
    L: float = 18.0
    d: float = 3.0
    delta: float = 0.25
    V0: float = 0.5
    mass: float = Field(default=1.0, gt=0)
    hbar: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _geometry(self):
        if not (self.L > self.d > 0):
            raise ValueError(f"need L > d > 0, got L={self.L}, d={self.d}")
        if self.V0 < 0:
            raise ValueError(f"V0 must be >= 0, got {self.V0}")
        return self


class SpectrumFileConfig(_Strict):
    kind: Literal["spectrum_file"]
    path: Path

    @model_validator(mode="after")
    def _exists(self):
        if not self.path.is_file():
            raise ValueError(f"spectrum file {self.path} does not exist")
        return self


HamiltonianConfig = Annotated[
    Union[HeisenbergConfig, DoubleWellConfig, SpectrumFileConfig],
    Field(discriminator="kind"),
]


class UniformState(_Strict):
    kind: Literal["uniform"] = "uniform"


class WeightsFileState(_Strict):
    kind: Literal["weights_file"]
    path: Path

    @model_validator(mode="after")
    def _exists(self):
        if not self.path.is_file():
            raise ValueError(f"weights file {self.path} does not exist")
        return self


InitialStateConfig = Annotated[Union[UniformState, WeightsFileState], Field(discriminator="kind")]


# ---------------------------------------------------------------------------
# Schedule and sweep
# ---------------------------------------------------------------------------

class ScheduleConfig(_Strict):
    """Step sizes in the dimensionless s·Δτ units; Δτ = s·Δτ / s.

    With gap_units, s_dtau_max is given as Δλ_min·s·Δτ_max and divided by the
    spectral gap at run time; s_dtau_min stays absolute.
    """

    type: Literal["constant", "linear", "exponential"] = "linear"
    s_dtau_min: PiFloat = Field(default=1e-4, ge=0)
    s_dtau_max: PiFloat = Field(default=0.62 * math.pi, ge=0)
    K: int = Field(default=200, ge=1)
    kappa_bar: float | None = Field(default=None, gt=0)
    gap_units: bool = False

    @model_validator(mode="after")
    def _consistent(self):
        if self.type != "constant" and self.s_dtau_min > self.s_dtau_max:
            raise ValueError(
                f"s_dtau_min={self.s_dtau_min} exceeds s_dtau_max={self.s_dtau_max}"
            )
        if self.type == "exponential" and self.kappa_bar is None:
            raise ValueError("exponential schedule requires kappa_bar")
        if self.type == "linear" and self.K < 2:
            raise ValueError("linear schedule requires K >= 2")
        return self


SweepParam = Literal["s_dtau_max", "s_dtau_min", "K", "alpha", "kappa_bar"]


class SweepConfig(_Strict):
    param: SweepParam
    start: PiFloat = Field(alias="from")
    stop: PiFloat = Field(alias="to")
    points: int = Field(ge=1)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _ordered(self):
        if self.start > self.stop:
            raise ValueError(f"sweep range is reversed: from={self.start} > to={self.stop}")
        if self.points > 1 and self.start == self.stop:
            raise ValueError("sweep range is empty")
        if self.spacing == "log" and self.start <= 0:
            raise ValueError("log spacing needs from > 0")
        if self.param == "alpha" and not (0 <= self.start and self.stop <= 1):
            raise ValueError("alpha sweep must stay within [0, 1]")
        return self


class SampleConfig(_Strict):
    shots: int = Field(default=10000, ge=1)


class CostConfig(_Strict):
    d_pite: float = Field(default=1.0, gt=0)
    w1_sq: float | None = Field(default=None, gt=0, le=1)
    eps_tilde: float = Field(default=1e-2, gt=0)


class BoundsConfig(_Strict):
    K: int = Field(default=200, ge=2)
    x_min: PiFloat = Field(default=1e-4, ge=0)
    kappa_bar: float = Field(default=1.0, gt=0)
    grid_from: PiFloat = 0.0
    grid_to: PiFloat = 5 * math.pi
    grid_points: int = Field(default=501, ge=2)


class RunConfig(_Strict):
    hamiltonian: HamiltonianConfig
    initial_state: InitialStateConfig = Field(default_factory=UniformState)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    gamma: float = Field(default=0.9, gt=0, lt=1)
    alpha: float = Field(default=1.0, ge=0, le=1)
    branch_n: int = 0
    lambda1: float | None = None
    bin_width: float = Field(default=1.0, gt=0)
    sweep: SweepConfig | None = None
    sample: SampleConfig = Field(default_factory=SampleConfig)
    cost: CostConfig = Field(default_factory=CostConfig)
    bounds: BoundsConfig = Field(default_factory=BoundsConfig)
    seed: int = 0
    output: Path | None = None


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Validate JSON config text; relative file paths resolve against base_dir."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if base_dir is not None and isinstance(raw, dict):
        _resolve_paths(raw, base_dir)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(_format_errors(e)) from e


def load_config(path: Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, base_dir=Path(path).parent)


def _resolve_paths(raw: dict, base_dir: Path):
    for key in ("hamiltonian", "initial_state"):
        section = raw.get(key)
        if isinstance(section, dict) and isinstance(section.get("path"), str):
            p = Path(section["path"])
            if not p.is_absolute() and not p.exists():
                section["path"] = str(base_dir / p)


def _format_errors(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "invalid config: " + "; ".join(parts)
