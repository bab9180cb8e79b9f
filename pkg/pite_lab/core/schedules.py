"""Imaginary-time step schedules Δτ_1..Δτ_K.

Schedules hold s-free step sizes; the dimensionless product s·Δτ is formed
by the engine.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from pite_lab.errors import InvalidArgumentError


class ScheduleKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class Schedule:
    kind: ScheduleKind
    steps: np.ndarray
    dtau_min: float
    dtau_max: float
    kappa_bar: float | None = None

    def __post_init__(self):
        steps = np.array(self.steps, dtype=float).ravel()
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)

    @property
    def K(self) -> int:
        return self.steps.size

    @property
    def final_step(self) -> float:
        return float(self.steps[-1])

    @property
    def cumulative_tau(self) -> float:
        """Closed-form total imaginary time."""
        K = self.K
        if self.kind is ScheduleKind.CONSTANT:
            return K * self.dtau_max
        if self.kind is ScheduleKind.LINEAR:
            return K * (self.dtau_max + self.dtau_min) / 2
        kappa = self.kappa_bar * K
        ratio = -math.expm1(-1 / self.kappa_bar) / -math.expm1(-1 / kappa)
        return K * self.dtau_max - (self.dtau_max - self.dtau_min) * ratio

    def scaled(self, s: float) -> np.ndarray:
        """The dimensionless angles s·Δτ_k."""
        return s * self.steps


def _check_range(dtau_min: float, dtau_max: float):
    if not (0 <= dtau_min <= dtau_max):
        raise InvalidArgumentError(
            f"need 0 <= dtau_min <= dtau_max, got dtau_min={dtau_min}, dtau_max={dtau_max}"
        )


def schedule_fractions(kind: ScheduleKind | str, K: int, kappa_bar: float | None = None) -> np.ndarray:
    """Ramp fractions r_k in Δτ_k = Δτ_min + r_k(Δτ_max − Δτ_min), k = 1..K."""
    kind = ScheduleKind(kind)
    k = np.arange(K)
    if kind is ScheduleKind.LINEAR:
        frac = k / (K - 1)
        frac[-1] = 1.0
        return frac
    if kind is ScheduleKind.EXPONENTIAL:
        return -np.expm1(-k / (kappa_bar * K))
    return np.ones(K)


def linear_schedule(dtau_min: float, dtau_max: float, K: int) -> Schedule:
    _check_range(dtau_min, dtau_max)
    if K < 2:
        raise InvalidArgumentError(f"linear schedule needs K >= 2, got {K}")
    steps = schedule_fractions(ScheduleKind.LINEAR, K) * (dtau_max - dtau_min) + dtau_min
    steps[-1] = dtau_max
    return Schedule(ScheduleKind.LINEAR, steps, dtau_min, dtau_max)


def exponential_schedule(
    dtau_min: float, dtau_max: float, K: int, kappa_bar: float
) -> Schedule:
    _check_range(dtau_min, dtau_max)
    if K < 1:
        raise InvalidArgumentError(f"exponential schedule needs K >= 1, got {K}")
    if kappa_bar <= 0:
        raise InvalidArgumentError(f"kappa_bar must be positive, got {kappa_bar}")
    frac = schedule_fractions(ScheduleKind.EXPONENTIAL, K, kappa_bar)
    steps = frac * (dtau_max - dtau_min) + dtau_min
    return Schedule(ScheduleKind.EXPONENTIAL, steps, dtau_min, dtau_max, kappa_bar)


def constant_schedule(dtau: float, K: int) -> Schedule:
    if dtau < 0:
        raise InvalidArgumentError(f"dtau must be >= 0, got {dtau}")
    if K < 1:
        raise InvalidArgumentError(f"constant schedule needs K >= 1, got {K}")
    return Schedule(ScheduleKind.CONSTANT, np.full(K, float(dtau)), dtau, dtau)


def exponential_final_step(
    dtau_min: float, dtau_max: float, K: int, kappa_bar: float
) -> float:
    """Δτ_K = Δτ_max − e^{(1/K−1)/κ̄}(Δτ_max − Δτ_min)."""
    return dtau_max - math.exp((1 / K - 1) / kappa_bar) * (dtau_max - dtau_min)


def make_schedule(
    kind: ScheduleKind | str,
    dtau_min: float,
    dtau_max: float,
    K: int,
    kappa_bar: float | None = None,
) -> Schedule:
    kind = ScheduleKind(kind)
    if kind is ScheduleKind.LINEAR:
        return linear_schedule(dtau_min, dtau_max, K)
    if kind is ScheduleKind.EXPONENTIAL:
        if kappa_bar is None:
            raise InvalidArgumentError("exponential schedule requires kappa_bar")
        return exponential_schedule(dtau_min, dtau_max, K, kappa_bar)
    return constant_schedule(dtau_max, K)
