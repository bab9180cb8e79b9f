"""Analytic error bounds, arithmetic means and cost estimates for scheduled PITE.

Most functions take dimensionless phase products (Δλ s Δτ); none of them
touches a Hamiltonian matrix.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from pite_lab.core.engine import GammaParams
from pite_lab.core.hamiltonians import Spectrum
from pite_lab.core.schedules import (
    ScheduleKind,
    schedule_fractions,
)
from pite_lab.core.special import ci, cin, cin_from_log, si, si_from_log
from pite_lab.errors import InvalidArgumentError

__all__ = [
    "si",
    "ci",
    "cin",
    "LinearBoundParams",
    "ExpMeanParams",
    "DampingBounds",
    "ExpMean",
    "log_damping_bounds",
    "linear_log_integral",
    "arithmetic_mean_linear",
    "arithmetic_mean_exponential",
    "required_steps",
    "steps_estimate",
    "required_tau_schedule",
    "optimal_dtau_max",
    "validity_condition",
    "error_upper_bound_constant",
    "cost_estimate",
    "geometric_arithmetic_gap",
    "eigenvalue_log_damping",
    "minimum_error_position",
    "linear_mean_minimizer",
    "final_step_position",
    "error_limit",
]

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2
# ∫₀^{π/2} ln cos x dx
S_CONST = -HALF_PI * math.log(2)
CAVEAT_STEP_PHASE = math.pi / 4

LINEAR_MINIMUM_POSITION = 0.62 * math.pi
LINEAR_MEAN_MINIMUM_POSITION = 0.75 * math.pi
EXPONENTIAL_MINIMUM_POSITIONS = {
    0.25: 0.52 * math.pi,
    0.5: 0.63 * math.pi,
    1.0: 0.91 * math.pi,
}
EXPONENTIAL_FINAL_STEP_POSITIONS = {
    0.25: 0.51 * math.pi,
    0.5: 0.54 * math.pi,
    1.0: 0.57 * math.pi,
}
FINAL_STEP_TARGET = 0.5 * math.pi
SWEEP_GRID = (0.0, 5 * math.pi, 500)


# ---------------------------------------------------------------------------
# Parameter types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearBoundParams:
    """Per-eigenvalue phases of a linear schedule: step k has angle a + b·k."""

    a: float
    b: float
    K: int

    def __post_init__(self):
        if self.b < 0:
            raise InvalidArgumentError(f"phase increment b must be >= 0, got {self.b}")
        if self.K < 1:
            raise InvalidArgumentError(f"K must be >= 1, got {self.K}")

    @classmethod
    def from_products(cls, x_min: float, x_max: float, K: int) -> "LinearBoundParams":
        """From x_min = Δλ s Δτ_min and x_max = Δλ s Δτ_max."""
        if K < 2:
            raise InvalidArgumentError(f"linear schedule needs K >= 2, got {K}")
        b = (x_max - x_min) / (K - 1)
        return cls(a=x_min - b, b=b, K=K)

    @classmethod
    def from_schedule(
        cls, dlambda: float, s: float, dtau_min: float, dtau_max: float, K: int
    ) -> "LinearBoundParams":
        return cls.from_products(dlambda * s * dtau_min, dlambda * s * dtau_max, K)

    def angles(self) -> np.ndarray:
        return self.a + self.b * np.arange(1, self.K + 1)


@dataclass(frozen=True)
class ExpMeanParams:
    alpha: float
    beta: float
    kappa: float
    kappa_bar: float

    def __post_init__(self):
        if self.kappa_bar <= 0 or self.kappa <= 0:
            raise InvalidArgumentError("kappa and kappa_bar must be positive")
        if self.beta < 0:
            raise InvalidArgumentError(f"beta must be >= 0, got {self.beta}")
        if self.alpha < self.beta:
            raise InvalidArgumentError(f"alpha={self.alpha} must be >= beta={self.beta}")

    @classmethod
    def from_products(cls, x_min: float, x_max: float, K: int, kappa_bar: float) -> "ExpMeanParams":
        return cls(alpha=x_max, beta=x_max - x_min, kappa=kappa_bar * K, kappa_bar=kappa_bar)

    def angles(self, K: int) -> np.ndarray:
        return self.alpha - self.beta * np.exp(-np.arange(K) / self.kappa)


class DampingBounds(NamedTuple):
    lower: float
    upper: float
    degenerate: bool = False
    caveat: bool = False


class ExpMean(NamedTuple):
    mean: float
    amplitude: float
    phase: float


# ---------------------------------------------------------------------------
# Linear schedule
# ---------------------------------------------------------------------------

def _log_cos2(x) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.cos(x) ** 2)


def log_damping_bounds(p: LinearBoundParams) -> DampingBounds:
    """Half-period counting bounds on Σ_k ln cos²(a + bk) in integral form."""
    if p.b == 0:
        value = p.K * float(_log_cos2(p.a))
        return DampingBounds(value, value, degenerate=True)
    start = p.a / HALF_PI
    end = (p.a + p.b * p.K) / HALF_PI
    scale = 2 * S_CONST / p.b
    lower = scale * (math.ceil(end) - math.floor(start))
    upper = scale * (math.floor(end) - math.ceil(start))
    return DampingBounds(lower, upper, caveat=p.b > CAVEAT_STEP_PHASE)


def _log_sin2_integral(r: float) -> float:
    """∫₀ʳ ln sin² t dt for 0 ≤ r ≤ π/2."""
    if r <= 0:
        return 0.0
    smooth, _ = quad(lambda t: 2 * math.log(np.sinc(t / math.pi)), 0.0, r, epsabs=1e-13, epsrel=1e-13)
    return smooth + 2 * (r * math.log(r) - r)


def _log_cos2_antiderivative(x: float) -> float:
    """F(x) = ∫₀ˣ ln cos² t dt, via whole half-periods plus a remainder."""
    m = math.floor(x / HALF_PI)
    r = x - m * HALF_PI
    if m % 2 == 0:
        part = 2 * S_CONST - _log_sin2_integral(HALF_PI - r)
    else:
        part = _log_sin2_integral(r)
    return m * 2 * S_CONST + part


def linear_log_integral(p: LinearBoundParams) -> float:
    """G = (1/b)∫_a^{a+bK} ln cos² x dx, the integral stand-in for Σ_k ln cos²(a + bk)."""
    if p.b == 0:
        return p.K * float(_log_cos2(p.a))
    upper = p.a + p.b * p.K
    return (_log_cos2_antiderivative(upper) - _log_cos2_antiderivative(p.a)) / p.b


def arithmetic_mean_linear(p: LinearBoundParams) -> float:
    span = p.b * p.K
    if span == 0:
        return math.cos(p.a) ** 2
    return 0.5 + (math.sin(2 * (p.a + span)) - math.sin(2 * p.a)) / (4 * span)


def linear_mean_minimizer(K: int, x_min: float = 0.0) -> float:
    """Exact minimizer over Δλ s Δτ_max of the linear-schedule arithmetic mean."""
    res = minimize_scalar(
        lambda x: arithmetic_mean_linear(LinearBoundParams.from_products(x_min, x, K)),
        bounds=(HALF_PI, math.pi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


# ---------------------------------------------------------------------------
# Exponential schedule
# ---------------------------------------------------------------------------

def arithmetic_mean_exponential(p: ExpMeanParams) -> ExpMean:
    """Closed-form mean of cos² over the exponential ramp, as 1/2 + ½A·cos(2α − φ̄)."""
    if p.beta == 0:
        return ExpMean(math.cos(p.alpha) ** 2, 1.0, 0.0)
    log_x1 = math.log(2 * p.beta) + 1 / p.kappa
    log_x2 = log_x1 - 1 / p.kappa_bar
    delta_s = p.kappa_bar * float(si_from_log(log_x1) - si_from_log(log_x2))
    delta_c = 1.0 - p.kappa_bar * float(cin_from_log(log_x1) - cin_from_log(log_x2))
    amplitude = math.hypot(delta_s, delta_c)
    phase = math.atan2(delta_s, delta_c)
    mean = 0.5 + 0.5 * amplitude * math.cos(2 * p.alpha - phase)
    return ExpMean(mean, amplitude, phase)


def final_step_position(x, K: int, kappa_bar: float, x_min: float = 1e-4):
    """Δλ s Δτ_K of an exponential ramp whose Δλ s Δτ_max is x."""
    x = np.asarray(x, dtype=float)
    q = math.exp((1 / K - 1) / kappa_bar)
    out = x - q * (x - x_min)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Per-eigenvalue damping curves
# ---------------------------------------------------------------------------

def eigenvalue_log_damping(
    x,
    kind: ScheduleKind | str,
    K: int,
    x_min: float = 1e-4,
    kappa_bar: float | None = None,
) -> np.ndarray:
    """ln F̃ = Σ_k ln cos²(Δλ s Δτ_k) for each axis value x = Δλ s Δτ_max.

    Axis values below x_min are clamped so the ramp stays nondecreasing.
    """
    kind = ScheduleKind(kind)
    if kind is ScheduleKind.EXPONENTIAL and kappa_bar is None:
        raise InvalidArgumentError("exponential schedule requires kappa_bar")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo = np.minimum(x_min, x)
    frac = schedule_fractions(kind, K, kappa_bar)
    angles = lo[:, None] + frac[None, :] * (x - lo)[:, None]
    return _log_cos2(angles).sum(axis=1)


def minimum_error_position(
    kind: ScheduleKind | str,
    K: int,
    x_min: float = 1e-4,
    kappa_bar: float | None = None,
    grid=None,
) -> float:
    """Axis position of the first-lobe minimum of ln F̃, on the default 500-point grid over [0, 5π]."""
    grid = np.linspace(*SWEEP_GRID) if grid is None else np.asarray(grid, dtype=float)
    lobe = grid[(grid > 0) & (grid <= math.pi)]
    if lobe.size == 0:
        raise InvalidArgumentError("grid has no points in (0, pi]")
    curve = eigenvalue_log_damping(lobe, kind, K, x_min, kappa_bar)
    # isolated grid points on a node of cos give -inf spikes
    curve = np.where(np.isfinite(curve), curve, np.nan)
    pos = float(lobe[np.nanargmin(curve)])
    logger.debug("minimum of %s curve (K=%d) at %.4f pi", ScheduleKind(kind).value, K, pos / math.pi)
    return pos


def error_limit(w1_sq: float, K: int) -> float:
    """Large-excitation error level ((1 − w1²)/w1²)·4^{−K}."""
    return (1 - w1_sq) / w1_sq * 4.0 ** (-K)


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------

_STEP_COEFFICIENTS = {
    "limit": 1 / (2 * math.log(2)),
    "cos2_bound": 3 / (2 * math.log(2)),
}


def _log_ratio(w1_sq: float, eps_tilde: float) -> float:
    if eps_tilde <= 0:
        raise InvalidArgumentError(f"eps_tilde must be positive, got {eps_tilde}")
    if w1_sq <= 0:
        raise InvalidArgumentError(f"w1_sq must be positive, got {w1_sq}")
    return math.log((1 - w1_sq) / (eps_tilde * w1_sq))


def steps_estimate(w1_sq: float, eps_tilde: float, variant: str = "limit") -> float:
    """Unrounded step count c·ln[(1 − w1²)/(ε̃ w1²)]."""
    if variant not in _STEP_COEFFICIENTS:
        raise InvalidArgumentError(f"unknown variant {variant!r}; expected one of {sorted(_STEP_COEFFICIENTS)}")
    if w1_sq >= 1:
        return 0.0
    return _STEP_COEFFICIENTS[variant] * _log_ratio(w1_sq, eps_tilde)


def required_steps(w1_sq: float, eps_tilde: float, variant: str = "limit") -> int:
    return max(0, math.ceil(steps_estimate(w1_sq, eps_tilde, variant)))


def required_tau_schedule(
    dlambda_min: float,
    s: float,
    w1_sq: float,
    eps_tilde: float,
    variant: str = "linear_exp",
    dlambda_max: float | None = None,
) -> float:
    """Total imaginary time to reach ε̃.

    `linear_exp` divides by 4 s Δλ_min ln 2; `constant` divides by
    4 Δλ_max ln 2 (the constant step is fixed at 1/(2Δλ_max)).
    """
    if variant == "linear_exp":
        rate = s * dlambda_min
    elif variant == "constant":
        if dlambda_max is None:
            raise InvalidArgumentError("constant variant requires dlambda_max")
        rate = dlambda_max
    else:
        raise InvalidArgumentError(f"unknown variant {variant!r}")
    if dlambda_min <= 0 or rate <= 0:
        raise InvalidArgumentError("spectral gaps must be positive")
    return max(0.0, _log_ratio(w1_sq, eps_tilde)) / (4 * rate * math.log(2))


def optimal_dtau_max(
    dlambda_min: float,
    s: float,
    sched_kind: ScheduleKind | str,
    kappa_bar: float | None = None,
    K: int | None = None,
    dtau_min: float = 0.0,
    dlambda_max: float | None = None,
) -> float:
    if dlambda_min <= 0:
        raise InvalidArgumentError(f"dlambda_min must be positive, got {dlambda_min}")
    kind = ScheduleKind(sched_kind)
    if kind is ScheduleKind.LINEAR:
        return LINEAR_MINIMUM_POSITION / (s * dlambda_min)
    if kind is ScheduleKind.EXPONENTIAL:
        if K is None or kappa_bar is None:
            raise InvalidArgumentError("exponential variant requires K and kappa_bar")
        target = FINAL_STEP_TARGET / (s * dlambda_min)
        q = math.exp((1 / K - 1) / kappa_bar)
        dtau_max = (target - q * dtau_min) / (1 - q)
        return dtau_max
    if dlambda_max is None:
        raise InvalidArgumentError("constant schedule requires dlambda_max")
    return 1 / (2 * dlambda_max)


def validity_condition(spec: Spectrum, dtau: float, gp: GammaParams, tol: float = 1e-12) -> list[float]:
    """Eigenvalues whose normalized constant-step factor reaches magnitude 1."""
    ratio = np.abs(np.sin(-spec.excitations * dtau * gp.s + gp.phi) / gp.gamma)
    return [float(v) for v in spec.eigenvalues[ratio >= 1 - tol]]


def error_upper_bound_constant(
    w1_sq: float, gp: GammaParams, dlambda_min: float, dlambda_max: float, K: int
) -> float:
    inner = abs(math.sin(-dlambda_min * gp.s / (2 * dlambda_max) + gp.phi) / gp.gamma)
    return (1 - w1_sq) / w1_sq * max(0.5, inner) ** (2 * K)


def cost_estimate(d_pite: float, w1_sq: float, eps_tilde: float) -> float:
    """d_PITE · K / P_K with P_K = (1 + ε̃) w1²."""
    if d_pite <= 0 or w1_sq <= 0 or eps_tilde <= 0:
        raise InvalidArgumentError("cost inputs must be positive")
    K = required_steps(w1_sq, eps_tilde, "limit")
    return d_pite * K / ((1 + eps_tilde) * w1_sq)


def geometric_arithmetic_gap(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise InvalidArgumentError("no samples")
    if np.any((v < 0) | (v > 1)):
        raise InvalidArgumentError("samples must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        log_geom = np.log(v).mean()
    return float(np.exp(log_geom)), float(v.mean())
