"""Eigenbasis simulation of exact and first-order approximated PITE.

All damping products are accumulated per eigenvalue in log space: the
factor of step k on eigenvalue i is f_k(λ_i − E_k) = sin(−(λ_i − E_k)sΔτ_k + φ).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from pite_lab.core.hamiltonians import Spectrum
from pite_lab.core.schedules import Schedule, ScheduleKind
from pite_lab.errors import (
    DampingUnderflowError,
    DegenerateTargetError,
    InvalidArgumentError,
    NumericError,
    SingularityError,
)

logger = logging.getLogger(__name__)

SINGULARITY_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-12
UNDERFLOW_FLOOR = 1e-300


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialWeights:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if np.any(w < 0):
            raise InvalidArgumentError("initial weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidArgumentError(f"initial weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "InitialWeights":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def normalized(cls, raw) -> "InitialWeights":
        raw = np.asarray(raw, dtype=float)
        total = raw.sum()
        if total <= 0:
            raise InvalidArgumentError("weights must have a positive sum")
        return cls(raw / total)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def ground(self) -> float:
        return float(self.weights[0])


@dataclass(frozen=True)
class GammaParams:
    gamma: float
    theta: float
    s: float
    phi: float
    sign_kappa: int


@dataclass(frozen=True)
class ShiftPolicy:
    alpha: float = 1.0
    branch_n: int = 0
    lambda1: float | None = None  # None: take λ_1 from the spectrum

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidArgumentError(f"alpha must lie in [0, 1], got {self.alpha}")

    def reference(self, spec: Spectrum) -> float:
        return spec.ground_energy if self.lambda1 is None else self.lambda1

    def phase_offset(self, gp: GammaParams) -> float:
        """α(π(2n+1)/2 − φ): the shift's contribution to the sine argument."""
        return self.alpha * (math.pi * (2 * self.branch_n + 1) / 2 - gp.phi)


@dataclass(frozen=True)
class RunResult:
    damping: np.ndarray
    log_damping: np.ndarray
    ln_error_tilde: float
    error_tilde: float
    error: float
    error_direct: float
    ln_total_success: float
    total_success: float
    step_success: np.ndarray
    fidelity: float
    cumulative_tau: float
    final_weights: np.ndarray = field(repr=False)

    def to_dict(self, include_damping: bool = False) -> dict:
        out = {
            "error_tilde": self.error_tilde,
            "ln_error_tilde": self.ln_error_tilde,
            "error": self.error,
            "error_direct": self.error_direct,
            "total_success_prob": self.total_success,
            "ln_total_success_prob": self.ln_total_success,
            "fidelity": self.fidelity,
            "cumulative_tau": self.cumulative_tau,
            "step_success": self.step_success.tolist(),
        }
        if include_damping:
            out["damping"] = self.damping.tolist()
        return out


@dataclass(frozen=True)
class MonotonicityReport:
    applicable: bool
    monotone: bool
    first_violation: int | None = None
    message: str = ""


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

def gamma_params(gamma: float) -> GammaParams:
    if not (0.0 < gamma < 1.0):
        raise InvalidArgumentError(f"gamma must lie in (0, 1), got {gamma}")
    if abs(gamma - 1 / math.sqrt(2)) <= SINGULARITY_TOL:
        raise SingularityError(f"gamma={gamma} is at the 1/sqrt(2) singularity")
    root = math.sqrt(1 - gamma * gamma)
    s = gamma / root
    phi = math.atan2(gamma, root)
    sign_kappa = 1 if gamma > 1 / math.sqrt(2) else -1
    theta = sign_kappa * math.acos(min(1.0, (gamma + root) / math.sqrt(2)))
    return GammaParams(gamma=gamma, theta=theta, s=s, phi=phi, sign_kappa=sign_kappa)


def energy_shift(policy: ShiftPolicy, gp: GammaParams, dtau_k: float, lambda1: float | None = None) -> float:
    """E_k = λ_1 − α/(Δτ_k s)·[arctan s − π(2n+1)/2]."""
    if dtau_k <= 0:
        raise InvalidArgumentError(f"energy shift needs dtau_k > 0, got {dtau_k}")
    ref = policy.lambda1 if lambda1 is None else lambda1
    if ref is None:
        raise InvalidArgumentError("energy shift needs a reference ground energy")
    bracket = math.atan(gp.s) - math.pi * (2 * policy.branch_n + 1) / 2
    return ref - policy.alpha * bracket / (dtau_k * gp.s)


def shift_phase(policy: ShiftPolicy, gp: GammaParams, dtau_k: float, lambda1: float) -> float:
    """s Δτ_k E_k, which stays finite as Δτ_k → 0."""
    return gp.s * dtau_k * lambda1 - policy.alpha * (gp.phi - math.pi * (2 * policy.branch_n + 1) / 2)


def step_factor(lambda_i, E_k: float, dtau_k: float, gp: GammaParams):
    """f_k(λ_i − E_k) = sin(−(λ_i − E_k)sΔτ_k + φ)."""
    return np.sin(-(np.asarray(lambda_i, dtype=float) - E_k) * gp.s * dtau_k + gp.phi)


# ---------------------------------------------------------------------------
# Exact ITE
# ---------------------------------------------------------------------------

def exact_ite(spec: Spectrum, w: InitialWeights, tau: float) -> tuple[np.ndarray, float]:
    """Exact e^{−Hτ} acting on the weights; returns (weights', fidelity)."""
    if tau < 0:
        raise InvalidArgumentError(f"tau must be >= 0, got {tau}")
    if w.ground == 0 and math.isinf(tau):
        raise DegenerateTargetError("ground-state weight is zero; infinite-time ITE is undefined")
    if math.isinf(tau):
        out = np.zeros(len(w))
        out[0] = 1.0
        return out, 1.0
    with np.errstate(divide="ignore"):
        log_w = np.log(w.weights) - 2 * spec.excitations * tau
    out = np.exp(log_w - logsumexp(log_w))
    return out, float(out[0])


def required_tau(delta: float, w1_sq: float, w2_sq: float, dlambda2: float) -> float:
    """τ ≈ ln[((1−δ)/δ)(|c_2|²/|c_1|²)] / (2Δλ_2)."""
    if dlambda2 <= 0:
        raise InvalidArgumentError(f"dlambda2 must be positive, got {dlambda2}")
    if not (0 < delta < 1):
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")
    if w1_sq <= 0 or w2_sq <= 0:
        raise InvalidArgumentError("weights must be positive")
    return math.log((1 - delta) / delta * w2_sq / w1_sq) / (2 * dlambda2)


# ---------------------------------------------------------------------------
# Error conversions
# ---------------------------------------------------------------------------

def error_from_tilde(eps_tilde: float) -> float:
    """ε = 2(1 − 1/√(1+ε̃))."""
    if math.isinf(eps_tilde):
        return 2.0
    return -2.0 * math.expm1(-0.5 * math.log1p(eps_tilde))


def tilde_from_error(eps: float) -> float:
    """ε̃ = ε(4−ε)/(2−ε)²."""
    return eps * (4 - eps) / (2 - eps) ** 2


# ---------------------------------------------------------------------------
# Approximated PITE
# ---------------------------------------------------------------------------

def _step_angles(spec: Spectrum, sched: Schedule, gp: GammaParams, policy: ShiftPolicy) -> np.ndarray:
    rel = spec.eigenvalues - policy.reference(spec)
    offset = gp.phi + policy.phase_offset(gp)
    return offset - np.outer(rel, sched.scaled(gp.s))


def _log_factors(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    f = np.sin(angles)
    with np.errstate(divide="ignore"):
        log_f2 = 2 * np.log(np.abs(f))
    return log_f2, np.signbit(f)


def run_pite(
    spec: Spectrum,
    w: InitialWeights,
    sched: Schedule,
    gp: GammaParams,
    policy: ShiftPolicy,
    log_space: bool = True,
) -> RunResult:
    if len(w) != len(spec):
        raise InvalidArgumentError(f"{len(w)} weights for {len(spec)} eigenvalues")

    angles = _step_angles(spec, sched, gp, policy)
    log_f2, negative = _log_factors(angles)
    cum_log = np.cumsum(log_f2, axis=1)  # (N, K): ln Π_{j≤k} f_j²
    log_damping = cum_log[:, -1]
    damping = np.exp(log_damping)

    with np.errstate(divide="ignore"):
        log_w = np.log(w.weights)

    if not log_space and np.all(damping < UNDERFLOW_FLOOR):
        raise DampingUnderflowError(
            "every damping factor is below 1e-300; use log-space accumulation"
        )

    log_P = logsumexp(log_w[:, None] + cum_log, axis=0)  # ln P_k for k = 1..K
    ln_total = float(log_P[-1])
    if not np.isfinite(ln_total):
        raise NumericError("total success probability vanished")
    if log_space:
        step = np.exp(np.diff(np.concatenate(([0.0], log_P))))
    else:
        P = np.exp(log_P)
        step = P / np.concatenate(([1.0], P[:-1]))

    ln_eps_tilde = _ln_error_tilde(log_w, log_damping)
    eps_tilde = math.exp(ln_eps_tilde) if ln_eps_tilde < 709 else math.inf

    final_log = log_w + log_damping - ln_total
    final_weights = np.exp(final_log)
    tau = sched.cumulative_tau

    return RunResult(
        damping=damping,
        log_damping=log_damping,
        ln_error_tilde=ln_eps_tilde,
        error_tilde=eps_tilde,
        error=error_from_tilde(eps_tilde),
        error_direct=_error_direct(spec, log_w, log_damping, negative, tau),
        ln_total_success=ln_total,
        total_success=math.exp(ln_total),
        step_success=np.clip(step, 0.0, 1.0),
        fidelity=float(final_weights[0]),
        cumulative_tau=tau,
        final_weights=final_weights,
    )


def _ln_error_tilde(log_w: np.ndarray, log_damping: np.ndarray) -> float:
    """ln ε̃ = ln[(1/w_1) Σ_{i≥2} w_i F̃_i / F̃_1]."""
    if log_w.size < 2:
        return -math.inf
    if not np.isfinite(log_w[0]) or not np.isfinite(log_damping[0]):
        return math.inf
    excited = logsumexp(log_w[1:] + log_damping[1:])
    return float(excited - log_w[0] - log_damping[0])


def _error_direct(spec, log_w, log_damping, negative, tau) -> float:
    """Finite-τ error of the state-norm definition, with signed F_K."""
    sign = np.where(negative.sum(axis=1) % 2 == 1, -1.0, 1.0)
    log_abs_F = log_damping / 2
    excit = spec.excitations
    num, num_sign = logsumexp(log_w - excit * tau + log_abs_F, b=sign, return_sign=True)
    den = 0.5 * logsumexp(log_w - 2 * excit * tau) + 0.5 * logsumexp(log_w + log_damping)
    if not np.isfinite(den):
        return math.nan
    overlap = float(num_sign) * math.exp(float(num) - float(den)) if np.isfinite(num) else 0.0
    return 2.0 * (1.0 - overlap)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def success_monotonicity_check(result: RunResult, sched: Schedule, tol: float = 1e-12) -> MonotonicityReport:
    if sched.kind is not ScheduleKind.CONSTANT:
        return MonotonicityReport(
            applicable=False,
            monotone=False,
            message=f"{sched.kind.value} schedule: monotonic success is not guaranteed",
        )
    p = result.step_success
    drops = np.nonzero(p[1:] < p[:-1] - tol)[0]
    if drops.size:
        k = int(drops[0]) + 1
        return MonotonicityReport(
            applicable=True,
            monotone=False,
            first_violation=k + 1,
            message=f"p_{k + 1}={p[k]:.17g} < p_{k}={p[k - 1]:.17g}",
        )
    return MonotonicityReport(applicable=True, monotone=True, message="nondecreasing")


def alpha_sweep(
    spec: Spectrum,
    w: InitialWeights,
    sched: Schedule,
    gp: GammaParams,
    alphas,
    branch_n: int = 0,
    lambda1: float | None = None,
) -> list[tuple[float, float]]:
    """P_K for each α of the energy-shift interpolation."""
    out = []
    for alpha in alphas:
        policy = ShiftPolicy(alpha=float(alpha), branch_n=branch_n, lambda1=lambda1)
        result = run_pite(spec, w, sched, gp, policy)
        out.append((float(alpha), result.total_success))
    return out
