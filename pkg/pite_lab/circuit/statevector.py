"""Statevector model of one PITE step on an (n+1)-qubit register.

The ancilla is the most significant qubit: amplitude index = a·N + r, so the
ancilla-|0⟩ block of any step unitary is its upper-left N×N corner.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from pite_lab.config import settings
from pite_lab.core.engine import (
    GammaParams,
    InitialWeights,
    ShiftPolicy,
    shift_phase,
    step_factor,
)
from pite_lab.core.hamiltonians import HamiltonianMatrix, Spectrum
from pite_lab.core.schedules import Schedule
from pite_lab.errors import (
    EmbeddingError,
    InternalError,
    InvalidArgumentError,
    PostselectionError,
    ResourceLimitError,
)

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12
UNITARITY_TOL = 1e-10
BLOCK_TOL = 1e-10
EMBEDDING_TOL = 1e-12
POSTSELECT_FLOOR = 1e-300

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PROJ_0 = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ_1 = np.array([[0, 0], [0, 1]], dtype=complex)


def rz(beta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * beta), np.exp(0.5j * beta)])


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        dim = amps.size
        if dim < 2 or dim & (dim - 1):
            raise InvalidArgumentError(f"state length {dim} is not a power of two >= 2")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"state norm is {norm!r}, not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_register(cls, psi) -> "StateVector":
        """|0⟩_ancilla ⊗ ψ."""
        psi = np.asarray(psi, dtype=complex).ravel()
        return cls(np.concatenate([psi, np.zeros_like(psi)]))

    @classmethod
    def from_weights(cls, spec: Spectrum, w: InitialWeights) -> "StateVector":
        if spec.eigenvectors is None:
            raise InvalidArgumentError("spectrum has no eigenvectors")
        return cls.from_register(spec.eigenvectors @ np.sqrt(w.weights))

    @property
    def register_dim(self) -> int:
        return self.amplitudes.size // 2

    @property
    def register(self) -> np.ndarray:
        """Register amplitudes of the ancilla-|0⟩ branch."""
        return self.amplitudes[: self.register_dim]

    def eigen_weights(self, spec: Spectrum) -> np.ndarray:
        return np.abs(spec.eigenvectors.T @ self.register) ** 2


@dataclass(frozen=True)
class StepUnitary:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise InvalidArgumentError(f"step unitary has invalid shape {m.shape}")
        deviation = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if deviation > UNITARITY_TOL:
            raise InternalError(f"{self.label or 'step'} is not unitary: deviation {deviation:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def register_dim(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def block_00(self) -> np.ndarray:
        n = self.register_dim
        return self.matrix[:n, :n]


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _check_size(n_qubits: int):
    if n_qubits > settings.max_circuit_qubits:
        raise ResourceLimitError(
            f"{n_qubits} register qubits exceeds the circuit cap of {settings.max_circuit_qubits}"
        )


def build_exact_block_unitary(spec: Spectrum, tau: float) -> StepUnitary:
    """[[M, √(1−M²)], [√(1−M²), −M]] with M = e^{−Hτ}, built spectrally."""
    if spec.eigenvectors is None:
        raise InvalidArgumentError("exact block embedding needs eigenvectors")
    if tau < 0:
        raise InvalidArgumentError(f"tau must be >= 0, got {tau}")
    _check_size(len(spec).bit_length() - 1)
    m = np.exp(-spec.eigenvalues * tau)
    if np.any(m > 1 + EMBEDDING_TOL):
        worst = float(spec.eigenvalues[np.argmax(m)])
        raise EmbeddingError(
            f"||e^(-H tau)|| = {m.max():.6g} > 1 (eigenvalue {worst}); shift the spectrum so lambda_1 >= 0"
        )
    m = np.minimum(m, 1.0)
    V = spec.eigenvectors
    M = (V * m) @ V.T
    R = (V * np.sqrt(1 - m * m)) @ V.T
    return StepUnitary(np.block([[M, R], [R, -M]]), label=f"exact_block(tau={tau})")


def _on_ancilla(gate: np.ndarray, eye: np.ndarray) -> np.ndarray:
    return np.kron(gate, eye)


def _rte(vals: np.ndarray, vecs: np.ndarray, angle: float) -> np.ndarray:
    """U_RTE = e^{−i·angle·H}, by spectral exponentiation."""
    return (vecs * np.exp(-1j * angle * vals)) @ vecs.conj().T


def build_approx_step_circuit(
    H: HamiltonianMatrix,
    dtau: float,
    gp: GammaParams,
    E: float = 0.0,
    phase: float | None = None,
) -> StepUnitary:
    """First-order PITE step as a gate product.

    Order of application: ancilla Hadamard, controlled-on-0 U_RTE(sΔτ) with
    controlled-on-1 U_RTE(sΔτ)†, ancilla R_z(−2θ′) where θ′ = θ + sΔτE,
    ancilla R_z(π/2), ancilla Hadamard. `phase` replaces sΔτE when given.
    The ancilla-|0⟩ block is sin(φ − sΔτ(H − E)).
    """
    if dtau < 0:
        raise InvalidArgumentError(f"dtau must be >= 0, got {dtau}")
    _check_size(H.n_qubits)
    n = H.dimension
    vals, vecs = eigh(H.matrix)
    angle = gp.s * dtau
    shift = angle * E if phase is None else phase
    U = _rte(vals, vecs, angle)
    eye = np.eye(n)

    forward = np.kron(PROJ_0, U) + np.kron(PROJ_1, eye)
    backward = np.kron(PROJ_0, eye) + np.kron(PROJ_1, U.conj().T)
    gates = [
        _on_ancilla(HADAMARD, eye),
        forward,
        backward,
        _on_ancilla(rz(-2 * (gp.theta + shift)), eye),
        _on_ancilla(rz(np.pi / 2), eye),
        _on_ancilla(HADAMARD, eye),
    ]
    matrix = np.eye(2 * n, dtype=complex)
    for g in gates:
        matrix = g @ matrix
    step = StepUnitary(matrix, label=f"approx_step(dtau={dtau})")

    # gate-order self-test against the spectral step factor
    expected = np.sin(gp.phi - angle * vals + shift)
    in_eigenbasis = vecs.T @ step.block_00 @ vecs
    deviation = np.abs(np.diag(in_eigenbasis) - expected)
    off = np.abs(in_eigenbasis - np.diag(np.diag(in_eigenbasis))).max(initial=0.0)
    if deviation.max() > BLOCK_TOL or off > BLOCK_TOL:
        i = int(np.argmax(deviation > BLOCK_TOL)) if deviation.max() > BLOCK_TOL else 0
        raise InternalError(
            f"ancilla-0 block deviates from sin(phi - s dtau (H - E)) at eigenvalue {vals[i]!r}: "
            f"got {in_eigenbasis[i, i]!r}, expected {expected[i]!r}"
        )
    return step


def block_deviation(
    step: StepUnitary,
    H: HamiltonianMatrix,
    dtau: float,
    gp: GammaParams,
    E: float = 0.0,
    phase: float | None = None,
) -> float:
    """max |block_00 − f(H)| with f applied spectrally through step_factor."""
    vals, vecs = eigh(H.matrix)
    if phase is None:
        f = step_factor(vals, E, dtau, gp)
    else:
        f = np.sin(gp.phi - gp.s * dtau * vals + phase)
    return float(np.max(np.abs(step.block_00 - (vecs * f) @ vecs.T)))


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def apply_postselect(state: StateVector, U: StepUnitary) -> tuple[StateVector, float]:
    if state.amplitudes.size != U.matrix.shape[0]:
        raise InvalidArgumentError(
            f"state of length {state.amplitudes.size} does not fit a {U.matrix.shape[0]}-dim unitary"
        )
    out = U.matrix @ state.amplitudes
    branch = out[: U.register_dim]
    p0 = float(np.vdot(branch, branch).real)
    if p0 < POSTSELECT_FLOOR:
        raise PostselectionError(f"ancilla-0 probability {p0:.3e} is below 1e-300")
    return StateVector.from_register(branch / np.sqrt(p0)), p0


def run_circuit_trajectory(
    H: HamiltonianMatrix,
    state: StateVector,
    sched: Schedule,
    gp: GammaParams,
    policy: ShiftPolicy,
    lambda1: float | None = None,
) -> tuple[StateVector, np.ndarray]:
    """K gate-built steps, each postselected on ancilla |0⟩.

    Returns the final state and p_1..p_K.
    """
    if lambda1 is None:
        lambda1 = policy.lambda1 if policy.lambda1 is not None else float(eigh(H.matrix, eigvals_only=True)[0])
    probs = np.empty(sched.K)
    for k, dtau in enumerate(sched.steps):
        phase = shift_phase(policy, gp, float(dtau), lambda1)
        step = build_approx_step_circuit(H, float(dtau), gp, phase=phase)
        state, probs[k] = apply_postselect(state, step)
    logger.debug("circuit trajectory: K=%d, P_K=%.6g", sched.K, float(np.prod(probs)))
    return state, probs
