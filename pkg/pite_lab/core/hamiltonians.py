"""Benchmark Hamiltonians, dense diagonalization and density-of-states binning."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, circulant, eigh

from pite_lab.config import settings
from pite_lab.errors import (
    EigensolverError,
    InternalError,
    InvalidArgumentError,
    ResourceLimitError,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-9
DEGENERACY_TOL = 1e-10


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianMatrix:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidArgumentError(f"Hamiltonian must be square, got shape {m.shape}")
        n = m.shape[0]
        if n < 1 or n & (n - 1):
            raise InvalidArgumentError(f"Hamiltonian dimension {n} is not a power of two")
        if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL:
            raise InvalidArgumentError("Hamiltonian is not symmetric")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dimension.bit_length() - 1


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        vals = np.array(self.eigenvalues, dtype=float).ravel()
        if vals.size and np.any(np.diff(vals) < 0):
            raise InvalidArgumentError("eigenvalues must be in ascending order")
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        if self.eigenvectors is not None:
            vecs = np.array(self.eigenvectors, dtype=float)
            if vecs.shape != (vals.size, vals.size):
                raise InvalidArgumentError(
                    f"eigenvector matrix shape {vecs.shape} does not match {vals.size} eigenvalues"
                )
            vecs.setflags(write=False)
            object.__setattr__(self, "eigenvectors", vecs)

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def excitations(self) -> np.ndarray:
        """Δλ_i = λ_i − λ_1."""
        return self.eigenvalues - self.eigenvalues[0]

    @property
    def gap_min(self) -> float:
        """Δλ_min = Δλ_2 (zero when the ground state is degenerate)."""
        if len(self) < 2:
            raise InvalidArgumentError("a gap needs at least two eigenvalues")
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def gap_max(self) -> float:
        if len(self) < 2:
            raise InvalidArgumentError("a gap needs at least two eigenvalues")
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def shifted(self, offset: float) -> "Spectrum":
        return Spectrum(self.eigenvalues - offset, self.eigenvectors)


@dataclass(frozen=True)
class DosHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def normalized(self) -> np.ndarray:
        """Per-bin density; sums to 1 when multiplied by the bin widths."""
        return self.counts / (self.counts.sum() * self.widths)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def chain_bonds(n: int) -> list[tuple[int, int]]:
    """Periodic nearest-neighbour pairs, each undirected edge once."""
    seen = set()
    bonds = []
    for j in range(n):
        k = (j + 1) % n
        edge = frozenset((j, k))
        if edge in seen:
            continue
        seen.add(edge)
        bonds.append((j, k))
    return bonds


def build_heisenberg_chain(
    n: int, J: float, h: float, max_sites: int | None = None
) -> HamiltonianMatrix:
    """H = J Σ σ_j·σ_k + h Σ σ_j^z on a closed chain, in the σ^z product basis.

    Bit j of the basis index is site j; bit value 0 is σ^z = +1.
    """
    cap = settings.max_sites if max_sites is None else max_sites
    if n < 2:
        raise InvalidArgumentError(f"Heisenberg chain needs n >= 2 sites, got {n}")
    if n > cap:
        raise ResourceLimitError(f"n={n} exceeds the dense-solver cap of {cap} sites")

    dim = 1 << n
    idx = np.arange(dim)
    z = 1 - 2 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)  # (dim, n) of ±1

    H = np.zeros((dim, dim))
    diag = h * z.sum(axis=1).astype(float)
    for j, k in chain_bonds(n):
        diag += J * z[:, j] * z[:, k]
        # σxσx + σyσy = 2(σ+σ- + σ-σ+): flips anti-aligned pairs with amplitude 2
        anti = z[:, j] != z[:, k]
        src = idx[anti]
        H[src ^ ((1 << j) | (1 << k)), src] += 2.0 * J
    H[idx, idx] = diag
    logger.debug("built Heisenberg chain n=%d J=%g h=%g", n, J, h)
    return HamiltonianMatrix(H, label=f"heisenberg(n={n},J={J},h={h})")


def double_well_potential(x, L: float, d: float, delta: float, V0: float) -> np.ndarray:
    """Four-piece asymmetric double-well potential on [0, L)."""
    x = np.asarray(x, dtype=float)
    c = L / 2
    phase = np.cos(2 * np.pi / d * (x - c))
    return np.select(
        [x <= (L - d) / 2, x <= c, x <= (L + d) / 2],
        [
            (x - c + d / 2) ** 2 / 2 + delta,
            V0 / 2 * (1 + phase) + delta,
            (V0 + delta) / 2 * (1 + phase),
        ],
        default=(x - c - d / 2) ** 2 / 2,
    )


def _check_potential_continuity(L: float, d: float, delta: float, V0: float):
    c = L / 2
    pieces = [
        lambda x: (x - c + d / 2) ** 2 / 2 + delta,
        lambda x: V0 / 2 * (1 + math.cos(2 * math.pi / d * (x - c))) + delta,
        lambda x: (V0 + delta) / 2 * (1 + math.cos(2 * math.pi / d * (x - c))),
        lambda x: (x - c - d / 2) ** 2 / 2,
    ]
    boundaries = [(L - d) / 2, c, (L + d) / 2]
    for i, xb in enumerate(boundaries):
        left, right = pieces[i](xb), pieces[i + 1](xb)
        if abs(left - right) > 1e-12 * max(1.0, abs(left)):
            raise InternalError(
                f"double-well pieces {i} and {i + 1} disagree at x={xb}: {left} vs {right}"
            )


def build_double_well(
    n_qubits: int,
    L: float,
    d: float,
    delta: float,
    V0: float,
    mass: float = 1.0,
    hbar: float = 1.0,
) -> HamiltonianMatrix:
    """Single particle on a periodic grid of 2^n_qubits points.

    The kinetic term is the spectral (plane-wave) second derivative, written
    as a dense circulant matrix.
    """
    if n_qubits < 3:
        raise InvalidArgumentError(f"double well needs n_qubits >= 3, got {n_qubits}")
    if n_qubits > settings.max_sites:
        raise ResourceLimitError(f"n_qubits={n_qubits} exceeds the cap of {settings.max_sites}")
    if not (L > d > 0):
        raise InvalidArgumentError(f"need L > d > 0, got L={L}, d={d}")
    if V0 < 0:
        raise InvalidArgumentError(f"barrier height V0 must be >= 0, got {V0}")
    _check_potential_continuity(L, d, delta, V0)

    N = 1 << n_qubits
    dx = L / N
    x = np.arange(N) * dx
    k = 2 * np.pi * np.fft.fftfreq(N, d=dx)
    kinetic_column = np.fft.ifft(hbar**2 * k**2 / (2 * mass)).real
    T = circulant(kinetic_column)
    T = (T + T.T) / 2
    H = T + np.diag(double_well_potential(x, L, d, delta, V0))
    return HamiltonianMatrix(H, label=f"double_well(n={n_qubits},L={L},d={d})")


# ---------------------------------------------------------------------------
# Diagonalization and DOS
# ---------------------------------------------------------------------------

def diagonalize(H: HamiltonianMatrix) -> Spectrum:
    """Dense symmetric eigendecomposition with a reconstruction check.

    Eigenvector signs are fixed so the largest-magnitude component is positive.
    Eigenvalues within DEGENERACY_TOL (relative) form one level; its columns are
    ordered by their sign-fixed components, compared lexicographically after
    rounding to 12 decimals. The basis inside a degenerate level is whatever
    the eigensolver returns, so only its ordering is deterministic.
    """
    m = H.matrix
    try:
        vals, vecs = eigh(m)
    except LinAlgError as e:
        cond = np.linalg.cond(m)
        raise EigensolverError(f"eigensolver failed ({e}); condition number {cond:.3e}") from e

    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs

    scale = max(1.0, float(np.max(np.abs(vals))))
    level = np.concatenate(([0], np.cumsum(np.diff(vals) > DEGENERACY_TOL * scale)))
    keys = np.round(vecs, 12)
    # lexsort's last key is primary: level, then component 0, 1, ...
    order = np.lexsort((*keys[::-1], level))
    vecs = vecs[:, order]

    residual = np.max(np.abs((vecs * vals) @ vecs.T - m))
    if residual > RECONSTRUCTION_TOL * scale:
        raise EigensolverError(
            f"reconstruction residual {residual:.3e} exceeds {RECONSTRUCTION_TOL * scale:.3e}"
        )
    return Spectrum(vals, vecs)


def dos_histogram(spec: Spectrum, bin_width: float) -> DosHistogram:
    if bin_width <= 0:
        raise InvalidArgumentError(f"bin_width must be positive, got {bin_width}")
    if len(spec) == 0:
        raise InvalidArgumentError("cannot bin an empty spectrum")
    lo, hi = spec.eigenvalues[0], spec.eigenvalues[-1]
    n_bins = max(1, math.ceil((hi - lo) / bin_width))
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(spec.eigenvalues, bins=edges)
    # np.histogram drops values past the last edge when rounding puts them there
    missing = len(spec) - counts.sum()
    if missing:
        counts[-1] += missing
    return DosHistogram(edges, counts.astype(int))
