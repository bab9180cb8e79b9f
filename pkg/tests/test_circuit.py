"""Gate-built PITE steps, postselected trajectories and shot sampling."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from pite_lab.circuit.sampling import (
    CHUNK_SHOTS,
    sample_step_outcomes,
    sample_trajectories,
)
from pite_lab.circuit.statevector import (
    StateVector,
    StepUnitary,
    apply_postselect,
    block_deviation,
    build_approx_step_circuit,
    build_exact_block_unitary,
    run_circuit_trajectory,
)
from pite_lab.config import settings
from pite_lab.core.engine import InitialWeights, ShiftPolicy, gamma_params, run_pite
from pite_lab.core.hamiltonians import HamiltonianMatrix, build_heisenberg_chain, diagonalize
from pite_lab.core.schedules import linear_schedule
from pite_lab.errors import (
    EmbeddingError,
    InternalError,
    InvalidArgumentError,
    PostselectionError,
    ResourceLimitError,
)


def random_hamiltonian(rng, n_qubits):
    A = rng.normal(size=(1 << n_qubits, 1 << n_qubits))
    return HamiltonianMatrix((A + A.T) / 2)


def random_gamma(rng):
    gamma = float(rng.uniform(0.05, 0.99))
    return gamma if abs(gamma - 1 / math.sqrt(2)) > 1e-3 else 0.9


# ---------------------------------------------------------------------------
# Exact block embedding
# ---------------------------------------------------------------------------


class TestExactBlockUnitary:
    def test_block_is_imaginary_time_propagator(self, rng):
        H = random_hamiltonian(rng, 2)
        spec = diagonalize(H)
        shifted = spec.shifted(spec.ground_energy)
        step = build_exact_block_unitary(shifted, 0.7)
        target = expm(-0.7 * (H.matrix - spec.ground_energy * np.eye(4)))
        np.testing.assert_allclose(step.block_00.real, target, atol=1e-12)

    def test_negative_spectrum_cannot_be_embedded(self, rng):
        spec = diagonalize(random_hamiltonian(rng, 2))
        with pytest.raises(EmbeddingError):
            build_exact_block_unitary(spec.shifted(spec.eigenvalues[-1]), 0.5)


# ---------------------------------------------------------------------------
# Approximate step circuit
# ---------------------------------------------------------------------------


class TestApproxStepCircuit:
    def test_block_matches_step_factor(self, rng):
        for _ in range(50):
            H = random_hamiltonian(rng, 3)
            gp = gamma_params(random_gamma(rng))
            dtau = float(rng.uniform(0.0, 0.5))
            E = float(rng.normal())
            step = build_approx_step_circuit(H, dtau, gp, E=E)
            assert block_deviation(step, H, dtau, gp, E=E) <= 1e-10

    def test_unitary(self, gp):
        H = build_heisenberg_chain(2, 1.0, 0.5)
        step = build_approx_step_circuit(H, 0.1, gp)
        m = step.matrix
        np.testing.assert_allclose(m.conj().T @ m, np.eye(8), atol=1e-12)

    def test_phase_overrides_energy(self, gp):
        H = build_heisenberg_chain(2, 1.0, 0.0)
        dtau, E = 0.2, -1.3
        by_energy = build_approx_step_circuit(H, dtau, gp, E=E)
        by_phase = build_approx_step_circuit(H, dtau, gp, phase=gp.s * dtau * E)
        np.testing.assert_allclose(by_energy.matrix, by_phase.matrix, atol=1e-12)

    def test_respects_circuit_cap(self, monkeypatch, gp):
        monkeypatch.setattr(settings, "max_circuit_qubits", 2)
        with pytest.raises(ResourceLimitError):
            build_approx_step_circuit(build_heisenberg_chain(3, 1.0, 0.0), 0.1, gp)

    def test_non_unitary_matrix_rejected(self):
        with pytest.raises(InternalError):
            StepUnitary(np.diag([1.0, 2.0]))


# ---------------------------------------------------------------------------
# Postselection and trajectories
# ---------------------------------------------------------------------------


class TestTrajectory:
    def test_matches_engine(self, rng):
        for _ in range(5):
            H = random_hamiltonian(rng, 3)
            spec = diagonalize(H)
            w = InitialWeights.normalized(rng.uniform(0.1, 1.0, size=8))
            gp = gamma_params(random_gamma(rng))
            sched = linear_schedule(1e-4, 0.3, 10)
            policy = ShiftPolicy(alpha=float(rng.uniform(0, 1)))
            state = StateVector.from_weights(spec, w)
            final, probs = run_circuit_trajectory(H, state, sched, gp, policy, lambda1=spec.ground_energy)
            engine = run_pite(spec, w, sched, gp, policy)
            np.testing.assert_allclose(final.eigen_weights(spec), engine.final_weights, atol=1e-8)
            assert np.log(probs).sum() == pytest.approx(engine.ln_total_success, abs=1e-8)
            np.testing.assert_allclose(probs, engine.step_success, atol=1e-10)

    def test_reference_defaults_to_ground_energy(self, gp):
        H = build_heisenberg_chain(3, 1.0, 0.5)
        spec = diagonalize(H)
        w = InitialWeights.uniform(8)
        sched = linear_schedule(1e-3, 0.2, 4)
        state = StateVector.from_weights(spec, w)
        _, explicit = run_circuit_trajectory(H, state, sched, gp, ShiftPolicy(), lambda1=spec.ground_energy)
        _, implicit = run_circuit_trajectory(H, state, sched, gp, ShiftPolicy())
        np.testing.assert_allclose(explicit, implicit, atol=1e-12)

    def test_zero_branch_raises(self):
        flip = StepUnitary(np.kron(np.array([[0, 1], [1, 0]]), np.eye(2)))
        with pytest.raises(PostselectionError):
            apply_postselect(StateVector.from_register([1.0, 0.0]), flip)

    def test_size_mismatch(self, gp):
        step = build_approx_step_circuit(build_heisenberg_chain(2, 1.0, 0.0), 0.1, gp)
        with pytest.raises(InvalidArgumentError):
            apply_postselect(StateVector.from_register([1.0, 0.0]), step)

    def test_state_must_be_normalized(self):
        with pytest.raises(InvalidArgumentError):
            StateVector([1.0, 1.0])


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


class TestSampling:
    def test_thread_count_does_not_change_outcomes(self):
        p = np.array([0.9, 0.8, 0.95])
        shots = 3 * CHUNK_SHOTS + 17
        one = sample_step_outcomes(p, shots, seed=11, threads=1)
        four = sample_step_outcomes(p, shots, seed=11, threads=4)
        np.testing.assert_array_equal(one[0], four[0])
        np.testing.assert_array_equal(one[1], four[1])

    def test_survival_counts(self):
        p = np.array([0.5, 0.5, 0.5, 0.5])
        succeeded, survived = sample_step_outcomes(p, 5000, seed=3)
        assert np.all(survived[succeeded] == 4)
        assert np.all(survived[~succeeded] < 4)
        # geometric first failure
        assert np.mean(survived == 0) == pytest.approx(0.5, abs=0.03)

    def test_frequency_within_binomial_band(self, gp):
        spec = diagonalize(build_heisenberg_chain(3, 1.0, 0.5))
        w = InitialWeights.uniform(8)
        sched = linear_schedule(1e-4, 0.4, 10)
        stats = sample_trajectories(spec, w, sched, gp, ShiftPolicy(), shots=20000, seed=5)
        assert abs(stats.frequency - stats.expected) <= 5 * stats.binomial_sigma
        assert stats.mean_attempts == pytest.approx(1 / stats.frequency)
        assert len(stats.rows()) == 20000
        assert stats.summary()["successes"] == stats.successes

    def test_rejects_zero_shots(self):
        with pytest.raises(InvalidArgumentError):
            sample_step_outcomes([0.5], 0, seed=0)
