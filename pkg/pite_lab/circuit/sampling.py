"""Monte Carlo sampling of ancilla measurement outcomes along a PITE run.

Shots are drawn in fixed-size chunks, each with its own generator spawned
from the run seed, so the output does not depend on the thread count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from pite_lab.core.engine import GammaParams, InitialWeights, ShiftPolicy, run_pite
from pite_lab.core.hamiltonians import Spectrum
from pite_lab.core.schedules import Schedule
from pite_lab.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

CHUNK_SHOTS = 4096


@dataclass(frozen=True)
class TrajectoryStats:
    shots: int
    seed: int
    successes: int
    expected: float
    succeeded: np.ndarray = field(repr=False)
    steps_survived: np.ndarray = field(repr=False)

    @property
    def frequency(self) -> float:
        return self.successes / self.shots

    @property
    def mean_attempts(self) -> float:
        """Restarts-on-failure estimate of attempts per success (≈ 1/P_K)."""
        return self.shots / self.successes if self.successes else math.inf

    @property
    def binomial_sigma(self) -> float:
        return math.sqrt(self.expected * (1 - self.expected) / self.shots)

    def rows(self) -> list[dict]:
        return [
            {"shot": i, "succeeded": int(ok), "steps_survived": int(n)}
            for i, (ok, n) in enumerate(zip(self.succeeded, self.steps_survived))
        ]

    def summary(self) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "successes": self.successes,
            "frequency": self.frequency,
            "expected_total_success_prob": self.expected,
            "mean_attempts": self.mean_attempts,
        }


def _sample_chunk(step_success: np.ndarray, n: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    failed = rng.random((n, step_success.size)) >= step_success
    any_failed = failed.any(axis=1)
    survived = np.where(any_failed, failed.argmax(axis=1), step_success.size)
    return ~any_failed, survived


def sample_step_outcomes(step_success, shots: int, seed: int, threads: int = 1):
    """Per-shot (succeeded, steps_survived) for given per-step probabilities."""
    if shots < 1:
        raise InvalidArgumentError(f"shots must be >= 1, got {shots}")
    p = np.asarray(step_success, dtype=float)
    sizes = [min(CHUNK_SHOTS, shots - start) for start in range(0, shots, CHUNK_SHOTS)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda args: _sample_chunk(p, *args), zip(sizes, children)))
    succeeded = np.concatenate([ok for ok, _ in parts])
    survived = np.concatenate([n for _, n in parts])
    return succeeded, survived


def sample_trajectories(
    spec: Spectrum,
    w: InitialWeights,
    sched: Schedule,
    gp: GammaParams,
    policy: ShiftPolicy,
    shots: int,
    seed: int,
    threads: int = 1,
) -> TrajectoryStats:
    result = run_pite(spec, w, sched, gp, policy)
    succeeded, survived = sample_step_outcomes(result.step_success, shots, seed, threads)
    stats = TrajectoryStats(
        shots=shots,
        seed=seed,
        successes=int(succeeded.sum()),
        expected=result.total_success,
        succeeded=succeeded,
        steps_survived=survived,
    )
    logger.info(
        "sampled %d shots (seed=%d): %d successes, expected P_K=%.6g",
        shots, seed, stats.successes, stats.expected,
    )
    return stats
