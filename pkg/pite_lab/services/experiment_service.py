import logging
import math
from dataclasses import dataclass

import numpy as np

from pite_lab.circuit.sampling import TrajectoryStats, sample_trajectories
from pite_lab.circuit.statevector import (
    StateVector,
    block_deviation,
    build_approx_step_circuit,
    run_circuit_trajectory,
)
from pite_lab.core import analysis
from pite_lab.core.engine import (
    GammaParams,
    InitialWeights,
    RunResult,
    ShiftPolicy,
    alpha_sweep,
    exact_ite,
    gamma_params,
    run_pite,
    shift_phase,
    success_monotonicity_check,
)
from pite_lab.core.hamiltonians import (
    DosHistogram,
    HamiltonianMatrix,
    Spectrum,
    build_double_well,
    build_heisenberg_chain,
    diagonalize,
    dos_histogram,
)
from pite_lab.core.schedules import Schedule, ScheduleKind, make_schedule
from pite_lab.errors import ConfigError, InvalidArgumentError, PiteLabError
from pite_lab.quality import check_run_invariants
from pite_lab.schemas import (
    DoubleWellConfig,
    HeisenbergConfig,
    BoundsConfig,
    CostConfig,
    RunConfig,
    ScheduleConfig,
    WeightsFileState,
)
from pite_lab.storage.files import read_spectrum, read_weights

logger = logging.getLogger(__name__)

CIRCUIT_BLOCK_TOL = 1e-10
CIRCUIT_WEIGHT_TOL = 1e-8


@dataclass(frozen=True)
class Experiment:
    """A diagonalized system with its initial state and PITE parameters."""

    label: str
    spectrum: Spectrum
    weights: InitialWeights
    gp: GammaParams
    policy: ShiftPolicy
    matrix: HamiltonianMatrix | None = None

    @property
    def lambda1(self) -> float:
        return self.policy.reference(self.spectrum)

    def hamiltonian(self) -> HamiltonianMatrix:
        """The dense matrix, or diag(λ) when the system came from a spectrum file."""
        if self.matrix is not None:
            return self.matrix
        return HamiltonianMatrix(np.diag(self.spectrum.eigenvalues), label=self.label)


# ---------------------------------------------------------------------------
# Setup
# ---------------------------------------------------------------------------

def build_system(cfg: RunConfig) -> tuple[HamiltonianMatrix | None, Spectrum, np.ndarray | None]:
    ham = cfg.hamiltonian
    if isinstance(ham, HeisenbergConfig):
        H = build_heisenberg_chain(ham.n, ham.J, ham.h)
    elif isinstance(ham, DoubleWellConfig):
        H = build_double_well(ham.n_qubits, ham.L, ham.d, ham.delta, ham.V0, ham.mass, ham.hbar)
    else:
        spec, file_weights = read_spectrum(ham.path)
        n = len(spec)
        return None, Spectrum(spec.eigenvalues, np.eye(n)), file_weights
    logger.info("diagonalizing %s (N=%d)", H.label, H.dimension)
    return H, diagonalize(H), None


def prepare(cfg: RunConfig) -> Experiment:
    H, spec, _ = build_system(cfg)
    if isinstance(cfg.initial_state, WeightsFileState):
        raw = read_weights(cfg.initial_state.path)
        if raw.size != len(spec):
            raise ConfigError(f"weights file has {raw.size} entries for {len(spec)} eigenvalues")
        weights = InitialWeights.normalized(raw)
    else:
        weights = InitialWeights.uniform(len(spec))
    return Experiment(
        label=H.label if H is not None else f"spectrum_file({cfg.hamiltonian.path})",
        spectrum=spec,
        weights=weights,
        gp=gamma_params(cfg.gamma),
        policy=ShiftPolicy(alpha=cfg.alpha, branch_n=cfg.branch_n, lambda1=cfg.lambda1),
        matrix=H,
    )


def schedule_products(sc: ScheduleConfig, spec: Spectrum) -> tuple[float, float]:
    """(s·Δτ_min, s·Δτ_max) after gap scaling, with the minimum clamped to the maximum."""
    lo, hi = sc.s_dtau_min, sc.s_dtau_max
    if sc.gap_units:
        gap = spec.gap_min
        if gap <= 0:
            raise InvalidArgumentError("gap_units needs a nondegenerate ground state")
        hi = hi / gap
    return min(lo, hi), hi


def build_schedule(sc: ScheduleConfig, spec: Spectrum, gp: GammaParams) -> Schedule:
    lo, hi = schedule_products(sc, spec)
    return make_schedule(sc.type, lo / gp.s, hi / gp.s, sc.K, sc.kappa_bar)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def run_single(cfg: RunConfig, exp: Experiment | None = None) -> tuple[RunResult, dict]:
    exp = exp or prepare(cfg)
    sched = build_schedule(cfg.schedule, exp.spectrum, exp.gp)
    result = run_pite(exp.spectrum, exp.weights, sched, exp.gp, exp.policy)
    report = success_monotonicity_check(result, sched)
    _, exact_fidelity = exact_ite(exp.spectrum, exp.weights, sched.cumulative_tau)
    problems = check_run_invariants(result)
    for msg in problems:
        logger.warning("invariant check: %s", msg)

    summary = {
        "system": exp.label,
        "dimension": len(exp.spectrum),
        "gamma": exp.gp.gamma,
        "s": exp.gp.s,
        "theta": exp.gp.theta,
        "alpha": exp.policy.alpha,
        "branch_n": exp.policy.branch_n,
        "schedule": schedule_summary(sched, exp.gp),
        **result.to_dict(),
        "exact_ite_fidelity": exact_fidelity,
        "monotonicity": {
            "applicable": report.applicable,
            "monotone": report.monotone,
            "first_violation": report.first_violation,
            "message": report.message,
        },
        "invariant_errors": problems,
        "seed": cfg.seed,
    }
    return result, summary


def schedule_summary(sched: Schedule, gp: GammaParams) -> dict:
    return {
        "type": sched.kind.value,
        "s_dtau_min": gp.s * sched.dtau_min,
        "s_dtau_max": gp.s * sched.dtau_max,
        "s_dtau_final": gp.s * sched.final_step,
        "K": sched.K,
        "kappa_bar": sched.kappa_bar,
        "cumulative_tau": sched.cumulative_tau,
    }


def run_alpha_sweep(cfg: RunConfig, alphas, exp: Experiment | None = None) -> list[dict]:
    exp = exp or prepare(cfg)
    sched = build_schedule(cfg.schedule, exp.spectrum, exp.gp)
    pairs = alpha_sweep(
        exp.spectrum, exp.weights, sched, exp.gp, alphas,
        branch_n=exp.policy.branch_n, lambda1=exp.policy.lambda1,
    )
    return [{"alpha": a, "total_success_prob": p} for a, p in pairs]


def bounds_rows(b: BoundsConfig) -> list[dict]:
    """Per-eigenvalue bound and mean curves over the Δλ s Δτ_max axis."""
    grid = np.linspace(b.grid_from, b.grid_to, b.grid_points)[1:]
    exp_curve = analysis.eigenvalue_log_damping(grid, ScheduleKind.EXPONENTIAL, b.K, b.x_min, b.kappa_bar)
    lin_curve = analysis.eigenvalue_log_damping(grid, ScheduleKind.LINEAR, b.K, b.x_min)
    rows = []
    for x, ln_lin, ln_exp in zip(grid, lin_curve, exp_curve):
        x = float(x)
        x_min = min(b.x_min, x)
        lin = analysis.LinearBoundParams.from_products(x_min, x, b.K)
        bounds = analysis.log_damping_bounds(lin)
        mean_exp = analysis.arithmetic_mean_exponential(
            analysis.ExpMeanParams.from_products(x_min, x, b.K, b.kappa_bar)
        )
        rows.append({
            "dlambda_s_dtau_max": x,
            "lower_bound": bounds.lower,
            "upper_bound": bounds.upper,
            "arith_mean_linear": analysis.arithmetic_mean_linear(lin),
            "arith_mean_exp": mean_exp.mean,
            "amplitude": mean_exp.amplitude,
            "phase": mean_exp.phase,
            "integral": analysis.linear_log_integral(lin),
            "log_damping_linear": float(ln_lin),
            "log_damping_exp": float(ln_exp),
            "caveat": bounds.caveat,
        })
    return rows


def bounds_summary(b: BoundsConfig) -> dict:
    return {
        "K": b.K,
        "kappa_bar": b.kappa_bar,
        "linear_minimum": analysis.minimum_error_position(ScheduleKind.LINEAR, b.K, b.x_min),
        "exponential_minimum": analysis.minimum_error_position(
            ScheduleKind.EXPONENTIAL, b.K, b.x_min, b.kappa_bar
        ),
        "linear_mean_minimizer": analysis.linear_mean_minimizer(b.K, b.x_min),
        "linear_mean_minimum_stated": analysis.LINEAR_MEAN_MINIMUM_POSITION,
    }


def circuit_check(cfg: RunConfig, exp: Experiment | None = None) -> dict:
    """Gate-built steps against the spectral step factor and the engine trajectory."""
    exp = exp or prepare(cfg)
    H = exp.hamiltonian()
    sched = build_schedule(cfg.schedule, exp.spectrum, exp.gp)

    max_block = 0.0
    first_failure = None
    for k, dtau in enumerate(sched.steps):
        phase = shift_phase(exp.policy, exp.gp, float(dtau), exp.lambda1)
        try:
            step = build_approx_step_circuit(H, float(dtau), exp.gp, phase=phase)
        except PiteLabError as e:
            first_failure = first_failure or f"step {k + 1}: {e}"
            max_block = math.inf
            continue
        max_block = max(max_block, block_deviation(step, H, float(dtau), exp.gp, phase=phase))

    state = StateVector.from_weights(exp.spectrum, exp.weights)
    final, probs = run_circuit_trajectory(H, state, sched, exp.gp, exp.policy, lambda1=exp.lambda1)
    engine = run_pite(exp.spectrum, exp.weights, sched, exp.gp, exp.policy)
    weight_dev = float(np.max(np.abs(final.eigen_weights(exp.spectrum) - engine.final_weights)))
    ln_p_circuit = float(np.log(probs).sum())

    passed = max_block <= CIRCUIT_BLOCK_TOL and weight_dev <= CIRCUIT_WEIGHT_TOL
    return {
        "system": exp.label,
        "steps": sched.K,
        "max_block_deviation": max_block,
        "max_weight_deviation": weight_dev,
        "ln_total_success_circuit": ln_p_circuit,
        "ln_total_success_engine": engine.ln_total_success,
        "first_failure": first_failure,
        "passed": passed,
    }


def sample(cfg: RunConfig, threads: int = 1, exp: Experiment | None = None) -> TrajectoryStats:
    exp = exp or prepare(cfg)
    sched = build_schedule(cfg.schedule, exp.spectrum, exp.gp)
    return sample_trajectories(
        exp.spectrum, exp.weights, sched, exp.gp, exp.policy,
        shots=cfg.sample.shots, seed=cfg.seed, threads=threads,
    )


def cost_summary(c: CostConfig, exp: Experiment | None = None) -> dict:
    """Step count, cost and imaginary-time estimates for a target ε̃."""
    if c.w1_sq is not None:
        w1_sq = c.w1_sq
    elif exp is not None:
        w1_sq = exp.weights.ground
    else:
        raise InvalidArgumentError("cost needs w1_sq or a system config")
    out = {
        "d_pite": c.d_pite,
        "w1_sq": w1_sq,
        "eps_tilde": c.eps_tilde,
        "K_limit": analysis.required_steps(w1_sq, c.eps_tilde, "limit"),
        "K_cos2_bound": analysis.required_steps(w1_sq, c.eps_tilde, "cos2_bound"),
        "cost": analysis.cost_estimate(c.d_pite, w1_sq, c.eps_tilde),
        "error_limit": analysis.error_limit(w1_sq, analysis.required_steps(w1_sq, c.eps_tilde)),
    }
    if exp is not None and len(exp.spectrum) > 1 and exp.spectrum.gap_min > 0:
        spec, s = exp.spectrum, exp.gp.s
        out["tau_linear_exp"] = analysis.required_tau_schedule(spec.gap_min, s, w1_sq, c.eps_tilde, "linear_exp")
        out["tau_constant"] = analysis.required_tau_schedule(
            spec.gap_min, s, w1_sq, c.eps_tilde, "constant", dlambda_max=spec.gap_max
        )
        out["dtau_max_linear"] = analysis.optimal_dtau_max(spec.gap_min, s, ScheduleKind.LINEAR)
    return out


def spectrum_report(cfg: RunConfig, exp: Experiment | None = None) -> tuple[Experiment, DosHistogram]:
    exp = exp or prepare(cfg)
    return exp, dos_histogram(exp.spectrum, cfg.bin_width)
