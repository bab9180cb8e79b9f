import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from pite_lab.core.analysis import minimum_error_position
from pite_lab.core.engine import ShiftPolicy, run_pite
from pite_lab.errors import ConfigError, InvalidArgumentError, NumericError
from pite_lab.quality import check_run_invariants
from pite_lab.schemas import RunConfig, ScheduleConfig, SweepConfig
from pite_lab.services.experiment_service import (
    Experiment,
    build_schedule,
    prepare,
    schedule_products,
)

logger = logging.getLogger(__name__)

RESULT_FIELDS = ["ln_error_tilde", "error", "total_success_prob", "fidelity", "cumulative_tau"]


def sweep_values(sweep: SweepConfig) -> np.ndarray:
    if sweep.spacing == "log":
        values = np.geomspace(sweep.start, sweep.stop, sweep.points)
    else:
        values = np.linspace(sweep.start, sweep.stop, sweep.points)
    if sweep.param == "K":
        values = np.unique(np.rint(values).astype(int))
    return values


def _point_config(cfg: RunConfig, param: str, value) -> tuple[ScheduleConfig, float]:
    """Schedule and α for one grid point."""
    sc = cfg.schedule
    alpha = cfg.alpha
    if param == "alpha":
        alpha = float(value)
    elif param == "K":
        sc = sc.model_copy(update={"K": int(value)})
    elif param == "s_dtau_min":
        sc = sc.model_copy(update={"s_dtau_min": float(value)})
    elif param == "s_dtau_max":
        sc = sc.model_copy(update={"s_dtau_max": float(value)})
    elif param == "kappa_bar":
        sc = sc.model_copy(update={"kappa_bar": float(value)})
    return sc, alpha


def run_point(exp: Experiment, cfg: RunConfig, param: str, value) -> dict:
    """One sweep row. A point whose schedule or run fails gets NaN results."""
    sc, alpha = _point_config(cfg, param, value)
    row = {
        "param": param,
        "value": value.item() if isinstance(value, np.generic) else value,
        "K": sc.K,
        "s_dtau_min": sc.s_dtau_min,
        "s_dtau_max": sc.s_dtau_max,
        "kappa_bar": sc.kappa_bar if sc.type == "exponential" else None,
    }
    try:
        row["s_dtau_min"], row["s_dtau_max"] = schedule_products(sc, exp.spectrum)
        sched = build_schedule(sc, exp.spectrum, exp.gp)
        policy = ShiftPolicy(alpha=alpha, branch_n=exp.policy.branch_n, lambda1=exp.policy.lambda1)
        result = run_pite(exp.spectrum, exp.weights, sched, exp.gp, policy)
    except (NumericError, InvalidArgumentError) as e:
        logger.warning("sweep point %s=%r failed: %s", param, value, e)
        row.update({f: math.nan for f in RESULT_FIELDS}, s_dtau_final=math.nan)
        return row

    for msg in check_run_invariants(result):
        logger.warning("sweep point %s=%r: %s", param, value, msg)
    row.update({
        "ln_error_tilde": result.ln_error_tilde,
        "error": result.error,
        "total_success_prob": result.total_success,
        "fidelity": result.fidelity,
        "cumulative_tau": result.cumulative_tau,
        "s_dtau_final": exp.gp.s * sched.final_step,
    })
    return row


def run_sweep(cfg: RunConfig, threads: int = 1, exp: Experiment | None = None) -> list[dict]:
    """One row per grid point, in grid order for any thread count."""
    if cfg.sweep is None:
        raise ConfigError("config has no sweep section")
    exp = exp or prepare(cfg)
    values = sweep_values(cfg.sweep)
    param = cfg.sweep.param
    logger.info("sweeping %s over %d points with %d thread(s)", param, len(values), threads)
    if threads <= 1:
        return [run_point(exp, cfg, param, v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda v: run_point(exp, cfg, param, v), values))


def window_centre(cfg: RunConfig, exp: Experiment) -> float:
    """Minimum-error position of the smallest excitation, in sweep-axis units.

    Only s_dtau_max sweeps of a linear or exponential ramp have one.
    """
    sc = cfg.schedule
    param = cfg.sweep.param if cfg.sweep is not None else None
    if param != "s_dtau_max" or sc.type == "constant":
        raise ConfigError(f"no minimum-error position for a {sc.type} {param} sweep; give an explicit window centre")
    gap = exp.spectrum.gap_min if len(exp.spectrum) > 1 else 0.0
    if gap <= 0:
        raise InvalidArgumentError("window centre needs a nondegenerate ground state")
    kappa_bar = sc.kappa_bar if sc.type == "exponential" else None
    pos = minimum_error_position(sc.type, sc.K, gap * sc.s_dtau_min, kappa_bar)
    # gap_units axes are already Δλ_min·s·Δτ_max
    return pos if sc.gap_units else pos / gap


def window_statistics(rows: list[dict], window: float, centre: float) -> dict:
    """Mean and sample std of ln ε̃ over grid points within ±window of centre."""
    near = np.array([
        r["ln_error_tilde"]
        for r in rows
        if math.isfinite(r["ln_error_tilde"]) and abs(float(r["value"]) - centre) <= window
    ])
    if near.size == 0:
        logger.warning("no finite ln_error_tilde within ±%g of %g", window, centre)
    return {
        "param": rows[0]["param"] if rows else None,
        "value": centre,
        "mean_ln_error_tilde": float(near.mean()) if near.size else math.nan,
        "std_ln_error_tilde": float(near.std(ddof=1)) if near.size > 1 else math.nan,
        "samples": int(near.size),
    }

