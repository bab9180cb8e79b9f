"""Shared invariant checks for engine results.

Used by the sweep service and the `run` command to flag results that break
probability bookkeeping without aborting the run.
"""

import math

import numpy as np

from pite_lab.core.engine import RunResult, error_from_tilde


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

PROB_TOL = 1e-12
PRODUCT_REL_TOL = 1e-10
ERROR_TOL = 1e-12


# ---------------------------------------------------------------------------
# Quality validation
# ---------------------------------------------------------------------------

def check_run_invariants(result: RunResult) -> list[str]:
    """Run invariant checks on a RunResult. Returns list of error messages."""
    errors = []
    p = result.step_success

    # 1. Per-step probabilities in [0, 1]
    bad = np.nonzero((p < -PROB_TOL) | (p > 1 + PROB_TOL) | ~np.isfinite(p))[0]
    if bad.size:
        k = int(bad[0])
        errors.append(f"p_{k + 1}={p[k]!r} lies outside [0, 1]")

    # 2. P_K = Π p_k, compared in log space
    if np.all(p > 0):
        ln_product = float(np.log(p).sum())
        if abs(ln_product - result.ln_total_success) > PRODUCT_REL_TOL * max(1.0, abs(result.ln_total_success)):
            errors.append(
                f"ln P_K={result.ln_total_success!r} disagrees with sum of ln p_k={ln_product!r}"
            )

    # 3. Final weights are a probability distribution
    total = float(result.final_weights.sum())
    if abs(total - 1.0) > 1e-10:
        errors.append(f"final weights sum to {total!r}")

    # 4. ε reproduces from ε̃
    if math.isfinite(result.error_tilde):
        expected = error_from_tilde(result.error_tilde)
        if abs(expected - result.error) > ERROR_TOL:
            errors.append(f"error={result.error!r} does not invert error_tilde (expected {expected!r})")

    # 5. Fidelity bounded
    if not (-PROB_TOL <= result.fidelity <= 1 + PROB_TOL):
        errors.append(f"fidelity={result.fidelity!r} lies outside [0, 1]")

    return errors
