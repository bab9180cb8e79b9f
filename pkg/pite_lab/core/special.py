"""Sine and cosine integrals, and the entire function Cin(x) = ∫₀ˣ (1 − cos t)/t dt.

Si and Ci come from scipy.special.sici. Cin uses its Maclaurin series up to
CIN_SERIES_CUTOFF, where γ + ln x − Ci(x) would cancel catastrophically,
and the Ci identity beyond it.
"""

import numpy as np
from scipy.special import sici

from pite_lab.errors import InvalidArgumentError

EULER_GAMMA = float(np.euler_gamma)
CIN_SERIES_CUTOFF = 4.0
_CIN_TERMS = 40


def si(x):
    """Si(x) = ∫₀ˣ sin t / t dt; odd in x."""
    s, _ = sici(np.asarray(x, dtype=float))
    return s[()] if np.ndim(s) == 0 else s


def ci(x):
    """Ci(x) = −∫ₓ^∞ cos t / t dt, for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise InvalidArgumentError("ci(x) is defined for x > 0 (logarithmic singularity at 0)")
    _, c = sici(arr)
    return c[()] if np.ndim(c) == 0 else c


def _cin_series(x: np.ndarray) -> np.ndarray:
    x2 = x * x
    term = x2 / 2  # x^2 / 2!
    total = term / 2
    for k in range(2, _CIN_TERMS):
        term = -term * x2 / ((2 * k - 1) * (2 * k))
        total = total + term / (2 * k)
    return total


def cin(x):
    """Cin(x); even in x."""
    scalar = np.ndim(x) == 0
    arr = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    out = np.empty_like(arr)
    small = arr <= CIN_SERIES_CUTOFF
    out[small] = _cin_series(arr[small])
    large = ~small
    if np.any(large):
        _, c = sici(arr[large])
        out[large] = EULER_GAMMA + np.log(arr[large]) - c
    return float(out[0]) if scalar else out


def cin_from_log(log_x):
    """Cin at x = exp(log_x), usable when x itself overflows."""
    log_x = np.asarray(log_x, dtype=float)
    with np.errstate(over="ignore"):
        x = np.exp(log_x)
    out = np.where(np.isinf(x), EULER_GAMMA + log_x, 0.0)
    finite = np.isfinite(x)
    if np.any(finite):
        out = np.where(finite, cin(np.where(finite, x, 0.0)), out)
    return out[()] if out.ndim == 0 else out


def si_from_log(log_x):
    log_x = np.asarray(log_x, dtype=float)
    with np.errstate(over="ignore"):
        x = np.exp(log_x)
    return si(np.where(np.isinf(x), np.inf, x))
