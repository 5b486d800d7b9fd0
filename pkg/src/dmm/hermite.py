"""Unbiased moment estimates for the mixing distribution.

For ``X ~ N(mu, sigma**2)`` the scaled Hermite polynomial
``gamma_r(X, sigma) = sigma**r He_r(X / sigma)`` is the unique unbiased
estimator of ``mu**r``. Averaging over a sample therefore gives unbiased
estimates of the moments of the mixing distribution when sigma is known.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import InsufficientSamplesError


@dataclass(frozen=True)
class MomentEstimate:
    values: np.ndarray
    per_order_variance: np.ndarray
    n: int

    def __post_init__(self):
        if len(self.values) != len(self.per_order_variance):
            raise ValueError("values and per_order_variance differ in length")

    @property
    def order(self):
        return len(self.values)

    def standard_errors(self):
        return np.sqrt(self.per_order_variance)


def hermite(r, x):
    """Probabilists' Hermite polynomial ``He_r(x)`` via the three-term recurrence."""
    if r < 0:
        raise ValueError("r must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(x)
    if r == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for j in range(1, r):
        prev, cur = cur, x * cur - j * prev
    return cur if cur.ndim else float(cur)


def hermite_direct(r, x):
    """``He_r`` from its explicit factorial sum. Kept for cross-checking."""
    x = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(x)
    for j in range(r // 2 + 1):
        c = math.factorial(r) * (-0.5) ** j / (math.factorial(j) * math.factorial(r - 2 * j))
        total = total + c * x ** (r - 2 * j)
    return total if total.ndim else float(total)


def gamma_r(r, x, sigma):
    """``sigma**r He_r(x/sigma)``; equals ``x**r`` at ``sigma = 0``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    s2 = float(sigma) ** 2
    prev = np.ones_like(x)
    if r == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for j in range(1, r):
        prev, cur = cur, x * cur - j * s2 * prev
    return cur if cur.ndim else float(cur)


def deconvolve_raw_moments(raw, sigma):
    """Map raw sample moments ``(g_0=1, g_1, ..., g_L)`` to mixing moment estimates.

    ``m_r(sigma) = r! sum_i (-1/2)^i / (i!(r-2i)!) g_{r-2i} sigma^{2i}``, which is
    the sample average of ``gamma_r(X, sigma)`` written in terms of power sums.
    Returns ``(m_1, ..., m_L)``.
    """
    raw = np.asarray(raw, dtype=np.float64)
    L = raw.size - 1
    s2 = float(sigma) ** 2
    out = np.empty(L)
    for r in range(1, L + 1):
        acc = 0.0
        for i in range(r // 2 + 1):
            coef = math.factorial(r) * (-0.5) ** i / (math.factorial(i) * math.factorial(r - 2 * i))
            acc += coef * raw[r - 2 * i] * s2**i
        out[r - 1] = acc
    return out


def _from_sums(sums, sq, n):
    mean = sums[1:] / n
    var = np.maximum(sq[1:] / n - mean * mean, 0.0) / n
    return MomentEstimate(mean, var, n)


def estimate_mixing_moments(samples, order, sigma):
    """Average ``gamma_r(X_i, sigma)`` over the sample for ``r = 1..order``.

    The per-order variance is the empirical variance of the ``gamma_r`` values
    divided by ``n``.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if order < 1:
        raise ValueError("order must be at least 1")
    if x.size < 1:
        raise InsufficientSamplesError("need at least one sample")
    sums, sq = kernels.hermite_sums(x, order, float(sigma))
    return _from_sums(sums, sq, x.size)


def default_batches(k, delta=0.05):
    """``ceil(log(2k/delta))`` batches for the median trick."""
    return max(1, math.ceil(math.log(2 * k / delta)))


def median_of_batches(samples, order, sigma, batches):
    """Per-order median of the moment estimates over disjoint contiguous batches.

    With one batch this is :func:`estimate_mixing_moments`. The reported variance
    is the full-sample plug-in variance inflated by ``pi/2``, the asymptotic
    efficiency loss of a median of normal estimates.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if batches < 1:
        raise ValueError("batches must be at least 1")
    if x.size < batches:
        raise InsufficientSamplesError(f"{x.size} samples cannot fill {batches} batches")
    if batches == 1:
        return estimate_mixing_moments(x, order, sigma)
    parts = np.array_split(x, batches)
    est = np.array([estimate_mixing_moments(p, order, sigma).values for p in parts])
    full = estimate_mixing_moments(x, order, sigma)
    return MomentEstimate(np.median(est, axis=0), full.per_order_variance * (np.pi / 2), x.size)


def screen_order(estimate, k_max, tau=0.5):
    """Largest ``k`` whose first ``2k`` moment estimates all have variance <= tau.

    ``estimate`` should hold raw empirical moments (sigma = 0) so that its
    variances are ``(E_n[X^{2j}] - E_n[X^j]^2)/n``. ``tau = 0.5`` is the value used
    in the five-component experiment; it is not a general-purpose default.
    Returns at least 1.
    """
    if estimate.order < 2 * k_max:
        raise ValueError(f"estimate covers {estimate.order} orders, need {2 * k_max}")
    var = np.asarray(estimate.per_order_variance)
    best = 1
    for k in range(1, k_max + 1):
        if np.all(var[: 2 * k] <= tau):
            best = k
        else:
            break
    return best
