"""Inner loops over samples.

Each kernel has a numba implementation and a numpy implementation with the
same signature. The public names resolve to the numba versions unless numba is
unavailable or disabled through ``DMM_DISABLE_NUMBA``.
"""

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def hermite_sums_numpy(x, order, sigma):
    """Sums of gamma_r(x_i, sigma) and of their squares for r = 0..order."""
    x = np.asarray(x, dtype=np.float64)
    s2 = sigma * sigma
    sums = np.empty(order + 1)
    sq = np.empty(order + 1)
    prev = np.ones_like(x)
    sums[0] = x.size
    sq[0] = x.size
    if order == 0:
        return sums, sq
    cur = x.copy()
    sums[1] = cur.sum()
    sq[1] = np.dot(cur, cur)
    for r in range(1, order):
        nxt = x * cur - r * s2 * prev
        prev, cur = cur, nxt
        sums[r + 1] = cur.sum()
        sq[r + 1] = np.dot(cur, cur)
    return sums, sq


@njit
def _hermite_sums_jit(x, order, sigma):
    s2 = sigma * sigma
    sums = np.zeros(order + 1)
    sq = np.zeros(order + 1)
    for i in range(x.shape[0]):
        xi = x[i]
        prev = 1.0
        sums[0] += 1.0
        sq[0] += 1.0
        if order == 0:
            continue
        cur = xi
        sums[1] += cur
        sq[1] += cur * cur
        for r in range(1, order):
            nxt = xi * cur - r * s2 * prev
            prev = cur
            cur = nxt
            sums[r + 1] += cur
            sq[r + 1] += cur * cur
    return sums, sq


def hermite_sums_numba(x, order, sigma):
    return _hermite_sums_jit(np.ascontiguousarray(x, dtype=np.float64), int(order), float(sigma))


def em_sweep_numpy(x, weights, means, var):
    """One E-step plus the sufficient statistics for the M-step.

    Returns ``(loglik, nk, sx, sxx)`` where ``nk[j]`` is the total
    responsibility of component ``j`` and ``sx``/``sxx`` are the
    responsibility-weighted sums of x and x**2.
    """
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    d = x[:, None] - means[None, :]
    logp = logw[None, :] - 0.5 * d * d / var - 0.5 * math.log(var) - LOG_SQRT_2PI
    top = logp.max(axis=1)
    lse = top + np.log(np.exp(logp - top[:, None]).sum(axis=1))
    resp = np.exp(logp - lse[:, None])
    nk = resp.sum(axis=0)
    sx = resp.T @ x
    sxx = resp.T @ (x * x)
    return float(lse.sum()), nk, sx, sxx


@njit
def _em_sweep_jit(x, logw, means, var):
    k = means.shape[0]
    nk = np.zeros(k)
    sx = np.zeros(k)
    sxx = np.zeros(k)
    logp = np.empty(k)
    half_logvar = 0.5 * math.log(var)
    ll = 0.0
    for i in range(x.shape[0]):
        xi = x[i]
        top = -np.inf
        for j in range(k):
            d = xi - means[j]
            logp[j] = logw[j] - 0.5 * d * d / var - half_logvar - LOG_SQRT_2PI
            if logp[j] > top:
                top = logp[j]
        acc = 0.0
        for j in range(k):
            acc += math.exp(logp[j] - top)
        lse = top + math.log(acc)
        ll += lse
        for j in range(k):
            r = math.exp(logp[j] - lse)
            nk[j] += r
            sx[j] += r * xi
            sxx[j] += r * xi * xi
    return ll, nk, sx, sxx


def em_sweep_numba(x, weights, means, var):
    with np.errstate(divide="ignore"):
        logw = np.log(np.asarray(weights, dtype=np.float64))
    ll, nk, sx, sxx = _em_sweep_jit(
        np.ascontiguousarray(x, dtype=np.float64),
        logw,
        np.ascontiguousarray(means, dtype=np.float64),
        float(var),
    )
    return float(ll), nk, sx, sxx


if HAVE_NUMBA:
    hermite_sums = hermite_sums_numba
    em_sweep = em_sweep_numba
else:
    hermite_sums = hermite_sums_numpy
    em_sweep = em_sweep_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
