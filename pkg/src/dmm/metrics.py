"""Distances between mixing distributions and mixtures, plus moment-matched fixtures."""

from dataclasses import dataclass

import numpy as np

from .distributions import DiscreteDistribution, density


def wasserstein1(p, q):
    """W1 between two discrete distributions as the L1 distance of their CDFs."""
    grid = np.union1d(p.atoms, q.atoms)
    if grid.size < 2:
        return 0.0
    gap = np.abs(p.cdf(grid[:-1]) - q.cdf(grid[:-1]))
    return float(gap @ np.diff(grid))


def hausdorff(S, T):
    S = np.atleast_1d(np.asarray(S, dtype=np.float64))
    T = np.atleast_1d(np.asarray(T, dtype=np.float64))
    if S.size == 0 or T.size == 0:
        raise ValueError("Hausdorff distance needs two non-empty sets")
    d = np.abs(S[:, None] - T[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass(frozen=True)
class ParameterError:
    mean_error: float
    weight_error: float
    permutation: np.ndarray
    w1: float
    w1_controls_parameters: bool


def _min_gap(x):
    return float(np.diff(np.sort(x)).min()) if x.size > 1 else np.inf


def matched_parameter_error(true, est):
    """Sup-norm errors of means and weights after matching atoms in sorted order.

    ``permutation[i]`` is the index of the estimated atom matched with true
    atom ``i``. ``w1_controls_parameters`` reports whether
    ``W1 < min_gap * min_weight / 4``, the regime in which W1 controls both
    errors (mean error < W1/min_weight, weight error < 2 W1/min_gap).
    """
    if true.k != est.k:
        raise ValueError(f"atom counts differ: {true.k} vs {est.k}")
    perm = np.argsort(est.atoms, kind="stable")[np.argsort(np.argsort(true.atoms, kind="stable"))]
    mean_err = float(np.max(np.abs(true.atoms - est.atoms[perm])))
    weight_err = float(np.max(np.abs(true.weights - est.weights[perm])))
    w1 = wasserstein1(true, est)
    gap = min(_min_gap(true.atoms), _min_gap(est.atoms))
    wmin = min(true.weights.min(), est.weights.min())
    return ParameterError(mean_err, weight_err, perm, w1, bool(w1 < gap * wmin / 4))


def moment_matched_pair(points, max_condition=1e12):
    """Two distributions on alternating points of ``points`` with equal first 2k-2 moments.

    ``points`` holds 2k distinct reals. The signed null vector of the
    ``(2k-1) x 2k`` Vandermonde matrix, scaled to unit total variation on each
    side, splits into the two weight vectors.
    """
    x = np.sort(np.asarray(points, dtype=np.float64))
    if x.size % 2 or x.size < 2:
        raise ValueError("need an even number (2k) of points")
    if np.any(np.diff(x) <= 0):
        raise ValueError("points must be distinct")
    V = x[None, :] ** np.arange(x.size - 1)[:, None]
    _, s, vt = np.linalg.svd(V)
    if s[0] / s[-1] > max_condition:
        raise ValueError(f"Vandermonde condition number {s[0] / s[-1]:.3g} exceeds {max_condition:g}")
    w = vt[-1]
    if w[0] < 0:
        w = -w
    w = 2 * w / np.abs(w).sum()
    pos, neg = w > 0, w < 0
    if not (np.array_equal(pos, np.arange(x.size) % 2 == 0) and np.array_equal(neg, ~pos)):
        raise ValueError("null vector lacks alternating signs; points too close")
    return DiscreteDistribution(x[pos], w[pos]), DiscreteDistribution(x[neg], -w[neg])


def total_variation(f, g, resolution=2001, rtol=1e-7, max_points=2**21):
    """Half the L1 distance between two mixture densities.

    Trapezoid rule on ``[min atom - 10 sigma, max atom + 10 sigma]`` with the
    grid doubled until successive estimates agree to ``rtol``.
    """
    s = max(f.sigma, g.sigma)
    lo = min(f.means.min(), g.means.min()) - 10 * s
    hi = max(f.means.max(), g.means.max()) + 10 * s
    n = int(resolution)
    prev = None
    while True:
        t = np.linspace(lo, hi, n)
        val = 0.5 * np.trapezoid(np.abs(density(f, t) - density(g, t)), t)
        if prev is not None and abs(val - prev) <= rtol:
            return float(min(max(val, 0.0), 1.0))
        if n >= max_points:
            return float(min(max(val, 0.0), 1.0))
        prev = val
        n = 2 * n - 1


def moment_distance(m, mp):
    """``(max |m_i - m'_i|, ||m - m'||_2)`` over shared orders."""
    a = np.asarray(getattr(m, "values", m), dtype=np.float64)
    b = np.asarray(getattr(mp, "values", mp), dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("moment vectors differ in length")
    d = a - b
    return float(np.abs(d).max()), float(np.linalg.norm(d))
