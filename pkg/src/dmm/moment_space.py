"""Truncated moment space on a compact interval.

A vector ``(m_1, ..., m_r)`` is the moment vector of some distribution on
``[a, b]`` iff a pair of Hankel linear matrix inequalities holds:

* r odd:  ``b M(0, r-1) >= M(1, r) >= a M(0, r-1)``
* r even: ``M(0, r) >= 0`` and ``(a+b) M(1, r-1) >= ab M(0, r-2) + M(2, r)``

where ``M(i, j)`` is the Hankel matrix built from ``m_i, ..., m_j`` and ``>=``
is the Loewner order. Projection onto this convex set is computed with a
log-barrier interior-point method; the problem has at most a few dozen
variables so dense Newton steps are cheap.
"""

from dataclasses import dataclass

import numpy as np

from .distributions import MomentVector
from .exceptions import ProjectionError

PSD_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-9


@dataclass(frozen=True)
class ProjectionResult:
    projected: MomentVector
    distance: float
    iterations: int
    feasibility_violation: float


def _with_m0(moments):
    if isinstance(moments, MomentVector):
        return moments.with_zeroth()
    return np.concatenate(([1.0], np.asarray(moments, dtype=np.float64)))


def hankel(moments, i, j):
    """Hankel matrix ``M(i, j)`` with entry ``(p, q) = m_{i+p+q}``.

    ``moments`` holds ``m_1, ..., m_L``; ``m_0 = 1`` is prepended.
    """
    m = _with_m0(moments)
    if (i + j) % 2 or i < 0 or j < i or j >= m.size:
        raise IndexError(f"cannot form M({i},{j}) from moments up to order {m.size - 1}")
    s = (j - i) // 2 + 1
    idx = i + np.add.outer(np.arange(s), np.arange(s))
    return m[idx]


def _hankel_basis(i, j, L):
    """Coefficient tensor ``C`` with ``M(i, j) = sum_l m_l C[l]``, l = 0..L."""
    s = (j - i) // 2 + 1
    C = np.zeros((L + 1, s, s))
    for p in range(s):
        for q in range(s):
            C[i + p + q, p, q] = 1.0
    return C


def lmi_blocks(order, interval):
    """Coefficient tensors of the matrices certifying membership in the moment space."""
    a, b = interval
    r = order
    if r < 1:
        raise ValueError("order must be at least 1")
    if r % 2:
        lo, hi = _hankel_basis(0, r - 1, r), _hankel_basis(1, r, r)
        return [b * lo - hi, hi - a * lo]
    first = _hankel_basis(0, r, r)
    if r == 2:
        mid, low, top = _hankel_basis(1, 1, r), _hankel_basis(0, 0, r), _hankel_basis(2, 2, r)
    else:
        mid, low, top = _hankel_basis(1, r - 1, r), _hankel_basis(0, r - 2, r), _hankel_basis(2, r, r)
    return [first, (a + b) * mid - a * b * low - top]


def _assemble(blocks, m_full):
    return [np.tensordot(m_full, C, axes=1) for C in blocks]


def certifying_matrices(moments):
    """The matrices that must be PSD for ``moments`` to be realizable."""
    blocks = lmi_blocks(len(moments), moments.interval)
    return _assemble(blocks, moments.with_zeroth())


def min_eigenvalue(moments):
    return min(float(np.linalg.eigvalsh(G)[0]) for G in certifying_matrices(moments))


def is_valid(moments, tol=PSD_TOL):
    """Membership test. Returns ``(valid, violation)``.

    Each certifying matrix must have smallest eigenvalue at least
    ``-tol * (1 + trace)``; ``violation`` is the largest relative shortfall
    (zero when valid).
    """
    worst = 0.0
    for G in certifying_matrices(moments):
        lam = float(np.linalg.eigvalsh(G)[0])
        scale = 1.0 + abs(float(np.trace(G)))
        worst = max(worst, -lam / scale)
    return worst <= tol, max(worst, 0.0)


def uniform_moments(order, interval):
    """Moments of the uniform distribution on ``interval``: a strictly interior point."""
    a, b = interval
    r = np.arange(1, order + 1)
    return (b ** (r + 1) - a ** (r + 1)) / ((r + 1) * (b - a))


class _Barrier:
    def __init__(self, blocks):
        self.blocks = [C[1:] for C in blocks]
        self.const = [C[0] for C in blocks]
        self.nu = sum(C.shape[1] for C in blocks)

    def chol(self, x):
        out = []
        for C0, C in zip(self.const, self.blocks):
            G = C0 + np.tensordot(x, C, axes=1)
            try:
                out.append(np.linalg.cholesky(G))
            except np.linalg.LinAlgError:
                return None
        return out

    def value(self, chols):
        return -sum(2.0 * np.log(np.diag(Lc)).sum() for Lc in chols)

    def derivatives(self, chols):
        n = self.blocks[0].shape[0]
        g = np.zeros(n)
        H = np.zeros((n, n))
        for Lc, C in zip(chols, self.blocks):
            # L^{-1} C_i L^{-T} for every basis matrix at once
            Y = np.linalg.solve(Lc[None, :, :], C)
            Z = np.linalg.solve(Lc[None, :, :], np.swapaxes(Y, 1, 2))
            g -= np.einsum("ipp->i", Z)
            flat = Z.reshape(n, -1)
            H += flat @ flat.T
        return g, H


def project(noisy, tol=1e-8, max_iter=100_000):
    """Euclidean projection of ``noisy`` onto the moment space of its interval.

    Valid inputs are returned unchanged with distance 0. Otherwise the result
    is strictly feasible and its distance to ``noisy`` exceeds the true
    distance to the moment space by at most ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    target = noisy.values
    interval = noisy.interval
    if is_valid(noisy)[0]:
        return ProjectionResult(noisy, 0.0, 0, min_eigenvalue(noisy))

    blocks = lmi_blocks(len(noisy), interval)
    bar = _Barrier(blocks)
    x = uniform_moments(len(noisy), interval)
    chols = bar.chol(x)
    if chols is None:  # pragma: no cover - uniform moments are interior
        raise ProjectionError("no strictly feasible starting point", best=None)

    def objective(z):
        d = z - target
        return float(d @ d)

    # diagonal rescaling keeps the Newton systems well conditioned when moments
    # of different orders differ by many orders of magnitude
    scale = np.maximum(np.abs(x), 1e-3)
    t = bar.nu / max(objective(x), 1e-12)
    iters = 0
    stalled = False
    while True:
        for _ in range(200):
            if iters >= max_iter:
                best = MomentVector(x, interval)
                raise ProjectionError(
                    f"projection did not converge in {max_iter} Newton steps", best=best, iterations=iters
                )
            iters += 1
            gb, Hb = bar.derivatives(chols)
            g = 2.0 * t * (x - target) + gb
            H = Hb + 2.0 * t * np.eye(x.size)
            Hs = H * np.outer(scale, scale)
            step = -scale * np.linalg.solve(Hs, scale * g)
            dec = float(-g @ step)
            if dec / 2.0 <= 1e-12:
                break
            psi0 = t * objective(x) + bar.value(chols)
            s = 1.0
            while True:
                xn = x + s * step
                cn = bar.chol(xn)
                if cn is not None:
                    psi = t * objective(xn) + bar.value(cn)
                    if psi <= psi0 - 0.25 * s * dec or s * np.max(np.abs(step) / scale) < 1e-14:
                        break
                s *= 0.5
                if s < 1e-20:
                    cn = None
                    break
            if cn is None:
                stalled = True
                break
            x, chols = xn, cn
            if s * np.max(np.abs(step) / scale) < 1e-14:
                break
        f = objective(x)
        gap = bar.nu / t
        if gap <= tol * max(np.sqrt(f), tol) or stalled:
            break
        t *= 10.0

    result = MomentVector(x, interval)
    return ProjectionResult(result, float(np.sqrt(objective(x))), iters, min_eigenvalue(result))


def hankel_pivots(moments):
    """Pivots ``det M_r / det M_{r-1}`` and diagonals ``m_{2r}`` for r = 0..L//2."""
    m = _with_m0(moments)
    rmax = (m.size - 1) // 2
    H = m[np.add.outer(np.arange(rmax + 1), np.arange(rmax + 1))].astype(np.float64)
    diag = np.diag(H).copy()
    piv = np.zeros(rmax + 1)
    A = H.copy()
    for r in range(rmax + 1):
        piv[r] = A[r, r]
        if r < rmax and A[r, r] != 0:
            A[r + 1 :, r + 1 :] -= np.outer(A[r + 1 :, r], A[r, r + 1 :]) / A[r, r]
        elif r < rmax:
            break
    return piv, diag


def detect_order(moments, rank_tol=DEFAULT_RANK_TOL):
    """Number of support points implied by the Hankel determinants.

    Returns the smallest ``r`` such that ``det M_r`` vanishes relative to scale
    (``det M_r / (det M_{r-1} m_{2r}) <= rank_tol``) while ``det M_{r-1} > 0``.
    If every available ``M_r`` is positive definite, returns ``L//2 + 1``.
    """
    m = _with_m0(moments)
    rmax = (m.size - 1) // 2
    piv, diag = hankel_pivots(m[1:])
    for r in range(1, rmax + 1):
        if not np.isfinite(piv[r]) or piv[r] <= rank_tol * max(abs(diag[r]), np.finfo(float).tiny):
            return r
    return rmax + 1
