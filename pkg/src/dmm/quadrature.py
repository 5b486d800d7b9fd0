"""Gauss quadrature: recover the k-atomic distribution behind 2k-1 moments."""

import math

import numpy as np
from scipy.linalg import solve_triangular

from .distributions import DiscreteDistribution, MomentVector
from .exceptions import QuadratureError
from .moment_space import DEFAULT_RANK_TOL, detect_order, is_valid

ROOT_TOL = 1e-7
WEIGHT_TOL = 1e-8
SUPPORT_SLACK = 1e-6


def vandermonde_solve(nodes, rhs):
    """Solve ``sum_j nodes[j]**i * w[j] = rhs[i]`` (i = 0..n-1) by Bjorck-Pereyra.

    O(n^2) and typically far more accurate than LU on Vandermonde matrices
    with clustered nodes. Nodes must be distinct.
    """
    x = np.asarray(nodes, dtype=np.float64)
    b = np.array(rhs, dtype=np.float64)
    n = x.size - 1
    if b.size != x.size:
        raise ValueError("nodes and rhs differ in length")
    for k in range(n):
        for i in range(n, k, -1):
            b[i] -= x[k] * b[i - 1]
    for k in range(n - 1, -1, -1):
        for i in range(k + 1, n + 1):
            d = x[i] - x[i - k - 1]
            if d == 0:
                raise ZeroDivisionError("repeated Vandermonde nodes")
            b[i] /= d
        for i in range(k, n):
            b[i] -= b[i + 1]
    return b


def affine_moments(m_full, shift, scale):
    """Moments of ``(X - shift)/scale`` from raw moments ``(1, m_1, ..., m_L)``."""
    L = m_full.size - 1
    out = np.empty(L + 1)
    for r in range(L + 1):
        acc = 0.0
        for j in range(r + 1):
            acc += math.comb(r, j) * m_full[j] * (-shift) ** (r - j)
        out[r] = acc / scale**r
    return out


def _jacobi_from_moments(m_full, k):
    """Recurrence coefficients of the k-node rule from m_0..m_{2k-1} (Golub-Welsch).

    Raises ``np.linalg.LinAlgError`` if the moment matrix is not positive definite.
    """
    A = m_full[np.add.outer(np.arange(k), np.arange(k + 1))]
    R = np.linalg.cholesky(A[:, :k]).T
    last = solve_triangular(R, A[:, k], trans="T", lower=False)
    R = np.column_stack([R, last])
    d = np.diag(R)[:k]
    alpha = np.empty(k)
    for j in range(k):
        alpha[j] = R[j, j + 1] / d[j] - (R[j - 1, j] / d[j - 1] if j else 0.0)
    beta = d[1:] / d[:-1]
    return alpha, beta


def jacobi_support_bound(m_full, k):
    """Gershgorin radius of the k-node Jacobi matrix built from ``m_0..m_{2k-1}``.

    Every node of the corresponding Gauss rule lies in ``[-R, R]``. Raises
    ``np.linalg.LinAlgError`` when the moment matrix is singular.
    """
    alpha, beta = _jacobi_from_moments(np.asarray(m_full, dtype=np.float64), k)
    off = np.concatenate(([0.0], beta, [0.0]))
    return float(np.max(np.abs(alpha) + off[:-1] + off[1:]))


def _nodes_golub_welsch(m_full, k):
    alpha, beta = _jacobi_from_moments(m_full, k)
    if not np.all(np.isfinite(alpha)) or not np.all(np.isfinite(beta)):
        raise np.linalg.LinAlgError("non-finite recurrence coefficients")
    J = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
    return np.linalg.eigvalsh(J)


def characteristic_polynomial(m_full, k):
    """Coefficients (lowest degree first) of the degree-k polynomial whose roots are the nodes.

    ``P(x) = det[[m_0 .. m_k], ..., [m_{k-1} .. m_{2k-1}], [1, x, .., x^k]]``
    expanded along its last row.
    """
    A = m_full[np.add.outer(np.arange(k), np.arange(k + 1))]
    coeffs = np.empty(k + 1)
    for j in range(k + 1):
        minor = np.delete(A, j, axis=1)
        coeffs[j] = (-1) ** (k + j) * np.linalg.det(minor)
    return coeffs


def _nodes_companion(m_full, k, root_tol):
    coeffs = characteristic_polynomial(m_full, k)
    if coeffs[-1] == 0:
        raise np.linalg.LinAlgError("degenerate leading coefficient")
    monic = coeffs / coeffs[-1]
    C = np.zeros((k, k))
    C[1:, :-1] = np.eye(k - 1)
    C[:, -1] = -monic[:-1]
    roots = np.linalg.eigvals(C)
    if np.any(np.abs(roots.imag) > root_tol * (1 + np.abs(roots.real))):
        raise np.linalg.LinAlgError("complex roots")
    return np.sort(roots.real)


def _attempt(m_unit, k, method, root_tol):
    """Nodes and weights on the normalized interval [-1, 1], or None if rejected."""
    try:
        if method == "golub-welsch":
            nodes = _nodes_golub_welsch(m_unit, k)
        else:
            nodes = _nodes_companion(m_unit, k, root_tol)
    except np.linalg.LinAlgError:
        return None
    if np.any(np.diff(nodes) <= 0):
        return None
    try:
        w = vandermonde_solve(nodes, m_unit[:k])
    except ZeroDivisionError:
        return None
    if not np.all(np.isfinite(w)) or np.any(w < -WEIGHT_TOL):
        return None
    return nodes, w


def gauss_quadrature(
    moments,
    method="golub-welsch",
    rank_tol=DEFAULT_RANK_TOL,
    root_tol=ROOT_TOL,
    check_valid=True,
):
    """The unique k-atomic distribution with the given ``2k-1`` moments.

    When the moments sit on the boundary of the moment space the rule
    degenerates; the order is then reduced (guided by the Hankel determinants)
    until a rule with real, distinct nodes inside the interval and non-negative
    weights is found.
    """
    L = len(moments)
    if L % 2 == 0:
        raise ValueError(f"need an odd number of moments, got {L}")
    if check_valid:
        ok, viol = is_valid(moments)
        if not ok:
            raise ValueError(f"moments are not realizable on {moments.interval} (violation {viol:.3g})")
    if method not in ("golub-welsch", "companion"):
        raise ValueError(f"unknown method {method!r}")

    a, b = moments.interval
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    m_unit = affine_moments(moments.with_zeroth(), c, h)

    k = (L + 1) // 2
    while k >= 1:
        if k == 1:
            nodes, w = np.array([m_unit[1]]), np.array([1.0])
        else:
            res = _attempt(m_unit, k, method, root_tol)
            if res is not None:
                nodes, w = res
            if res is None or np.any(np.abs(nodes) > 1 + SUPPORT_SLACK / h):
                k = min(detect_order(m_unit[1 : 2 * k - 1], rank_tol), k - 1)
                continue
        if abs(nodes).max() > 1 + SUPPORT_SLACK / h:
            raise QuadratureError(f"single atom {c + h * nodes[0]} lies outside {moments.interval}")
        nodes = np.clip(nodes, -1.0, 1.0)
        w = np.clip(w, 0.0, None)
        atoms = np.clip(c + h * nodes, a, b)
        return DiscreteDistribution(atoms, w / w.sum())
    raise QuadratureError("order reduction exhausted")  # pragma: no cover


def quadrature_of_gaussian(k, variance):
    """k-point Gauss quadrature of ``N(0, variance)``.

    Atoms are the zeros of ``He_k`` scaled by the standard deviation; they are
    the eigenvalues of the Jacobi matrix with off-diagonal ``sqrt(1..k-1)``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if variance <= 0:
        raise ValueError("variance must be positive")
    off = np.sqrt(np.arange(1, k))
    J = np.diag(off, 1) + np.diag(off, -1)
    nodes, vecs = np.linalg.eigh(J)
    w = vecs[0] ** 2
    nodes = 0.5 * (nodes - nodes[::-1])  # exact symmetry
    w = 0.5 * (w + w[::-1])
    return DiscreteDistribution(np.sqrt(variance) * nodes, w / w.sum())
