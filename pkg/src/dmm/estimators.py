"""Estimation pipelines for Gaussian location mixtures.

* :func:`dmm_known_variance` - Hermite moment estimates, projection onto the
  moment space, Gauss quadrature.
* :func:`lindsay_unknown_variance` - the variance is the smallest positive zero
  of the Hankel determinant of deconvolved moments.
* :func:`estimate_unbounded` - clusters the line into disjoint intervals and
  runs one of the above per interval.
* :func:`estimate_d_dimensional` - random projections plus finite differences.
"""

import math
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .distributions import DiscreteDistribution, GaussianMixture, MomentVector, density
from .exceptions import EstimationError, InsufficientSamplesError, ProjectionError, QuadratureError
from .hermite import deconvolve_raw_moments, default_batches, estimate_mixing_moments, median_of_batches, screen_order
from .moment_space import DEFAULT_RANK_TOL, detect_order, project
from .quadrature import ROOT_TOL, affine_moments, gauss_quadrature, jacobi_support_bound


@dataclass(frozen=True)
class EstimatorConfig:
    k: int
    interval: tuple = None
    sigma2: float = None
    batches: int = 1
    high_prob_delta: float = None
    proj_tol: float = 1e-8
    rank_tol: float = DEFAULT_RANK_TOL
    root_tol: float = ROOT_TOL
    screen_tau: float = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.sigma2 is not None and self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if self.batches < 1:
            raise ValueError("batches must be at least 1")
        if self.interval is not None:
            a, b = self.interval
            if not a < b:
                raise ValueError(f"invalid interval {self.interval!r}")

    def n_batches(self):
        if self.high_prob_delta is not None:
            return default_batches(self.k, self.high_prob_delta)
        return self.batches


@dataclass
class EstimationReport:
    model: GaussianMixture
    projection_distance: float = 0.0
    detected_order: int = 0
    sigma_root_bracket: tuple = None
    wallclock: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "projection_distance": float(self.projection_distance),
            "detected_order": int(self.detected_order),
            "sigma_root_bracket": None if self.sigma_root_bracket is None else list(self.sigma_root_bracket),
            "wallclock": float(self.wallclock),
            "diagnostics": _jsonable(self.diagnostics),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _check_k(k, n):
    if n > 16:
        limit = 2 * math.log(n) / math.log(math.log(n))
        if k > limit:
            warnings.warn(f"k={k} is large for n={n}; higher moments will be very noisy", stacklevel=3)


def _as_samples(samples):
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 1:
        raise InsufficientSamplesError("need at least one sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    return x


def default_interval(x, sigma):
    """``[min X - 3 sigma, max X + 3 sigma]``, widened if degenerate."""
    a, b = float(x.min() - 3 * sigma), float(x.max() + 3 * sigma)
    if b - a < 1e-9 * (1 + abs(a)):
        a, b = a - 1.0, b + 1.0
    return a, b


def _unit_transform(interval):
    a, b = interval
    return 0.5 * (a + b), 0.5 * (b - a)


def dmm_known_variance(samples, config):
    """Denoised method of moments with known variance.

    Works in the coordinates that map the interval onto ``[-1, 1]``; the
    projection is Euclidean there, which makes the estimator equivariant under
    shifts and rescalings of the data and interval.
    """
    if config.sigma2 is None:
        raise ValueError("dmm_known_variance needs config.sigma2")
    t0 = time.perf_counter()
    x = _as_samples(samples)
    k = config.k
    _check_k(k, x.size)
    sigma = math.sqrt(config.sigma2)
    interval = tuple(float(t) for t in config.interval) if config.interval else default_interval(x, sigma)
    c, h = _unit_transform(interval)

    T = config.n_batches()
    est = median_of_batches((x - c) / h, 2 * k - 1, sigma / h, T)
    noisy = MomentVector(est.values, (-1.0, 1.0))
    proj = project(noisy, tol=config.proj_tol)
    nu = gauss_quadrature(proj.projected, rank_tol=config.rank_tol, root_tol=config.root_tol, check_valid=False)
    mixing = DiscreteDistribution(np.clip(c + h * nu.atoms, *interval), nu.weights)
    return EstimationReport(
        model=GaussianMixture(mixing, float(config.sigma2)),
        projection_distance=proj.distance,
        detected_order=mixing.k,
        wallclock=time.perf_counter() - t0,
        diagnostics={
            "estimator": "dmm",
            "interval": list(interval),
            "batches": T,
            "projection_iterations": proj.iterations,
            "feasibility_violation": proj.feasibility_violation,
            "n": int(x.size),
        },
    )


def naive_moment_inversion(samples, k, sigma2):
    """Solve the moment equations directly, without projecting first.

    Raises :class:`EstimationError` when the unbiased moment estimates are not
    the moments of any k-atomic distribution (e.g. when the empirical variance
    of the mixing distribution comes out negative).
    """
    x = _as_samples(samples)
    est = estimate_mixing_moments(x, 2 * k - 1, math.sqrt(sigma2))
    m = np.concatenate(([1.0], est.values))
    H = m[np.add.outer(np.arange(k), np.arange(k))]
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise EstimationError("moment equations have no solution: moment matrix is not positive definite") from None
    lo, hi = float(x.min()), float(x.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1, hi + 1
    span = hi - lo
    # the real line: any interval containing the nodes will do
    wide = (lo - 1e3 * span, hi + 1e3 * span)
    nu = gauss_quadrature(MomentVector(est.values, wide), check_valid=False)
    return GaussianMixture(nu, float(sigma2))


def _scan_grid(s, points):
    geo = s * np.geomspace(1e-6, 1.0, points // 2)
    lin = np.linspace(s / points, s, points)
    return np.unique(np.concatenate([geo, lin]))


def smallest_positive_root(d, s, root_tol=None, points=200):
    """Smallest root of ``d`` on ``(0, s]``, bracketed by a sign scan and bisected.

    Returns ``(root, (lo, hi))`` with ``d(lo) > 0 >= d(hi)`` (or the reverse
    sign pattern) and ``hi - lo <= root_tol``.
    """
    if s <= 0:
        raise ValueError("bracket end must be positive")
    tol = 1e-10 * s if root_tol is None else root_tol
    grid = _scan_grid(s, max(points, 200))
    vals = np.array([d(g) for g in grid])
    if vals[0] <= 0:
        raise EstimationError(
            "determinant is not positive near zero; data may be degenerate",
            {"grid_start": float(grid[0]), "value": float(vals[0])},
        )
    flips = np.nonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[0]
    if flips.size == 0 and abs(vals[-1]) <= 1e-10 * np.max(np.abs(vals)):
        # root sits on the bracket end (k = 1: sigma^2 equals the sample variance)
        return float(s), (float(s), float(s))
    if flips.size == 0:
        raise EstimationError(
            "no sign change of the determinant on (0, s]; try a finer scan grid",
            {"s": float(s), "last_value": float(vals[-1])},
        )
    i = flips[0]
    lo, hi = grid[i], grid[i + 1]
    flo = vals[i]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = d(mid)
        if fm == 0:
            lo = hi = mid
            break
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), (float(lo), float(hi))


def lindsay_determinant(raw, k):
    """``sigma -> det [m_{i+j}(sigma)]_{i,j=0..k}`` from raw moments ``(1, g_1, ..., g_2k)``."""

    def d(sigma):
        m = np.concatenate(([1.0], deconvolve_raw_moments(raw, sigma)))
        return float(np.linalg.det(m[np.add.outer(np.arange(k + 1), np.arange(k + 1))]))

    return d


def lindsay_unknown_variance(samples, config):
    """Lindsay's estimator: joint estimate of the mixing distribution and variance.

    The data are standardized first (the procedure is affine equivariant) and
    the fit is mapped back at the end. With ``config.screen_tau`` set, the
    order is lowered to the largest k whose first 2k raw moments pass the
    variance screen.
    """
    t0 = time.perf_counter()
    x = _as_samples(samples)
    k = config.k
    if x.size < 2 * k - 1:
        raise InsufficientSamplesError(f"need at least {2 * k - 1} samples for k={k}, got {x.size}")
    _check_k(k, x.size)

    center = float(x.mean())
    s = float(x.std())
    if s == 0:
        raise EstimationError("sample variance is zero")
    z = (x - center) / s

    diagnostics = {"estimator": "lindsay", "n": int(x.size)}
    if config.screen_tau is not None:
        raw_est = estimate_mixing_moments(x, 2 * k, 0.0)
        k_screen = screen_order(raw_est, k, config.screen_tau)
        diagnostics["screened_k"] = k_screen
        k = k_screen

    sums, _ = kernels.hermite_sums(z, 2 * k, 0.0)
    raw = sums / z.size
    d = lindsay_determinant(raw, k)
    # sample variance of z is exactly 1
    if k == 1:
        root, bracket = 1.0, (1.0, 1.0)  # d_1(sigma) = 1 - sigma^2 exactly
    else:
        root, bracket = smallest_positive_root(d, 1.0, root_tol=1e-10)
    m_hat = deconvolve_raw_moments(raw, root)

    interval_z = _lindsay_interval(z, root, m_hat, k)
    mv = MomentVector(m_hat[: 2 * k - 1], interval_z)
    try:
        proj = project(mv, tol=config.proj_tol)
        nu = gauss_quadrature(proj.projected, rank_tol=config.rank_tol, root_tol=config.root_tol, check_valid=False)
    except (ProjectionError, QuadratureError) as exc:
        raise EstimationError(f"quadrature at sigma={root * s:.6g} failed: {exc}") from exc

    fitted = nu.moments(2 * k).values
    resid = np.abs(fitted - m_hat) / (1.0 + np.abs(m_hat))
    if resid.max() > 1e-6:
        raise EstimationError(
            "moment equations have no solution with a k-atomic mixing distribution",
            {"sigma": root * s, "residual": float(resid.max()), "order_found": nu.k},
        )

    sigma_hat = root * s
    mixing = DiscreteDistribution(center + s * nu.atoms, nu.weights)
    diagnostics.update(
        {
            "projection_distance_std_units": proj.distance,
            "moment_residual": float(resid.max()),
            "k_used": k,
        }
    )
    return EstimationReport(
        model=GaussianMixture(mixing, sigma_hat**2),
        projection_distance=proj.distance,
        detected_order=mixing.k,
        sigma_root_bracket=(bracket[0] * s, bracket[1] * s),
        wallclock=time.perf_counter() - t0,
        diagnostics=diagnostics,
    )


def _lindsay_interval(z, root, m_hat, k):
    """Data range widened to contain every node of the rule fitted at the root.

    The realizing distribution may carry a tiny weight far outside the data
    range; the Jacobi-matrix Gershgorin bound covers it.
    """
    a, b = default_interval(z, root)
    try:
        R = jacobi_support_bound(np.concatenate(([1.0], m_hat)), k)
    except np.linalg.LinAlgError:
        return a, b
    R = R * (1 + 1e-6) + 1e-9
    return min(a, -R), max(b, R)


def lindsay_moments_at_root(samples, k):
    """Deconvolved moments ``(m_1(sigma_hat), ..., m_2k(sigma_hat))`` in standardized units.

    Returns ``(moments, sigma_hat_std_units, interval_std_units)``; useful for
    checking that the root picks a realizable moment vector.
    """
    x = _as_samples(samples)
    z = (x - x.mean()) / x.std()
    sums, _ = kernels.hermite_sums(z, 2 * k, 0.0)
    raw = sums / z.size
    if k == 1:
        root = 1.0
    else:
        root, _ = smallest_positive_root(lindsay_determinant(raw, k), 1.0, root_tol=1e-10)
    m_hat = deconvolve_raw_moments(raw, root)
    return m_hat, root, _lindsay_interval(z, root, m_hat, k)


@dataclass(frozen=True)
class ClusterInterval:
    center: float
    half_length: float
    members: np.ndarray

    @property
    def lo(self):
        return self.center - self.half_length

    @property
    def hi(self):
        return self.center + self.half_length


def merge_intervals(points, L):
    """Disjoint intervals covering the union of ``[p - L, p + L]``; returns (lo, hi) pairs."""
    p = np.sort(np.asarray(points, dtype=np.float64))
    out = []
    lo, hi = p[0] - L, p[0] + L
    for v in p[1:]:
        if v - L <= hi:
            hi = max(hi, v + L)
        else:
            out.append((lo, hi))
            lo, hi = v - L, v + L
    out.append((lo, hi))
    return out


@dataclass
class UnboundedResult:
    means: np.ndarray
    clusters: list
    reports: list
    notes: list


def estimate_unbounded(samples, config, L=None, tau=None, n_prime=None, min_weight=None, delta=0.05):
    """Support recovery when the means are not confined to a known interval.

    The first ``n_prime`` samples define merged intervals ``[X_i +- L]``; the
    remaining samples are assigned to intervals, recentred, and fitted per
    interval (known-variance DMM when ``config.sigma2`` is set, Lindsay
    otherwise). Atoms with weight at least ``tau`` are reported.

    Defaults: ``L = sqrt(6 log n)`` (times sigma when known),
    ``min_weight = 1/(2k)``, ``tau = min_weight/(2k)`` and
    ``n_prime = min(n/2, ceil(20 log(k/delta)/min_weight))``.
    """
    x = _as_samples(samples)
    n, k = x.size, config.k
    eps = 1.0 / (2 * k) if min_weight is None else float(min_weight)
    tau = eps / (2 * k) if tau is None else float(tau)
    if n_prime is None:
        n_prime = min(n // 2, math.ceil(20 * math.log(max(k / delta, 1.0 + 1e-12)) / eps))
    n_prime = int(n_prime)
    if n_prime < 1 or n < 2 * n_prime:
        raise InsufficientSamplesError(f"need n >= 2 n' (n={n}, n'={n_prime})")
    scale = math.sqrt(config.sigma2) if config.sigma2 else 1.0
    L = math.sqrt(6 * math.log(n)) * scale if L is None else float(L)

    rest = np.arange(n_prime, n)
    clusters, reports, notes, means = [], [], [], []
    for lo, hi in merge_intervals(x[:n_prime], L):
        c, ell = 0.5 * (lo + hi), 0.5 * (hi - lo)
        sel = rest[(x[rest] >= lo) & (x[rest] <= hi)]
        cl = ClusterInterval(c, ell, sel)
        clusters.append(cl)
        if sel.size == 0:
            notes.append(f"interval [{lo:.6g}, {hi:.6g}] received no samples; skipped")
            reports.append(None)
            continue
        sub = x[sel] - c
        try:
            if config.sigma2 is not None:
                rep = dmm_known_variance(sub, replace(config, interval=(-ell, ell)))
            else:
                rep = lindsay_unknown_variance(sub, replace(config, interval=None))
        except (EstimationError, InsufficientSamplesError) as exc:
            notes.append(f"interval [{lo:.6g}, {hi:.6g}] failed: {exc}")
            reports.append(None)
            continue
        reports.append(rep)
        keep = rep.model.weights >= tau
        means.extend((rep.model.means[keep] + c).tolist())
    dropped = (n - n_prime) - sum(cl.members.size for cl in clusters)
    if dropped:
        notes.append(f"{dropped} samples fell outside every interval")
    return UnboundedResult(np.sort(np.array(means)), clusters, reports, notes)


@dataclass
class DDimResult:
    weights: np.ndarray
    means: np.ndarray
    basis: np.ndarray
    tau: float
    rho: float
    reports: list


def estimate_d_dimensional(samples, cov, config, tau=None, rho=None, separation=None, delta=0.05, seed=None):
    """Mixture of ``N(mu_j, cov)`` in d dimensions via random 1-d projections.

    The means along ``r = b_1`` (a random orthonormal basis vector) and along
    ``r + tau b_i`` for every basis vector are estimated with the known-variance
    DMM; sorted finite differences recover the coordinates.

    Defaults: ``rho`` is ``max(|a|, |b|)`` of ``config.interval`` if given,
    otherwise the largest absolute projected sample;
    ``tau = eps/(2 rho)`` with ``eps = delta * separation / (k^2 sqrt(d))`` and
    ``separation`` defaulting to ``2 rho / k``.
    """
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n, dim = X.shape
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    if cov.shape != (dim, dim):
        raise ValueError("covariance shape does not match the data")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError("covariance must be positive definite") from None
    k = config.k
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    r = basis[:, 0]

    proj = X @ r
    if rho is None:
        rho = max(abs(t) for t in config.interval) if config.interval else float(np.abs(proj).max())
    rho = float(rho)
    if tau is None:
        sep = 2 * rho / k if separation is None else float(separation)
        tau = delta * sep / (k**2 * math.sqrt(dim)) / (2 * rho)
    tau = float(tau)

    base = dmm_known_variance(proj, replace(config, sigma2=float(r @ cov @ r), interval=(-rho, rho)))
    w, mu = base.model.weights, base.model.means
    reports = [base]
    means = np.zeros((mu.size, dim))
    for i in range(dim):
        rp = r + tau * basis[:, i]
        rep = dmm_known_variance(
            X @ rp, replace(config, sigma2=float(rp @ cov @ rp), interval=(-rho - tau, rho + tau))
        )
        reports.append(rep)
        mu_p = rep.model.means
        if mu_p.size != mu.size:
            raise EstimationError(
                f"direction {i} found {mu_p.size} components, base direction found {mu.size}",
                {"direction": i},
            )
        means += np.outer((mu_p - mu) / tau, basis[:, i])
    return DDimResult(w.copy(), means, basis, tau, rho, reports)


def density_estimate(report, x):
    """Density of the fitted mixture ``nu_hat * N(0, sigma2)`` at ``x``."""
    return density(report.model, x)


__all__ = [
    "EstimatorConfig",
    "EstimationReport",
    "ClusterInterval",
    "dmm_known_variance",
    "lindsay_unknown_variance",
    "smallest_positive_root",
    "estimate_unbounded",
    "estimate_d_dimensional",
    "density_estimate",
    "naive_moment_inversion",
    "merge_intervals",
    "detect_order",
    "affine_moments",
]
