"""Discrete mixing distributions, Gaussian location mixtures and moment vectors."""

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateDensityError

MERGE_TOL = 1e-10
_WEIGHT_SUM_TOL = 1e-8


class DiscreteDistribution:
    """A finitely supported distribution ``sum_i w_i delta_{x_i}``.

    Construction canonicalizes the input: atoms are sorted, atoms closer than
    ``MERGE_TOL`` are merged (weights added), zero-weight atoms are dropped and
    the weights are renormalized to sum to one.
    """

    __slots__ = ("atoms", "weights")

    def __init__(self, atoms, weights):
        atoms = np.atleast_1d(np.asarray(atoms, dtype=np.float64))
        weights = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        if atoms.shape != weights.shape or atoms.ndim != 1 or atoms.size == 0:
            raise ValueError("atoms and weights must be non-empty 1-d arrays of equal length")
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(weights))):
            raise ValueError("atoms and weights must be finite")
        if np.any(weights < 0):
            raise ValueError("weights must be non-negative")
        total = weights.sum()
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")

        order = np.argsort(atoms, kind="stable")
        atoms, weights = atoms[order], weights[order]
        keep = weights > 0
        atoms, weights = atoms[keep], weights[keep]
        if atoms.size == 0:
            raise ValueError("all weights are zero")

        merged_x, merged_w = [atoms[0]], [weights[0]]
        for x, w in zip(atoms[1:], weights[1:]):
            if x - merged_x[-1] < MERGE_TOL:
                # weight-averaged location keeps the first moment intact
                tot = merged_w[-1] + w
                merged_x[-1] = (merged_x[-1] * merged_w[-1] + x * w) / tot
                merged_w[-1] = tot
            else:
                merged_x.append(x)
                merged_w.append(w)
        w = np.array(merged_w)
        self.atoms = np.array(merged_x)
        self.weights = w / w.sum()

    @classmethod
    def point_mass(cls, c):
        return cls([c], [1.0])

    @property
    def k(self):
        return self.atoms.size

    def moments(self, order):
        return exact_moments(self, order)

    def mean(self):
        return float(self.weights @ self.atoms)

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.atoms, t, side="right")
        cw = np.concatenate(([0.0], np.cumsum(self.weights)))
        return cw[idx]

    def shift(self, c):
        return DiscreteDistribution(self.atoms + c, self.weights)

    def scale(self, lam):
        return DiscreteDistribution(self.atoms * lam, self.weights)

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return np.array_equal(self.atoms, other.atoms) and np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"DiscreteDistribution(atoms={self.atoms.tolist()}, weights={self.weights.tolist()})"


@dataclass(frozen=True)
class GaussianMixture:
    """The location mixture ``mixing * N(0, sigma2)``."""

    mixing: DiscreteDistribution
    sigma2: float

    def __post_init__(self):
        if not np.isfinite(self.sigma2) or self.sigma2 < 0:
            raise ValueError("sigma2 must be a finite non-negative number")

    @classmethod
    def from_params(cls, weights, means, sigma2):
        return cls(DiscreteDistribution(means, weights), float(sigma2))

    @property
    def weights(self):
        return self.mixing.weights

    @property
    def means(self):
        return self.mixing.atoms

    @property
    def sigma(self):
        return float(np.sqrt(self.sigma2))

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "sigma2": float(self.sigma2),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls.from_params(data["weights"], data["means"], data["sigma2"])
        except KeyError as exc:
            raise ValueError(f"model JSON is missing field {exc.args[0]!r}") from None

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MomentVector:
    """Raw moments ``(m_1, ..., m_L)`` tagged with a support interval ``[a, b]``."""

    values: np.ndarray
    interval: tuple = field(default=(-1.0, 1.0))

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=np.float64))
        if v.ndim != 1 or v.size == 0:
            raise ValueError("a moment vector needs at least one moment")
        a, b = (float(t) for t in self.interval)
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ValueError(f"invalid interval {self.interval!r}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "interval", (a, b))

    def __len__(self):
        return self.values.size

    def with_zeroth(self):
        """Moments ``(1, m_1, ..., m_L)``."""
        return np.concatenate(([1.0], self.values))

    def truncate(self, order):
        return MomentVector(self.values[:order], self.interval)


def exact_moments(dist, order, interval=None):
    """Raw moments ``m_r = sum_i w_i x_i**r`` for ``r = 1..order``."""
    if order < 1:
        raise ValueError("order must be at least 1")
    powers = dist.atoms[None, :] ** np.arange(1, order + 1)[:, None]
    vals = powers @ dist.weights
    if interval is None:
        lo, hi = float(dist.atoms[0]), float(dist.atoms[-1])
        if hi - lo < 1e-12:
            lo, hi = lo - 1.0, hi + 1.0
        interval = (lo, hi)
    return MomentVector(vals, interval)


def sample(model, n, seed=None):
    """Draw ``n`` observations from ``model``.

    ``seed`` may be an int, ``None`` or a ``numpy.random.Generator`` (whose state
    is advanced).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    cw = np.cumsum(model.weights)
    u = rng.random(n)
    comp = np.minimum(np.searchsorted(cw, u * cw[-1], side="right"), cw.size - 1)
    x = model.means[comp]
    if model.sigma2 > 0:
        x = x + model.sigma * rng.standard_normal(n)
    return x


def density(model, x):
    """Mixture density ``sum_i w_i phi((x - mu_i)/sigma)/sigma``."""
    if model.sigma2 <= 0:
        raise DegenerateDensityError("density is undefined for sigma2 = 0")
    x = np.asarray(x, dtype=np.float64)
    s = model.sigma
    z = (x[..., None] - model.means) / s
    vals = np.exp(-0.5 * z * z) @ model.weights / (s * np.sqrt(2 * np.pi))
    return vals if vals.ndim else float(vals)


def log_density(model, x):
    """Log of :func:`density`, stable far in the tails."""
    if model.sigma2 <= 0:
        raise DegenerateDensityError("density is undefined for sigma2 = 0")
    x = np.asarray(x, dtype=np.float64)
    s = model.sigma
    z = (x[..., None] - model.means) / s
    with np.errstate(divide="ignore"):
        logp = np.log(model.weights) - 0.5 * z * z
    top = logp.max(axis=-1)
    out = top + np.log(np.exp(logp - top[..., None]).sum(axis=-1)) - np.log(s) - 0.5 * np.log(2 * np.pi)
    return out if out.ndim else float(out)
