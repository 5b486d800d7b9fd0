"""EM for Gaussian location mixtures with a common variance."""

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .distributions import DiscreteDistribution, GaussianMixture, log_density
from .estimators import EstimationReport
from .exceptions import InsufficientSamplesError


@dataclass(frozen=True)
class EMConfig:
    k: int
    max_iterations: int = 5000
    loglik_tolerance: float = 1e-3
    restarts: int = 5
    seed: int = None

    def __post_init__(self):
        if self.k < 1 or self.max_iterations < 1 or self.restarts < 1:
            raise ValueError("k, max_iterations and restarts must be positive")
        if self.loglik_tolerance <= 0:
            raise ValueError("loglik_tolerance must be positive")


def loglik(samples, model):
    """Log-likelihood of ``samples`` under ``model`` (log-sum-exp stabilized)."""
    return float(np.sum(log_density(model, np.asarray(samples, dtype=np.float64))))


class _Degenerate(Exception):
    pass


def _run(x, k, w, mu, var, fixed_var, cfg):
    n = x.size
    history = []
    prev = -np.inf
    for _ in range(cfg.max_iterations):
        ll, nk, sx, sxx = kernels.em_sweep(x, w, mu, var)
        history.append(ll)
        if not np.isfinite(ll) or np.any(nk <= 1e-12 * n):
            raise _Degenerate
        # stop on absolute log-likelihood increase below tolerance
        if ll - prev < cfg.loglik_tolerance:
            break
        prev = ll
        w = nk / n
        mu = sx / nk
        if not fixed_var:
            var = float(np.sum(sxx - 2 * mu * sx + mu * mu * nk) / n)
            if not var > 0:
                raise _Degenerate
    return w, mu, var, history


def em_fit(samples, config, sigma2=None):
    """Best-of-restarts EM.

    Each restart draws means uniformly on the sample range and weights from a
    flat Dirichlet; the variance starts at the sample variance unless fixed.
    The run with the highest final log-likelihood is kept (ties go to the
    lowest restart index). Runs whose responsibilities collapse are redrawn.
    """
    t0 = time.perf_counter()
    x = np.asarray(samples, dtype=np.float64).ravel()
    k = config.k
    if x.size < k:
        raise InsufficientSamplesError(f"need at least k={k} samples")
    fixed = sigma2 is not None
    lo, hi = float(x.min()), float(x.max())
    var0 = float(sigma2) if fixed else float(x.var())
    if var0 <= 0:
        var0 = 1e-12

    seeds = np.random.SeedSequence(config.seed)
    best = None
    histories = []
    redraws = 0
    done = 0
    while done < config.restarts:
        rng = np.random.default_rng(seeds.spawn(1)[0])
        mu = np.sort(rng.uniform(lo, hi, k))
        w = rng.dirichlet(np.ones(k))
        try:
            w, mu, var, hist = _run(x, k, w, mu, var0, fixed, config)
        except _Degenerate:
            redraws += 1
            if redraws > 50 * config.restarts:
                raise RuntimeError("EM keeps degenerating; data may have too few distinct values")
            continue
        histories.append(hist)
        if best is None or hist[-1] > best[0]:
            best = (hist[-1], w, mu, var, done)
        done += 1

    ll, w, mu, var, idx = best
    model = GaussianMixture(DiscreteDistribution(mu, w / w.sum()), float(var))
    return EstimationReport(
        model=model,
        projection_distance=0.0,
        detected_order=model.mixing.k,
        wallclock=time.perf_counter() - t0,
        diagnostics={
            "estimator": "em",
            "loglik": ll,
            "selected_restart": idx,
            "iterations": [len(h) for h in histories],
            "redraws": redraws,
            "loglik_histories": histories,
            "n": int(x.size),
        },
    )
