"""Seeded benchmark grid: estimators x sample sizes x trials, written as CSV."""

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import EMConfig, em_fit
from .distributions import DiscreteDistribution, GaussianMixture, sample
from .estimators import (
    EstimatorConfig,
    dmm_known_variance,
    estimate_d_dimensional,
    estimate_unbounded,
    lindsay_unknown_variance,
)
from .metrics import hausdorff, matched_parameter_error, wasserstein1

ESTIMATORS = ("dmm", "lindsay", "em", "unbounded", "ddim")
COLUMNS = ["scenario", "estimator", "n", "trial", "w1", "mean_err", "sigma2_err", "wall_ms"]


@dataclass
class Scenario:
    id: str
    model: GaussianMixture
    n_grid: list
    trials: int = 20
    estimators: list = field(default_factory=lambda: ["dmm"])
    seed: int = 0
    k: int = None
    interval: tuple = None
    separation: dict = None  # (k0, gamma, omega) labels only
    batches: int = 1
    screen_tau: float = None
    L: float = None
    tau: float = None
    dim: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.n_grid:
            raise ValueError("n grid must be non-empty")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise ValueError(f"unknown estimators: {sorted(bad)}")
        if self.k is None:
            self.k = self.model.mixing.k

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["model"] = GaussianMixture.from_dict(d["model"])
        d["n_grid"] = [int(n) for n in d["n_grid"]]
        if d.get("interval") is not None:
            d["interval"] = tuple(d["interval"])
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown scenario fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def trial_seed(scenario_seed, estimator, n, trial):
    key = f"{scenario_seed}|{estimator}|{n}|{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def _embed(x1d, dim, sigma, rng):
    """Lift 1-d latent means onto the diagonal direction of R^dim with isotropic noise."""
    e = np.ones(dim) / math.sqrt(dim)
    return np.outer(x1d, e) + sigma * rng.standard_normal((x1d.size, dim)), e


def run_cell(scenario, estimator, n, trial):
    """One benchmark row as a dict; failures are captured in ``error``."""
    seed = trial_seed(scenario.seed, estimator, n, trial)
    rng = np.random.default_rng(seed)
    truth = scenario.model
    row = {"scenario": scenario.id, "estimator": estimator, "n": n, "trial": trial,
           "w1": math.nan, "mean_err": math.nan, "sigma2_err": math.nan, "wall_ms": math.nan, "error": ""}
    cfg = EstimatorConfig(k=scenario.k, interval=scenario.interval, sigma2=truth.sigma2,
                          batches=scenario.batches, screen_tau=scenario.screen_tau)
    t0 = time.perf_counter()
    try:
        if estimator == "ddim":
            latent = sample(GaussianMixture(truth.mixing, 0.0), n, rng)
            X, e = _embed(latent, scenario.dim, truth.sigma, rng)
            res = estimate_d_dimensional(X, truth.sigma2 * np.eye(scenario.dim), cfg, seed=rng)
            est = DiscreteDistribution(res.means @ e, res.weights)
            sig2 = None
        else:
            x = sample(truth, n, rng)
            if estimator == "dmm":
                rep, sig2 = dmm_known_variance(x, cfg), None
            elif estimator == "lindsay":
                rep = lindsay_unknown_variance(x, cfg)
                sig2 = rep.model.sigma2
            elif estimator == "em":
                rep = em_fit(x, EMConfig(k=scenario.k, seed=seed), sigma2=truth.sigma2)
                sig2 = None
            else:
                res = estimate_unbounded(x, cfg, L=scenario.L, tau=scenario.tau)
                rep, sig2 = None, None
            est = rep.model.mixing if rep is not None else None
        row["wall_ms"] = 1e3 * (time.perf_counter() - t0)
        if est is None:
            row["mean_err"] = hausdorff(res.means, truth.means) if res.means.size else math.inf
        else:
            row["w1"] = wasserstein1(est, truth.mixing)
            if est.k == truth.mixing.k:
                row["mean_err"] = matched_parameter_error(truth.mixing, est).mean_error
            else:
                row["mean_err"] = hausdorff(est.atoms, truth.means)
        if sig2 is not None:
            row["sigma2_err"] = abs(sig2 - truth.sigma2)
    except Exception as exc:  # recorded per row; the grid keeps going
        row["wall_ms"] = 1e3 * (time.perf_counter() - t0)
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_benchmark(scenario, jobs=1):
    cells = [(scenario, est, n, t) for est in scenario.estimators for n in scenario.n_grid
             for t in range(scenario.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell_args, cells))
    else:
        rows = [run_cell(*c) for c in cells]
    rows.sort(key=lambda r: (r["estimator"], r["n"], r["trial"]))
    return rows


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".17g")
    return str(v)


def rows_to_csv(rows, fh):
    """Write rows; an ``error`` column is appended only when some row failed."""
    cols = COLUMNS + (["error"] if any(r.get("error") for r in rows) else [])
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])


def benchmark_csv(scenario, jobs=1):
    buf = io.StringIO()
    rows_to_csv(run_benchmark(scenario, jobs), buf)
    return buf.getvalue()
