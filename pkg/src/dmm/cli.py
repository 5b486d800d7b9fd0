"""Command-line front end: ``dmm simulate | estimate | benchmark``."""

import argparse
import json
import sys

import numpy as np

from .baselines import EMConfig, em_fit
from .benchmark import Scenario, benchmark_csv
from .distributions import GaussianMixture, sample
from .estimators import (
    EstimatorConfig,
    dmm_known_variance,
    estimate_d_dimensional,
    estimate_unbounded,
    lindsay_unknown_variance,
)
from .exceptions import DMMError


def format_sample(v):
    """Shortest round-trip decimal; integral values lose their trailing ``.0``."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


class UsageError(Exception):
    pass


def _read_json(path, what):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {what} JSON in {path}: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None


def cmd_simulate(args):
    try:
        model = GaussianMixture.from_dict(_read_json(args.model, "model"))
    except ValueError as exc:
        raise UsageError(f"invalid model: {exc}") from None
    x = sample(model, args.n, args.seed)
    text = "".join(format_sample(v) + "\n" for v in x)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def _load_samples(path):
    try:
        data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except OSError:
        raise UsageError(f"cannot read sample file {path}") from None
    except ValueError as exc:
        raise UsageError(f"malformed sample file {path}: {exc}") from None
    return data[:, 0] if data.shape[1] == 1 else data


def cmd_estimate(args):
    x = _load_samples(args.samples)
    interval = tuple(args.interval) if args.interval else None
    try:
        if args.estimator == "em":
            rep = em_fit(x, EMConfig(k=args.k, seed=args.seed), sigma2=args.sigma2)
            out = rep.to_dict()
            out["diagnostics"].pop("loglik_histories", None)
        elif args.estimator == "dmm":
            if args.sigma2 is None:
                raise UsageError("--estimator dmm needs --sigma2")
            cfg = EstimatorConfig(k=args.k, sigma2=args.sigma2, interval=interval, batches=args.batches)
            out = dmm_known_variance(x, cfg).to_dict()
        elif args.estimator == "lindsay":
            cfg = EstimatorConfig(k=args.k, interval=interval, batches=args.batches, screen_tau=args.tau)
            out = lindsay_unknown_variance(x, cfg).to_dict()
        elif args.estimator == "unbounded":
            cfg = EstimatorConfig(k=args.k, sigma2=args.sigma2, batches=args.batches)
            res = estimate_unbounded(x, cfg, L=args.L, tau=args.tau)
            out = {
                "means": res.means.tolist(),
                "intervals": [[c.lo, c.hi] for c in res.clusters],
                "reports": [None if r is None else r.to_dict() for r in res.reports],
                "notes": res.notes,
            }
        else:
            if args.sigma2 is None:
                raise UsageError("--estimator ddim needs --sigma2 (covariance sigma2 * I)")
            X = np.atleast_2d(x.T).T if x.ndim == 1 else x
            cfg = EstimatorConfig(k=args.k, interval=interval, batches=args.batches)
            res = estimate_d_dimensional(X, args.sigma2 * np.eye(X.shape[1]), cfg, seed=args.seed)
            out = {"weights": res.weights.tolist(), "means": res.means.tolist(), "tau": res.tau, "rho": res.rho}
    except DMMError as exc:
        err = {"error": str(exc), "type": type(exc).__name__}
        details = getattr(exc, "details", None)
        if details:
            err["details"] = details
        print(json.dumps(err))
        return 1
    print(json.dumps(out, indent=2))
    return 0


def cmd_benchmark(args):
    data = _read_json(args.scenario, "scenario")
    try:
        scenario = Scenario.from_dict(data)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid scenario: {exc}") from None
    text = benchmark_csv(scenario, jobs=args.jobs)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="dmm", description="Denoised method of moments for Gaussian mixtures")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="draw samples from a model JSON")
    s.add_argument("model", help='JSON file {"weights": [...], "means": [...], "sigma2": s}')
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="fit a mixture to a sample file")
    e.add_argument("samples", help="newline-delimited decimals (whitespace-separated columns for ddim)")
    e.add_argument("--estimator", choices=["dmm", "lindsay", "em", "unbounded", "ddim"], default="dmm")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--sigma2", type=float, default=None)
    e.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), default=None)
    e.add_argument("--batches", type=int, default=1)
    e.add_argument("--tau", type=float, default=None,
                   help="moment screening threshold (lindsay) or weight threshold (unbounded)")
    e.add_argument("--L", type=float, default=None, help="cluster radius (unbounded)")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_estimate)

    b = sub.add_parser("benchmark", help="run a scenario grid and write CSV")
    b.add_argument("scenario")
    b.add_argument("--out", default=None)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dmm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
