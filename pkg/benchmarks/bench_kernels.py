"""Time the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--sizes 1000 10000 100000] [--repeat 20]

Also times one full DMM fit per backend in a subprocess, since the backend is
chosen at import time from DMM_DISABLE_NUMBA.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dmm import kernels

FIT = (
    "import time, numpy as np; from dmm import *; "
    "x = sample(GaussianMixture.from_params([.5,.5],[-1,1],1.), {n}, 0); cfg = EstimatorConfig(k=4, sigma2=1.); "
    "dmm_known_variance(x, cfg); t = time.perf_counter(); [dmm_known_variance(x, cfg) for _ in range(5)]; "
    "print((time.perf_counter() - t) / 5)"
)


def best(fn, repeat):
    fn()  # warm-up (jit compile)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def end_to_end(n, disable):
    env = dict(os.environ, DMM_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", FIT.format(n=n)], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--order", type=int, default=10)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        sys.exit("numba is unavailable or disabled; nothing to compare")

    rng = np.random.default_rng(0)
    w, mu = np.array([0.2, 0.3, 0.5]), np.array([-1.0, 0.0, 1.5])
    print(f"{'kernel':<14}{'n':>10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in args.sizes:
        x = rng.normal(size=n)
        for name, a, b in (
            ("hermite_sums", lambda: kernels.hermite_sums_numpy(x, args.order, 1.0),
             lambda: kernels.hermite_sums_numba(x, args.order, 1.0)),
            ("em_sweep", lambda: kernels.em_sweep_numpy(x, w, mu, 1.0), lambda: kernels.em_sweep_numba(x, w, mu, 1.0)),
        ):
            ta, tb = best(a, args.repeat), best(b, args.repeat)
            print(f"{name:<14}{n:>10}{ta * 1e3:>12.3f}{tb * 1e3:>12.3f}{ta / tb:>10.2f}")
    print()
    print(f"{'dmm fit k=4':<14}{'n':>10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in args.sizes:
        ta, tb = end_to_end(n, True), end_to_end(n, False)
        print(f"{'':<14}{n:>10}{ta * 1e3:>12.3f}{tb * 1e3:>12.3f}{ta / tb:>10.2f}")


if __name__ == "__main__":
    main()
