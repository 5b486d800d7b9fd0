import numpy as np
import pytest

from dmm import DiscreteDistribution, GaussianMixture

FIVE = GaussianMixture.from_params(
    [0.123, 0.552, 0.010, 0.080, 0.235], [-0.236, -0.168, -0.987, 0.299, 0.150], 1.0
)


def random_discrete(rng, k, lo=-1.0, hi=1.0, min_gap=0.0, min_weight=0.0):
    """Rejection-sample a k-atomic distribution with separated atoms and floored weights."""
    while True:
        atoms = np.sort(rng.uniform(lo, hi, k))
        if k > 1 and np.diff(atoms).min() < min_gap:
            continue
        w = rng.dirichlet(np.ones(k))
        if w.min() < min_weight:
            continue
        return DiscreteDistribution(atoms, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def five():
    return FIVE


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(results):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
