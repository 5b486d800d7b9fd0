import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from dmm import (
    DiscreteDistribution,
    EstimatorConfig,
    GaussianMixture,
    density_estimate,
    dmm_known_variance,
    estimate_d_dimensional,
    estimate_unbounded,
    is_valid,
    lindsay_unknown_variance,
    sample,
    wasserstein1,
)
from dmm.distributions import MomentVector
from dmm.estimators import (
    EstimationReport,
    default_interval,
    lindsay_determinant,
    lindsay_moments_at_root,
    merge_intervals,
    naive_moment_inversion,
    smallest_positive_root,
)
from dmm.exceptions import EstimationError, InsufficientSamplesError

S7 = math.sqrt(7)


def test_config_validation():
    for bad in ({"k": 0}, {"k": 2, "sigma2": -1}, {"k": 2, "batches": 0}, {"k": 2, "interval": (1, 0)}):
        with pytest.raises(ValueError):
            EstimatorConfig(**bad)
    assert EstimatorConfig(k=2, high_prob_delta=0.05).n_batches() == math.ceil(math.log(80))


def test_dmm_noiseless_recovery():
    truth = DiscreteDistribution([-0.5, 0.7], [0.4, 0.6])
    x = sample(GaussianMixture(truth, 0.0), 1_000_000, seed=1)
    rep = dmm_known_variance(x, EstimatorConfig(k=2, sigma2=0.0, interval=(-1, 1)))
    assert wasserstein1(rep.model.mixing, truth) <= 0.01


def test_dmm_needs_sigma():
    with pytest.raises(ValueError):
        dmm_known_variance(np.zeros(5), EstimatorConfig(k=1))


def test_dmm_standard_normal_two_atoms_near_zero():
    x = np.random.default_rng(2).standard_normal(10_000)
    rep = dmm_known_variance(x, EstimatorConfig(k=2, sigma2=1.0))
    assert wasserstein1(rep.model.mixing, DiscreteDistribution.point_mass(0.0)) <= 0.1
    assert rep.model.sigma2 == 1.0
    assert isinstance(rep.to_dict()["diagnostics"], dict)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=40),
    st.integers(1, 4),
    st.floats(0.0, 4.0),
)
def test_dmm_always_returns_a_model(xs, k, sigma2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = dmm_known_variance(np.array(xs), EstimatorConfig(k=k, sigma2=sigma2))
    assert 1 <= rep.model.mixing.k <= k
    a, b = rep.diagnostics["interval"]
    assert np.all(rep.model.means >= a) and np.all(rep.model.means <= b)


def test_dmm_shift_equivariance():
    x = sample(GaussianMixture.from_params([0.3, 0.7], [-1, 1], 1.0), 5000, seed=3)
    cfg = EstimatorConfig(k=2, sigma2=1.0, interval=(-3, 3))
    base = dmm_known_variance(x, cfg)
    c = 4.25
    moved = dmm_known_variance(x + c, EstimatorConfig(k=2, sigma2=1.0, interval=(-3 + c, 3 + c)))
    assert np.allclose(moved.model.means, base.model.means + c, atol=1e-6)
    assert np.allclose(moved.model.weights, base.model.weights, atol=1e-6)


def test_dmm_scale_equivariance():
    x = sample(GaussianMixture.from_params([0.5, 0.5], [-1, 1], 0.5), 5000, seed=4)
    base = dmm_known_variance(x, EstimatorConfig(k=2, sigma2=0.5, interval=(-3, 3)))
    lam = 2.5
    scaled = dmm_known_variance(lam * x, EstimatorConfig(k=2, sigma2=0.5 * lam**2, interval=(-3 * lam, 3 * lam)))
    assert np.allclose(scaled.model.means, lam * base.model.means, atol=1e-6)


def test_dmm_batches_run():
    x = sample(GaussianMixture.from_params([0.5, 0.5], [-1, 1], 1.0), 9000, seed=5)
    rep = dmm_known_variance(x, EstimatorConfig(k=2, sigma2=1.0, batches=9))
    assert rep.diagnostics["batches"] == 9


def test_large_k_advisory():
    x = np.random.default_rng(6).standard_normal(100)
    with pytest.warns(UserWarning, match="large"):
        dmm_known_variance(x, EstimatorConfig(k=7, sigma2=1.0))


def test_naive_inversion_negative_variance_fails():
    # deconvolved second moment 0.01 - 1 < m_1^2
    with pytest.raises(EstimationError):
        naive_moment_inversion(np.array([-0.1, 0.1]), 2, 1.0)
    x = sample(GaussianMixture.from_params([0.5, 0.5], [-2, 2], 1.0), 20_000, seed=14)
    nu = naive_moment_inversion(x, 2, 1.0)
    assert np.allclose(nu.means, [-2, 2], atol=0.2)


def test_smallest_root_examples():
    assert smallest_positive_root(lambda s: 1 - s * s, 2.0)[0] == pytest.approx(1.0, abs=1e-9)
    root, (lo, hi) = smallest_positive_root(lambda s: (s * s - 0.25) * (s * s - 1), 2.0)
    assert root == pytest.approx(0.5, abs=1e-9) and lo <= 0.5 <= hi


def test_smallest_root_errors():
    with pytest.raises(EstimationError):
        smallest_positive_root(lambda s: 1 + s, 2.0)
    with pytest.raises(EstimationError):
        smallest_positive_root(lambda s: -1.0, 2.0)
    with pytest.raises(ValueError):
        smallest_positive_root(lambda s: 1.0, 0.0)


def test_population_lindsay_root_standard_normal():
    x = np.random.default_rng(7).standard_normal(1_000_000)
    raw = np.array([np.mean(x**r) for r in range(5)])
    root, _ = smallest_positive_root(lindsay_determinant(raw, 2), 2.0)
    assert abs(root - 1.0) <= 0.05


def test_lindsay_one_component_is_sample_statistics():
    x = np.random.default_rng(8).normal(0.3, 1.7, 500)
    rep = lindsay_unknown_variance(x, EstimatorConfig(k=1))
    assert rep.model.sigma2 == pytest.approx(x.var(), rel=1e-12)
    assert rep.model.means[0] == pytest.approx(x.mean(), abs=1e-12)


def test_lindsay_counterexample_raises():
    with pytest.raises(EstimationError):
        lindsay_unknown_variance(np.array([-S7, S7, 0, 0, 0, 0, 0]), EstimatorConfig(k=2))


def test_lindsay_sample_errors():
    with pytest.raises(InsufficientSamplesError):
        lindsay_unknown_variance(np.zeros(2), EstimatorConfig(k=2))
    with pytest.raises(EstimationError):
        lindsay_unknown_variance(np.ones(10), EstimatorConfig(k=2))


def test_lindsay_scale_and_shift_equivariance():
    x = sample(GaussianMixture.from_params([0.5, 0.5], [-0.5, 0.5], 0.25), 5000, seed=9)
    base = lindsay_unknown_variance(x, EstimatorConfig(k=2))
    lam, c = 3.0, -2.0
    moved = lindsay_unknown_variance(lam * x + c, EstimatorConfig(k=2))
    assert moved.model.sigma2 == pytest.approx(lam**2 * base.model.sigma2, rel=1e-8)
    assert np.allclose(moved.model.means, lam * base.model.means + c, atol=1e-7)


def test_lindsay_root_moments_realizable():
    for seed in range(20):
        x = np.random.default_rng(seed).normal(size=200) + (seed % 3)
        m, root, interval = lindsay_moments_at_root(x, 2)
        assert is_valid(MomentVector(m, interval), tol=1e-8)[0]


def test_lindsay_screening_reduces_order():
    from conftest import FIVE

    x = sample(FIVE, 5000, seed=10)
    rep = lindsay_unknown_variance(x, EstimatorConfig(k=5, screen_tau=0.5))
    assert rep.diagnostics["screened_k"] < 5


def test_merge_intervals_example():
    assert merge_intervals([10.0, 0.0, 1.5], 1.0) == [(-1.0, 2.5), (9.0, 11.0)]


def test_unbounded_single_cluster_matches_base():
    x = sample(GaussianMixture.from_params([0.5, 0.5], [-0.5, 0.5], 1.0), 4000, seed=11)
    res = estimate_unbounded(x, EstimatorConfig(k=2, sigma2=1.0), L=100.0, tau=0.0, n_prime=10)
    assert len(res.clusters) == 1
    cl = res.clusters[0]
    direct = dmm_known_variance(
        x[10:] - cl.center, EstimatorConfig(k=2, sigma2=1.0, interval=(-cl.half_length, cl.half_length))
    )
    assert np.allclose(res.means, direct.model.means + cl.center)


def test_unbounded_needs_samples():
    with pytest.raises(InsufficientSamplesError):
        estimate_unbounded(np.zeros(4), EstimatorConfig(k=2, sigma2=1.0), n_prime=3)


def test_ddim_one_dimension_matches_dmm():
    x = sample(GaussianMixture.from_params([0.4, 0.6], [-1, 1], 1.0), 4000, seed=12)
    cfg = EstimatorConfig(k=2, interval=(-3, 3))
    res = estimate_d_dimensional(x[:, None], np.eye(1), cfg, seed=0)
    direct = dmm_known_variance(x * res.basis[0, 0], EstimatorConfig(k=2, sigma2=1.0, interval=(-3, 3)))
    assert np.allclose(np.sort(res.means[:, 0]), np.sort(direct.model.means * res.basis[0, 0]), atol=1e-4)
    assert np.array_equal(res.weights, res.reports[0].model.weights)


def test_ddim_input_checks():
    with pytest.raises(ValueError):
        estimate_d_dimensional(np.zeros((10, 2)), np.eye(3), EstimatorConfig(k=1))
    with pytest.raises(ValueError):
        estimate_d_dimensional(np.zeros((10, 2)), -np.eye(2), EstimatorConfig(k=1))


def test_density_estimate_point_mass():
    rep = EstimationReport(GaussianMixture(DiscreteDistribution.point_mass(0.0), 1.0))
    assert density_estimate(rep, 0.0) == pytest.approx(0.398942, abs=1e-6)


def test_density_estimate_normalized():
    x = sample(GaussianMixture.from_params([0.5, 0.5], [-1, 1], 1.0), 5000, seed=13)
    rep = dmm_known_variance(x, EstimatorConfig(k=2, sigma2=1.0))
    lo, hi = rep.model.means.min() - 10, rep.model.means.max() + 10
    total, _ = quad(lambda t: float(density_estimate(rep, t)), lo, hi, limit=200)
    assert abs(total - 1) <= 1e-6


def test_default_interval_widens_degenerate():
    a, b = default_interval(np.zeros(3), 0.0)
    assert a < 0 < b
