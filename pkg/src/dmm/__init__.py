"""Denoised method of moments for Gaussian location mixtures."""

from .baselines import EMConfig, em_fit, loglik
from .distributions import DiscreteDistribution, GaussianMixture, MomentVector, density, exact_moments, sample
from .estimators import (
    EstimationReport,
    EstimatorConfig,
    density_estimate,
    dmm_known_variance,
    estimate_d_dimensional,
    estimate_unbounded,
    lindsay_unknown_variance,
)
from .hermite import estimate_mixing_moments, gamma_r, hermite, median_of_batches, screen_order
from .kernels import BACKEND
from .metrics import hausdorff, matched_parameter_error, moment_distance, total_variation, wasserstein1
from .moment_space import detect_order, hankel, is_valid, project
from .quadrature import gauss_quadrature, quadrature_of_gaussian

__version__ = "0.1.0"
