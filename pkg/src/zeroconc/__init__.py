"""Zero counting and concentration for stationary Gaussian processes."""

from .kernels import BACKEND
from .spectral import (
    AssumptionAReport,
    DivergenceError,
    QuadratureError,
    SpectralModel,
    covariance,
    covariance_kappa,
    exp_moment,
    kac_rice_alpha,
    omega_star,
    r1_prime,
    r2_second,
    r_ell,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AssumptionAReport",
    "DivergenceError",
    "QuadratureError",
    "SpectralModel",
    "covariance",
    "covariance_kappa",
    "exp_moment",
    "kac_rice_alpha",
    "omega_star",
    "r1_prime",
    "r2_second",
    "r_ell",
]
