"""Weighted mean-value properties of harmonic and panharmonic functions.

Quadrature verification of the log-weighted ball mean, the Bessel coefficient
``a(t) = 2 (I0(t) - 1) / t**2``, and Monte Carlo Dirichlet solvers built on the
same identities.
"""

from .errors import (
    ConfigurationError,
    DomainError,
    EvaluationError,
    LogMVPError,
    MisuseError,
)
from .specfun import ball_volume, bessel_i0, sphere_area, weight_coeff_a
from .quadrature import (
    BallSpec,
    QuadratureRule,
    default_rule,
    integrate_ball,
    make_rule,
    radial_log_moment,
    sphere_mean,
    sphere_quadrature,
)
from .fields import (
    ScalarField,
    counterexample_field,
    laplacian_residual,
    make_general,
    make_harmonic,
    make_panharmonic,
)

__version__ = "0.1.0"

__all__ = [
    "BallSpec",
    "ConfigurationError",
    "DomainError",
    "EvaluationError",
    "LogMVPError",
    "MisuseError",
    "QuadratureRule",
    "ScalarField",
    "ball_volume",
    "bessel_i0",
    "counterexample_field",
    "default_rule",
    "integrate_ball",
    "laplacian_residual",
    "make_general",
    "make_harmonic",
    "make_panharmonic",
    "make_rule",
    "radial_log_moment",
    "sphere_area",
    "sphere_mean",
    "sphere_quadrature",
    "weight_coeff_a",
]
