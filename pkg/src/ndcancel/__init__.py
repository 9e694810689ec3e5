"""Timing correlations of dispersed energy-time entangled photons and classical pulses."""

from .analysis import (
    ComparisonReport,
    FitError,
    GaussianTimingDistribution,
    Grid2D,
    compare,
    covariance_from_coefficients,
    evaluate_grid,
    fit_gaussian,
)
from .classical import classical_coefficients, classical_density, classical_density_numeric
from .forms import QuadraticCoefficients
from .gaussmath import (
    ComplexQuadraticForm,
    ConvergenceError,
    DomainError,
    QuadratureSpec,
    integrate_quadratic_form,
    tensor_quadrature,
)
from .params import ArmConfig, PostSelection, SourceConfig, arms_from
from .quantum import (
    exact_density_grid,
    exact_density_numeric,
    nphoton_density,
    postselected_density,
    postselected_mean,
    postselected_variance,
    quantum_coefficients,
    quantum_coefficients_full,
    quantum_density,
    quantum_density_full,
)

__version__ = "0.1.0"
