"""Sampled densities, Gaussian width extraction and quantum/classical comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classical import classical_coefficients
from .forms import QuadraticCoefficients
from .params import SourceConfig, check_normalization
from .quantum import quantum_coefficients

LEAKAGE_TOL = 1e-6  # boundary value relative to peak
MIN_POINTS_PER_SIGMA = 2.0
RATIO_TOL = 1e-12  # ratios within rounding of 1 do not count as a reduction


class FitError(ValueError):
    """Raised when a grid cannot support a moment fit."""


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Density sampled on a rectangular ``t x tau`` grid, ``values[i, j] = P(t_i, tau_j)``."""

    t_axis: np.ndarray
    tau_axis: np.ndarray
    values: np.ndarray
    normalization: str = "none"

    def __post_init__(self):
        t = np.array(self.t_axis, dtype=float).reshape(-1)
        tau = np.array(self.tau_axis, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float)
        check_normalization(self.normalization)
        if values.shape != (t.size, tau.size):
            raise ValueError(f"values have shape {values.shape}, axes give {(t.size, tau.size)}")
        for name, axis in (("t_axis", t), ("tau_axis", tau)):
            if np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("grid values must be finite and non-negative")
        if self.normalization == "peak" and abs(values.max() - 1.0) > 1e-12:
            raise ValueError("peak-normalized grid must have maximum 1")
        for arr in (t, tau, values):
            arr.setflags(write=False)
        object.__setattr__(self, "t_axis", t)
        object.__setattr__(self, "tau_axis", tau)
        object.__setattr__(self, "values", values)

    def __eq__(self, other):
        if not isinstance(other, Grid2D):
            return NotImplemented
        return (
            self.normalization == other.normalization
            and np.array_equal(self.t_axis, other.t_axis)
            and np.array_equal(self.tau_axis, other.tau_axis)
            and np.array_equal(self.values, other.values)
        )

    def mass(self) -> float:
        return trapezoid_2d(self.values, self.t_axis, self.tau_axis)


@dataclass(frozen=True, eq=False)
class GaussianTimingDistribution:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {mean.size}")
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=0):
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        if np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.covariance).copy()

    def fwhm(self) -> np.ndarray:
        return np.sqrt(8 * np.log(2) * self.variances)


@dataclass(frozen=True)
class ComparisonReport:
    quantum: GaussianTimingDistribution
    classical: GaussianTimingDistribution
    variance_ratios: tuple
    cancellation_flag: bool


def trapezoid_2d(values, t_axis, tau_axis) -> float:
    if len(t_axis) < 2 or len(tau_axis) < 2:
        raise ValueError("trapezoid integration needs at least 2 points per axis")
    return float(np.trapezoid(np.trapezoid(values, tau_axis, axis=1), t_axis))


def grid_from_axes(density: Callable, t_axis, tau_axis, normalization="none") -> Grid2D:
    """Sample ``density(t, tau)`` (called once with broadcast 2-D arrays) on given axes."""
    check_normalization(normalization)
    t_axis = np.asarray(t_axis, dtype=float).reshape(-1)
    tau_axis = np.asarray(tau_axis, dtype=float).reshape(-1)
    T, TAU = np.meshgrid(t_axis, tau_axis, indexing="ij")
    values = np.broadcast_to(np.asarray(density(T, TAU), dtype=float), T.shape)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        i, j = bad[0]
        raise ValueError(f"non-finite density {values[i, j]} at (t, tau) = ({t_axis[i]}, {tau_axis[j]})")
    if normalization == "peak":
        values = values / values.max()
    elif normalization == "integral":
        values = values / trapezoid_2d(values, t_axis, tau_axis)
    return Grid2D(t_axis, tau_axis, values, normalization)


def evaluate_grid(density: Callable, t_range, tau_range, normalization="none") -> Grid2D:
    """Uniform ``(lo, hi, count)`` sampling followed by the requested normalization."""
    axes = []
    for name, (lo, hi, count) in (("t_range", t_range), ("tau_range", tau_range)):
        if int(count) < 2 or not lo < hi:
            raise ValueError(f"{name} needs lo < hi and count >= 2, got {(lo, hi, count)}")
        axes.append(np.linspace(lo, hi, int(count)))
    return grid_from_axes(density, axes[0], axes[1], normalization)


def covariance_from_coefficients(coeffs: QuadraticCoefficients) -> GaussianTimingDistribution:
    K = coeffs.precision()
    if not (K[0, 0] > 0 and np.linalg.det(K) > 0):
        raise ValueError("coefficient matrix is not positive definite")
    cov = np.linalg.inv(K)
    return GaussianTimingDistribution(cov @ [coeffs.l_t, coeffs.l_tau], cov)


def grid_moments(grid: Grid2D):
    """Trapezoid mean and covariance of whatever mass lies inside the grid, unguarded."""
    P = grid.values
    t, tau = grid.t_axis, grid.tau_axis
    T, TAU = np.meshgrid(t, tau, indexing="ij")
    mass = trapezoid_2d(P, t, tau)
    mean = np.array([trapezoid_2d(P * T, t, tau), trapezoid_2d(P * TAU, t, tau)]) / mass
    dT, dTAU = T - mean[0], TAU - mean[1]
    cov = np.array(
        [
            [trapezoid_2d(P * dT * dT, t, tau), trapezoid_2d(P * dT * dTAU, t, tau)],
            [trapezoid_2d(P * dT * dTAU, t, tau), trapezoid_2d(P * dTAU * dTAU, t, tau)],
        ]
    ) / mass
    return mean, cov


def fit_gaussian(grid: Grid2D) -> GaussianTimingDistribution:
    """First and second moments of an integral-normalized grid.

    Refuses grids whose edges still carry more than ``1e-6`` of the peak (the
    tails would be cut off) and grids that sample the fitted width with fewer
    than two points per standard deviation.
    """
    if grid.normalization != "integral":
        raise FitError("fit_gaussian needs an integral-normalized grid")
    P = grid.values
    peak = P.max()
    edge = max(P[0].max(), P[-1].max(), P[:, 0].max(), P[:, -1].max())
    if edge > LEAKAGE_TOL * peak:
        raise FitError(
            f"density at the grid edge is {edge / peak:.3g} of the peak; widen the grid"
        )
    mean, cov = grid_moments(grid)
    t, tau = grid.t_axis, grid.tau_axis
    steps = (np.max(np.diff(t)), np.max(np.diff(tau)))
    for name, var, h in zip(("t", "tau"), np.diag(cov), steps):
        if not np.sqrt(max(var, 0.0)) >= MIN_POINTS_PER_SIGMA * h:
            raise FitError(
                f"{name} width {np.sqrt(max(var, 0.0)):.3g} is under-resolved by spacing {h:.3g}"
            )
    return GaussianTimingDistribution(mean, cov)


def quantum_distribution(source: SourceConfig, arms) -> GaussianTimingDistribution:
    return covariance_from_coefficients(quantum_coefficients(source, arms))


def classical_distribution(source: SourceConfig, arms) -> GaussianTimingDistribution:
    return covariance_from_coefficients(classical_coefficients(source, arms))


def compare(source: SourceConfig, arms) -> ComparisonReport:
    """Closed-form quantum and classical widths and their variance ratios.

    The flag requires every ratio to sit below ``1 - RATIO_TOL``; equal widths
    that differ only by rounding are not a reduction.
    """
    q = quantum_distribution(source, arms)
    c = classical_distribution(source, arms)
    ratios = tuple(float(x) for x in q.variances / c.variances)
    return ComparisonReport(q, c, ratios, bool(all(r < 1 - RATIO_TOL for r in ratios)))
