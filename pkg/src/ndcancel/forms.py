"""Two-variable Gaussian log-densities shared by the quantum and classical models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadraticCoefficients:
    """``ln P = const - (a_tt t^2 + a_ttau t tau + a_tautau tau^2) + l_t t + l_tau tau``."""

    a_tt: float
    a_ttau: float
    a_tautau: float
    l_t: float = 0.0
    l_tau: float = 0.0
    const: float = 0.0

    def __post_init__(self):
        K = self.precision()
        if not (K[0, 0] > 0 and np.linalg.det(K) > 0):
            raise ValueError(f"coefficient matrix is not positive definite: {K.tolist()}")

    def precision(self) -> np.ndarray:
        """Inverse covariance ``[[2 a_tt, a_ttau], [a_ttau, 2 a_tautau]]``."""
        return np.array([[2 * self.a_tt, self.a_ttau], [self.a_ttau, 2 * self.a_tautau]])

    def log_density(self, t, tau):
        t = np.asarray(t, dtype=float)
        tau = np.asarray(tau, dtype=float)
        quad = self.a_tt * t * t + self.a_ttau * t * tau + self.a_tautau * tau * tau
        return self.const - quad + self.l_t * t + self.l_tau * tau

    def mean(self) -> np.ndarray:
        return np.linalg.solve(self.precision(), [self.l_t, self.l_tau])

    def peak_log_density(self) -> float:
        mt, mtau = self.mean()
        return float(self.log_density(mt, mtau))

    def integral_factor(self) -> float:
        """Factor turning the peak-normalized Gaussian into a unit-mass density."""
        return float(np.sqrt(np.linalg.det(self.precision())) / (2 * np.pi))

    def density(self, t, tau, normalization: str = "peak"):
        log_p = self.log_density(t, tau)
        if normalization == "none":
            return np.exp(log_p)
        log_p = log_p - self.peak_log_density()
        if normalization == "peak":
            return np.exp(log_p)
        if normalization == "integral":
            return np.exp(log_p) * self.integral_factor()
        raise ValueError(f"unknown normalization {normalization!r}")
