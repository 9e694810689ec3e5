"""Source and propagation parameters shared by the quantum and classical models.

All quantities are dimensionless; ``omega0 = 1`` is the natural choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NORMALIZATIONS = ("peak", "integral", "none")


def check_normalization(normalization: str) -> str:
    if normalization not in NORMALIZATIONS:
        raise ValueError(
            f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}"
        )
    return normalization


@dataclass(frozen=True)
class SourceConfig:
    """Pump frequency, photon number and the common Gaussian filter width."""

    omega0: float = 1.0
    n_photons: int = 3
    sigma_f: float = 0.1

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ValueError(f"omega0 must be positive, got {self.omega0!r}")
        if int(self.n_photons) != self.n_photons or self.n_photons < 2:
            raise ValueError(f"n_photons must be an integer >= 2, got {self.n_photons!r}")
        if not (math.isfinite(self.sigma_f) and self.sigma_f > 0):
            raise ValueError(f"sigma_f must be positive, got {self.sigma_f!r}")
        object.__setattr__(self, "omega0", float(self.omega0))
        object.__setattr__(self, "n_photons", int(self.n_photons))
        object.__setattr__(self, "sigma_f", float(self.sigma_f))

    @property
    def omega_f(self) -> float:
        """Central filter frequency ``omega0 / N``."""
        return self.omega0 / self.n_photons

    @property
    def narrowband(self) -> bool:
        """Whether the infinite-limit analytic forms are trusted for this source."""
        return self.sigma_f <= self.omega0 / (3 * self.n_photons)


@dataclass(frozen=True)
class ArmConfig:
    """Accumulated group delay ``alpha * x`` and dispersion ``beta * x`` of one arm."""

    dispersion: float = 0.0
    group_delay: float = 0.0

    def __post_init__(self):
        for name in ("dispersion", "group_delay"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class PostSelection:
    """Frequency at which photon 3 is post-selected."""

    omega3_tilde: float

    def __post_init__(self):
        object.__setattr__(self, "omega3_tilde", float(self.omega3_tilde))

    def validate(self, source: SourceConfig) -> None:
        if not 0 < self.omega3_tilde < source.omega0:
            raise ValueError(
                f"omega3_tilde must lie in (0, omega0={source.omega0}), got {self.omega3_tilde}"
            )


def arms_from(dispersions, group_delays=None) -> tuple:
    """Build a tuple of arms from parallel sequences."""
    if group_delays is None:
        group_delays = [0.0] * len(dispersions)
    if len(group_delays) != len(dispersions):
        raise ValueError("dispersions and group_delays differ in length")
    return tuple(ArmConfig(b, a) for b, a in zip(dispersions, group_delays))


def require_arms(source: SourceConfig, arms, n=None) -> tuple:
    arms = tuple(arms)
    expected = source.n_photons if n is None else n
    if n is not None and source.n_photons != n:
        raise ValueError(f"this model needs n_photons = {n}, source has {source.n_photons}")
    if len(arms) != expected:
        raise ValueError(f"expected {expected} arms, got {len(arms)}")
    return arms
