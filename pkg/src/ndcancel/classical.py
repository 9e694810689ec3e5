"""Three independent Gaussian pulses through dispersive media.

Each pulse starts with the spectrum of the filters (``sigma0^2 = 1/(2 sigma_f^2)``)
and broadens to ``sigma_i^2 = (sigma0^4 + B_i^2) / sigma0^2``.  The intensity
variance is taken with ``B_i`` squared; that is the form consistent with the
field envelope and with the triple-coincidence result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import QuadraticCoefficients
from .gaussmath import QuadratureSpec, tensor_quadrature
from .params import ArmConfig, SourceConfig, check_normalization, require_arms


@dataclass(frozen=True)
class PulseState:
    arm: ArmConfig
    sigma0_sq: float
    broadened_variance: float


def pulse_state(source: SourceConfig, arm: ArmConfig) -> PulseState:
    s0 = 1.0 / (2 * source.sigma_f ** 2)
    B = arm.dispersion
    return PulseState(arm, s0, (s0 * s0 + B * B) / s0)


def _complex_width(source, arm):
    # a^2 = sigma0^2 - i B
    return np.sqrt(1.0 / (2 * source.sigma_f ** 2) - 1j * arm.dispersion)


def _width_modulus_sq(source, arm):
    # |a|^2 = sqrt(sigma0^4 + B^2), written so that B -> -B is bit-identical
    s0 = 1.0 / (2 * source.sigma_f ** 2)
    return float(np.sqrt(s0 * s0 + arm.dispersion * arm.dispersion))


def pulse_field(source: SourceConfig, arm: ArmConfig, t):
    """Field envelope at the detector with ``E0 = 1`` and carrier phases dropped."""
    s0 = 1.0 / (2 * source.sigma_f ** 2)
    B = arm.dispersion
    dt = np.asarray(t, dtype=float) - arm.group_delay
    a = _complex_width(source, arm)
    return np.exp(-dt * dt * (s0 + 1j * B) / (4 * (s0 * s0 + B * B))) / (2 * np.sqrt(np.pi) * a)


def pulse_intensity(source: SourceConfig, arm: ArmConfig, t):
    """``|pulse_field|^2`` in closed form."""
    state = pulse_state(source, arm)
    dt = np.asarray(t, dtype=float) - arm.group_delay
    return np.exp(-dt * dt / (2 * state.broadened_variance)) / (
        4 * np.pi * _width_modulus_sq(source, arm)
    )


def classical_coefficients(source: SourceConfig, arms) -> QuadraticCoefficients:
    """Quadratic coefficients of the triple-coincidence density (group delays removed)."""
    arms = require_arms(source, arms, 3)
    s2 = source.sigma_f ** 2
    s4 = s2 * s2
    q1, q2, q3 = (a.dispersion * a.dispersion for a in arms)
    D = 3 + 8 * s4 * (q1 + q2 + q3 + 2 * s4 * (q1 * q2 + q2 * q3 + q3 * q1))
    c_tt = 1 + 2 * s4 * (q2 + q3)
    c_ttau = 1 + 4 * q2 * s4
    c_tautau = 1 + 2 * s4 * (q2 + q1)
    f = 2 * s2
    return QuadraticCoefficients(f * (c_tt / D), f * (c_ttau / D), f * (c_tautau / D))


def _raw_prefactor(source, arms):
    # prod_i 1/(4 pi |a_i|^2) times the Gaussian t1 integral sqrt(2 pi / sum 1/v_i)
    states = [pulse_state(source, a) for a in arms]
    pref = 1.0
    for a in arms:
        pref /= 4 * np.pi * _width_modulus_sq(source, a)
    inv_sum = sum(1.0 / st.broadened_variance for st in states)
    return pref * np.sqrt(2 * np.pi / inv_sum)


def classical_density(source, arms, t, tau, normalization="peak"):
    """Probability density of delays ``(t, tau)`` for three classical pulses.

    ``none`` returns ``int I1(t1) I2(t1 + t) I3(t1 + t + tau) dt1`` with unit
    field amplitude and detector efficiency, the quantity the numerical path
    computes directly.
    """
    check_normalization(normalization)
    coeffs = classical_coefficients(source, arms)
    if normalization == "none":
        return _raw_prefactor(source, arms) * coeffs.density(t, tau, "peak")
    return coeffs.density(t, tau, normalization)


def classical_density_numeric(source, arms, t, tau, normalization="none", rtol=1e-12):
    """Same density by integrating the product of the three intensities over ``t1``."""
    check_normalization(normalization)
    arms = require_arms(source, arms, 3)
    t, tau = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(tau, dtype=float))
    shape = t.shape
    flat_t, flat_tau = t.reshape(-1), tau.reshape(-1)
    width = max(np.sqrt(pulse_state(source, a).broadened_variance) for a in arms)
    A = [a.group_delay for a in arms]
    out = np.empty(flat_t.size)
    for k, (tk, tauk) in enumerate(zip(flat_t, flat_tau)):
        offsets = (0.0, tk, tk + tauk)
        spec = QuadratureSpec(
            (-max(offsets) - 12 * width,), (-min(offsets) + 12 * width,), 64
        )

        def integrand(t1):
            # group delays are restored here and cancel against the shifted frame
            return (
                pulse_intensity(source, arms[0], t1 + A[0])
                * pulse_intensity(source, arms[1], t1 + offsets[1] + A[1])
                * pulse_intensity(source, arms[2], t1 + offsets[2] + A[2])
            )

        out[k] = tensor_quadrature(integrand, spec, rtol=rtol, atol=1e-300)
    out = out.reshape(shape)
    if normalization == "peak":
        out = out / classical_density_numeric(source, arms, 0.0, 0.0, "none", rtol)
    elif normalization == "integral":
        # each intensity integrates to 1/(4 pi |a|^2) * sqrt(2 pi v)
        mass = 1.0
        for a in arms:
            v = pulse_state(source, a).broadened_variance
            mass *= np.sqrt(2 * np.pi * v) / (4 * np.pi * _width_modulus_sq(source, a))
        out = out / mass
    return out[()] if out.ndim == 0 else out
