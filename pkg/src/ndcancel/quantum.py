"""Coincidence-timing densities for energy-time entangled photons.

Times ``t`` and ``tau`` are the delays ``t2 - t1`` and ``t3 - t2``.  Unless a
function says otherwise they are measured after removing the group delays,
i.e. with ``t_i -> t_i - A_i``.  Global phases (central wavenumbers and the
``alpha * omega0 / 3`` terms) never reach ``|psi|^2`` and are dropped.
"""

from __future__ import annotations

import numpy as np

from .forms import QuadraticCoefficients
from .gaussmath import (
    ComplexQuadraticForm,
    QuadratureSpec,
    gauss_legendre,
    integrate_quadratic_family,
    tensor_quadrature,
    ConvergenceError,
)
from .params import PostSelection, SourceConfig, check_normalization, require_arms

BOUNDS_MODES = ("wide", "paper", "physical")
WIDE_HALF_WIDTH = 12.0  # in units of sigma_f


def _brackets(sigma_f, B1, B2, B3):
    # Only squares and pairwise products of B appear, so a global sign flip
    # of the dispersions is bit-identical.
    s4 = sigma_f ** 4
    q1, q2, q3 = B1 * B1, B2 * B2, B3 * B3
    p12, p13, p23 = B1 * B2, B1 * B3, B2 * B3
    pairs = p12 + p13 + p23
    D = 9 + 8 * s4 * (2 * (q1 + q2 + q3) + pairs + 2 * s4 * pairs * pairs)
    c_tt = 3 + 4 * s4 * (q2 + p23 + q3)
    c_ttau = 3 + 4 * s4 * (p12 + 2 * q2 + p23 - p13)
    c_tautau = 3 + 4 * s4 * (q1 + p12 + q2)
    return D, c_tt, c_ttau, c_tautau


def quantum_coefficients(source: SourceConfig, arms) -> QuadraticCoefficients:
    """Closed-form quadratic coefficients of the three-photon density."""
    arms = require_arms(source, arms, 3)
    B1, B2, B3 = (a.dispersion for a in arms)
    D, c_tt, c_ttau, c_tautau = _brackets(source.sigma_f, B1, B2, B3)
    s2 = source.sigma_f ** 2
    # 2 s^2 (c / D): with B = 0 the quotients 3/9 round exactly like the classical 1/3
    return QuadraticCoefficients(
        2 * s2 * (c_tt / D), 2 * s2 * (c_ttau / D), 2 * s2 * (c_tautau / D)
    )


def quantum_coefficients_full(source: SourceConfig, arms) -> QuadraticCoefficients:
    """Coefficients including group delays, in raw detection-time delays.

    The group delays add terms linear in the delays and a constant; the
    result equals the compensated form evaluated at ``t_i - A_i``.
    """
    arms = require_arms(source, arms, 3)
    B1, B2, B3 = (a.dispersion for a in arms)
    A1, A2, A3 = (a.group_delay for a in arms)
    s2 = source.sigma_f ** 2
    s4 = s2 * s2
    D, c_tt, c_ttau, c_tautau = _brackets(source.sigma_f, B1, B2, B3)

    def k(x):
        return 3 + 4 * s4 * x

    n4 = (
        A3 * k(B2 * (B1 + 2 * B2) + (-B1 + B2) * B3)
        - 2 * A1 * k(B2 * B2 + B2 * B3 + B3 * B3)
        + A2 * k(-B1 * B2 + (B1 + B2) * B3 + 2 * B3 * B3)
    )
    n5 = (
        2 * A3 * k(B1 * B1 + B1 * B2 + B2 * B2)
        - A2 * k(2 * B1 * B1 - B2 * B3 + B1 * (B2 + B3))
        - A1 * k(B1 * (B2 - B3) + B2 * (2 * B2 + B3))
    )
    n6 = (
        -A3 * A3 * k(B1 * B1 + B1 * B2 + B2 * B2)
        + A2 * A3 * k(B1 * (2 * B1 + B2) + (B1 - B2) * B3)
        - A2 * A2 * k(B1 * B1 + B1 * B3 + B3 * B3)
        - A1 * A1 * k(B2 * B2 + B2 * B3 + B3 * B3)
        + A1 * (
            A3 * k(B2 * (B1 + 2 * B2) + (-B1 + B2) * B3)
            + A2 * k(-B1 * B2 + (B1 + B2) * B3 + 2 * B3 * B3)
        )
    )
    f = 2 * s2
    return QuadraticCoefficients(
        f * (c_tt / D), f * (c_ttau / D), f * (c_tautau / D), f * (n4 / D), f * (n5 / D), f * (n6 / D)
    )


def quantum_density(source, arms, t, tau, normalization="peak"):
    """Three-photon coincidence density in the narrowband approximation.

    ``peak`` and ``none`` coincide here (the unknown prefactor is set to one
    and the exponent vanishes at the origin); ``integral`` gives unit mass
    over the ``(t, tau)`` plane.
    """
    check_normalization(normalization)
    return quantum_coefficients(source, arms).density(t, tau, normalization)


def quantum_density_full(source, arms, t1, t2, t3, normalization="none"):
    """Density for raw detection times, group delays included."""
    check_normalization(normalization)
    t1, t2, t3 = (np.asarray(x, dtype=float) for x in (t1, t2, t3))
    return quantum_coefficients_full(source, arms).density(t2 - t1, t3 - t2, normalization)


# -- post-selection on the frequency of photon 3 ---------------------------


def postselected_mean(source: SourceConfig, arm1, arm2, ps: PostSelection) -> float:
    """Centre of the delay ``t2 - t1`` after post-selecting photon 3."""
    ps.validate(source)
    return (arm2.group_delay - arm1.group_delay) + (arm2.dispersion - arm1.dispersion) * (
        source.omega0 / 3 - ps.omega3_tilde
    )


def postselected_variance(source: SourceConfig, arm1, arm2) -> float:
    """Variance ``(1/s^4 + (B1 + B2)^2) / (1/s^2)`` of the post-selected delay."""
    s2 = source.sigma_f ** 2
    total = arm1.dispersion + arm2.dispersion
    return 1.0 / s2 + s2 * total * total


def postselected_density(source, arm1, arm2, ps, t, normalization="peak"):
    """Gaussian density of ``t2 - t1`` (raw times) given photon 3 at ``omega3_tilde``."""
    check_normalization(normalization)
    mean = postselected_mean(source, arm1, arm2, ps)
    var = postselected_variance(source, arm1, arm2)
    t = np.asarray(t, dtype=float)
    p = np.exp(-((t - mean) ** 2) / (2 * var))
    if normalization == "integral":
        p = p / np.sqrt(2 * np.pi * var)
    return p


def postselected_density_numeric(source, arm1, arm2, ps, t, width_ratio=0.01, rtol=1e-9):
    """|psi|^2 with photon 3 passed through a narrow Gaussian filter.

    The post-selection filter (width ``width_ratio * sigma_f``) replaces the
    broad filter of photon 3, photon 3 is detected at ``t3 = 0`` and photons
    1 and 2 at ``-t/2`` and ``t/2``.  A 2-D tensor quadrature over
    ``(eps1, eps3)`` is used; the result is unnormalized.
    """
    ps.validate(source)
    s = source.sigma_f
    w = width_ratio * s
    e3c = ps.omega3_tilde - source.omega0 / 3
    t = np.atleast_1d(np.asarray(t, dtype=float))
    t1 = -t / 2 - arm1.group_delay
    t2 = t / 2 - arm2.group_delay
    B1, B2 = arm1.dispersion, arm2.dispersion

    def integrand(e1, e3):
        e1 = e1[..., None]
        e3 = e3[..., None]
        e2 = -e1 - e3
        amp = -(e1 * e1 + e2 * e2) / (2 * s * s) - (e3 - e3c) ** 2 / (2 * w * w)
        phase = B1 * e1 * e1 + B2 * e2 * e2 - (e1 * t1 + e2 * t2)
        return np.exp(amp + 1j * phase)

    spec = QuadratureSpec(
        (-e3c / 2 - WIDE_HALF_WIDTH * s, e3c - 10 * w),
        (-e3c / 2 + WIDE_HALF_WIDTH * s, e3c + 10 * w),
        64,
    )
    psi = tensor_quadrature(integrand, spec, rtol=rtol)
    return np.abs(psi) ** 2


# -- N photons --------------------------------------------------------------


def build_nphoton_form(source: SourceConfig, arms, times) -> ComplexQuadraticForm:
    """Quadratic form in ``eps_1 .. eps_{N-1}`` for N filtered, dispersed photons.

    Built from the Gaussian filters and second-order spectral phases with
    ``eps_N = -sum(eps_q)``.  ``times`` are raw detection times; group delays
    are subtracted here.
    """
    arms = require_arms(source, arms)
    times = np.asarray(times, dtype=float).reshape(-1)
    n = source.n_photons
    if times.size != n:
        raise ValueError(f"expected {n} detection times, got {times.size}")
    M = _nphoton_matrix(source, arms)
    shifted = times - np.array([a.group_delay for a in arms])
    b = 1j * (shifted[:-1] - shifted[-1])
    return ComplexQuadraticForm(M, b, 0.0)


def _nphoton_matrix(source, arms) -> np.ndarray:
    n = source.n_photons
    s2 = source.sigma_f ** 2
    B = np.array([a.dispersion for a in arms])
    # sum_q eps_q^2 + (sum_q eps_q)^2 from the N filters, then the phases
    M = np.full((n - 1, n - 1), 1.0 / (2 * s2), dtype=complex)
    M[np.diag_indices(n - 1)] = 1.0 / s2
    M -= 1j * B[-1]
    M[np.diag_indices(n - 1)] -= 1j * B[:-1]
    return M


def _delays_to_times(delays, n):
    delays = np.asarray(delays, dtype=float)
    if delays.shape[-1] != n - 1:
        raise ValueError(f"expected {n - 1} delays, got {delays.shape[-1]}")
    zeros = np.zeros(delays.shape[:-1] + (1,))
    return np.concatenate([zeros, np.cumsum(delays, axis=-1)], axis=-1)


def nphoton_density(source, arms, delays, normalization="peak"):
    """|psi|^2 of N photons at relative delays ``(t2-t1, ..., tN-t_{N-1})``.

    ``delays`` may carry leading batch axes; the last axis has length N-1.
    Delays are raw (group delays included).  ``none`` returns the squared
    Gaussian integral with unit filter amplitudes.
    """
    check_normalization(normalization)
    arms = require_arms(source, arms)
    n = source.n_photons
    times = _delays_to_times(delays, n)
    batch = times.shape[:-1]
    times = times.reshape(-1, n)
    M = _nphoton_matrix(source, arms)
    shifted = times - np.array([a.group_delay for a in arms])
    bs = 1j * (shifted[:, :-1] - shifted[:, -1:])
    values = np.abs(integrate_quadratic_family(M, bs)) ** 2
    if normalization != "none":
        peak = np.abs(integrate_quadratic_family(M, np.zeros((1, n - 1))))[0] ** 2
        values = values / peak
        if normalization == "integral":
            precision = np.linalg.inv(M).real
            values = values * np.sqrt(np.linalg.det(precision)) / (2 * np.pi) ** ((n - 1) / 2)
    return values.reshape(batch)


def nphoton_moments(source, arms):
    """Mean and covariance of the N-1 relative delays (raw times)."""
    arms = require_arms(source, arms)
    n = source.n_photons
    M = _nphoton_matrix(source, arms)
    # ln P = -u^T Re(M^-1) u / 2 with u_q = (t_q - A_q) - (t_N - A_N) = -(T d)_q + const
    cov_u = np.linalg.inv(np.linalg.inv(M).real)
    T = np.triu(np.ones((n - 1, n - 1)))
    Tinv = np.linalg.inv(T)
    cov = Tinv @ cov_u @ Tinv.T
    A = np.array([a.group_delay for a in arms])
    return np.diff(A), 0.5 * (cov + cov.T)


# -- finite-range numerical evaluation of the three-photon amplitude -------


def _eps_domain(source, bounds_mode):
    """(eps1 interval, eps2 lower bound, eps2 upper bound as a function of eps1)."""
    if bounds_mode not in BOUNDS_MODES:
        raise ValueError(f"unknown bounds_mode {bounds_mode!r}; expected one of {BOUNDS_MODES}")
    w3 = source.omega0 / 3
    if bounds_mode == "wide":
        h = WIDE_HALF_WIDTH * source.sigma_f
        return (-h, h), -h, lambda e1: np.full_like(e1, h)
    if bounds_mode == "paper":
        # nominal limits of the filtered state: eps2 <= 2 omega0/3 - eps1
        return (-w3, 2 * w3), -w3, lambda e1: 2 * w3 - e1
    # every frequency non-negative: omega3 >= 0 <=> eps1 + eps2 <= omega0/3
    return (-w3, 2 * w3), -w3, lambda e1: w3 - e1


def _amplitude_kernel(source, arms, e1, e2):
    s2 = source.sigma_f ** 2
    B1, B2, B3 = (a.dispersion for a in arms)
    e3 = -e1 - e2
    return np.exp(
        -(e1 * e1 + e2 * e2 + e3 * e3) / (2 * s2)
        + 1j * (B1 * e1 * e1 + B2 * e2 * e2 + B3 * e3 * e3)
    )


def _mapped_integrand(source, arms, bounds_mode, t, tau):
    # eps2 = lo2 + (U(eps1) - lo2) * s with s in [0, 1]; Jacobian U - lo2
    (_, _), lo2, upper = _eps_domain(source, bounds_mode)
    v1 = np.asarray(t + tau, dtype=float).reshape(-1)
    v2 = np.asarray(tau, dtype=float).reshape(-1)

    def integrand(e1, s):
        span = upper(e1) - lo2
        e2 = lo2 + span * s
        g = _amplitude_kernel(source, arms, e1, e2) * span
        return g[..., None] * np.exp(1j * (e1[..., None] * v1 + e2[..., None] * v2))

    return integrand


def _spectral_norm(source, arms, bounds_mode, rtol):
    (lo1, hi1), lo2, upper = _eps_domain(source, bounds_mode)

    def integrand(e1, s):
        span = upper(e1) - lo2
        e2 = lo2 + span * s
        return np.abs(_amplitude_kernel(source, arms, e1, e2)) ** 2 * span

    spec = QuadratureSpec((lo1, 0.0), (hi1, 1.0), 64)
    return float(tensor_quadrature(integrand, spec, rtol=rtol).real)


def exact_density_numeric(
    source, arms, t, tau, bounds_mode="wide", normalization="none", rtol=1e-10, chunk=32
):
    """|psi|^2 by direct quadrature of the frequency integral over a finite range.

    ``bounds_mode``:
      * ``wide`` -- +-12 sigma_f per axis, an oracle for the infinite-limit form;
      * ``paper`` -- eps1 in [-omega0/3, 2 omega0/3], eps2 from -omega0/3 up to
        2 omega0/3 - eps1, the limits written for the filtered state;
      * ``physical`` -- as ``paper`` but capped so that omega3 >= 0 as well.

    ``peak`` divides by the value at ``(0, 0)``; ``integral`` uses Parseval,
    ``int |psi|^2 dt dtau = (2 pi)^2 int |g|^2 d eps``, and is exact for the
    chosen range.  Group delays are ignored (compensated delays).
    """
    check_normalization(normalization)
    arms = require_arms(source, arms, 3)
    t, tau = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(tau, dtype=float))
    shape = t.shape
    flat_t, flat_tau = t.reshape(-1), tau.reshape(-1)
    (lo1, hi1), _, _ = _eps_domain(source, bounds_mode)
    spec = QuadratureSpec((lo1, 0.0), (hi1, 1.0), 64)
    out = np.empty(flat_t.size)
    for start in range(0, flat_t.size, chunk):
        sl = slice(start, start + chunk)
        integrand = _mapped_integrand(source, arms, bounds_mode, flat_t[sl], flat_tau[sl])
        psi = tensor_quadrature(integrand, spec, rtol=rtol)
        out[sl] = np.abs(psi) ** 2
    out = out.reshape(shape)
    if normalization == "peak":
        integrand = _mapped_integrand(source, arms, bounds_mode, 0.0, 0.0)
        out = out / float(np.abs(tensor_quadrature(integrand, spec, rtol=rtol)[0]) ** 2)
    elif normalization == "integral":
        out = out / ((2 * np.pi) ** 2 * _spectral_norm(source, arms, bounds_mode, rtol))
    return out[()] if out.ndim == 0 else out


def exact_density_grid(
    source,
    arms,
    t_axis,
    tau_axis,
    bounds_mode="wide",
    normalization="none",
    rtol=1e-10,
    points=64,
    max_refinements=5,
):
    """:func:`exact_density_numeric` on a full ``t x tau`` grid.

    Same quadrature rule, but the sum over ``eps2`` is done once per ``tau``
    and reused for every ``t``; returns an array of shape
    ``(len(t_axis), len(tau_axis))``.  Refinement doubles the rule until the
    amplitudes agree to ``rtol`` relative to their maximum.
    """
    check_normalization(normalization)
    arms = require_arms(source, arms, 3)
    t_axis = np.asarray(t_axis, dtype=float).reshape(-1)
    tau_axis = np.asarray(tau_axis, dtype=float).reshape(-1)
    (lo1, hi1), lo2, upper = _eps_domain(source, bounds_mode)

    def amplitudes(n):
        e1, w1 = gauss_legendre(lo1, hi1, n)
        s, ws = gauss_legendre(0.0, 1.0, n)
        span = upper(e1) - lo2
        e2 = lo2 + span[:, None] * s[None, :]
        g = _amplitude_kernel(source, arms, e1[:, None], e2) * (w1 * span)[:, None] * ws
        # h[i, k] = sum_j g[i, j] exp(i e2[i, j] tau_k), chunked over tau
        h = np.empty((n, tau_axis.size), dtype=complex)
        step = max(1, (1 << 22) // (n * n))
        for k0 in range(0, tau_axis.size, step):
            taus = tau_axis[k0:k0 + step]
            phase = np.exp(1j * e2[:, :, None] * taus)
            h[:, k0:k0 + step] = np.einsum("ij,ijk->ik", g, phase, optimize=False)
        h *= np.exp(1j * np.outer(e1, tau_axis))
        Et = np.exp(1j * np.outer(t_axis, e1))
        return np.einsum("ti,ik->tk", Et, h, optimize=False)

    n = points
    prev = amplitudes(n)
    for _ in range(max_refinements):
        n *= 2
        cur = amplitudes(n)
        if np.max(np.abs(cur - prev)) <= rtol * np.max(np.abs(cur)):
            break
        prev = cur
    else:
        raise ConvergenceError(
            f"finite-range amplitude did not converge with {n} points per axis", (prev, cur)
        )
    P = np.abs(cur) ** 2
    if normalization == "peak":
        P = P / exact_density_numeric(source, arms, 0.0, 0.0, bounds_mode, "none", rtol)
    elif normalization == "integral":
        P = P / ((2 * np.pi) ** 2 * _spectral_norm(source, arms, bounds_mode, rtol))
    return P
