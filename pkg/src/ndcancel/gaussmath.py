"""Complex Gaussian integrals and a Gauss-Legendre tensor-product quadrature.

Every quadratic form here represents the integrand

    exp(-(x^T M x + b^T x + c))

over real ``x``, with ``M`` complex symmetric and ``Re(M)`` positive definite.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

PIVOT_TOL = 1e-12


class DomainError(ValueError):
    """Raised when a Gaussian integral does not converge."""


class ConvergenceError(RuntimeError):
    """Raised when quadrature refinement fails to settle.

    The last two estimates are kept on ``estimates`` for inspection.
    """

    def __init__(self, message, estimates):
        super().__init__(message)
        self.estimates = estimates


def gaussian_integral_1d(a: complex, b: complex, c: complex) -> complex:
    """Integral of ``exp(-(a x^2 + b x + c))`` over the real line.

    Returns ``sqrt(pi / a) * exp((b^2 - 4 a c) / (4 a))`` with the principal
    square root, which is the correct branch whenever ``Re(a) > 0``.
    """
    a = complex(a)
    if not a.real > 0:
        raise DomainError(f"gaussian integral diverges: Re(a) = {a.real!r} <= 0")
    b = complex(b)
    c = complex(c)
    return np.sqrt(np.pi / a) * np.exp((b * b - 4 * a * c) / (4 * a))


def _cholesky_check(P: np.ndarray) -> None:
    # Real Cholesky with a relative pivot floor; names the failing direction.
    n = P.shape[0]
    scale = max(float(np.max(np.abs(np.diag(P)))), np.finfo(float).tiny)
    L = np.zeros_like(P)
    for k in range(n):
        pivot = P[k, k] - L[k, :k] @ L[k, :k]
        if not pivot > PIVOT_TOL * scale:
            raise DomainError(
                f"real part of M is not positive definite: pivot {k} = {pivot!r}"
            )
        L[k, k] = np.sqrt(pivot)
        L[k + 1:, k] = (P[k + 1:, k] - L[k + 1:, :k] @ L[k, :k]) / L[k, k]


@dataclass(frozen=True, eq=False)
class ComplexQuadraticForm:
    """Coefficients ``(M, b, c)`` of ``exp(-(x^T M x + b^T x + c))``."""

    M: np.ndarray
    b: np.ndarray
    c: complex = 0.0

    def __post_init__(self):
        M = np.array(self.M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
            raise ValueError(f"M must be a non-empty square matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("M has non-finite entries")
        asym = np.max(np.abs(M - M.T))
        if asym > 1e-12 * max(np.max(np.abs(M)), 1.0):
            raise ValueError(f"M is not symmetric (max asymmetry {asym:.3g})")
        M = 0.5 * (M + M.T)
        b = np.array(self.b, dtype=complex).reshape(-1)
        if b.shape != (M.shape[0],):
            raise ValueError(f"b has length {b.size}, expected {M.shape[0]}")
        _cholesky_check(M.real.copy())
        M.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", complex(self.c))

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def exponent(self, x: np.ndarray) -> np.ndarray:
        """``x^T M x + b^T x + c`` for points stacked along the first axis of ``x``."""
        x = np.asarray(x)
        quad = np.einsum("i...,ij,j...->...", x, self.M, x)
        return quad + np.tensordot(self.b, x, axes=1) + self.c


class _ComplexLDL:
    """Unpivoted ``M = L D L^T`` for complex symmetric M with Re(M) > 0.

    Every pivot is a Schur complement of a matrix whose real part is positive
    definite, so each ``D[k]`` has positive real part.  Summing principal logs
    of the pivots therefore tracks ``log det M`` continuously from the real
    part, which fixes the branch of ``sqrt(det M)``.
    """

    def __init__(self, M: np.ndarray):
        n = M.shape[0]
        L = np.eye(n, dtype=complex)
        d = np.zeros(n, dtype=complex)
        for k in range(n):
            d[k] = M[k, k] - (L[k, :k] ** 2) @ d[:k]
            for i in range(k + 1, n):
                L[i, k] = (M[i, k] - (L[i, :k] * L[k, :k]) @ d[:k]) / d[k]
        self.L = L
        self.d = d

    @property
    def logdet(self) -> complex:
        return complex(np.sum(np.log(self.d)))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        # rhs: shape (n,) or (n, k)
        y = np.array(rhs, dtype=complex)
        n = self.d.size
        for i in range(n):
            y[i] = y[i] - self.L[i, :i] @ y[:i]
        y = (y.T / self.d).T
        for i in range(n - 1, -1, -1):
            y[i] = y[i] - self.L[i + 1:, i] @ y[i + 1:]
        return y


def log_integrate_quadratic_form(form: ComplexQuadraticForm) -> complex:
    """Principal-branch logarithm of :func:`integrate_quadratic_form`."""
    fac = _ComplexLDL(form.M)
    quad = form.b @ fac.solve(form.b)
    return 0.5 * form.dim * np.log(np.pi) - 0.5 * fac.logdet + quad / 4 - form.c


def integrate_quadratic_form(form: ComplexQuadraticForm) -> complex:
    """Closed-form value of the Gaussian integral over ``R^dim``.

    ``pi^(dim/2) / sqrt(det M) * exp(b^T M^-1 b / 4 - c)``.
    """
    return complex(np.exp(log_integrate_quadratic_form(form)))


def integrate_quadratic_family(M, bs, c=0.0) -> np.ndarray:
    """Integrals sharing ``M`` and ``c`` for many linear terms at once.

    ``bs`` has shape ``(k, dim)``; one factorization of ``M`` serves every row.
    """
    form = ComplexQuadraticForm(M, np.zeros(np.shape(M)[0]), c)
    bs = np.atleast_2d(np.asarray(bs, dtype=complex))
    fac = _ComplexLDL(form.M)
    quad = np.sum(bs.T * fac.solve(bs.T), axis=0)
    log_val = 0.5 * form.dim * np.log(np.pi) - 0.5 * fac.logdet + quad / 4 - form.c
    return np.exp(log_val)


def iterated_gaussian_integral(M, b, c=0.0) -> complex:
    """Same integral as :func:`integrate_quadratic_form`, one variable at a time.

    The last variable is integrated with :func:`gaussian_integral_1d` and the
    remaining form is updated by its Schur complement.  No matrix
    factorization is shared with the closed form, which makes this a
    convenient cross-check.
    """
    M = np.array(M, dtype=complex)
    b = np.array(b, dtype=complex).reshape(-1)
    c = complex(c)
    factor = 1.0 + 0j
    while M.shape[0] > 1:
        a, m, beta = M[-1, -1], M[:-1, -1], b[-1]
        # int exp(-(a y^2 + (2 m.x + beta) y)) dy = sqrt(pi/a) exp((2 m.x + beta)^2 / (4a))
        factor *= gaussian_integral_1d(a, 0.0, 0.0)
        M = M[:-1, :-1] - np.outer(m, m) / a
        b = b[:-1] - m * beta / a
        c = c - beta * beta / (4 * a)
    return factor * gaussian_integral_1d(M[0, 0], b[0], c)


@dataclass(frozen=True)
class QuadratureSpec:
    """Rectangular integration box and the starting resolution per axis."""

    lower: tuple
    upper: tuple
    points_per_dim: int = 32

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper) or not lower:
            raise ValueError("lower and upper bounds must have the same non-zero length")
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError(f"axis {i}: bounds must be finite, got ({lo}, {hi})")
            if not lo < hi:
                raise ValueError(f"axis {i}: lower bound {lo} is not below upper bound {hi}")
        if int(self.points_per_dim) < 2:
            raise ValueError("points_per_dim must be at least 2")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "points_per_dim", int(self.points_per_dim))

    @property
    def dim(self) -> int:
        return len(self.lower)


@functools.lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(lo: float, hi: float, n: int):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on ``[lo, hi]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _tensor_rule(integrand, spec: QuadratureSpec, n: int):
    nodes, weights = zip(*(gauss_legendre(lo, hi, n) for lo, hi in zip(spec.lower, spec.upper)))
    dim = spec.dim
    coords = []
    for axis, x in enumerate(nodes):
        shape = [1] * dim
        shape[axis] = n
        coords.append(x.reshape(shape))
    values = np.asarray(integrand(*coords))
    values = np.broadcast_to(values, (n,) * dim + values.shape[dim:])
    # contract axis 0 repeatedly: fixed summation order
    for w in weights:
        values = np.tensordot(w, values, axes=(0, 0))
    return values


def tensor_quadrature(
    integrand: Callable[..., np.ndarray],
    spec: QuadratureSpec,
    rtol: float = 1e-8,
    atol: float = 0.0,
    max_refinements: int = 6,
):
    """Tensor-product Gauss-Legendre integral with dyadic refinement.

    ``integrand(*coords)`` receives one open-mesh coordinate array per axis
    (axis ``k`` has shape ``(1,...,n,...,1)``) and must return values that
    broadcast to ``(n,)*dim``, optionally followed by trailing batch axes; the
    batch axes are returned unreduced.  The rule starts at
    ``spec.points_per_dim`` and doubles until two successive estimates differ
    by at most ``max(atol, rtol * max|estimate|)``.
    """
    n = spec.points_per_dim
    estimates = [_tensor_rule(integrand, spec, n)]
    for _ in range(max_refinements):
        n *= 2
        prev, cur = estimates[-1], _tensor_rule(integrand, spec, n)
        estimates = [prev, cur]
        diff = np.max(np.abs(cur - prev), initial=0.0)
        if diff <= max(atol, rtol * np.max(np.abs(cur), initial=0.0)):
            return cur[()] if np.ndim(cur) == 0 else cur
    raise ConvergenceError(
        f"quadrature did not converge to rtol={rtol} with {n} points per dimension",
        tuple(estimates),
    )


def box(center: Sequence[float], half_width: Sequence[float] | float, points_per_dim: int = 32):
    """Convenience constructor for a box centred on ``center``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    half = np.broadcast_to(np.asarray(half_width, dtype=float), center.shape)
    return QuadratureSpec(tuple(center - half), tuple(center + half), points_per_dim)
