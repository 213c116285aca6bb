"""Special functions and orthogonal polynomials used by the kernel closed forms.

Jacobi and Laguerre polynomials are evaluated by their three-term recurrences in
the degree. The recurrence for Jacobi polynomials breaks down when
``2k + alpha + beta`` hits zero for some intermediate degree ``k`` (this happens
for the ``beta = -2`` member used by the optimal radial kernel); in that case the
explicit binomial sum is used instead, which is an exact polynomial identity for
all real parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "PolyCoeffs",
    "jacobi",
    "laguerre",
    "hermite_prob",
    "gamma_fn",
    "log_abs_gamma",
    "pochhammer",
    "gen_binomial",
    "jacobi_coefficients",
    "laguerre_coefficients",
]

HERMITE_MAX_DEGREE = 12


def _check_finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite argument: {v!r}")


@dataclass(frozen=True)
class PolyCoeffs:
    """Real polynomial stored by ascending monomial degree."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        c = [float(v) for v in self.coefficients]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        object.__setattr__(self, "coefficients", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        """Horner evaluation; accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.coefficients[-1])
        for c in reversed(self.coefficients[:-1]):
            out = out * x + c
        return out if out.ndim else float(out)

    def termwise(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x**k for k, c in enumerate(self.coefficients))

    def deriv(self, m: int = 1) -> "PolyCoeffs":
        c = np.array(self.coefficients)
        for _ in range(m):
            if len(c) == 1:
                return PolyCoeffs((0.0,))
            c = c[1:] * np.arange(1, len(c))
        return PolyCoeffs(tuple(c))

    def __mul__(self, other: "PolyCoeffs") -> "PolyCoeffs":
        return PolyCoeffs(tuple(np.convolve(self.coefficients, other.coefficients)))

    def scaled(self, factor: float) -> "PolyCoeffs":
        return PolyCoeffs(tuple(factor * c for c in self.coefficients))

    @classmethod
    def from_sequence(cls, coefficients: Sequence[float]) -> "PolyCoeffs":
        return cls(tuple(float(c) for c in coefficients))


def _falling_binomial(a: float, k: int) -> float:
    """Binomial coefficient C(a, k) for real a and integer k >= 0, pole free."""
    out = 1.0
    for j in range(k):
        out *= (a - j) / (j + 1)
    return out


def _jacobi_sum(n: int, alpha: float, beta: float, x):
    xm = (x - 1.0) / 2.0
    xp = (x + 1.0) / 2.0
    out = np.zeros_like(x)
    for s in range(n + 1):
        out = out + (
            _falling_binomial(n + alpha, n - s)
            * _falling_binomial(n + beta, s)
            * xm**s
            * xp ** (n - s)
        )
    return out


def _recurrence_ok(n: int, alpha: float, beta: float) -> bool:
    for k in range(2, n + 1):
        if abs(2 * k + alpha + beta - 2) < 1e-12 or abs(k + alpha + beta) < 1e-12:
            return False
    return True


def jacobi(n: int, alpha: float, beta: float, x):
    """Jacobi polynomial P_n^(alpha, beta)(x).

    Parameters
    ----------
    n : int
        Degree, ``n >= 0``.
    alpha, beta : float
        Parameters; any real values greater than -3 are accepted.
    x : float or array_like
        Evaluation points.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a nonnegative integer, got {n!r}")
    _check_finite(alpha, beta, x)
    if alpha <= -3 or beta <= -3:
        raise DomainError(f"Jacobi parameters must exceed -3, got ({alpha}, {beta})")
    n = int(n)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if n == 0:
        out = np.ones_like(x)
    elif not _recurrence_ok(n, alpha, beta):
        out = _jacobi_sum(n, alpha, beta, x)
    else:
        p_prev = np.ones_like(x)
        p = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0
        for k in range(2, n + 1):
            s = 2 * k + alpha + beta
            a1 = 2 * k * (k + alpha + beta) * (s - 2)
            a2 = (s - 1) * (s * (s - 2) * x + alpha**2 - beta**2)
            a3 = 2 * (k + alpha - 1) * (k + beta - 1) * s
            p_prev, p = p, (a2 * p - a3 * p_prev) / a1
        out = p
    return float(out) if scalar else out


def jacobi_coefficients(n: int, alpha: float, beta: float) -> PolyCoeffs:
    """Monomial coefficients of P_n^(alpha, beta) in its argument."""
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a nonnegative integer, got {n!r}")
    _check_finite(alpha, beta)
    xm = np.polynomial.Polynomial([-0.5, 0.5])
    xp = np.polynomial.Polynomial([0.5, 0.5])
    out = np.polynomial.Polynomial([0.0])
    for s in range(int(n) + 1):
        out = out + (
            _falling_binomial(n + alpha, n - s) * _falling_binomial(n + beta, s) * xm**s * xp ** (n - s)
        )
    return PolyCoeffs(tuple(out.coef))


def laguerre_coefficients(n: int, alpha: float) -> PolyCoeffs:
    """Monomial coefficients of L_n^(alpha)."""
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a nonnegative integer, got {n!r}")
    _check_finite(alpha)
    return PolyCoeffs(
        tuple((-1) ** k * _falling_binomial(n + alpha, n - k) / math.factorial(k) for k in range(int(n) + 1))
    )


def laguerre(n: int, alpha: float, x):
    """Generalized Laguerre polynomial L_n^(alpha)(x)."""
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a nonnegative integer, got {n!r}")
    _check_finite(alpha, x)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        out = p_prev
    else:
        p = 1.0 + alpha - x
        for k in range(1, int(n)):
            p_prev, p = p, ((2 * k + 1 + alpha - x) * p - (k + alpha) * p_prev) / (k + 1)
        out = p
    return float(out) if scalar else out


def hermite_prob(n: int, z):
    """Probabilists' Hermite polynomial He_n(z), ``n <= 12``."""
    if n < 0 or int(n) != n or n > HERMITE_MAX_DEGREE:
        raise DomainError(f"Hermite degree must be an integer in [0, {HERMITE_MAX_DEGREE}], got {n!r}")
    _check_finite(z)
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=float)
    p_prev = np.ones_like(z)
    if n == 0:
        out = p_prev
    else:
        p = z.copy()
        for k in range(1, int(n)):
            p_prev, p = p, z * p - k * p_prev
        out = p
    return float(out) if scalar else out


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_fn(x: float) -> float:
    """Gamma function; raises at the poles 0, -1, -2, ..."""
    _check_finite(x)
    if _is_pole(x):
        raise DomainError(f"gamma pole at {x!r}")
    return float(special.gamma(x))


def log_abs_gamma(x: float) -> float:
    _check_finite(x)
    if _is_pole(x):
        raise DomainError(f"gamma pole at {x!r}")
    return float(special.gammaln(x))


def pochhammer(x: float, m: int) -> float:
    """Rising factorial (x)_m = x (x+1) ... (x+m-1)."""
    _check_finite(x)
    if m < 0 or int(m) != m:
        raise DomainError(f"Pochhammer length must be a nonnegative integer, got {m!r}")
    return math.prod(x + j for j in range(int(m))) if m else 1.0


def gen_binomial(x: float, y: float) -> float:
    """Binomial coefficient extended to real arguments via the gamma function."""
    _check_finite(x, y)
    for arg in (x + 1, y + 1, x - y + 1):
        if _is_pole(arg):
            raise DomainError(f"gamma pole at {arg!r} in binomial({x}, {y})")
    return gamma_fn(x + 1) / (gamma_fn(y + 1) * gamma_fn(x - y + 1))
