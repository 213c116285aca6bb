"""Kernel hierarchies as radial profiles, and multivariate kernel assembly.

A :class:`RadialProfile` is a function ``G`` on ``[0, inf)`` of the form
``s**-d * P(x/s) * E(x/s)`` restricted to ``x/s <= support``, where ``P`` is a
polynomial, ``E`` an envelope (constant, Gaussian, exponential, ...) and ``s``
a scale. Radial-basis kernels are ``K(x) = G(|x|)``; product kernels are
``K(x) = prod_j G(|x_j|)`` built from a univariate (``d == 1``) profile.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidOrderError, MomentConditionError, NumericError, ShapeError
from .specialfn import PolyCoeffs, jacobi_coefficients, laguerre_coefficients, log_abs_gamma, pochhammer

__all__ = [
    "RadialProfile",
    "KernelSpec",
    "biweight_opt_profile",
    "epanechnikov_profile",
    "gaussian_profile",
    "laplace_profile",
    "custom_poly_profile",
    "catalog_profile",
    "make_kernel",
    "hierarchy_profile",
    "laplace_coefficients",
    "validate_moment_conditions",
    "kernel_eval",
    "kernel_grad",
    "kernel_hess",
    "spec_to_dict",
    "spec_from_dict",
    "CATALOG_NAMES",
]

MAX_ORDER = 12
ENVELOPES = ("none", "gauss", "exp", "cos", "logistic", "sech")
HIERARCHIES = ("biweight_opt", "epanechnikov", "gaussian", "laplace")
CATALOG_NAMES = ("triweight", "tricube", "cosine", "triangle", "logistic", "sech")


def _check_order(d: int, q: int) -> None:
    if int(d) != d or d < 1:
        raise InvalidOrderError(f"dimension must be a positive integer, got {d!r}")
    if int(q) != q or q < 2 or q % 2 or q > MAX_ORDER:
        raise InvalidOrderError(f"order must be an even integer in [2, {MAX_ORDER}], got {q!r}")


@functools.lru_cache(maxsize=256)
def _poly_derivs(poly: PolyCoeffs):
    return poly.deriv(), poly.deriv(2)


def _envelope(kind: str, t: np.ndarray):
    """Return (E, E', E'') of the envelope at t >= 0."""
    if kind == "none":
        one = np.ones_like(t)
        return one, np.zeros_like(t), np.zeros_like(t)
    if kind == "gauss":
        e = np.exp(-0.5 * t * t)
        return e, -t * e, (t * t - 1.0) * e
    if kind == "exp":
        e = np.exp(-t)
        return e, -e, e
    if kind == "cos":
        a = 0.5 * math.pi
        c, s = np.cos(a * t), np.sin(a * t)
        return c, -a * s, -a * a * c
    if kind == "logistic":
        z = np.exp(-np.abs(t))
        e = z / (1.0 + z) ** 2
        sig = np.where(t >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
        e1 = e * (1.0 - 2.0 * sig)
        return e, e1, e1 * (1.0 - 2.0 * sig) - 2.0 * e * e
    if kind == "sech":
        a = 0.5 * math.pi
        z = np.exp(-a * np.abs(t))
        e = 2.0 * z / (1.0 + z * z)
        th = np.tanh(a * t)
        return e, -a * e * th, a * a * e * (th * th - e * e)
    raise ValueError(f"unknown envelope {kind!r}")


@dataclass(frozen=True)
class RadialProfile:
    """Univariate profile G on [0, inf) with dimension and order tags.

    ``support`` is measured in units of the unscaled argument; ``math.inf``
    marks an untruncated profile.
    """

    family: str
    d: int
    q: int
    poly: PolyCoeffs
    envelope: str = "none"
    support: float = 1.0
    scale: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.envelope not in ENVELOPES:
            raise ValueError(f"unknown envelope {self.envelope!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not self.name:
            object.__setattr__(self, "name", self.family)

    @property
    def truncated(self) -> bool:
        return math.isfinite(self.support)

    @property
    def radius(self) -> float:
        """Radius of the support in the scaled argument (inf if untruncated)."""
        return self.support * self.scale

    def quad_radius(self) -> float:
        """Upper integration limit beyond which the profile is negligible."""
        if self.truncated:
            return self.radius
        k = self.d + self.q + self.poly.degree + 4
        tails = {
            "gauss": math.sqrt(k) + 13.0,
            "exp": 2.0 * k + 80.0,
            "logistic": 2.0 * k + 80.0,
            "sech": (2.0 * k + 80.0) / (0.5 * math.pi),
        }
        return tails.get(self.envelope, 60.0) * self.scale

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        t = np.abs(x) / self.scale
        inside = t <= self.support if self.truncated else np.ones(t.shape, bool)
        # Clamp outside points so polynomials are not evaluated far from support.
        tt = np.where(inside, t, 0.0)
        return tt, inside

    def value(self, x):
        t, inside = self._parts(x)
        e, _, _ = _envelope(self.envelope, t)
        out = np.where(inside, self.poly(t) * e, 0.0) * self.scale ** (-self.d)
        return out if out.ndim else float(out)

    def deriv(self, x):
        t, inside = self._parts(x)
        e, e1, _ = _envelope(self.envelope, t)
        p, p1 = self.poly(t), self.poly.deriv()(t)
        out = np.where(inside, p1 * e + p * e1, 0.0) * self.scale ** (-self.d - 1)
        return out if out.ndim else float(out)

    def deriv2(self, x):
        t, inside = self._parts(x)
        e, e1, e2 = _envelope(self.envelope, t)
        p, p1, p2 = self.poly(t), self.poly.deriv()(t), self.poly.deriv(2)(t)
        out = np.where(inside, p2 * e + 2.0 * p1 * e1 + p * e2, 0.0) * self.scale ** (-self.d - 2)
        return out if out.ndim else float(out)

    def all_derivs(self, x):
        """(G, G', G'') at x in one pass."""
        t, inside = self._parts(x)
        e, e1, e2 = _envelope(self.envelope, t)
        p1c, p2c = _poly_derivs(self.poly)
        p, p1, p2 = self.poly(t), p1c(t), p2c(t)
        s = self.scale
        g0 = np.where(inside, p * e, 0.0) * s ** (-self.d)
        g1 = np.where(inside, p1 * e + p * e1, 0.0) * s ** (-self.d - 1)
        g2 = np.where(inside, p2 * e + 2.0 * p1 * e1 + p * e2, 0.0) * s ** (-self.d - 2)
        return g0, g1, g2

    def __call__(self, x):
        return self.value(x)

    def rescaled(self, s: float) -> "RadialProfile":
        """The profile x -> s**-d G(x/s), which keeps normalization and order."""
        return replace(self, scale=self.scale * s)

    @property
    def canonical(self) -> bool:
        return self.scale == 1.0


def _even_poly(coeffs_in_u2: PolyCoeffs) -> PolyCoeffs:
    """Substitute x**2 for the argument of a polynomial."""
    out = np.zeros(2 * len(coeffs_in_u2.coefficients) - 1)
    out[::2] = coeffs_in_u2.coefficients
    return PolyCoeffs(tuple(out))


def _jacobi_in_2x2m1(n: int, a: float, b: float) -> PolyCoeffs:
    """Coefficients in x of P_n^(a,b)(2x^2 - 1)."""
    p = np.polynomial.Polynomial(jacobi_coefficients(n, a, b).coefficients)
    comp = p(np.polynomial.Polynomial([-1.0, 0.0, 2.0]))
    return PolyCoeffs(tuple(comp.coef))


def biweight_opt_profile(d: int, q: int) -> RadialProfile:
    """Optimal radial profile of order q in dimension d (the Biweight hierarchy).

    Built from the closed-form coefficients of the even monomials
    ``x**0, x**2, ..., x**(q+2)``, truncated to the unit interval.
    """
    _check_order(d, q)
    coeffs = np.zeros(q + 3)
    lg = log_abs_gamma
    lead = lg((d + q + 4) / 2) - 0.5 * d * math.log(math.pi) - lg(q / 2)
    for i in range(0, q + 3, 2):
        coeffs[i] = (-1) ** (i // 2) * math.exp(
            lead + lg((d + q + i) / 2) - lg((2 + i) / 2) - lg((d + 2 + i) / 2) - lg((q + 4 - i) / 2)
        )
    return RadialProfile("biweight_opt", d, q, PolyCoeffs(tuple(coeffs)), "none", 1.0, name="Biweight" if q == 2 else f"B{q}")


def epanechnikov_profile(d: int, q: int) -> RadialProfile:
    """Epanechnikov hierarchy member: (1 - u^2) times a Jacobi factor, truncated."""
    _check_order(d, q)
    c = (-1) ** (q // 2 + 1) * math.exp(
        log_abs_gamma((d + q) / 2 + 1) - 0.5 * d * math.log(math.pi) - log_abs_gamma(q / 2 + 1)
    )
    poly = PolyCoeffs((1.0, 0.0, -1.0)) * _jacobi_in_2x2m1(q // 2 - 1, 1.0, d / 2)
    return RadialProfile("epanechnikov", d, q, poly.scaled(c), "none", 1.0, name="Epanechnikov" if q == 2 else f"E{q}")


def gaussian_profile(d: int, q: int) -> RadialProfile:
    """Gaussian hierarchy member: Laguerre factor in u^2/2 times the Gaussian density."""
    _check_order(d, q)
    lag = laguerre_coefficients(q // 2 - 1, d / 2)
    in_u2 = PolyCoeffs(tuple(c / 2.0**k for k, c in enumerate(lag.coefficients)))
    poly = _even_poly(in_u2).scaled((2.0 * math.pi) ** (-d / 2))
    return RadialProfile("gaussian", d, q, poly, "gauss", math.inf, name="Gaussian" if q == 2 else f"G{q}")


def laplace_coefficients(d: int, q: int) -> np.ndarray:
    """Polynomial weights of the Laplace hierarchy (even powers 0, 2, ..., q-2)."""
    _check_order(d, q)
    m = q // 2
    mat = np.array([[pochhammer(d + 2 * r, 2 * k) for k in range(m)] for r in range(m)])
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericError(f"Laplace moment system ill-conditioned (cond={cond:.3g}) at d={d}, q={q}")
    rhs = np.zeros(m)
    rhs[0] = 1.0
    return np.linalg.solve(mat, rhs)


def laplace_profile(d: int, q: int) -> RadialProfile:
    _check_order(d, q)
    b = laplace_coefficients(d, q)
    coeffs = np.zeros(q - 1)
    coeffs[::2] = b
    norm = math.exp(log_abs_gamma(d / 2) - math.log(2.0) - 0.5 * d * math.log(math.pi) - log_abs_gamma(d))
    return RadialProfile(
        "laplace", d, q, PolyCoeffs(tuple(coeffs)).scaled(norm), "exp", math.inf, name="Laplace" if q == 2 else f"L{q}"
    )


def custom_poly_profile(d: int, q: int, coefficients: Sequence[float], support: float = 1.0, name: str = "custom") -> RadialProfile:
    """Truncated polynomial profile supplied by the user, validated at construction.

    Raises
    ------
    MomentConditionError
        If normalization or a vanishing intermediate moment is off by more
        than 1e-6, or the q-th moment vanishes.
    """
    _check_order(d, q)
    prof = RadialProfile("custom_poly", d, q, PolyCoeffs.from_sequence(coefficients), "none", float(support), name=name)
    validate_moment_conditions(prof, tol=1e-6)
    return prof


def validate_moment_conditions(profile: RadialProfile, tol: float = 1e-6) -> None:
    from .moments import moment_B, radial_normalizer

    target0 = radial_normalizer(profile.d)
    b0 = moment_B(profile, 0, method="quadrature")
    if abs(b0 - target0) > tol * max(1.0, target0):
        raise MomentConditionError(f"{profile.name}: B_0 = {b0:.10g}, expected {target0:.10g}")
    for i in range(2, profile.q - 1, 2):
        bi = moment_B(profile, i, method="quadrature")
        if abs(bi) > tol:
            raise MomentConditionError(f"{profile.name}: moment {i} = {bi:.3g} should vanish")
    bq = moment_B(profile, profile.q, method="quadrature")
    if abs(bq) <= tol:
        raise MomentConditionError(f"{profile.name}: moment {profile.q} vanishes; order exceeds {profile.q}")


def catalog_profile(name: str) -> RadialProfile:
    """Second-order univariate kernels outside the four hierarchies."""
    pi = math.pi
    if name == "triweight":
        return RadialProfile("triweight", 1, 2, PolyCoeffs((1, 0, -3, 0, 3, 0, -1)).scaled(35 / 32), name="Triweight")
    if name == "tricube":
        return RadialProfile(
            "tricube", 1, 2, PolyCoeffs((1, 0, 0, -3, 0, 0, 3, 0, 0, -1)).scaled(70 / 81), name="Tricube"
        )
    if name == "cosine":
        return RadialProfile("cosine", 1, 2, PolyCoeffs((pi / 4,)), "cos", 1.0, name="Cosine")
    if name == "triangle":
        return RadialProfile("triangle", 1, 2, PolyCoeffs((1.0, -1.0)), name="Triangle")
    if name == "logistic":
        return RadialProfile("logistic", 1, 2, PolyCoeffs((1.0,)), "logistic", math.inf, name="Logistic")
    if name == "sech":
        return RadialProfile("sech", 1, 2, PolyCoeffs((0.5,)), "sech", math.inf, name="Sech")
    raise DomainError(f"unknown catalog kernel {name!r}")


_HIERARCHY_BUILDERS = {
    "biweight_opt": biweight_opt_profile,
    "epanechnikov": epanechnikov_profile,
    "gaussian": gaussian_profile,
    "laplace": laplace_profile,
}

_ALIASES = {
    "b": "biweight_opt",
    "biweight": "biweight_opt",
    "biweight_opt": "biweight_opt",
    "e": "epanechnikov",
    "epanechnikov": "epanechnikov",
    "g": "gaussian",
    "gaussian": "gaussian",
    "l": "laplace",
    "laplace": "laplace",
}


def hierarchy_profile(family: str, d: int, q: int) -> RadialProfile:
    key = _ALIASES.get(family.lower())
    if key is None:
        raise DomainError(f"unknown kernel family {family!r}")
    return _HIERARCHY_BUILDERS[key](d, q)


@dataclass(frozen=True)
class KernelSpec:
    """Multivariate kernel: radial-basis ``G(|u|)`` or product ``prod G(|u_j|)``."""

    structure: str
    profile: RadialProfile
    d: int

    def __post_init__(self):
        if self.structure not in ("radial", "product"):
            raise ValueError(f"structure must be 'radial' or 'product', got {self.structure!r}")
        if self.structure == "radial" and self.profile.d != self.d:
            raise ShapeError(f"radial profile built for d={self.profile.d}, kernel has d={self.d}")
        if self.structure == "product" and self.profile.d != 1:
            raise ShapeError("product kernels need a univariate (d=1) factor")

    @property
    def q(self) -> int:
        return self.profile.q

    @property
    def truncated(self) -> bool:
        return self.profile.truncated

    @property
    def radius(self) -> float:
        """Half-width of the support along any coordinate axis."""
        return self.profile.radius

    @property
    def label(self) -> str:
        prefix = "RK" if self.structure == "radial" else "PK"
        return f"{prefix} {self.profile.name}" if self.d > 1 else self.profile.name

    def _as_points(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            u = u[None, :] if self.d > 1 or u.shape[0] == 1 else u[:, None]
        if u.shape[-1] != self.d:
            raise ShapeError(f"expected points of dimension {self.d}, got shape {u.shape}")
        return u

    def value(self, u) -> np.ndarray:
        u = self._as_points(u)
        if self.d == 1:
            return self.profile.value(u[:, 0])
        if self.structure == "radial":
            return self.profile.value(np.sqrt(np.sum(u * u, axis=-1)))
        return np.prod(self.profile.value(u), axis=-1)

    def derivatives(self, u, order: int = 2):
        """Kernel value, gradient (m, d) and, if ``order == 2``, Hessian (m, d, d)."""
        u = self._as_points(u)
        m, d = u.shape
        if d == 1:
            # Radial and product structures coincide on the line.
            g0, g1, g2 = self.profile.all_derivs(u[:, 0])
            grad = (g1 * np.sign(u[:, 0]))[:, None]
            return g0, grad, (g2[:, None, None] if order >= 2 else None)
        if self.structure == "radial":
            r = np.sqrt(np.sum(u * u, axis=-1))
            g0, g1, g2 = self.profile.all_derivs(r)
            pos = r > 0
            safe_r = np.where(pos, r, 1.0)
            unit = np.where(pos[:, None], u / safe_r[:, None], 0.0)
            grad = g1[:, None] * unit
            if order < 2:
                return g0, grad, None
            outer = unit[:, :, None] * unit[:, None, :]
            ratio = np.where(pos, g1 / safe_r, g2)
            eye = np.eye(d)[None, :, :]
            hess = g2[:, None, None] * outer + ratio[:, None, None] * (eye - outer)
            # At the origin the limit is G''(0) I for profiles even in the radius.
            hess = np.where(pos[:, None, None], hess, g2[:, None, None] * eye)
            return g0, grad, hess
        a = np.abs(u)
        g0, g1, g2 = self.profile.all_derivs(a)
        g1 = g1 * np.sign(u)
        value = np.prod(g0, axis=-1)
        grad = np.empty((m, d))
        for j in range(d):
            others = np.prod(np.delete(g0, j, axis=1), axis=1) if d > 1 else 1.0
            grad[:, j] = g1[:, j] * others
        if order < 2:
            return value, grad, None
        hess = np.empty((m, d, d))
        for j in range(d):
            for k in range(d):
                if j == k:
                    others = np.prod(np.delete(g0, j, axis=1), axis=1) if d > 1 else 1.0
                    hess[:, j, j] = g2[:, j] * others
                else:
                    rest = np.prod(np.delete(g0, [j, k], axis=1), axis=1) if d > 2 else 1.0
                    hess[:, j, k] = g1[:, j] * g1[:, k] * rest
        return value, grad, hess

    def grad(self, u) -> np.ndarray:
        return self.derivatives(u, order=1)[1]

    def hess(self, u) -> np.ndarray:
        return self.derivatives(u, order=2)[2]


def make_kernel(name: str, d: int, q: int = 2) -> KernelSpec:
    """Kernel from a short name.

    ``biweight``, ``epanechnikov``, ``gaussian``, ``laplace`` (or ``B``, ``E``,
    ``G``, ``L``) give radial-basis kernels of the corresponding hierarchy;
    a ``pk-`` prefix gives the product kernel of the univariate member.
    Catalog names (``triweight``, ``tricube``, ``cosine``, ``triangle``,
    ``logistic``, ``sech``) are second order only.
    """
    key = name.lower().strip()
    product = False
    for prefix in ("pk-", "pk:", "pk_"):
        if key.startswith(prefix):
            key, product = key[len(prefix):], True
    for prefix in ("rk-", "rk:", "rk_"):
        if key.startswith(prefix):
            key = key[len(prefix):]
    if key in CATALOG_NAMES:
        if q != 2:
            raise InvalidOrderError(f"{key} is a second-order kernel")
        if d != 1 and not product:
            raise ShapeError(f"{key} is univariate; use pk-{key} for d > 1")
        return KernelSpec("product" if product else "radial", catalog_profile(key), d)
    if product:
        return KernelSpec("product", hierarchy_profile(key, 1, q), d)
    return KernelSpec("radial", hierarchy_profile(key, d, q), d)


def _single(spec: KernelSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != spec.d:
        raise ShapeError(f"expected a vector of length {spec.d}, got shape {x.shape}")
    return x[None, :]


def kernel_eval(spec: KernelSpec, x) -> float:
    return float(spec.value(_single(spec, x))[0])


def kernel_grad(spec: KernelSpec, x) -> np.ndarray:
    return spec.derivatives(_single(spec, x), order=1)[1][0]


def kernel_hess(spec: KernelSpec, x) -> np.ndarray:
    return spec.derivatives(_single(spec, x), order=2)[2][0]


def spec_to_dict(spec: KernelSpec) -> dict:
    p = spec.profile
    out = {"family": p.family, "d": spec.d, "q": p.q, "structure": spec.structure}
    if p.family == "custom_poly":
        out["coefficients"] = list(p.poly.coefficients)
        out["support"] = p.support
    if p.scale != 1.0:
        out["scale"] = p.scale
    return out


def spec_from_dict(obj: dict) -> KernelSpec:
    family = obj["family"]
    d, q = int(obj["d"]), int(obj.get("q", 2))
    structure = obj.get("structure", "radial")
    pd = 1 if structure == "product" else d
    if family == "custom_poly":
        prof = custom_poly_profile(pd, q, obj["coefficients"], obj.get("support", 1.0))
    elif family in CATALOG_NAMES:
        prof = catalog_profile(family)
    else:
        prof = hierarchy_profile(family, pd, q)
    if "scale" in obj:
        prof = prof.rescaled(float(obj["scale"]))
    return KernelSpec(structure, prof, d)
