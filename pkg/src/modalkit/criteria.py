"""AMSE criteria and ratios for radial-basis and product kernels.

All criteria are evaluated in log space, ``exp(sum_k a_k log|m_k| / c)``, so the
large powers of small moments that appear at high dimension never underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateKernelError, DomainError, InadmissibleKernelError, InvalidOrderError, ShapeError
from .kernels import (
    RadialProfile,
    biweight_opt_profile,
    catalog_profile,
    epanechnikov_profile,
    gaussian_profile,
    laplace_profile,
)
from .moments import _CLOSED, closed_form_log_B, log_moment_V, moment_B

__all__ = [
    "CriterionValue",
    "rk_criterion",
    "amse_ratio",
    "pk_criterion",
    "pk_amse_ratio_q2",
    "pk_lower_bound",
    "rk_vs_pk_ratio_q2",
    "singular_criterion",
    "named_univariate_catalog",
    "CatalogEntry",
]

# Moments smaller than this are treated as vanishing.
ZERO_MOMENT_TOL = 1e-10


@dataclass(frozen=True)
class CriterionValue:
    value: float
    d: int
    q: int
    kind: str
    log_value: float = float("nan")

    def __post_init__(self):
        if not self.value > 0:
            raise DegenerateKernelError(f"{self.kind} criterion must be positive, got {self.value!r}")

    def __float__(self) -> float:
        return self.value


def _log_abs_B(profile: RadialProfile, i: int) -> float:
    """log|B_{d,i}|; closed forms are trusted, quadrature values are tested for vanishing."""
    out = closed_form_log_B(profile, i)
    if out is not None:
        return out[1]
    val = moment_B(profile, i, method="quadrature")
    if abs(val) <= ZERO_MOMENT_TOL:
        raise DegenerateKernelError(
            f"B_{{{profile.d},{i}}} of {profile.name} vanishes ({val:.3g}); criterion undefined"
        )
    return math.log(abs(val))


def _rk_log(profile: RadialProfile) -> float:
    d, q = profile.d, profile.q
    lb = _log_abs_B(profile, q)
    lv = log_moment_V(profile, 1)
    return (2 * (d + 2) * lb + 2 * q * lv) / (d + 2 * q + 2)


def _optimal_rk_log(d: int, q: int) -> float:
    # Straight from the closed-form moments: the explicit polynomial overflows for large d.
    fn = _CLOSED["biweight_opt"]
    lb, lv = fn(d, q, "B"), fn(d, q, "V1")
    if lb is None or lv is None:
        return _rk_log(biweight_opt_profile(d, q))
    return (2 * (d + 2) * lb[1] + 2 * q * lv[1]) / (d + 2 * q + 2)


def rk_criterion(profile: RadialProfile) -> CriterionValue:
    """Kernel-dependent factor ``(B_{d,q}^{2(d+2)} V_{d,1}^{2q})^{1/(d+2q+2)}`` of the RK AMSE."""
    lg = _rk_log(profile)
    return CriterionValue(math.exp(lg), profile.d, profile.q, "rk_amse", lg)


def amse_ratio(profile: RadialProfile, d: int | None = None, q: int | None = None) -> float:
    """Bandwidth-optimized AMSE of ``profile`` relative to the optimal RK of the same (d, q)."""
    d = profile.d if d is None else d
    q = profile.q if q is None else q
    if (d, q) != (profile.d, profile.q):
        raise ShapeError(f"profile is ({profile.d}, {profile.q}) but ratio requested at ({d}, {q})")
    return math.exp(_rk_log(profile) - _optimal_rk_log(d, q))


def _pk_log(factor: RadialProfile, d: int) -> float:
    if factor.d != 1:
        raise ShapeError("product-kernel factor must be univariate")
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    q = factor.q
    lb = _log_abs_B(factor, q)
    lv1 = log_moment_V(factor, 1)
    lv0 = log_moment_V(factor, 0)
    return (6 * lb + 2 * q * lv1 + (d - 1) * (2 * lb + 2 * q * lv0)) / (d + 2 * q + 2)


def pk_criterion(factor: RadialProfile, d: int) -> CriterionValue:
    """Kernel-dependent factor of the PK AMSE for the product of ``d`` copies of ``factor``."""
    lg = _pk_log(factor, d)
    return CriterionValue(math.exp(lg), d, factor.q, "pk_amse", lg)


def _pk_bound_log(d: int, q: int) -> float:
    b = biweight_opt_profile(1, q)
    e = epanechnikov_profile(1, q)
    first = 6 * _log_abs_B(b, q) + 2 * q * log_moment_V(b, 1)
    rest = 2 * _log_abs_B(e, q) + 2 * q * log_moment_V(e, 0)
    return (first + (d - 1) * rest) / (d + 2 * q + 2)


def pk_lower_bound(d: int, q: int) -> CriterionValue:
    """Lower bound of the PK criterion over all admissible univariate factors."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    lg = _pk_bound_log(d, q)
    return CriterionValue(math.exp(lg), d, q, "pk_lower_bound", lg)


def _pk_vs_rk_q2(log_pk: float, d: int) -> float:
    # PK and RK share the density factor at q = 2 once the sphere constants
    # relating the two bias and variance reductions are accounted for.
    log_rk = _optimal_rk_log(d, 2)
    num = (6 * d + 4) * math.log(2.0) + (d + 6) * log_pk
    log_vd = math.log(2.0) + 0.5 * d * math.log(math.pi) - math.log(d) - math.lgamma(d / 2)
    den = (2 * d + 8) * log_vd + (d + 6) * log_rk
    return math.exp((num - den) / (d + 6))


def pk_amse_ratio_q2(factor: RadialProfile, d: int) -> float:
    """Bandwidth-optimized AMSE of a second-order PK relative to the optimal RK."""
    if factor.q != 2:
        raise InvalidOrderError("the density-free PK/RK comparison exists only for q = 2")
    return _pk_vs_rk_q2(_pk_log(factor, d), d)


def rk_vs_pk_ratio_q2(d: int) -> float:
    """Ratio of the PK AMSE lower bound to the optimal RK AMSE at q = 2."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    return _pk_vs_rk_q2(_pk_bound_log(d, 2), d)


def singular_criterion(profile: RadialProfile, p: int, q: int) -> CriterionValue:
    """Criterion ``(B_{1,q}^6 V_{1,1}^{2q})^{1/(2q+3)}`` for a univariate singular mode.

    The kernel must have vanishing moments of every even index in ``[p, q-1]``
    and a nonzero ``q``-th moment; symmetric kernels of order below ``q``
    therefore qualify when ``p`` is at least their order minus one.

    Raises
    ------
    InadmissibleKernelError
        Naming the first index at which the relaxed moment condition fails.
    """
    if profile.d != 1:
        raise ShapeError("singular criterion is defined for univariate kernels")
    if p % 2 != 1 or p < 1:
        raise DomainError(f"p must be a positive odd integer, got {p!r}")
    if q % 2 or q <= p:
        raise InvalidOrderError(f"q must be an even integer above p, got {q!r}")
    for i in range(p + 1 if p % 2 else p, q, 2):
        val = moment_B(profile, i)
        if abs(val) > ZERO_MOMENT_TOL:
            raise InadmissibleKernelError(f"{profile.name}: moment {i} = {val:.4g} must vanish for (p, q) = ({p}, {q})", i)
    bq = moment_B(profile, q)
    if abs(bq) <= ZERO_MOMENT_TOL:
        raise InadmissibleKernelError(f"{profile.name}: moment {q} vanishes", q)
    lg = (6 * math.log(abs(bq)) + 2 * q * log_moment_V(profile, 1)) / (2 * q + 3)
    return CriterionValue(math.exp(lg), 1, q, "singular_al2pe", lg)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    profile: RadialProfile
    b_moments: dict
    v11: float


_CATALOG_ORDER = (
    ("Biweight", lambda: biweight_opt_profile(1, 2)),
    ("Triweight", lambda: catalog_profile("triweight")),
    ("Tricube", lambda: catalog_profile("tricube")),
    ("Cosine", lambda: catalog_profile("cosine")),
    ("Epanechnikov", lambda: epanechnikov_profile(1, 2)),
    ("Triangle", lambda: catalog_profile("triangle")),
    ("Gaussian", lambda: gaussian_profile(1, 2)),
    ("Logistic", lambda: catalog_profile("logistic")),
    ("Sech", lambda: catalog_profile("sech")),
    ("Laplace", lambda: laplace_profile(1, 2)),
)


def named_univariate_catalog(orders=(2, 4, 6)) -> list[CatalogEntry]:
    """The named second-order kernels followed by the hierarchy members of higher order.

    Moments are computed from the kernels; ``b_moments`` holds ``B_{1,i}`` for
    even ``i`` from the kernel's order up to 6.
    """
    entries = []
    builders = list(_CATALOG_ORDER) if 2 in orders else []
    for q in orders:
        if q == 2:
            continue
        builders += [
            (f"B{q}", lambda q=q: biweight_opt_profile(1, q)),
            (f"E{q}", lambda q=q: epanechnikov_profile(1, q)),
            (f"G{q}", lambda q=q: gaussian_profile(1, q)),
            (f"L{q}", lambda q=q: laplace_profile(1, q)),
        ]
    for name, build in builders:
        prof = build()
        top = max(6, prof.q)
        moms = {i: moment_B(prof, i) for i in range(prof.q, top + 1, 2)}
        entries.append(CatalogEntry(name, prof, moms, math.exp(log_moment_V(prof, 1))))
    return entries
