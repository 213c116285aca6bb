"""Moment functionals of radial profiles and geometric constants of the sphere.

For a profile ``G`` on ``[0, inf)`` in dimension ``d``::

    B_{d,i}(G) = int_0^inf x**(d-1+i) G(x) dx
    V_{d,l}(G) = int_0^inf x**(d-1) (G^(l)(x))**2 dx

Closed forms are known for the hierarchy members at the leading order ``i == q``
and for ``l in {0, 1}``; everything else is computed by fixed-order
Gauss-Legendre quadrature. Both routes are exposed so the closed forms can be
cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, NumericError
from .kernels import RadialProfile
from .specialfn import gamma_fn, log_abs_gamma, pochhammer

__all__ = [
    "MomentReport",
    "moment_B",
    "moment_V",
    "moment_report",
    "closed_form_B",
    "closed_form_V",
    "log_abs_moment_B",
    "log_moment_V",
    "geom_constants",
    "b_d",
    "v_d",
    "radial_normalizer",
]

TRUNCATED_NODES = 128
UNBOUNDED_NODES = 256
MAX_MOMENT_INDEX = 14


@lru_cache(maxsize=16)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _quad(func, a: float, b: float, n: int) -> float:
    t, w = _gauss_legendre(n)
    x = 0.5 * (b - a) * t + 0.5 * (b + a)
    return float(0.5 * (b - a) * np.dot(w, func(x)))


def _nodes_for(profile: RadialProfile) -> int:
    return TRUNCATED_NODES if profile.truncated else UNBOUNDED_NODES


def _integrate(profile: RadialProfile, func, nodes: int | None = None) -> tuple[float, float]:
    """Integrate over the effective support; returns (value, |value - half-order value|)."""
    n = nodes or _nodes_for(profile)
    upper = profile.quad_radius()
    fine = _quad(func, 0.0, upper, 2 * n)
    coarse = _quad(func, 0.0, upper, n)
    if not np.isfinite(fine):
        raise NumericError(f"non-finite moment integral for {profile.name}")
    return fine, abs(fine - coarse)


# -- geometric constants -------------------------------------------------------


def geom_constants(d: int, i: Sequence[int]) -> float:
    """Sphere moment ``b_{d,i} = int_{S^{d-1}} prod_j u_j**i_j``.

    Zero whenever any index is odd.
    """
    i = tuple(int(v) for v in i)
    if len(i) != d:
        raise DomainError(f"multi-index of length {len(i)} for dimension {d}")
    if any(v < 0 for v in i):
        raise DomainError("multi-index entries must be nonnegative")
    if any(v % 2 for v in i):
        return 0.0
    log_num = sum(log_abs_gamma((1 + v) / 2) for v in i)
    return 2.0 * math.exp(log_num - log_abs_gamma((d + sum(i)) / 2))


def b_d(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / gamma_fn(d / 2)


def v_d(d: int) -> float:
    """Volume of the unit ball in R^d (equivalently b_{d,(2,0,...,0)})."""
    return 2.0 * math.pi ** (d / 2) / (d * gamma_fn(d / 2))


def radial_normalizer(d: int) -> float:
    """Required value of B_{d,0}(G) for a normalized radial kernel."""
    return 1.0 / b_d(d)


# -- closed forms ---------------------------------------------------------------


def _lg(*args):
    return sum(log_abs_gamma(a) for a in args)


_LPI = math.log(math.pi)
_L2 = math.log(2.0)

# Each closed form returns (sign, log|value|) so that callers working at large
# dimension never materialize values outside the double range.


def _biweight_closed(d, q, what):
    if what == "B":
        return (-1) ** (q // 2 + 1), _lg((d + q) / 2, (d + q + 4) / 2) - _L2 - 0.5 * d * _LPI - _lg((d + 2 * q + 4) / 2)
    if what == "V0":
        rat = 8.0 * (3 * d + 4 * q + 4) / (d * (d + 2 * q) * (d + 2 * q + 2) * (d + 2 * q + 4))
        return 1, math.log(rat) + _lg((d + q) / 2, (d + q + 4) / 2) - d * _LPI - 2 * _lg(q / 2)
    rat = 16.0 / ((d + 2) * (d + 2 * q + 2))
    return 1, math.log(rat) + _lg((d + q + 2) / 2, (d + q + 4) / 2) - d * _LPI - 2 * _lg(q / 2)


def _epanechnikov_closed(d, q, what):
    if what == "B":
        return (-1) ** (q // 2 + 1), _lg((d + q) / 2, (d + q + 2) / 2) - _L2 - 0.5 * d * _LPI - _lg((d + 2 * q + 2) / 2)
    if what == "V0":
        return 1, math.log(4.0 / (d * (d + 2 * q))) + _lg((d + q) / 2, (d + q + 2) / 2) - d * _LPI - 2 * _lg(q / 2)
    return 1, math.log(4.0 / (d + 2)) + 2 * _lg((d + q + 2) / 2) - d * _LPI - 2 * _lg(q / 2)


def _gaussian_closed(d, q, what):
    if what == "B":
        return (-1) ** (q // 2 - 1), (q // 2 - 1) * _L2 + _lg((d + q) / 2) - 0.5 * d * _LPI
    if what == "V0":
        m = q // 2
        lead = 2 * _lg((d + q) / 2) - (d + q - 1) * _L2 - d * _LPI
        terms = []
        for i1 in range(m):
            for i2 in range(m):
                terms.append(
                    (
                        (-1) ** (i1 + i2),
                        (i1 + i2) * _L2
                        + _lg(d / 2 + q - 2 - i1 - i2)
                        - _lg((d + q) / 2 - i1, (d + q) / 2 - i2, m - i1, m - i2, i1 + 1, i2 + 1),
                    )
                )
        top = max(t[1] for t in terms)
        total = sum(sg * math.exp(lv - top) for sg, lv in terms)
        if total <= 0:
            return None
        return 1, lead + top + math.log(total)
    # (polynomial factor, extra power of two, gamma argument offset)
    table = {2: (1.0, 0, 4), 4: (d + 10.0, 3, 6), 6: (d * d + 26.0 * d + 176.0, 8, 8)}
    if q not in table:
        return None
    c, shift, offset = table[q]
    return 1, math.log(c / (d + 2)) + _lg((d + offset) / 2) - (d + shift) * _L2 - d * _LPI


_LAPLACE_Q6 = {
    # d: (B_{d,6}, V_{d,0}, V_{d,1}); rational multiples of powers of pi.
    1: (196200 / 149, 4327215 / 22733824, 5572345 / 22733824),
    2: (2215080 / (307 * math.pi), 28174335 / (193021952 * math.pi**2), 38442103 / (193021952 * math.pi**2)),
    3: (1335600 / (109 * math.pi), 5292791 / (389316608 * math.pi**2), 7306271 / (389316608 * math.pi**2)),
}


def _laplace_closed(d, q, what):
    if q == 6:
        row = _LAPLACE_Q6.get(d)
        if row is None:
            return None
        val = row[{"B": 0, "V0": 1, "V1": 2}[what]]
        return (1 if val > 0 else -1), math.log(abs(val))
    log_half = _lg(d / 2) - 0.5 * d * _LPI
    if q == 2:
        if what == "B":
            return 1, math.log(pochhammer(d, 2) / 2.0) + log_half
        return 1, 2 * _lg(d / 2) - d * _LPI - _lg(d) - (d + 2) * _L2
    if q == 4:
        if what == "B":
            return -1, math.log(pochhammer(d, 4) * (2 * d + 7) / (2.0 * (2 * d + 3))) + log_half
        log_base = 2 * _lg(d / 2) - d * _LPI - _lg(d) - (d + 8) * _L2 - 2 * math.log(2 * d + 3)
        if what == "V0":
            return 1, math.log(pochhammer(d + 2, 2) * (9 * d * d + 73 * d + 96)) + log_base
        return 1, math.log((d + 1) * (9 * d**3 + 133 * d * d + 534 * d + 576)) + log_base
    return None


_CLOSED = {
    "biweight_opt": _biweight_closed,
    "epanechnikov": _epanechnikov_closed,
    "gaussian": _gaussian_closed,
    "laplace": _laplace_closed,
}


def closed_form_log_B(profile: RadialProfile, i: int):
    """(sign, log|B_{d,i}|) from a closed form, or None if none is known."""
    fn = _CLOSED.get(profile.family)
    if fn is None or i != profile.q:
        return None
    out = fn(profile.d, profile.q, "B")
    if out is None:
        return None
    return out[0], out[1] + i * math.log(profile.scale)


def closed_form_log_V(profile: RadialProfile, l: int):
    """(sign, log V_{d,l}) from a closed form (l in {0, 1}), or None."""
    fn = _CLOSED.get(profile.family)
    if fn is None or l not in (0, 1):
        return None
    out = fn(profile.d, profile.q, f"V{l}")
    if out is None:
        return None
    return out[0], out[1] - (profile.d + 2 * l) * math.log(profile.scale)


def closed_form_B(profile: RadialProfile, i: int) -> float | None:
    """Closed-form B_{d,i} if one is known for this profile, else None."""
    out = closed_form_log_B(profile, i)
    return None if out is None else out[0] * math.exp(out[1])


def closed_form_V(profile: RadialProfile, l: int) -> float | None:
    """Closed-form V_{d,l} (l in {0, 1}) if known, else None."""
    out = closed_form_log_V(profile, l)
    return None if out is None else out[0] * math.exp(out[1])


def log_abs_moment_B(profile: RadialProfile, i: int) -> tuple[int, float]:
    """(sign, log|B_{d,i}|), preferring the closed form; sign 0 with -inf for a zero moment."""
    out = closed_form_log_B(profile, i)
    if out is not None:
        return out
    val = moment_B(profile, i, method="quadrature")
    if val == 0.0:
        return 0, -math.inf
    return (1 if val > 0 else -1), math.log(abs(val))


def log_moment_V(profile: RadialProfile, l: int) -> float:
    out = closed_form_log_V(profile, l)
    if out is not None:
        return out[1]
    return math.log(moment_V(profile, l, method="quadrature"))


# -- public moment API ----------------------------------------------------------


def _quad_B(profile: RadialProfile, i: int):
    p = profile.d - 1 + i
    return _integrate(profile, lambda x: x**p * profile.value(x))


def _quad_V(profile: RadialProfile, l: int):
    fn = (profile.value, profile.deriv, profile.deriv2)[l]
    p = profile.d - 1
    return _integrate(profile, lambda x: x**p * fn(x) ** 2)


def moment_B(profile: RadialProfile, i: int, method: str = "auto") -> float:
    """B_{d,i}(G) = int_0^inf x^(d-1+i) G(x) dx.

    Parameters
    ----------
    profile : RadialProfile
    i : int
        Moment index, ``0 <= i <= 14``. Indices above ``q + 2`` are allowed
        so lower-order kernels can be scored at a higher order.
    method : {'auto', 'closed', 'quadrature'}
        ``auto`` uses a closed form when one exists.
    """
    if int(i) != i or i < 0:
        raise DomainError(f"moment index must be a nonnegative integer, got {i!r}")
    if i > MAX_MOMENT_INDEX:
        raise DomainError(f"moment index {i} exceeds the cap {MAX_MOMENT_INDEX}")
    if method in ("auto", "closed"):
        val = closed_form_B(profile, int(i))
        if val is not None:
            return val
        if method == "closed":
            raise NumericError(f"no closed form for B_{{{profile.d},{i}}} of {profile.name}")
    return _quad_B(profile, int(i))[0]


def moment_V(profile: RadialProfile, l: int, method: str = "auto") -> float:
    """V_{d,l}(G) = int_0^inf x^(d-1) (G^(l)(x))^2 dx for l in {0, 1, 2}."""
    if l not in (0, 1, 2):
        raise DomainError(f"derivative order must be 0, 1 or 2, got {l!r}")
    if method in ("auto", "closed"):
        val = closed_form_V(profile, l)
        if val is not None:
            return val
        if method == "closed":
            raise NumericError(f"no closed form for V_{{{profile.d},{l}}} of {profile.name}")
    return _quad_V(profile, l)[0]


@dataclass(frozen=True)
class MomentReport:
    """B and V moments of a profile with per-entry provenance.

    ``provenance`` maps keys ``'B2'``, ``'V0'``, ... to ``'closed_form'`` or
    ``'quadrature'``; ``est_abs_error`` is the largest node-halving discrepancy
    over the quadrature entries (0 if every entry is closed form).
    """

    b_d_i: dict
    v_d_0: float
    v_d_1: float
    provenance: dict = field(default_factory=dict)
    est_abs_error: float = 0.0

    @property
    def b_q(self) -> float:
        return self.b_d_i[max(self.b_d_i)]


def moment_report(profile: RadialProfile, indices: Iterable[int] | None = None) -> MomentReport:
    """Collect B_{d,i} for the requested indices plus V_{d,0}, V_{d,1}."""
    if indices is None:
        indices = range(0, profile.q + 1, 2)
    bvals, prov, err = {}, {}, 0.0
    for i in indices:
        cf = closed_form_B(profile, i)
        if cf is None:
            val, e = _quad_B(profile, i)
            prov[f"B{i}"], err = "quadrature", max(err, e)
        else:
            val = cf
            prov[f"B{i}"] = "closed_form"
        bvals[int(i)] = val
    vv = []
    for l in (0, 1):
        cf = closed_form_V(profile, l)
        if cf is None:
            val, e = _quad_V(profile, l)
            prov[f"V{l}"], err = "quadrature", max(err, e)
        else:
            val = cf
            prov[f"V{l}"] = "closed_form"
        vv.append(val)
    return MomentReport(bvals, vv[0], vv[1], prov, err)
