"""Diagonal Gaussian mixtures as oracle densities, and plug-in asymptotics.

Every partial derivative of a diagonal-covariance Gaussian mixture factorizes
over coordinates into probabilists' Hermite polynomials, so the bias terms of
the kernel mode estimator can be evaluated exactly at the true mode.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DegenerateBiasError, DomainError, SearchFailureError, ShapeError, TopologyError
from .kernels import KernelSpec
from .moments import moment_B, moment_V, v_d
from .specialfn import HERMITE_MAX_DEGREE, hermite_prob, log_abs_gamma

__all__ = [
    "GaussianMixture",
    "AsymptoticQuantities",
    "mixture_partial",
    "find_mode",
    "find_critical_points_1d",
    "find_antimode_1d",
    "asymptotics",
    "asymptotics_from_parts",
    "bbar_closed",
    "bbar_direct",
    "btilde",
    "cdf_1d",
    "preset",
    "PRESETS",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
MODE_GRAD_TOL = 1e-12
TIE_TOL = 1e-14


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture ``sum_k w_k prod_j N(x_j; mu_kj, sigma_kj^2)``.

    Parameters
    ----------
    weights : (K,) array_like
        Positive, summing to one.
    means : (K, d) array_like
    scales : (K, d) array_like
        Per-coordinate standard deviations.
    """

    weights: np.ndarray
    means: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        mu = np.asarray(self.means, dtype=float)
        sd = np.asarray(self.scales, dtype=float)
        if mu.ndim == 1:
            mu = mu[:, None]
        if sd.ndim == 1:
            sd = sd[:, None] * np.ones_like(mu) if sd.shape[0] == mu.shape[0] else np.broadcast_to(sd, mu.shape)
        if mu.shape != sd.shape or mu.shape[0] != w.shape[0]:
            raise ShapeError(f"inconsistent mixture shapes: weights {w.shape}, means {mu.shape}, scales {sd.shape}")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("mixture weights must be positive and sum to 1")
        if np.any(sd <= 0) or not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sd))):
            raise DomainError("mixture scales must be positive and parameters finite")
        for name, arr in (("weights", w), ("means", mu), ("scales", sd)):
            arr = np.array(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    # -- evaluation ---------------------------------------------------------

    def _points(self, x) -> tuple[np.ndarray, bool]:
        """Coerce to an (m, d) array; flag inputs that denote a single point."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            single, x = True, x.reshape(1, 1)
        elif x.ndim == 1 and self.d == 1:
            single, x = False, x[:, None]
        elif x.ndim == 1:
            single, x = True, x[None, :]
        else:
            single = False
        if x.shape[-1] != self.d:
            raise ShapeError(f"expected points of dimension {self.d}, got shape {x.shape}")
        return x, single

    def partial(self, index: Sequence[int], x) -> np.ndarray:
        """Mixed partial derivative ``d^index f`` at points ``x`` of shape (m, d)."""
        index = tuple(int(v) for v in index)
        if len(index) != self.d:
            raise ShapeError(f"multi-index length {len(index)} for dimension {self.d}")
        if any(v < 0 for v in index) or max(index) > HERMITE_MAX_DEGREE:
            raise DomainError(f"partial order per coordinate must be in [0, {HERMITE_MAX_DEGREE}], got {index}")
        pts, single = self._points(x)
        z = (pts[:, None, :] - self.means[None]) / self.scales[None]  # (m, K, d)
        phi = np.exp(-0.5 * z * z) / (_SQRT_2PI * self.scales[None])
        factor = phi
        for j, ij in enumerate(index):
            if ij:
                factor[..., j] *= (-1.0 / self.scales[None, :, j]) ** ij * hermite_prob(ij, z[..., j])
        out = np.prod(factor, axis=2) @ self.weights
        return float(out[0]) if single else out

    def pdf(self, x):
        return self.partial((0,) * self.d, x)

    def grad(self, x) -> np.ndarray:
        pts, single = self._points(x)
        out = np.stack([self.partial(e, pts) for e in np.eye(self.d, dtype=int)], axis=-1)
        return out[0] if single else out

    def hess(self, x) -> np.ndarray:
        pts, single = self._points(x)
        m = pts.shape[0]
        out = np.empty((m, self.d, self.d))
        for j in range(self.d):
            for k in range(j, self.d):
                idx = [0] * self.d
                idx[j] += 1
                idx[k] += 1
                out[:, j, k] = out[:, k, j] = self.partial(idx, pts)
        return out[0] if single else out

    def cdf_1d(self, x):
        """Mixture CDF for d = 1."""
        if self.d != 1:
            raise ShapeError("cdf_1d requires a univariate mixture")
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.means[:, 0]) / self.scales[:, 0]
        out = special.ndtr(z) @ self.weights
        return float(out) if out.ndim == 0 else out

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def covariance(self) -> np.ndarray:
        mu = self.mean()
        second = sum(
            w * (np.diag(s * s) + np.outer(m, m)) for w, m, s in zip(self.weights, self.means, self.scales)
        )
        return second - np.outer(mu, mu)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw an (n, d) sample."""
        comp = rng.choice(self.n_components, size=n, p=self.weights)
        z = rng.standard_normal((n, self.d))
        return self.means[comp] + self.scales[comp] * z

    def shifted(self, c) -> "GaussianMixture":
        return GaussianMixture(self.weights, self.means + np.asarray(c, dtype=float), self.scales)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "means": self.means.tolist(), "scales": self.scales.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "GaussianMixture":
        return cls(np.asarray(obj["weights"]), np.asarray(obj["means"]), np.asarray(obj["scales"]))

    @classmethod
    def from_json(cls, text: str) -> "GaussianMixture":
        return cls.from_dict(json.loads(text))


def mixture_partial(f: GaussianMixture, i: Sequence[int], x) -> float:
    return f.partial(i, x)


def cdf_1d(f: GaussianMixture, x):
    return f.cdf_1d(x)


def _skewed_pair(d: int) -> GaussianMixture:
    return GaussianMixture(
        np.array([0.5, 0.5]), np.stack([np.zeros(d), np.ones(d)]), np.stack([np.ones(d), np.full(d, math.sqrt(2.0))])
    )


PRESETS = {
    "skewed": "half N(0, I) plus half N(1, 2I); unique mode off the component means",
    "bimodal": "univariate 0.5 N(0, 1) + 0.5 N(4, 1.5^2); two modes and one antimode",
}


def preset(name: str, d: int = 1) -> GaussianMixture:
    """Named oracle densities; ``skewed`` exists in every dimension."""
    if name in ("skewed", "table3"):
        return _skewed_pair(d)
    if name == "bimodal":
        if d != 1:
            raise ShapeError("the bimodal preset is univariate")
        return GaussianMixture(np.array([0.5, 0.5]), np.array([[0.0], [4.0]]), np.array([[1.0], [1.5]]))
    raise DomainError(f"unknown mixture preset {name!r}")


# -- critical points --------------------------------------------------------------


def _newton_ascent(f: GaussianMixture, x0: np.ndarray, maximize: bool = True, max_iter: int = 500):
    """Damped Newton / gradient iteration for a local maximum (or minimum)."""
    sgn = 1.0 if maximize else -1.0
    x = np.array(x0, dtype=float).reshape(f.d)
    val = sgn * _at(f.pdf, x)
    for _ in range(max_iter):
        g = sgn * _at(f.grad, x)
        if np.linalg.norm(g) <= MODE_GRAD_TOL:
            return x, True
        h = sgn * _at(f.hess, x)
        step = None
        if np.all(np.linalg.eigvalsh(h) < 0):
            step = -np.linalg.solve(h, g)
        if step is None or not np.all(np.isfinite(step)):
            step = g / max(abs(val), 1e-300)
        elif np.linalg.norm(step) <= 1e-6 * max(1.0, float(np.min(f.scales))):
            # Inside the quadratic-convergence region density differences are
            # at rounding level, so a line search would only stall.
            x = x + step
            val = sgn * _at(f.pdf, x)
            continue
        t = 1.0
        while t > 1e-14:
            cand = x + t * step
            cval = sgn * _at(f.pdf, cand)
            if cval >= val - 1e-18:
                break
            t *= 0.5
        if t <= 1e-14:
            return x, np.linalg.norm(g) <= 1e-9
        x, val = cand, cval
    return x, np.linalg.norm(_at(f.grad, x)) <= MODE_GRAD_TOL


def _at(method, x: np.ndarray):
    """Evaluate a mixture method at one d-vector (unambiguous in every dimension)."""
    return method(x[None, :])[0]


def _mode_candidates(f: GaussianMixture):
    starts = [m for m in f.means] + [f.mean()]
    found = []
    for s in starts:
        x, ok = _newton_ascent(f, s)
        if ok and np.all(np.linalg.eigvalsh(_at(f.hess, x)) < 0):
            if not any(np.linalg.norm(x - y) < 1e-7 for y in found):
                found.append(x)
    return starts, found


def find_mode(f: GaussianMixture) -> np.ndarray:
    """Global maximizer of the mixture density.

    Raises
    ------
    SearchFailureError
        No start converged to a proper local maximum, or two distinct maxima
        tie in density (the global maximizer is not unique).
    """
    starts, found = _mode_candidates(f)
    if not found:
        raise SearchFailureError(f"no local maximum found from starts {[s.tolist() for s in starts]}")
    vals = np.array([_at(f.pdf, x) for x in found])
    order = np.argsort(-vals, kind="stable")
    if len(found) > 1 and vals[order[0]] - vals[order[1]] <= TIE_TOL:
        raise SearchFailureError(
            f"global maximizer not unique: {found[order[0]].tolist()} and {found[order[1]].tolist()} tie"
        )
    return found[order[0]]


def find_critical_points_1d(f: GaussianMixture, grid_size: int = 4001):
    """All local maxima and minima of a univariate mixture, located on a grid and Newton-polished."""
    if f.d != 1:
        raise ShapeError("univariate mixture required")
    lo = float(np.min(f.means - 6 * f.scales))
    hi = float(np.max(f.means + 6 * f.scales))
    xs = np.linspace(lo, hi, grid_size)
    g = f.grad(xs[:, None])[:, 0]
    maxima, minima = [], []
    for k in np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]:
        a, b = xs[k], xs[k + 1]
        x = _polish_root(lambda t: f.partial((1,), t), lambda t: f.partial((2,), t), a, b)
        (maxima if f.partial((2,), x) < 0 else minima).append(x)
    return maxima, minima


def _polish_root(fn, dfn, a: float, b: float, tol: float = 1e-15) -> float:
    """Safeguarded Newton on a bracketing interval."""
    fa = fn(a)
    x = 0.5 * (a + b)
    for _ in range(200):
        fx = fn(x)
        if fx == 0.0:
            return x
        if np.sign(fx) == np.sign(fa):
            a, fa = x, fx
        else:
            b = x
        dx = dfn(x)
        cand = x - fx / dx if dx != 0 else 0.5 * (a + b)
        if not (min(a, b) < cand < max(a, b)):
            cand = 0.5 * (a + b)
        if abs(cand - x) <= tol * max(1.0, abs(x)):
            return cand
        x = cand
    return x


def find_antimode_1d(f: GaussianMixture) -> float:
    """Local minimizer of the density between its two highest modes.

    Raises
    ------
    TopologyError
        If the density has fewer than two modes.
    """
    maxima, minima = find_critical_points_1d(f)
    if len(maxima) < 2:
        raise TopologyError(f"density has {len(maxima)} mode(s); an antimode needs two")
    vals = f.pdf(np.array(maxima)[:, None])
    a, b = sorted(np.array(maxima)[np.argsort(-vals, kind="stable")[:2]])
    inside = [m for m in minima if a < m < b]
    vals_in = f.pdf(np.array(inside)[:, None])
    return float(inside[int(np.argmin(vals_in))])


# -- asymptotic quantities -------------------------------------------------------


def _partial_at(f: GaussianMixture, idx, at) -> float:
    return float(f.partial(idx, np.asarray(at, dtype=float).reshape(1, f.d))[0])


def _multi_indices(d: int, total: int):
    for combo in itertools.combinations_with_replacement(range(d), total):
        idx = [0] * d
        for c in combo:
            idx[c] += 1
        yield tuple(idx)


def bbar_closed(f: GaussianMixture, q: int, at) -> np.ndarray:
    """``pi^{d/2} / (2^{q-1} Gamma((d+q)/2) Gamma(q/2+1)) * grad Laplacian^{q/2} f`` at ``at``."""
    d = f.d
    m = q // 2
    grad_lap = np.zeros(d)
    for mi in _multi_indices(d, m):
        coef = math.factorial(m) / math.prod(math.factorial(v) for v in mi)
        for j in range(d):
            idx = [2 * v for v in mi]
            idx[j] += 1
            grad_lap[j] += coef * _partial_at(f, idx, at)
    pref = math.exp(0.5 * d * math.log(math.pi) - (q - 1) * math.log(2.0) - log_abs_gamma((d + q) / 2) - log_abs_gamma(m + 1))
    return pref * grad_lap


def bbar_direct(f: GaussianMixture, q: int, at) -> np.ndarray:
    """``sum_{|i|=q} grad d^i f * b_{d,i} / i!``, the unreduced form of :func:`bbar_closed`."""
    from .moments import geom_constants

    d = f.d
    out = np.zeros(d)
    for mi in _multi_indices(d, q):
        c = geom_constants(d, mi)
        if c == 0.0:
            continue
        c /= math.prod(math.factorial(v) for v in mi)
        for j in range(d):
            idx = list(mi)
            idx[j] += 1
            out[j] += c * _partial_at(f, idx, at)
    return out


def btilde(f: GaussianMixture, q: int, at) -> np.ndarray:
    """``(2/q!) grad sum_k d_k^q f`` at ``at``."""
    d = f.d
    out = np.zeros(d)
    for j in range(d):
        for k in range(d):
            idx = [0] * d
            idx[k] += q
            idx[j] += 1
            out[j] += _partial_at(f, idx, at)
    return 2.0 / math.factorial(q) * out


@dataclass(frozen=True)
class AsymptoticQuantities:
    """Plug-in bias/variance ingredients and the resulting optimal bandwidth.

    ``amse(h) = h^{2q} |A b|^2 + tr(A V A) / (n h^{d+2})``.
    """

    mode: np.ndarray
    A: np.ndarray
    b: np.ndarray
    V: np.ndarray
    h_opt: float
    amse_opt: float
    n: int
    d: int
    q: int
    extras: dict = field(default_factory=dict)

    @property
    def bias_sq(self) -> float:
        ab = self.A @ self.b
        return float(ab @ ab)

    @property
    def trace_avar(self) -> float:
        return float(np.trace(self.A @ self.V @ self.A))

    def amse(self, h: float) -> float:
        """Asymptotic MSE at bandwidth ``h`` for the stored sample size."""
        return h ** (2 * self.q) * self.bias_sq + self.trace_avar / (self.n * h ** (self.d + 2))

    def with_n(self, n: int) -> "AsymptoticQuantities":
        return asymptotics_from_parts(self.mode, self.A, self.b, self.V, n, self.d, self.q, self.extras)


def asymptotics_from_parts(mode, A, b, V, n: int, d: int, q: int, extras=None) -> AsymptoticQuantities:
    """Optimal bandwidth and optimized AMSE from A, b, V (``d`` is the estimator dimension)."""
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    ab = A @ b
    bias_sq = float(ab @ ab)
    tr = float(np.trace(A @ V @ A))
    if not bias_sq > 0 or not np.isfinite(bias_sq):
        raise DegenerateBiasError("leading bias A b vanishes; the optimal bandwidth diverges")
    expo = 1.0 / (d + 2 * q + 2)
    h = ((d + 2) * tr / (2 * q * n * bias_sq)) ** expo
    # Substituting h into the AMSE gives the factor (d+2q+2)/(d+2) in front.
    amse = (
        (d + 2 * q + 2) / (d + 2)
        * bias_sq ** ((d + 2) * expo)
        * ((d + 2) / (2 * q * n) * tr) ** (2 * q * expo)
    )
    return AsymptoticQuantities(np.asarray(mode), A, b, V, float(h), float(amse), int(n), d, q, dict(extras or {}))


def asymptotics(f: GaussianMixture, spec: KernelSpec, n: int, at=None) -> AsymptoticQuantities:
    """Asymptotic bias, variance, optimal bandwidth and AMSE of the KME.

    Parameters
    ----------
    f : GaussianMixture
        True density.
    spec : KernelSpec
        Radial-basis or product kernel.
    n : int
        Sample size.
    at : array_like, optional
        Critical point to expand around (defaults to the global mode). Passing
        an antimode gives the corresponding quantities for its estimator.

    Raises
    ------
    DegenerateBiasError
        When the leading bias vanishes (e.g. a symmetric density).
    """
    if spec.d != f.d:
        raise ShapeError(f"kernel dimension {spec.d} differs from density dimension {f.d}")
    d, q = f.d, spec.q
    theta = find_mode(f) if at is None else np.atleast_1d(np.asarray(at, dtype=float)).reshape(f.d)
    H = _at(f.hess, theta)
    eig = np.linalg.eigvalsh(H)
    if np.min(np.abs(eig)) <= 1e-14 * max(1.0, np.max(np.abs(eig))):
        raise DomainError("Hessian of the density is singular at the expansion point")
    A = np.linalg.inv(H)
    A = 0.5 * (A + A.T)
    f0 = float(_at(f.pdf, theta))
    prof = spec.profile
    if spec.structure == "radial":
        b = moment_B(prof, q) * bbar_closed(f, q, theta)
        V = f0 * v_d(d) * moment_V(prof, 1) * np.eye(d)
    else:
        b = moment_B(prof, q) * btilde(f, q, theta)
        V = f0 * 2.0**d * moment_V(prof, 1) * moment_V(prof, 0) ** (d - 1) * np.eye(d)
    return asymptotics_from_parts(theta, A, b, V, n, d, q, {"density_at_mode": f0, "hessian": H})
