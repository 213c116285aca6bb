"""Kernel density estimation and the mode-type estimators built on it.

``kde``/``kme``/``isme`` operate on an (n, d) sample; ``mlr_*`` fit a modal
linear regression with scalar response; ``cluster_1d`` splits a univariate
sample at the antimode of its density estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .density import GaussianMixture, asymptotics_from_parts, find_mode
from .errors import DesignError, DomainError, SearchFailureError, ShapeError, TopologyError
from .kernels import KernelSpec
from .moments import moment_B, moment_V

__all__ = [
    "EstimateReport",
    "KDE",
    "as_sample",
    "kde",
    "kde_grad",
    "kde_hess",
    "kme",
    "isme",
    "mlr_objective",
    "mlr_fit",
    "mlr_amse_oracle",
    "least_squares",
    "cluster_1d",
]

N_SEEDS = 20
MAX_SEED_CANDIDATES = 256
SEED_RANKING_POINTS = 4096
GRAD_RTOL = 1e-10
STEP_RTOL = 1e-12
TIE_TOL = 1e-14
MAX_ITER = 200
# Upper bound on (evaluation points x window size) handled in one vectorized block.
_BLOCK = 1 << 20


@dataclass(frozen=True)
class EstimateReport:
    """Outcome of a multi-start search.

    ``converged`` means either the gradient norm fell below tolerance or, at a
    maximum located on a kink of a non-smooth kernel, no ascent step of length
    above ``1e-12 h`` exists; ``grad_norm`` is reported either way.
    """

    estimate: np.ndarray
    objective_value: float
    iterations: int
    starts_tried: int
    converged: bool
    grad_norm: float = float("nan")
    ties: int = 0
    extras: dict = field(default_factory=dict)


def as_sample(points) -> np.ndarray:
    """Validate and coerce to a finite (n, d) float array."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"sample must be an (n, d) array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("sample contains non-finite entries")
    return x


class KDE:
    """Kernel density estimate with vectorized value, gradient and Hessian.

    For truncated kernels the sum at each evaluation point is restricted to the
    sample points whose first coordinate lies within ``h * radius``, found by
    binary search on the sorted first coordinate.
    """

    def __init__(self, sample, spec: KernelSpec, h: float):
        x = as_sample(sample)
        if x.shape[1] != spec.d:
            raise ShapeError(f"sample dimension {x.shape[1]} differs from kernel dimension {spec.d}")
        if not (h > 0 and math.isfinite(h)):
            raise DomainError(f"bandwidth must be positive and finite, got {h!r}")
        self.spec, self.h = spec, float(h)
        self.n, self.d = x.shape
        self.points = x
        order = np.argsort(x[:, 0], kind="stable")
        self._sorted = x[order]
        self._keys = self._sorted[:, 0]
        self._reach = self.h * spec.radius if spec.truncated else math.inf

    def _windows(self, pts: np.ndarray):
        if not math.isfinite(self._reach):
            m = pts.shape[0]
            return np.zeros(m, dtype=np.int64), np.full(m, self.n, dtype=np.int64)
        lo = np.searchsorted(self._keys, pts[:, 0] - self._reach, side="left")
        hi = np.searchsorted(self._keys, pts[:, 0] + self._reach, side="right")
        return lo, hi

    def evaluate(self, x, order: int = 0):
        """Return ``(f, grad, hess)`` at points ``x`` (m, d); unused orders are None."""
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :] if self.d > 1 else pts[:, None]
        if pts.shape[-1] != self.d:
            raise ShapeError(f"expected points of dimension {self.d}, got shape {pts.shape}")
        m = pts.shape[0]
        f = np.zeros(m)
        g = np.zeros((m, self.d)) if order >= 1 else None
        H = np.zeros((m, self.d, self.d)) if order >= 2 else None
        lo, hi = self._windows(pts)
        width = hi - lo
        start = 0
        while start < m:
            # Grow the block until it reaches the element budget.
            stop, acc = start, 0
            while stop < m and (acc + max(width[stop], 1) <= _BLOCK or stop == start):
                acc += max(width[stop], 1)
                stop += 1
            self._accumulate(pts, lo, width, start, stop, order, f, g, H)
            start = stop
        h, n, d = self.h, self.n, self.d
        f /= n * h**d
        if g is not None:
            g /= n * h ** (d + 1)
        if H is not None:
            H /= n * h ** (d + 2)
        return f, g, H

    def _accumulate(self, pts, lo, width, a, b, order, f, g, H):
        wmax = int(width[a:b].max()) if b > a else 0
        if wmax == 0:
            return
        k = b - a
        if wmax == self.n and np.all(width[a:b] == self.n):
            # Every evaluation point sees the whole sample: plain broadcasting.
            u = (pts[a:b, None, :] - self._sorted[None, :, :]) / self.h
            valid = None
        else:
            offs = np.arange(wmax)
            idx = lo[a:b, None] + offs[None, :]
            valid = offs[None, :] < width[a:b, None]
            idx = np.where(valid, idx, 0)
            u = (pts[a:b, None, :] - self._sorted[idx]) / self.h  # (k, w, d)
        flat = u.reshape(-1, self.d)
        if order == 0:
            val = self.spec.value(flat).reshape(k, wmax)
            if valid is not None:
                val = np.where(valid, val, 0.0)
            f[a:b] += val.sum(axis=1)
            return
        val, grad, hess = self.spec.derivatives(flat, order=order)
        val = val.reshape(k, wmax)
        grad = grad.reshape(k, wmax, self.d)
        if valid is not None:
            val = np.where(valid, val, 0.0)
            grad = np.where(valid[:, :, None], grad, 0.0)
        f[a:b] += val.sum(axis=1)
        g[a:b] += grad.sum(axis=1)
        if order >= 2:
            hh = hess.reshape(k, wmax, self.d, self.d)
            if valid is not None:
                hh = np.where(valid[:, :, None, None], hh, 0.0)
            H[a:b] += hh.sum(axis=1)

    def __call__(self, x):
        return self.evaluate(x, 0)[0]

    def nearest_sample_points(self, x: np.ndarray, radius: float) -> np.ndarray:
        """Indices (into the sorted sample) of points within ``radius`` of ``x``."""
        lo = np.searchsorted(self._keys, x[0] - radius, side="left")
        hi = np.searchsorted(self._keys, x[0] + radius, side="right")
        cand = np.arange(lo, hi)
        if cand.size == 0:
            return cand
        dist = np.linalg.norm(self._sorted[cand] - x, axis=1)
        return cand[dist <= radius]


def _single_point(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != d:
        raise ShapeError(f"expected a point of dimension {d}, got {x.shape[0]}")
    return x[None, :]


def kde(sample, spec: KernelSpec, h: float, x) -> float:
    """``f_n(x) = (n h^d)^-1 sum_i K((x - X_i)/h)``."""
    est = KDE(sample, spec, h)
    return float(est.evaluate(_single_point(x, est.d), 0)[0][0])


def kde_grad(sample, spec: KernelSpec, h: float, x) -> np.ndarray:
    est = KDE(sample, spec, h)
    return est.evaluate(_single_point(x, est.d), 1)[1][0]


def kde_hess(sample, spec: KernelSpec, h: float, x) -> np.ndarray:
    est = KDE(sample, spec, h)
    return est.evaluate(_single_point(x, est.d), 2)[2][0]


# -- multi-start ascent -------------------------------------------------------------


def _batched_ascent(evaluate, x0: np.ndarray, length_scale: float, grad_tol_fn, max_iter: int = MAX_ITER, jump=None):
    """Maximize a smooth-almost-everywhere objective from several starts at once.

    ``evaluate(points, order)`` returns (values, gradients, hessians) for an
    (m, p) array. Newton steps are taken where the Hessian is negative
    definite, otherwise a gradient step scaled by ``length_scale**2 / value``;
    every step is capped at ``length_scale`` and accepted by Armijo backtracking.

    ``jump(point, radius)``, if given, proposes candidate points near ``point``;
    when backtracking stalls (typically at a kink) the best candidate is taken
    if it improves the objective. Starts that come within ``1e-9 *
    length_scale`` of a lower-indexed start are merged into it.
    """
    x = np.array(x0, dtype=float)
    m, p = x.shape
    f, g, H = evaluate(x, 2)
    active = np.ones(m, dtype=bool)
    converged = np.zeros(m, dtype=bool)
    iters = np.zeros(m, dtype=int)
    alias = np.arange(m)
    prev_s, prev_g = np.zeros((m, p)), np.zeros((m, p))
    has_prev = np.zeros(m, dtype=bool)
    min_step = STEP_RTOL * length_scale
    merge_tol = 1e-9 * length_scale
    for _ in range(max_iter):
        gnorm = np.linalg.norm(g, axis=1)
        done = gnorm <= grad_tol_fn(f)
        converged |= active & done
        active &= ~done
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        steps = np.empty((idx.size, p))
        for r, i in enumerate(idx):
            step = None
            try:
                w = np.linalg.eigvalsh(H[i])
                if np.all(w < 0):
                    step = -np.linalg.solve(H[i], g[i])
            except np.linalg.LinAlgError:
                step = None
            if step is None or not np.all(np.isfinite(step)) or g[i] @ step <= 0:
                # Secant (Barzilai-Borwein) length along the previous step when
                # that step saw negative curvature, else a value-scaled gradient step.
                sy = prev_s[i] @ (g[i] - prev_g[i])
                if has_prev[i] and sy < 0:
                    step = g[i] * ((prev_s[i] @ prev_s[i]) / -sy)
                else:
                    step = g[i] * (length_scale**2 / max(abs(f[i]), 1e-300))
            norm = np.linalg.norm(step)
            if norm > length_scale:
                step *= length_scale / norm
            steps[r] = step
        step_len = np.linalg.norm(steps, axis=1)
        t = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        new_x = x[idx].copy()
        jumped = np.zeros(idx.size, dtype=bool)
        for ls in range(64):
            sub = np.nonzero(pending)[0]
            cand = x[idx[sub]] + t[sub, None] * steps[sub]
            fc = evaluate(cand, 0)[0]
            f0 = f[idx[sub]]
            slope = np.einsum("ij,ij->i", g[idx[sub]], steps[sub])
            ok = fc >= f0 + 1e-4 * t[sub] * slope
            # Tiny gains below rounding are accepted as a non-decrease.
            ok |= (fc >= f0) & (t[sub] * step_len[sub] <= min_step * 1e3)
            new_x[sub[ok]] = cand[ok]
            pending[sub[ok]] = False
            t[sub[~ok]] *= 0.5
            if jump is not None and ls == 7:
                for r in sub[~ok]:
                    i = idx[r]
                    pts = jump(x[i], step_len[r])
                    if len(pts):
                        fv = evaluate(pts, 0)[0]
                        j = int(np.argmax(fv))
                        if fv[j] > f[i]:
                            new_x[r], pending[r], jumped[r] = pts[j], False, True
            stalled = pending & (t * step_len < min_step)
            if stalled.any():
                pending[stalled] = False
                t[stalled] = 0.0
            if not pending.any():
                break
        moved = t > 0
        # Starts whose best step is shorter than the floor sit at a (kink) maximum.
        still = idx[~moved]
        converged[still] = True
        active[still] = False
        upd = idx[moved]
        if upd.size:
            prev_s[upd] = new_x[moved] - x[upd]
            prev_g[upd] = g[upd]
            has_prev[upd] = ~jumped[moved]
            x[upd] = new_x[moved]
            iters[upd] += 1
            fu, gu, Hu = evaluate(x[upd], 2)
            f[upd], g[upd], H[upd] = fu, gu, Hu
            tiny = (t[moved] * step_len[moved] < min_step) & ~jumped[moved]
            converged[upd[tiny]] = True
            active[upd[tiny]] = False
        # Merge coinciding active starts into the lowest index.
        act = np.nonzero(active)[0]
        for a_pos, i in enumerate(act):
            if not active[i]:
                continue
            for j in act[a_pos + 1 :]:
                if active[j] and np.linalg.norm(x[j] - x[i]) <= merge_tol:
                    alias[j] = i
                    active[j] = False
    for j in range(m):
        i = alias[j]
        while alias[i] != i:
            i = alias[i]
        if i != j:
            x[j], f[j], g[j], converged[j] = x[i], f[i], g[i], converged[i]
            iters[j] += iters[i]
    return x, f, g, iters, converged


def _select_best(f: np.ndarray):
    best = float(np.max(f))
    tied = np.nonzero(f >= best - TIE_TOL * max(1.0, abs(best)))[0]
    return int(tied[0]), tied.size


def _seed_points(est: KDE, n_seeds: int) -> np.ndarray:
    stride = max(1, math.ceil(est.n / MAX_SEED_CANDIDATES))
    cand = est.points[::stride]
    # Candidates are only ranked here, so a thinned sample is accurate enough.
    thin = max(1, math.ceil(est.n / SEED_RANKING_POINTS))
    ranker = est if thin == 1 else KDE(est.points[::thin], est.spec, est.h)
    vals = ranker.evaluate(cand, 0)[0]
    top = np.argsort(-vals, kind="stable")[:n_seeds]
    return cand[top]


def kme(sample, spec: KernelSpec, h: float, starts=None, n_seeds: int = N_SEEDS) -> EstimateReport:
    """Kernel mode estimate: the maximizer of the KDE.

    Parameters
    ----------
    sample : (n, d) array_like
    spec : KernelSpec
    h : float
        Bandwidth.
    starts : (m, d) array_like, optional
        Explicit start points. By default the ``n_seeds`` sample points with the
        largest KDE value among an evenly strided subset of at most 256 sample
        points are used; for n > 4096 the ranking KDE is built from an evenly
        strided subsample of 4096 points.

    Raises
    ------
    SearchFailureError
        If no start converges.
    """
    est = KDE(sample, spec, h)
    x0 = _seed_points(est, n_seeds) if starts is None else as_sample(starts)
    if x0.shape[1] != est.d:
        raise ShapeError("start points have the wrong dimension")

    def grad_tol(fv):
        return GRAD_RTOL * np.maximum(np.abs(fv), 1e-300) / est.h

    def jump(point, radius):
        near = est.nearest_sample_points(point, radius)
        if near.size > 4:
            dist = np.linalg.norm(est._sorted[near] - point, axis=1)
            near = near[np.argsort(dist, kind="stable")[:4]]
        return est._sorted[near]

    x, f, g, iters, conv = _batched_ascent(est.evaluate, x0, est.h, grad_tol, jump=jump)
    # A maximum on a kink coincides with a sample point (Laplace-type kernels);
    # recover it exactly when one is within rounding distance.
    for i in range(x.shape[0]):
        near = est.nearest_sample_points(x[i], 1e-6 * est.h)
        if near.size:
            cand = est._sorted[near]
            fc = est.evaluate(cand, 0)[0]
            j = int(np.argmax(fc))
            if fc[j] >= f[i]:
                x[i], f[i] = cand[j], fc[j]
                g[i] = est.evaluate(cand[j : j + 1], 1)[1][0]
    if not conv.any():
        raise SearchFailureError(f"none of {x0.shape[0]} starts converged")
    f_masked = np.where(conv, f, -np.inf)
    best, ties = _select_best(f_masked)
    return EstimateReport(
        x[best].copy(), float(f[best]), int(iters[best]), x0.shape[0], bool(conv[best]), float(np.linalg.norm(g[best])), ties
    )


def isme(sample, spec: KernelSpec, h: float) -> EstimateReport:
    """In-sample mode estimate: the sample point with the largest KDE value (lowest index on ties)."""
    x = as_sample(sample)
    est = KDE(x, spec, h)
    vals = est.evaluate(x, 0)[0]
    best, ties = _select_best(vals)
    return EstimateReport(x[best].copy(), float(vals[best]), 0, x.shape[0], True, ties=ties, extras={"index": best})


# -- modal linear regression --------------------------------------------------------


def _mlr_inputs(x_sample, y_sample):
    X = as_sample(x_sample)
    Y = np.asarray(y_sample, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} covariate rows but {Y.shape[0]} responses")
    if not np.all(np.isfinite(Y)):
        raise DomainError("responses contain non-finite entries")
    return X, Y


def mlr_objective(x_sample, y_sample, spec: KernelSpec, h: float, omega) -> float:
    """``O_n(Omega) = (n h^{dY})^-1 sum_i K((Omega X_i - Y_i)/h)``."""
    X, Y = _mlr_inputs(x_sample, y_sample)
    W = np.atleast_2d(np.asarray(omega, dtype=float))
    if W.shape != (Y.shape[1], X.shape[1]):
        raise ShapeError(f"Omega must have shape {(Y.shape[1], X.shape[1])}, got {W.shape}")
    if spec.d != Y.shape[1]:
        raise ShapeError("kernel dimension must equal the response dimension")
    if not h > 0:
        raise DomainError("bandwidth must be positive")
    u = (X @ W.T - Y) / h
    return float(np.sum(spec.value(u)) / (X.shape[0] * h ** Y.shape[1]))


def least_squares(x_sample, y_sample) -> np.ndarray:
    X, Y = _mlr_inputs(x_sample, y_sample)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DesignError("design matrix is rank deficient")
    return np.linalg.lstsq(X, Y, rcond=None)[0].T


def mlr_fit(x_sample, y_sample, spec: KernelSpec, h: float, n_perturb: int = 4, seed: int = 0) -> EstimateReport:
    """Modal linear regression for a scalar response.

    Starts are the least-squares coefficients and ``n_perturb`` Gaussian
    perturbations of them (scale ``h`` divided by the covariate spread).
    """
    X, Y = _mlr_inputs(x_sample, y_sample)
    if Y.shape[1] != 1:
        raise ShapeError("mlr_fit supports a scalar response only")
    if spec.d != 1:
        raise ShapeError("kernel must be univariate for a scalar response")
    if not h > 0:
        raise DomainError("bandwidth must be positive")
    beta_ls = least_squares(X, Y)[0]
    y = Y[:, 0]
    n, p = X.shape
    spread = np.maximum(np.sqrt(np.mean(X * X, axis=0)), 1e-12)
    rng = np.random.default_rng(seed)
    starts = [beta_ls] + [beta_ls + rng.standard_normal(p) * h / spread for _ in range(n_perturb)]
    starts = np.array(starts)

    def evaluate(W, order):
        r = (W @ X.T - y[None, :]) / h  # (m, n)
        m = W.shape[0]
        if order == 0:
            val = spec.value(r.reshape(-1, 1)).reshape(m, n)
            return val.sum(axis=1) / (n * h), None, None
        val, gr, hs = spec.derivatives(r.reshape(-1, 1), order=order)
        val = val.reshape(m, n)
        d1 = gr[:, 0].reshape(m, n)
        f = val.sum(axis=1) / (n * h)
        g = d1 @ X / (n * h * h)
        H = None
        if order >= 2:
            d2 = hs[:, 0, 0].reshape(m, n)
            H = np.einsum("mi,ij,ik->mjk", d2, X, X) / (n * h**3)
        return f, g, H

    scale = h / float(np.max(spread))

    def grad_tol(fv):
        return 1e-8 * np.maximum(np.abs(fv), 1e-300) / scale

    W, f, g, iters, conv = _batched_ascent(evaluate, starts, scale, grad_tol)
    if not conv.any():
        raise SearchFailureError(f"none of {starts.shape[0]} MLR starts converged")
    best, ties = _select_best(np.where(conv, f, -np.inf))
    return EstimateReport(
        W[best].copy(), float(f[best]), int(iters[best]), starts.shape[0], bool(conv[best]), float(np.linalg.norm(g[best])), ties,
        extras={"least_squares": beta_ls},
    )


def mlr_amse_oracle(x_dist: GaussianMixture, noise: GaussianMixture, theta, spec: KernelSpec, n: int, intercept: bool = True):
    """Optimal bandwidth and AMSE of the MLR coefficient estimate (scalar response).

    The response is ``theta . X + e`` where ``X`` is ``(1, Z)`` (with
    ``intercept``) or ``Z``, ``Z ~ x_dist`` and ``e ~ noise`` independent of
    ``Z`` with its mode at 0. The moments of ``X`` are computed exactly from the
    mixture.

    Returns
    -------
    AsymptoticQuantities
    """
    if noise.d != 1 or spec.d != 1:
        raise ShapeError("scalar response required")
    q = spec.q
    mode = find_mode(noise)
    if abs(mode[0]) > 1e-9:
        raise DomainError(f"noise mode must be at 0, found {mode[0]:.3g}")
    mu, cov = x_dist.mean(), x_dist.covariance()
    if intercept:
        ex = np.concatenate([[1.0], mu])
        exx = np.empty((ex.size, ex.size))
        exx[0, 0] = 1.0
        exx[0, 1:] = exx[1:, 0] = mu
        exx[1:, 1:] = cov + np.outer(mu, mu)
    else:
        ex, exx = mu, cov + np.outer(mu, mu)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != ex.shape[0]:
        raise ShapeError(f"theta has length {theta.shape[0]}, expected {ex.shape[0]}")
    g0 = float(noise.pdf(np.zeros((1, 1)))[0])
    g2 = float(noise.partial((2,), np.zeros((1, 1)))[0])
    gq1 = float(noise.partial((q + 1,), np.zeros((1, 1)))[0])
    A = np.linalg.inv(g2 * exx)
    b = ex * (2.0 * moment_B(spec.profile, q) / math.factorial(q)) * gq1
    V = g0 * 2.0 * moment_V(spec.profile, 1) * exx
    return asymptotics_from_parts(theta, A, b, V, n, 1, q)


# -- univariate clustering ----------------------------------------------------------


def cluster_1d(sample, spec: KernelSpec, h: float, truth: GaussianMixture | None = None, grid_size: int = 512):
    """Estimate the antimode of a univariate sample and its clustering error.

    Returns
    -------
    zeta_n : float
        Local minimizer of the KDE between its global mode and its most
        prominent other mode (found on a grid, then refined).
    cer : float or None
        ``|F(zeta_n) - F(zeta)|`` under ``truth`` (None without a truth).

    Raises
    ------
    TopologyError
        If the KDE is not at least bimodal on the grid.
    """
    x = as_sample(sample)
    if x.shape[1] != 1 or spec.d != 1:
        raise ShapeError("cluster_1d needs a univariate sample and kernel")
    est = KDE(x, spec, h)
    grid = np.linspace(x.min(), x.max(), grid_size)
    vals = est.evaluate(grid[:, None], 0)[0]
    interior = np.nonzero((vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    if interior.size < 2:
        raise TopologyError(f"KDE has {interior.size} mode(s) on the grid; bandwidth {h:.4g} too large?")
    # The global mode, and the local maximum separated from it by the deepest
    # valley relative to its own height (largest prominence).
    main = int(interior[np.argmax(vals[interior])])
    others = interior[interior != main]
    prom = np.array([vals[m] - vals[min(m, main):max(m, main) + 1].min() for m in others])
    second = int(others[np.argmax(prom)])
    top = sorted((main, second))
    seg = slice(top[0], top[1] + 1)
    k = top[0] + int(np.argmin(vals[seg]))
    fn = lambda t: float(est.evaluate(np.array([[t]]), 0)[0][0])
    res = optimize.minimize_scalar(fn, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden", tol=1e-10)
    z = float(res.x)
    lo, hi = grid[k - 1], grid[k + 1]
    for _ in range(50):
        _, g1, g2 = est.evaluate(np.array([[z]]), 2)
        d1, d2 = g1[0, 0], g2[0, 0, 0]
        if d2 <= 0:
            break
        nz = z - d1 / d2
        if not lo < nz < hi or fn(nz) > fn(z):
            break
        if abs(nz - z) <= 1e-14 * max(1.0, abs(z)):
            z = nz
            break
        z = nz
    if truth is None:
        return z, None
    from .density import find_antimode_1d

    zeta = find_antimode_1d(truth)
    return z, float(abs(truth.cdf_1d(z) - truth.cdf_1d(zeta)))
