"""Seeded Monte Carlo campaigns for the mode-type estimators.

Every trial draws its sample from an independent substream keyed by
``(trial, n-index, kernel-index)`` of the campaign seed, so any cell can be
re-run in isolation and results do not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .density import GaussianMixture, asymptotics, find_antimode_1d, find_mode, preset
from .errors import DegenerateBiasError, DomainError, ModalKitError, UndefinedTestError
from .estimators import cluster_1d, isme, kme, least_squares, mlr_amse_oracle, mlr_fit
from .kernels import make_kernel

__all__ = [
    "SimConfig",
    "CellResult",
    "SimResult",
    "welch_test",
    "run_campaign",
    "run_mse_campaign",
    "run_cer_campaign",
    "run_mlr_campaign",
    "worker_count",
    "CSV_COLUMNS",
]

TASKS = ("kme", "isme", "mlr", "cluster")
MAX_FAILURE_RATE = 0.01
CSV_COLUMNS = (
    "task", "d", "q", "kernel", "n", "trials", "failures", "mse", "sd", "mse_ratio",
    "welch_p", "amse", "h", "mean_abs_error", "mean_cer", "amcer",
)


def welch_test(errors_a, errors_b) -> float:
    """Two-sided Welch t-test p-value for equal means of two samples.

    Raises
    ------
    UndefinedTestError
        If either sample has fewer than two values or both have zero variance.
    """
    a = np.asarray(errors_a, dtype=float)
    b = np.asarray(errors_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise UndefinedTestError("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0.0:
        raise UndefinedTestError("both samples have zero variance")
    diff = abs(a.mean() - b.mean())
    t = diff / math.sqrt(se2)
    # Welch-Satterthwaite degrees of freedom.
    terms = [v * v / (m - 1) for v, m in ((va, a.size), (vb, b.size)) if v > 0]
    dof = se2 * se2 / sum(terms)
    return float(min(1.0, 2.0 * stats.t.sf(t, dof)))


@dataclass(frozen=True)
class SimConfig:
    """Campaign description.

    ``density`` is a preset name or a mixture dictionary. For ``task='mlr'``
    it is the noise law before centring at its mode, ``x_dist`` the covariate
    law and ``theta`` the coefficients (intercept first); for ``'cluster'`` it
    must be univariate and bimodal.
    """

    d: int = 1
    q: int = 2
    kernels: tuple = ("biweight", "epanechnikov", "gaussian", "laplace")
    n_grid: tuple = (100, 1600, 25600)
    trials: int = 300
    seed: int = 0
    density: object = "skewed"
    task: str = "kme"
    reference: str | None = None
    theta: tuple = (1.0, 2.0)
    x_dist: object = None

    def __post_init__(self):
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        if self.task not in TASKS:
            raise DomainError(f"task must be one of {TASKS}, got {self.task!r}")
        if int(self.trials) != self.trials or self.trials < 2:
            raise DomainError("trials must be an integer >= 2")
        if not self.n_grid or list(self.n_grid) != sorted(self.n_grid) or self.n_grid[0] < 2:
            raise DomainError("n_grid must be non-empty, ascending, with sizes >= 2")
        if not self.kernels:
            raise DomainError("at least one kernel is required")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.reference is not None and self.reference not in self.kernels:
            raise DomainError(f"reference kernel {self.reference!r} is not in the kernel list")

    @property
    def reference_kernel(self) -> str:
        return self.reference if self.reference is not None else self.kernels[0]

    def mixture(self) -> GaussianMixture:
        if isinstance(self.density, GaussianMixture):
            return self.density
        if isinstance(self.density, str):
            dim = 1 if self.task in ("mlr", "cluster") else self.d
            return preset(self.density, dim)
        return GaussianMixture.from_dict(self.density)

    def covariates(self) -> GaussianMixture:
        if self.x_dist is None:
            return GaussianMixture([1.0], [[0.0]], [[1.0]])
        if isinstance(self.x_dist, GaussianMixture):
            return self.x_dist
        return GaussianMixture.from_dict(self.x_dist)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("density", "x_dist"):
            if isinstance(getattr(self, key), GaussianMixture):
                out[key] = getattr(self, key).to_dict()
        out["kernels"], out["n_grid"], out["theta"] = list(self.kernels), list(self.n_grid), list(self.theta)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise DomainError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**known)


@dataclass
class CellResult:
    """Aggregate of one (kernel, n) cell; ``errors`` holds per-trial squared errors in trial order."""

    kernel: str
    n: int
    mse: float
    sd: float
    trials_completed: int
    failures: int
    errors: np.ndarray
    amse: float
    h: float
    mse_ratio: float = float("nan")
    welch_p: float = float("nan")
    best: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        total = self.trials_completed + self.failures
        return total == 0 or self.failures > MAX_FAILURE_RATE * total


@dataclass
class SimResult:
    config: SimConfig
    cells: list

    def cell(self, kernel: str, n: int) -> CellResult:
        for c in self.cells:
            if c.kernel == kernel and c.n == n:
                return c
        raise KeyError((kernel, n))

    def to_rows(self) -> list[dict]:
        cfg = self.config
        rows = []
        for c in self.cells:
            rows.append({
                "task": cfg.task, "d": cfg.d if cfg.task in ("kme", "isme") else 1, "q": cfg.q,
                "kernel": c.kernel, "n": c.n, "trials": c.trials_completed, "failures": c.failures,
                "mse": c.mse, "sd": c.sd, "mse_ratio": c.mse_ratio, "welch_p": c.welch_p,
                "amse": c.amse, "h": c.h,
                "mean_abs_error": c.extras.get("mean_abs_error", float("nan")),
                "mean_cer": c.extras.get("mean_cer", float("nan")),
                "amcer": c.extras.get("amcer", float("nan")),
            })
        return rows

    def to_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.to_rows():
            writer.writerow({k: _fmt(v, precision) for k, v in row.items()})
        return buf.getvalue()

    def to_markdown(self, decimals: int = 4) -> str:
        """Table of ``MSE +- SD`` (times 100) per n with AMSE and MSE ratio brackets.

        The smallest MSE at each n is bold; entries significantly worse than it
        (Welch p < 0.05) carry a dagger.
        """
        cfg = self.config
        ns = list(cfg.n_grid)
        names = _row_names(self)
        ref = cfg.reference_kernel
        head = ["Kernel", "AMSE ratio"] + [f"n={n}" for n in ns] + ["MSE ratio"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for k in names:
            ref_amse = self.cell(ref, ns[-1]).amse if ref in names else float("nan")
            amse_ratio = self.cell(k, ns[-1]).amse / ref_amse
            cells = [k, f"[{amse_ratio:.{decimals}f}]"]
            for n in ns:
                c = self.cell(k, n)
                txt = f"{100 * c.mse:.{decimals}f}±{100 * c.sd:.{decimals}f}"
                if c.best:
                    txt = f"**{txt}**"
                elif c.welch_p < 0.05:
                    txt += "†"
                cells.append(txt)
            cells.append(f"[{self.cell(k, ns[-1]).mse_ratio:.{decimals}f}]")
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
        lines.append("MSE and SD multiplied by 100; SD is the standard error of the MSE. "
                     "Bold: smallest MSE for the n; †: worse than it (Welch test, p < 0.05).")
        return "\n".join(lines) + "\n"


def _row_names(result: SimResult) -> list[str]:
    seen = []
    for c in result.cells:
        if c.kernel not in seen:
            seen.append(c.kernel)
    return seen


def _fmt(v, precision: int) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return ""
    return f"{v:.{precision}g}"


def worker_count(requested: int | None = None) -> int:
    """Number of worker processes: ``requested``, else MODALKIT_THREADS, else the CPU count."""
    if requested is None:
        env = os.environ.get("MODALKIT_THREADS")
        requested = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(requested))


# -- per-cell setup and trials ------------------------------------------------------


def _setup(cfg: SimConfig) -> dict:
    """Oracle quantities per kernel and sample size, computed once in the parent."""
    f = cfg.mixture()
    out = {"cells": {}}
    if cfg.task in ("kme", "isme"):
        if f.d != cfg.d:
            raise DomainError(f"density dimension {f.d} differs from d = {cfg.d}")
        truth = find_mode(f)
        out["truth"] = truth.tolist()
        for ki, name in enumerate(cfg.kernels):
            spec = make_kernel(name, cfg.d, cfg.q)
            for ni, n in enumerate(cfg.n_grid):
                a = _checked(lambda: asymptotics(f, spec, n), name)
                out["cells"][(ki, ni)] = (a.h_opt, a.amse_opt)
    elif cfg.task == "cluster":
        zeta = find_antimode_1d(f)
        out["truth"] = [zeta]
        at = np.array([zeta])
        for ki, name in enumerate(cfg.kernels):
            spec = make_kernel(name, 1, cfg.q)
            for ni, n in enumerate(cfg.n_grid):
                a = _checked(lambda: asymptotics(f, spec, n, at=at), name)
                out["cells"][(ki, ni)] = (a.h_opt, a.amse_opt)
    else:
        if f.d != 1:
            raise DomainError("the MLR noise law must be univariate")
        noise = f.shifted(-find_mode(f))
        out["noise"] = noise.to_dict()
        out["truth"] = list(cfg.theta)
        for ki, name in enumerate(cfg.kernels):
            spec = make_kernel(name, 1, cfg.q)
            for ni, n in enumerate(cfg.n_grid):
                a = _checked(lambda: mlr_amse_oracle(cfg.covariates(), noise, cfg.theta, spec, n), name)
                out["cells"][(ki, ni)] = (a.h_opt, a.amse_opt)
    return out


def _checked(fn, name):
    try:
        return fn()
    except DegenerateBiasError as exc:
        raise DegenerateBiasError(
            f"kernel {name}: the leading bias vanishes for this density, so no finite "
            f"AMSE-optimal bandwidth exists (symmetric densities have this property): {exc}"
        ) from exc


def _rng(cfg: SimConfig, trial: int, ni: int, ki: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(cfg.seed), spawn_key=(trial, ni, ki)))


def _trial(cfg: SimConfig, setup: dict, ki: int, ni: int, trial: int) -> dict:
    """One trial; returns a JSON-serializable record (``error`` None on failure)."""
    name, n = cfg.kernels[ki], cfg.n_grid[ni]
    h = setup["cells"][(ki, ni)][0]
    rng = _rng(cfg, trial, ni, ki)
    rec = {"k": ki, "n": ni, "t": trial, "error": None}
    truth = np.asarray(setup["truth"], dtype=float)
    try:
        if cfg.task in ("kme", "isme"):
            spec = make_kernel(name, cfg.d, cfg.q)
            sample = cfg.mixture().sample(n, rng)
            rep = kme(sample, spec, h) if cfg.task == "kme" else isme(sample, spec, h)
            if not rep.converged:
                return rec
            rec["error"] = float(np.sum((rep.estimate - truth) ** 2))
        elif cfg.task == "cluster":
            spec = make_kernel(name, 1, cfg.q)
            f = cfg.mixture()
            zeta_n, cer = cluster_1d(f.sample(n, rng), spec, h, f)
            rec["error"] = float((zeta_n - truth[0]) ** 2)
            rec["abs"] = float(abs(zeta_n - truth[0]))
            rec["cer"] = cer
        else:
            spec = make_kernel(name, 1, cfg.q)
            noise = GaussianMixture.from_dict(setup["noise"])
            z = cfg.covariates().sample(n, rng)
            X = np.column_stack([np.ones(n), z])
            y = X @ truth + noise.sample(n, rng)[:, 0]
            rep = mlr_fit(X, y, spec, h, seed=trial)
            if not rep.converged:
                return rec
            rec["error"] = float(np.sum((rep.estimate - truth) ** 2))
            rec["abs"] = float(np.linalg.norm(rep.estimate - truth))
            ls = least_squares(X, y)[0]
            rec["ls_error"] = float(np.sum((ls - truth) ** 2))
            rec["ls_abs"] = float(np.linalg.norm(ls - truth))
    except ModalKitError as exc:
        rec["failure"] = f"{type(exc).__name__}: {exc}"
    return rec


def _batch(cfg_dict: dict, setup: dict, jobs: list) -> list:
    cfg = SimConfig.from_dict(cfg_dict)
    return [_trial(cfg, setup, *job) for job in jobs]


# -- campaign driver ----------------------------------------------------------------


def _load_checkpoint(path) -> dict:
    done = {}
    if path and os.path.exists(path):
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    break  # a torn final line from an interrupted write
                done[(rec["k"], rec["n"], rec["t"])] = rec
    return done


def run_campaign(cfg: SimConfig, workers: int | None = None, checkpoint=None, stop_after: int | None = None,
                 chunk: int = 10) -> SimResult | None:
    """Run every (kernel, n, trial) of ``cfg`` and aggregate.

    Parameters
    ----------
    workers : int, optional
        Process count (default: MODALKIT_THREADS or the CPU count).
    checkpoint : path, optional
        JSON-lines file of completed trials; existing records are reused.
    stop_after : int, optional
        Stop after this many new trials (simulated interruption) and return None.
    """
    setup = _setup(cfg)
    done = _load_checkpoint(checkpoint)
    jobs = [(ki, ni, t) for ki in range(len(cfg.kernels)) for ni in range(len(cfg.n_grid))
            for t in range(cfg.trials) if (ki, ni, t) not in done]
    interrupted = False
    if stop_after is not None and stop_after < len(jobs):
        jobs, interrupted = jobs[:stop_after], True
    batches = [jobs[i:i + chunk] for i in range(0, len(jobs), chunk)]
    nw = min(worker_count(workers), max(1, len(batches)))
    sink = open(checkpoint, "a") if checkpoint else None
    try:
        def record(recs):
            for rec in recs:
                done[(rec["k"], rec["n"], rec["t"])] = rec
                if sink:
                    sink.write(json.dumps(rec) + "\n")
            if sink:
                sink.flush()

        cfg_dict = cfg.to_dict()
        if nw == 1:
            for b in batches:
                record(_batch(cfg_dict, setup, b))
        else:
            with ProcessPoolExecutor(max_workers=nw) as pool:
                for recs in pool.map(_batch, [cfg_dict] * len(batches), [setup] * len(batches), batches):
                    record(recs)
    finally:
        if sink:
            sink.close()
    if interrupted:
        return None
    return _aggregate(cfg, setup, done)


def _aggregate(cfg: SimConfig, setup: dict, done: dict) -> SimResult:
    cells = []
    for ki, name in enumerate(cfg.kernels):
        for ni, n in enumerate(cfg.n_grid):
            recs = [done[(ki, ni, t)] for t in range(cfg.trials)]
            ok = [r for r in recs if r["error"] is not None]
            errs = np.array([r["error"] for r in ok])
            h, amse = setup["cells"][(ki, ni)]
            cell = _cell(name, n, errs, len(recs) - len(ok), amse, h)
            if cfg.task == "cluster" and ok:
                zeta = setup["truth"][0]
                f = cfg.mixture()
                mean_abs = float(np.mean([r["abs"] for r in ok]))
                cell.extras.update(
                    mean_abs_error=mean_abs,
                    mean_cer=float(np.mean([r["cer"] for r in ok])),
                    amcer=float(f.pdf(np.array([[zeta]]))[0]) * mean_abs,
                    cer=np.array([r["cer"] for r in ok]),
                )
            if cfg.task == "mlr" and ok:
                cell.extras.update(
                    mean_abs_error=float(np.mean([r["abs"] for r in ok])),
                    abs_errors=np.array([r["abs"] for r in ok]),
                )
            cells.append(cell)
        if cfg.task == "mlr" and ki == len(cfg.kernels) - 1:
            for ni, n in enumerate(cfg.n_grid):
                # Least squares sees the data of the first kernel's trials.
                ok = [done[(0, ni, t)] for t in range(cfg.trials) if done[(0, ni, t)]["error"] is not None]
                cell = _cell("least-squares", n, np.array([r["ls_error"] for r in ok]), 0, float("nan"), float("nan"))
                cell.extras.update(
                    mean_abs_error=float(np.mean([r["ls_abs"] for r in ok])) if ok else float("nan"),
                    abs_errors=np.array([r["ls_abs"] for r in ok]),
                )
                cells.append(cell)
    result = SimResult(cfg, cells)
    _compare(result)
    return result


def _cell(name, n, errs, failures, amse, h) -> CellResult:
    m = errs.size
    mse = float(errs.mean()) if m else float("nan")
    sd = float(errs.std(ddof=1) / math.sqrt(m)) if m >= 2 else float("nan")
    return CellResult(name, int(n), mse, sd, m, int(failures), errs, float(amse), float(h))


def _compare(result: SimResult) -> None:
    """Fill MSE ratios (vs the reference kernel, same n) and Welch p-values vs the best."""
    cfg = result.config
    ref = cfg.reference_kernel
    for n in cfg.n_grid:
        group = [c for c in result.cells if c.n == n]
        ref_cell = next(c for c in group if c.kernel == ref)
        valid = [c for c in group if c.trials_completed > 0]
        best = min(valid, key=lambda c: c.mse) if valid else None
        for c in group:
            c.mse_ratio = c.mse / ref_cell.mse if ref_cell.mse > 0 else float("nan")
            if best is None:
                continue
            c.best = c is best
            if c.best:
                c.welch_p = 1.0
                continue
            try:
                c.welch_p = welch_test(c.errors, best.errors)
            except UndefinedTestError:
                c.welch_p = float("nan")


def run_mse_campaign(cfg: SimConfig, **kwargs) -> SimResult:
    """KME/ISME squared-error campaign (``cfg.task`` in {'kme', 'isme'})."""
    if cfg.task not in ("kme", "isme"):
        raise DomainError(f"run_mse_campaign handles kme/isme, got task {cfg.task!r}")
    return run_campaign(cfg, **kwargs)


def run_cer_campaign(cfg: SimConfig, **kwargs) -> SimResult:
    """Clustering-error campaign; cells carry mean CER, mean |zeta_n - zeta| and the AMCER prediction."""
    if cfg.task != "cluster":
        raise DomainError(f"run_cer_campaign needs task 'cluster', got {cfg.task!r}")
    return run_campaign(cfg, **kwargs)


def run_mlr_campaign(cfg: SimConfig, **kwargs) -> SimResult:
    """Modal linear regression campaign with a least-squares comparison row."""
    if cfg.task != "mlr":
        raise DomainError(f"run_mlr_campaign needs task 'mlr', got {cfg.task!r}")
    return run_campaign(cfg, **kwargs)
