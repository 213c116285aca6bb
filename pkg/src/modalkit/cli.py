"""Command-line front end: ``modalkit <subcommand> [options]``.

Exit status is 0 on success, 1 on a domain error (one line on stderr of the
form ``error: <ExceptionType>: <message>``) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .criteria import (
    amse_ratio,
    named_univariate_catalog,
    pk_amse_ratio_q2,
    pk_criterion,
    pk_lower_bound,
    rk_criterion,
    rk_vs_pk_ratio_q2,
)
from .density import GaussianMixture, asymptotics, preset
from .errors import DomainError, ModalKitError
from .estimators import cluster_1d, isme, kme, mlr_fit
from .harness import SimConfig, run_campaign
from .kernels import hierarchy_profile, make_kernel

__all__ = ["main", "build_parser", "svg_polyline"]

FAMILIES = (("Biweight", "biweight_opt"), ("Epanechnikov", "epanechnikov"), ("Gaussian", "gaussian"), ("Laplace", "laplace"))


# -- output helpers -----------------------------------------------------------------


def _num(v, precision: int) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else f"{v:.{precision}g}"


def _emit_table(rows: list[dict], fmt: str, precision: int, out, markdown_cells=None) -> None:
    if fmt == "json":
        out.write(json.dumps(rows, indent=2) + "\n")
        return
    if fmt == "csv":
        if not rows:
            return
        w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (v if isinstance(v, str) else _num(v, precision)) for k, v in r.items()})
        return
    if fmt == "markdown":
        header, body = markdown_cells(rows)
        out.write("| " + " | ".join(header) + " |\n")
        out.write("|" + "---|" * len(header) + "\n")
        for cells in body:
            out.write("| " + " | ".join(cells) + " |\n")
        return
    raise DomainError(f"format {fmt!r} is not available for this command")


def svg_polyline(xs, ys, title: str = "", width: int = 480, height: int = 320) -> str:
    """Minimal standalone SVG line chart of ``ys`` against ``xs``."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    pad = 40
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    px = pad + (xs - x0) / (x1 - x0) * (width - 2 * pad)
    py = height - pad - (ys - y0) / (y1 - y0) * (height - 2 * pad)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>\n'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<text x="{pad}" y="{height - pad + 16}" font-size="11">{x0:.4g}</text>\n'
        f'<text x="{width - pad}" y="{height - pad + 16}" font-size="11" text-anchor="end">{x1:.4g}</text>\n'
        f'<text x="{pad - 4}" y="{height - pad}" font-size="11" text-anchor="end">{y0:.4g}</text>\n'
        f'<text x="{pad - 4}" y="{pad + 4}" font-size="11" text-anchor="end">{y1:.4g}</text>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>\n'
        "</svg>\n"
    )


def _load_density(arg: str, d: int) -> GaussianMixture:
    """A preset name, a path to a JSON mixture, or an inline JSON mixture."""
    if arg.lstrip().startswith("{"):
        return GaussianMixture.from_dict(json.loads(arg))
    if os.path.exists(arg):
        with open(arg) as fh:
            return GaussianMixture.from_dict(json.load(fh))
    return preset(arg, d)


def _read_points(path: str) -> np.ndarray:
    """Headerless CSV, one point per row."""
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DomainError(f"cannot parse {path}: {exc}") from exc
    if data.size == 0:
        raise DomainError(f"{path} contains no points")
    return data


# -- subcommands --------------------------------------------------------------------


def _cmd_criteria(args, out) -> None:
    d, q = args.d, args.q
    rows = []
    if d == 1:
        entries = [e for e in named_univariate_catalog((q,)) if e.profile.q == q]
        for e in entries:
            rows.append({"kernel": e.name, "criterion": rk_criterion(e.profile).value, "ratio": amse_ratio(e.profile)})
    else:
        for label, fam in FAMILIES:
            prof = hierarchy_profile(fam, d, q)
            rows.append({"kernel": f"RK {label}", "criterion": rk_criterion(prof).value, "ratio": amse_ratio(prof)})
        for label, fam in FAMILIES:
            factor = hierarchy_profile(fam, 1, q)
            ratio = pk_amse_ratio_q2(factor, d) if q == 2 else float("nan")
            rows.append({"kernel": f"PK {label}", "criterion": pk_criterion(factor, d).value, "ratio": ratio})
        bound = pk_lower_bound(d, q)
        rows.append({"kernel": "PK lower bound", "criterion": bound.value,
                     "ratio": rk_vs_pk_ratio_q2(d) if q == 2 else float("nan")})
    dec = args.precision if args.precision is not None else 4

    def md(rows):
        body = []
        for r in rows:
            ratio = "" if math.isnan(r["ratio"]) else f" [{r['ratio']:.{dec}f}]"
            body.append([r["kernel"], f"{r['criterion']:.{dec}f}{ratio}"])
        return ["Kernel", f"AMSE criterion (d={d}, q={q}) [ratio]"], body

    _emit_table(rows, args.format, args.precision or 6, out, md)


def _cmd_ratio(args, out) -> None:
    ds = list(range(1, args.d_max + 1))
    if args.kind == "rk-vs-pk":
        vals = [rk_vs_pk_ratio_q2(d) for d in ds]
        title = "PK lower bound / optimal RK AMSE (q=2)"
    else:
        vals = [amse_ratio(hierarchy_profile("gaussian", d, 2)) for d in ds]
        title = "Gaussian / optimal RK AMSE (q=2)"
    if args.format == "svg":
        out.write(svg_polyline(ds, vals, title))
        return
    rows = [{"d": d, "value": v} for d, v in zip(ds, vals)]
    dec = args.precision if args.precision is not None else 4
    _emit_table(rows, args.format, args.precision or 6, out,
                lambda rs: (["d", "ratio"], [[str(r["d"]), f"{r['value']:.{dec}f}"] for r in rs]))


def _cmd_bandwidth(args, out) -> None:
    f = _load_density(args.density, args.d)
    spec = make_kernel(args.kernel, f.d, args.q)
    at = None if args.at is None else np.array(args.at, dtype=float)
    a = asymptotics(f, spec, args.n, at=at)
    rec = {"kernel": spec.label, "d": f.d, "q": spec.q, "n": args.n, "point": a.mode.tolist(),
           "h_opt": a.h_opt, "amse": a.amse_opt}
    if args.format == "json":
        out.write(json.dumps(rec) + "\n")
    else:
        rec["point"] = " ".join(_num(v, args.precision or 6) for v in rec["point"])
        _emit_table([rec], "csv", args.precision or 6, out)


def _cmd_estimate(args, out) -> None:
    pts = _read_points(args.input)
    spec = make_kernel(args.kernel, args.d, args.q)
    if pts.shape[1] != args.d:
        raise DomainError(f"{args.input} has {pts.shape[1]} columns but --d is {args.d}")
    rep = kme(pts, spec, args.h) if args.method == "kme" else isme(pts, spec, args.h)
    out.write(json.dumps({"estimate": rep.estimate.tolist(), "objective": rep.objective_value,
                          "iterations": rep.iterations, "converged": rep.converged}) + "\n")


def _cmd_mlr(args, out) -> None:
    data = _read_points(args.input)
    if data.shape[1] < 2:
        raise DomainError("MLR input needs covariate columns followed by the response column")
    X, y = data[:, :-1], data[:, -1]
    if not args.no_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    rep = mlr_fit(X, y, make_kernel(args.kernel, 1, args.q), args.h, seed=args.seed)
    out.write(json.dumps({"coefficients": rep.estimate.tolist(), "least_squares": rep.extras["least_squares"].tolist(),
                          "objective": rep.objective_value, "iterations": rep.iterations,
                          "converged": rep.converged}) + "\n")


def _cmd_cluster(args, out) -> None:
    pts = _read_points(args.input)
    truth = _load_density(args.truth, 1) if args.truth else None
    zeta_n, cer = cluster_1d(pts, make_kernel(args.kernel, 1, args.q), args.h, truth)
    out.write(json.dumps({"antimode": zeta_n, "cer": cer}) + "\n")


def _cmd_simulate(args, out) -> None:
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    else:
        data = {}
    for key in ("d", "q", "trials", "task", "density", "reference"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.kernels is not None:
        data["kernels"] = [k.strip() for k in args.kernels.split(",") if k.strip()]
    if args.n is not None:
        data["n_grid"] = [int(v) for v in args.n.split(",")]
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = SimConfig.from_dict(data)
    res = run_campaign(cfg, workers=args.threads, checkpoint=args.checkpoint)
    if args.format == "markdown":
        text = res.to_markdown(args.precision if args.precision is not None else 4)
    elif args.format == "json":
        rows = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()}
                for r in res.to_rows()]
        text = json.dumps({"config": cfg.to_dict(), "rows": rows}, indent=2, default=str) + "\n"
    else:
        text = res.to_csv(args.precision or 6)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)


# -- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"usage error: {message}\n")
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modalkit", description="Optimal kernels for kernel mode estimation.")
    p.add_argument("--version", action="version", version=f"modalkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats):
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--precision", type=int, default=None,
                        help="significant digits (csv/json) or decimals (markdown)")

    c = sub.add_parser("criteria", help="AMSE criteria and ratios of the kernel catalog")
    c.add_argument("--d", type=int, default=1)
    c.add_argument("--q", type=int, default=2)
    common(c, ["markdown", "csv", "json"])
    c.set_defaults(func=_cmd_criteria)

    r = sub.add_parser("ratio", help="AMSE ratio curves over the dimension")
    r.add_argument("--kind", choices=["rk-vs-pk", "gaussian"], default="rk-vs-pk")
    r.add_argument("--d-max", type=int, default=10)
    common(r, ["csv", "markdown", "json", "svg"])
    r.set_defaults(func=_cmd_ratio)

    b = sub.add_parser("bandwidth", help="AMSE-optimal bandwidth for a mixture density")
    b.add_argument("--density", default="skewed", help="preset name, JSON file, or inline JSON")
    b.add_argument("--kernel", default="biweight")
    b.add_argument("--d", type=int, default=1)
    b.add_argument("--q", type=int, default=2)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--at", type=float, nargs="+", default=None, help="expansion point (default: the mode)")
    common(b, ["json", "csv"])
    b.set_defaults(func=_cmd_bandwidth)

    e = sub.add_parser("estimate", help="mode estimate of a headerless CSV sample")
    e.add_argument("--input", required=True)
    e.add_argument("--kernel", default="biweight")
    e.add_argument("--d", type=int, default=1)
    e.add_argument("--q", type=int, default=2)
    e.add_argument("--h", type=float, required=True)
    e.add_argument("--method", choices=["kme", "isme"], default="kme")
    e.set_defaults(func=_cmd_estimate)

    s = sub.add_parser("simulate", help="seeded Monte Carlo campaign")
    s.add_argument("--config", help="JSON SimConfig file; flags override its fields")
    s.add_argument("--task", choices=["kme", "isme", "mlr", "cluster"])
    s.add_argument("--d", type=int)
    s.add_argument("--q", type=int)
    s.add_argument("--kernels", help="comma-separated kernel names")
    s.add_argument("--n", help="comma-separated sample sizes")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--density")
    s.add_argument("--reference")
    s.add_argument("--threads", type=int, default=None, help="worker processes (default MODALKIT_THREADS or CPU count)")
    s.add_argument("--checkpoint", help="JSON-lines file for resumable runs")
    s.add_argument("--output", help="write the table here instead of stdout")
    common(s, ["csv", "markdown", "json"])
    s.set_defaults(func=_cmd_simulate)

    m = sub.add_parser("mlr", help="modal linear regression on CSV rows (covariates..., response)")
    m.add_argument("--input", required=True)
    m.add_argument("--kernel", default="biweight")
    m.add_argument("--q", type=int, default=2)
    m.add_argument("--h", type=float, required=True)
    m.add_argument("--no-intercept", action="store_true")
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=_cmd_mlr)

    k = sub.add_parser("cluster", help="two-cluster split of a univariate sample at the KDE antimode")
    k.add_argument("--input", required=True)
    k.add_argument("--kernel", default="biweight")
    k.add_argument("--q", type=int, default=2)
    k.add_argument("--h", type=float, required=True)
    k.add_argument("--truth", help="true density (preset/JSON) for the clustering error rate")
    k.set_defaults(func=_cmd_cluster)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        args.func(args, out)
    except (ModalKitError, ValueError, ArithmeticError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        sys.stderr.write(f"error: {type(exc).__name__}: {msg}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
