"""Command-line front end: eval, verify, geodesic, scan and catalog.

Exit codes: 0 success, 1 internal error, 2 invalid input or state outside
the domain, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import geodesics
from . import nonriemannian as nr
from . import randers as rs
from .catalog import ALIASES, FAMILIES, build_catalog_entry, coords, entry_from_spec
from .errors import (
    DegenerateFlagError,
    DegenerateMetricError,
    DomainError,
    InvalidParameterError,
    NotApplicableError,
    OutOfDomainError,
    PositivityViolationError,
    SingularCaseError,
    UnsupportedConfigurationError,
)
from .geometry import LocalGeometry
from .report import dumps_csv, dumps_json, flatten
from .sampling import default_seed, sampling_radius
from .verify import run_suite

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_FAILED = 0, 1, 2, 3
INPUT_ERRORS = (
    InvalidParameterError,
    OutOfDomainError,
    DomainError,
    PositivityViolationError,
    UnsupportedConfigurationError,
    DegenerateFlagError,
    DegenerateMetricError,
    NotApplicableError,
    SingularCaseError,
)
SCAN_QUANTITIES = ("K", "S", "S_over_F", "tau", "delta")


class InputError(Exception):
    """Malformed command-line input."""


def _vector(text: str | None, name: str):
    if text is None:
        return None
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise InputError(f"--{name} expects comma-separated numbers, got {text!r}") from exc


def _tol_overrides(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--tol-override expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise InputError(f"tolerance {name!r} is not a number: {value!r}") from exc
    return out


def _infer_n(args):
    if args.n is not None:
        return args.n
    for name in ("a", "x", "x0"):
        v = _vector(getattr(args, name, None), name)
        if v:
            return len(v)
    return None


def resolve_entry(args):
    """Build the catalog entry from --spec or the inline family flags."""
    if args.spec and args.family:
        raise InputError("give either --spec or --family, not both")
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read metric specification {args.spec!r}: {exc}") from exc
        return entry_from_spec(spec)
    if not args.family:
        raise InputError("a metric is required: --family NAME or --spec FILE")
    params = {}
    if args.a is not None:
        params["a"] = _vector(args.a, "a")
    for key, attr in (("k", "k"), ("lambda", "lam"), ("eps", "eps"), ("mu", "mu")):
        v = getattr(args, attr)
        if v is not None:
            params[key] = v
    return build_catalog_entry(args.family, params, _infer_n(args), args.sign)


def _state(args, xname: str, yname: str, n: int):
    x, y = _vector(getattr(args, xname), xname), _vector(getattr(args, yname), yname)
    if x is None or y is None:
        raise InputError(f"--{xname} and --{yname} are required")
    if len(x) != n or len(y) != n:
        raise InputError(f"--{xname} and --{yname} need n = {n} components")
    return np.array(x), np.array(y)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _optional(fn):
    try:
        return fn()
    except (NotApplicableError, SingularCaseError):
        return None


# ---------------------------------------------------------------- commands
def cmd_eval(args, entry) -> int:
    x, y = _state(args, "x", "y", entry.n)
    metric = entry.metric
    lg = LocalGeometry(metric, x, y, order=4)
    sc = lg.scalar_curvature
    td = nr.cartan(metric, x, y, lg)
    report = {
        "metric": entry.spec(),
        "state": {"x": x, "y": y},
        "F": float(lg.F),
        "g": lg.g,
        "g_inv": lg.g_inv,
        "G": lg.G,
        "N": lg.N,
        "K_tensor": lg.K_tensor,
        "K_scalar": float(sc.K_scalar),
        "scalar_curvature_residual": float(sc.residual),
        "C": td.C,
        "I": td.I,
        "tau": nr.distortion(metric, x, y, lg).tau,
        "S": {
            "randers_formula": rs.s_curvature_randers(metric, x, y),
            "tau_horizontal_derivative": nr.s_curvature_tau(metric, x, y, lg).S,
        },
        "J": nr.mean_landsberg(metric, x, y, lg).J,
        "reference": {"c": float(np.asarray(entry.c_ref(coords(x))))},
    }
    if entry.K_ref is not None:
        report["reference"]["K"] = float(np.asarray(entry.K_ref(coords(x), coords(y))))
    if args.format == "csv":
        _emit(dumps_csv(["quantity", "value"], flatten(report)), args.out)
    else:
        _emit(dumps_json(report), args.out)
    return EXIT_OK


def cmd_verify(args, entry) -> int:
    start = time.perf_counter()
    report = run_suite(entry, samples=args.samples, seed=args.seed, tolerances=_tol_overrides(args.tol_override))
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - start
    if args.format == "csv":
        rows = [
            (r["identity_id"], r["samples"], r["skipped"], float(r["max_residual"]), float(r["tolerance"]), r["passed"])
            for r in report["results"]
        ]
        _emit(dumps_csv(["identity_id", "samples", "skipped", "max_residual", "tolerance", "passed"], rows), args.out)
    else:
        _emit(dumps_json(report), args.out)
    return EXIT_OK if report["all_passed"] else EXIT_FAILED


def cmd_geodesic(args, entry) -> int:
    x0, y0 = _state(args, "x0", "y0", entry.n)
    tol = _tol_overrides(args.tol_override).get("integrator", 1e-9)
    seg = geodesics.integrate(entry.metric, x0, y0, args.t, tol=tol, metric_id=entry.family)
    summary = {
        "metric": entry.spec(),
        "steps": seg.steps,
        "rejected_steps": seg.rejected,
        "exit_flag": seg.exit_flag,
        "t_end": float(seg.t[-1]),
        "x_end": seg.x[-1],
        "collinearity_residual": geodesics.collinearity_residual(seg),
        "speed_drift": geodesics.speed_drift(entry.metric, seg),
        "length": geodesics.segment_length(entry.metric, seg),
        "reverse_length": geodesics.segment_length(entry.metric, seg, reverse=True),
    }
    if entry.family == "b3":
        LF, La = summary["length"], geodesics.alpha_length(entry.metric, seg)
        dh = float(rs.potential_h(entry, seg.x[0]) - rs.potential_h(entry, seg.x[-1]))
        summary["alpha_length"] = La
        summary["potential_drop"] = dh
        summary["length_potential_residual"] = abs((LF - La) - dh)
    if args.format == "json":
        summary["trajectory"] = {"t": seg.t, "x": seg.x, "xdot": seg.xdot}
        _emit(dumps_json(summary), args.out)
        return EXIT_OK
    _emit(seg.to_csv(entry.metric), args.out)
    # keep stdout a clean CSV stream when the trajectory goes there
    (sys.stdout if args.out else sys.stderr).write(dumps_json(summary))
    return EXIT_OK


def cmd_scan(args, entry) -> int:
    n = entry.n
    q = args.quantity
    R = args.radius if args.radius is not None else sampling_radius(entry)
    g = np.linspace(-R, R, args.grid)
    pts = [(i, j, g[i], g[j]) for i in range(args.grid) for j in range(args.grid) if g[i] ** 2 + g[j] ** 2 <= R * R]
    X = np.zeros((len(pts), n))
    X[:, 0] = [p[2] for p in pts]
    X[:, 1] = [p[3] for p in pts]
    keep = entry.metric.admissible(X)
    idx = np.flatnonzero(keep)
    X = X[keep]
    header = ["ix", "iy", "x1", "x2"]
    rows = []
    if q == "delta":
        values = rs.delta(entry, X)
        header.append("delta")
        for k, i in enumerate(idx):
            rows.append((pts[i][0], pts[i][1], X[k, 0], X[k, 1], float(values[k])))
    else:
        th = 2.0 * np.pi * np.arange(args.directions) / args.directions
        Y = np.zeros((args.directions, n))
        Y[:, 0], Y[:, 1] = np.cos(th), np.sin(th)
        xg = np.repeat(X[:, None, :], args.directions, axis=1)
        yg = np.broadcast_to(Y[None], xg.shape)
        lg = LocalGeometry(entry.metric, xg, yg, order=4 if q == "K" else 3)
        if q == "K":
            values = lg.scalar_curvature.K_scalar
        elif q == "tau":
            values = nr.distortion(entry.metric, xg, yg, lg).tau
        else:
            values = rs.s_curvature_randers(entry.metric, xg, yg)
            if q == "S_over_F":
                values = values / lg.F
        header += ["idir", "theta", q]
        for k, i in enumerate(idx):
            for d in range(args.directions):
                rows.append((pts[i][0], pts[i][1], X[k, 0], X[k, 1], d, float(th[d]), float(values[k, d])))
    _emit(dumps_csv(header, rows), args.out)
    return EXIT_OK


def cmd_catalog(args, entry) -> int:
    if entry is None:
        report = {"families": list(FAMILIES), "aliases": {k: {"family": v[0], **v[1]} for k, v in ALIASES.items()}}
    else:
        origin = np.zeros(entry.n)
        report = {"spec": entry.spec(), "mu": entry.mu, "projectively_flat": entry.projectively_flat}
        if entry.metric.admissible(origin):
            report["origin"] = {"c": float(np.asarray(entry.c_ref(coords(origin))))}
    _emit(dumps_json(report), args.out)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "geodesic": cmd_geodesic, "scan": cmd_scan, "catalog": cmd_catalog}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--spec", metavar="FILE", help="metric specification JSON file")
    g.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    g.add_argument("--samples", type=int, default=100, metavar="N")
    g.add_argument("--seed", type=int, default=None, metavar="N", help="sampling seed (env FINSLER_LAB_SEED)")
    g.add_argument("--tol-override", action="append", metavar="NAME=VALUE", default=[])
    m = common.add_argument_group("metric options")
    m.add_argument("--family", help="catalog family or alias (euclidean, hyperbolic, sphere)")
    m.add_argument("--a", metavar="V1,V2,..")
    m.add_argument("--k", type=float)
    m.add_argument("--lambda", dest="lam", type=float)
    m.add_argument("--eps", type=float)
    m.add_argument("--mu", type=int)
    m.add_argument("--sign", default="+", choices=("+", "-"))
    m.add_argument("--n", type=int)

    parser = argparse.ArgumentParser(prog="finsler-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("eval", parents=[common], help="all quantities at one state")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p = sub.add_parser("verify", parents=[common], help="sampled identity suite")
    p.add_argument("--timing", action="store_true", help="add wall time (breaks byte-identical output)")
    p = sub.add_parser("geodesic", parents=[common], help="integrate one geodesic")
    p.add_argument("--x0", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--t", type=float, default=1.0, help="integration time")
    p = sub.add_parser("scan", parents=[common], help="grid of a scalar over a 2D slice")
    p.add_argument("--quantity", choices=SCAN_QUANTITIES, default="K")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--directions", type=int, default=8)
    p.add_argument("--radius", type=float)
    sub.add_parser("catalog", parents=[common], help="list families or echo a normalized spec")
    return parser


DEFAULT_FORMAT = {"eval": "json", "verify": "json", "geodesic": "csv", "scan": "csv", "catalog": "json"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.format = args.format or DEFAULT_FORMAT[args.command]
    if args.seed is None:
        args.seed = default_seed()
    try:
        if args.samples < 2:
            raise InputError("--samples must be at least 2")
        if args.command == "catalog" and not (args.family or args.spec):
            entry = None
        else:
            entry = resolve_entry(args)
        return COMMANDS[args.command](args, entry)
    except (InputError, *INPUT_ERRORS) as exc:
        print(f"finsler-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"finsler-lab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
