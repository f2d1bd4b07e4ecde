"""centroaffine command line.

    centroaffine <invariants|osculate|length|reconstruct|check>
        --input <file|builtin:FAMILY[:k=v,...]> --grid a,b,n
        [--transform M] [--tol-null x] [--out file] [--format json|csv] [--seed n]

Output goes to --out (or stdout). Errors go to stderr as one JSON record
{"error", "message", "exit_code"}.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import checks, curves, osculation, reconstruction
from .ellipses import GroupElementError
from .linalg import NotPositiveDefiniteError, sym_entries, wedge
from .paths import PathError, SampledPath, TransformedPath

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_WARNING = 3
EXIT_IO = 4
EXIT_SCHEMA = 5
EXIT_MATH = 6
EXIT_NOT_CONVEX = 7

INVARIANT_COLUMNS = [
    "t", "x", "y", "kappa", "euclidean_curvature", "density", "wedge_p_d1", "wedge_d1_d2",
]
PATH_COLUMNS = ["t", "a11", "a12", "a22", "nullity_residual", "accel_norm", "orientation", "vertex"]
LENGTH_COLUMNS = ["t", "density", "vertex"]
CURVE_COLUMNS = ["t", "x", "y"]
CHECK_COLUMNS = ["name", "passed", "detail"]


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


def fmt(x) -> str:
    """Decimal text for a JSON/CSV scalar; floats keep 17 significant digits."""
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return json.dumps(x)


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        obj = list(obj)
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(fmt(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    return fmt(obj)


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]).strip('"') for c in columns])
    return buf.getvalue()


def parse_grid(text: str | None):
    if text is None:
        return None
    try:
        a, b, n = text.split(",")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise CliError("usage", f"--grid expects a,b,n; got {text!r}", EXIT_USAGE)
    if n < 9:
        raise CliError("usage", "--grid needs n >= 9", EXIT_USAGE)
    if not a < b:
        raise CliError("usage", "--grid needs a < b", EXIT_USAGE)
    return np.linspace(a, b, n)


def parse_transform(text: str | None):
    if text is None:
        return None
    try:
        g = np.array(json.loads(text), dtype=float)
    except (ValueError, TypeError):
        raise CliError("usage", f"--transform expects [[a,b],[c,d]]; got {text!r}", EXIT_USAGE)
    if g.shape != (2, 2):
        raise CliError("usage", "--transform must be a 2x2 matrix", EXIT_USAGE)
    if not np.linalg.det(g) > 0:
        raise CliError("usage", "--transform must have positive determinant", EXIT_USAGE)
    return g


def parse_builtin(text: str) -> curves.BuiltinCurve:
    """builtin:FAMILY[:k=v,k=v]; t_min/t_max are accepted among the k=v pairs."""
    parts = text.split(":", 2)
    family = parts[1] if len(parts) > 1 else ""
    params, window = {}, {}
    if len(parts) > 2 and parts[2]:
        for item in parts[2].split(","):
            key, _, value = item.partition("=")
            try:
                number = float(value)
            except ValueError:
                raise CliError("schema", f"bad builtin parameter {item!r}", EXIT_SCHEMA)
            (window if key in ("t_min", "t_max") else params)[key.strip()] = number
    try:
        return curves.BuiltinCurve(family, params, **window)
    except curves.CurveError as exc:
        raise CliError("schema", str(exc), EXIT_SCHEMA)


def _read_json(path: str):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}", EXIT_IO)
    except json.JSONDecodeError as exc:
        raise CliError("schema", f"{path} is not valid JSON: {exc}", EXIT_SCHEMA)


def load_curve(spec: str) -> curves.CurveSpec:
    if spec.startswith("builtin:"):
        return parse_builtin(spec)
    doc = _read_json(spec)
    if not isinstance(doc, dict):
        raise CliError("schema", "curve file must hold a JSON object", EXIT_SCHEMA)
    try:
        return curves.curve_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise CliError("schema", f"curve file missing or malformed field: {exc}", EXIT_SCHEMA)
    except curves.CurveError as exc:
        raise CliError("schema", str(exc), EXIT_SCHEMA)


def curve_grid(curve: curves.CurveSpec, grid, order: int = 4):
    lo, hi = curve.valid_window(order)
    if grid is None:
        if curve.kind == "sampled":
            nodes = curve.grid
            return nodes[(nodes >= lo - 1e-12) & (nodes <= hi + 1e-12)]
        return np.linspace(lo, hi, 101)
    return grid


def cmd_invariants(args):
    curve = load_curve(args.input)
    if args.transform is not None:
        curve = curve.transformed(args.transform)
    grid = curve_grid(curve, args.grid)
    report = curves.check_zero_convex(curve, grid)
    if not report.ok:
        raise CliError(
            "not-0-convex",
            f"curve is not 0-convex at {len(report.offending)} grid points "
            f"(first t={report.offending[0]!r})",
            EXIT_NOT_CONVEX,
        )
    d = curve.derivatives(grid, 2)
    kappa = curves.centro_affine_curvature(curve, grid)
    dens = osculation.arc_element_density(curve, grid, null_tol=args.tol_null)
    rows = [
        {
            "t": t,
            "x": p[0],
            "y": p[1],
            "kappa": k,
            "euclidean_curvature": e,
            "density": r,
            "wedge_p_d1": w1,
            "wedge_d1_d2": w2,
        }
        for t, p, k, e, r, w1, w2 in zip(
            grid,
            d[0],
            np.atleast_1d(kappa),
            np.atleast_1d(curves.euclidean_curvature(curve, grid)),
            np.atleast_1d(dens),
            wedge(d[0], d[1]),
            wedge(d[1], d[2]),
        )
    ]
    if args.format == "csv":
        return to_csv(rows, INVARIANT_COLUMNS), EXIT_OK
    return dumps({"convexity": report.to_dict(), "rows": rows}), EXIT_OK


def cmd_osculate(args):
    curve = load_curve(args.input)
    if args.transform is not None:
        curve = curve.transformed(args.transform)
    grid = curve_grid(curve, args.grid)
    path = osculation.OsculatingPath(curve)
    report = osculation.nullity_report(path, grid)
    values = path.value(grid)
    rows = []
    for t, m, pt in zip(grid, values, report.to_dict()["points"]):
        a11, a12, a22 = sym_entries(m)
        rows.append(
            {
                "t": t, "a11": a11, "a12": a12, "a22": a22,
                "nullity_residual": pt["nullity_residual"],
                "accel_norm": pt["accel_norm"],
                "orientation": pt["orientation"],
                "vertex": pt["vertex"],
            }
        )
    code = EXIT_OK
    if report.max_residual > args.tol_null:
        code = EXIT_WARNING
        _emit_error(
            "nullity-above-tolerance",
            f"max nullity residual {report.max_residual:.3e} exceeds {args.tol_null:.1e}",
            code,
            level="warning",
        )
    if args.format == "csv":
        return to_csv(rows, PATH_COLUMNS), code
    doc = {
        "max_nullity_residual": report.max_residual,
        "orientations": sorted(set(report.labels)),
        "path": [{k: r[k] for k in ("t", "a11", "a12", "a22")} for r in rows],
        "report": rows,
    }
    return dumps(doc), code


def cmd_length(args):
    curve = load_curve(args.input)
    if args.transform is not None:
        curve = curve.transformed(args.transform)
    if args.grid is None:
        lo, hi = curve.valid_window(4)
    else:
        lo, hi = float(args.grid[0]), float(args.grid[-1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = osculation.length_details(
            curve, (lo, hi), tol=args.tol_quad, null_tol=args.tol_null
        )
    for note in res.warnings:
        _emit_error(note, f"centro-affine length over [{lo!r}, {hi!r}]: {note}", 0, "warning")
    rows = [
        {"t": t, "density": r, "vertex": bool(v)}
        for t, r, v in zip(res.t, res.density, res.vertex_flags)
    ]
    if args.format == "csv":
        return to_csv(rows, LENGTH_COLUMNS), EXIT_OK
    doc = {
        "length": res.length,
        "window": [lo, hi],
        "converged": res.converged,
        "warnings": res.warnings,
        "density": rows,
    }
    return dumps(doc), EXIT_OK


def load_path(spec: str):
    """A matrix-path JSON file, or a curve (file or builtin) whose osculating path is used."""
    if spec.startswith("builtin:"):
        return osculation.OsculatingPath(parse_builtin(spec))
    doc = _read_json(spec)
    if isinstance(doc, dict):
        return osculation.OsculatingPath(load_curve(spec))
    try:
        return SampledPath.from_records(doc)
    except (KeyError, TypeError) as exc:
        raise CliError("schema", f"matrix path record missing field: {exc}", EXIT_SCHEMA)
    except (PathError, NotPositiveDefiniteError) as exc:
        raise CliError("schema", str(exc), EXIT_SCHEMA)


def cmd_reconstruct(args):
    path = load_path(args.input)
    if args.transform is not None:
        path = TransformedPath(path, args.transform)
    grid = args.grid
    if grid is None:
        if isinstance(path, SampledPath):
            grid = path.grid[2:-2]
        else:
            raise CliError("usage", "--grid is required for builtin inputs", EXIT_USAGE)
    result = reconstruction.reconstruct(
        path, grid, null_tol=args.tol_null, osc_tol=args.tol_osc, strict=False
    )
    code = EXIT_OK if result.success else EXIT_MATH
    if not result.success:
        _emit_error("reconstruction-check-failed", "reconstructed curve failed its checks", code)
    pts = result.curve.samples
    if args.format == "csv":
        rows = [{"t": t, "x": p[0], "y": p[1]} for t, p in zip(result.t, pts)]
        return to_csv(rows, CURVE_COLUMNS), code
    return dumps({"curve": result.curve.to_dict(), "summary": result.summary()}), code


def cmd_check(args):
    only = args.only.split(",") if args.only else None
    try:
        results = checks.run_checks(args.seed, only)
    except KeyError as exc:
        raise CliError("usage", str(exc.args[0]), EXIT_USAGE)
    rows = [r.to_dict() for r in results]
    code = EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED
    if args.format == "csv":
        return to_csv(rows, CHECK_COLUMNS), code
    return dumps({"seed": args.seed, "all_passed": code == EXIT_OK, "results": rows}), code


COMMANDS = {
    "invariants": cmd_invariants,
    "osculate": cmd_osculate,
    "length": cmd_length,
    "reconstruct": cmd_reconstruct,
    "check": cmd_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="centroaffine", description="Centro-affine invariants of 0-convex curves.")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--input", help="curve/path JSON file or builtin:FAMILY[:k=v,...]")
    p.add_argument("--grid", help="a,b,n")
    p.add_argument("--transform", help="row-major 2x2 matrix with det > 0, e.g. [[1,1],[0,1]]")
    p.add_argument("--tol-null", type=float, default=1e-6)
    p.add_argument("--tol-osc", type=float, default=1e-5)
    p.add_argument("--tol-quad", type=float, default=1e-7)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", help="comma-separated property names for check")
    return p


def _emit_error(kind, message, code, level="error"):
    record = {"error" if level == "error" else "warning": kind, "message": message, "exit_code": code}
    sys.stderr.write(json.dumps(record) + "\n")


def _join_negative_values(argv):
    # Let "--grid -1,1,11" through; argparse would read -1,1,11 as an option.
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--grid", "--transform"):
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        for name in ("tol_null", "tol_osc", "tol_quad"):
            if not getattr(args, name) > 0:
                raise CliError("usage", f"--{name.replace('_', '-')} must be positive", EXIT_USAGE)
        if args.command != "check" and not args.input:
            raise CliError("usage", "--input is required", EXIT_USAGE)
        args.grid = parse_grid(args.grid)
        args.transform = parse_transform(args.transform)
        text, code = COMMANDS[args.command](args)
    except CliError as exc:
        _emit_error(exc.kind, str(exc), exc.code)
        return exc.code
    except (curves.ConvexityError, reconstruction.ReconstructionError) as exc:
        _emit_error(type(exc).__name__, str(exc), EXIT_MATH)
        return EXIT_MATH
    except (ValueError, GroupElementError, ArithmeticError) as exc:
        _emit_error(type(exc).__name__, str(exc), EXIT_MATH)
        return EXIT_MATH
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        try:
            with open(args.out, "w") as f:
                f.write(text)
        except OSError as exc:
            _emit_error("io", f"cannot write {args.out}: {exc.strerror}", EXIT_IO)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
