"""Command line entry point: ``g2surf algebra|plane|synth|invariants|check``.

Exit codes: 0 pass, 1 usage or configuration error, 2 a residual check
failed. Every JSON output carries a ``schema_version`` and is written
atomically (temporary file, then rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import acceptance, catalog, planes
from .algebra import E, cross, identity_suite, parse_table, structure_tensor, table_mismatches
from .errors import ConfigError, G2SurfError, ResidualError
from .invariants import TolProfile, classify
from .surface import grid_csv, grid_summary, reconstruction_residual, synthesize

EXIT_OK, EXIT_CONFIG, EXIT_RESIDUAL = 0, 1, 2
ALGEBRA_SCHEMA = "g2surf.algebra/1"
PLANE_SCHEMA = "g2surf.plane/1"
TOL_PROFILES = {"default": 1.0, "tight": 1e-4, "loose": 10.0}


class _Parser(argparse.ArgumentParser):
    # usage errors share the configuration exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# --- helpers --------------------------------------------------------------------------


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(_to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, name: str, payload: dict) -> None:
    text = dumps(payload)
    if args.out:
        write_atomic(Path(args.out) / name, text)
    sys.stdout.write(text)


def _floats(text: str, n: int, what: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise ConfigError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ConfigError(f"{what}: expected {n} numbers, got {len(vals)}")
    return vals


def _grid_shape(text: str) -> tuple[int, int]:
    parts = text.split(",")
    try:
        shape = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--grid: expected N or N,M, got {text!r}") from None
    if len(shape) == 1:
        shape = shape * 2
    if len(shape) != 2:
        raise ConfigError(f"--grid: expected N or N,M, got {text!r}")
    return shape


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("G2SURF_SEED")
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"G2SURF_SEED must be an integer, got {env!r}") from None


def _tol_value(args, default: float) -> float:
    """--tol as a number, or a named profile scaling ``default``."""
    if args.tol is None:
        return default
    if args.tol in TOL_PROFILES:
        return default * TOL_PROFILES[args.tol]
    try:
        t = float(args.tol)
    except ValueError:
        raise ConfigError(f"--tol: unknown profile {args.tol!r}") from None
    if not t > 0:
        raise ConfigError("--tol must be positive")
    return t


def load_map(spec: str):
    if spec in catalog.PRESETS:
        return catalog.PRESETS[spec]()
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"--map: {spec!r} is neither a catalog name ({', '.join(catalog.PRESETS)}) nor a file")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--map: {spec} is not valid JSON ({exc})") from None
    return catalog.from_dict(d)


def _synth_config(args):
    m = load_map(args.map)
    domain = _floats(args.domain, 4, "--domain") if args.domain else None
    shape = _grid_shape(args.grid)
    if not args.step > 0:
        raise ConfigError("--step must be positive")
    return m, domain, shape


# --- commands -------------------------------------------------------------------------


def cmd_algebra(args) -> int:
    structure = None
    if args.table:
        try:
            rows = json.loads(Path(args.table).read_text())
            rows = rows["rows"] if isinstance(rows, dict) else rows
            table = parse_table(rows)
            if len(table) != 7 or any(len(r) != 7 for r in table):
                raise ValueError("table must be 7 x 7")
        except (OSError, ValueError, KeyError, TypeError, AttributeError) as exc:
            raise ConfigError(f"--table: {exc}") from None
        structure = structure_tensor(table)
    seed = _seed(args)
    tol = _tol_value(args, 1e-12)
    mism = table_mismatches() if structure is None else _fixture_mismatches(structure)
    res = identity_suite(seed=seed, trials=args.trials, structure=structure)
    ok = not mism and all(v < tol for v in res.values())
    _emit(args, "algebra.json", {
        "schema_version": ALGEBRA_SCHEMA,
        "seed": seed,
        "trials": args.trials,
        "tolerance": tol,
        "table_mismatches": [list(p) for p in mism],
        "identity_residuals": res,
        "passed": ok,
    })
    return EXIT_OK if ok else EXIT_RESIDUAL


def _fixture_mismatches(structure) -> list[tuple[int, int]]:
    # a supplied table is judged against the reference table
    return [(i + 1, j + 1) for i in range(7) for j in range(7)
            if not np.array_equal(structure[i, j], structure_tensor()[i, j])]


def _parse_vector(tok: str) -> np.ndarray:
    t = tok.strip()
    if t.lower().startswith("e") and t[1:].isdigit():
        k = int(t[1:])
        if not 1 <= k <= 7:
            raise ConfigError(f"basis index out of range: {tok}")
        return E[k - 1].copy()
    return np.array(_floats(t, 7, f"vector {tok!r}"))


def cmd_plane(args) -> int:
    vecs = [_parse_vector(t) for t in args.vectors]
    if not 2 <= len(vecs) <= 4:
        raise ConfigError(f"plane: need 2 to 4 vectors, got {len(vecs)}")
    tol = _tol_value(args, planes.DEFAULT_TOL)
    W = planes.orthonormalize(vecs)
    out = {"schema_version": PLANE_SCHEMA, "dim": W.dim, "basis": W.basis, "tolerance": tol, "verdicts": {}}
    v = out["verdicts"]
    if W.dim == 2:
        hull = planes.orthonormalize([W.basis[0], W.basis[1], cross(W.basis[0], W.basis[1])])
        v["associative_hull"] = planes.is_associative(hull, tol).to_dict()
        out["associative_hull_basis"] = hull.basis
    elif W.dim == 3:
        v["associative"] = planes.is_associative(W, tol).to_dict()
        v["coassociative_complement"] = planes.is_coassociative(W.complement(), tol).to_dict()
    else:
        v["coassociative"] = planes.is_coassociative(W, tol).to_dict()
        v["admits_cross_compatible"] = planes.admits_cross_compatible(W, tol).to_dict()
        W1 = planes.orthonormalize(vecs[:2])
        W2 = planes.orthonormalize(vecs[2:])
        try:
            v["given_split"] = planes.cross_compatible(W1, W2, tol).to_dict()
            out["associative_completion"] = planes.associative_completion(W1, W2, tol).basis
        except G2SurfError as exc:
            out["given_split_note"] = f"{type(exc).__name__}: {exc}"
    _emit(args, "plane.json", out)
    return EXIT_OK


def cmd_synth(args) -> int:
    m, domain, shape = _synth_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        try:
            grid = synthesize(m, domain, shape, args.mode, args.step)
        finally:
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
    grid.residuals["reconstruction"] = reconstruction_residual(grid)
    summary = grid_summary(grid)
    tol = grid.residuals["closedness_tol"]
    ok = grid.residuals["closedness"] < tol and grid.residuals["path"] < tol
    summary["passed"] = ok
    if args.out:
        write_atomic(Path(args.out) / "grid.csv", grid_csv(grid))
    _emit(args, "grid.json", summary)
    return EXIT_OK if ok else EXIT_RESIDUAL


def cmd_invariants(args) -> int:
    m, domain, shape = _synth_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        grid = synthesize(m, domain, shape, args.mode, args.step)
    base = TolProfile.for_mode(args.mode, args.step)
    if args.tol is None:
        profile = base
    elif args.tol in TOL_PROFILES:
        profile = base.scaled(TOL_PROFILES[args.tol])
    else:
        t = _tol_value(args, base.classify)
        profile = TolProfile(t, base.conformal, base.zero_section, base.isotropy, base.planes, f"classify={t:g}")
    rep = classify(grid, profile, pointwise=args.pointwise)
    payload = rep.to_dict(pointwise=args.pointwise)
    if args.out:
        write_atomic(Path(args.out) / "report.json", dumps(payload))
    sys.stdout.write(dumps({k: payload[k] for k in payload if k != "pointwise"}))
    return EXIT_OK


def cmd_check(args) -> int:
    if args.list:
        print("\n".join(acceptance.listing()))
        return EXIT_OK
    scale = _tol_value(args, 1.0)
    seed = _seed(args)
    numbers = args.only or None
    if numbers and any(not 1 <= n <= len(acceptance.CRITERIA) for n in numbers):
        raise ConfigError(f"--only: criteria are numbered 1..{len(acceptance.CRITERIA)}")
    results = []
    for n in numbers or range(1, len(acceptance.CRITERIA) + 1):
        r = acceptance.run_one(n, scale, seed)
        print(r.line(), flush=True)
        results.append(r)
    rep = acceptance.report(results, scale, seed)
    if args.out:
        write_atomic(Path(args.out) / "check.json", dumps(rep))
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if rep["passed"] else EXIT_RESIDUAL


# --- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="g2surf", description="Surfaces in R^7 from harmonic maps into S^6.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--tol", help="named profile (default, tight, loose) or a number")
        sp.add_argument("--seed", type=int, help="random seed (falls back to $G2SURF_SEED, then 1)")
        sp.add_argument("--out", help="directory for output files")

    def surface_args(sp):
        sp.add_argument("--map", required=True, help=f"catalog name ({', '.join(catalog.PRESETS)}) or JSON file")
        sp.add_argument("--domain", help="x0,x1,y0,y1 (default: the map's own domain)")
        sp.add_argument("--grid", default="129,129", help="N,M grid points (default 129,129)")
        sp.add_argument("--mode", choices=("analytic", "fd"), default="analytic")
        sp.add_argument("--step", type=float, default=1e-2, help="finite-difference step for --mode fd")

    a = sub.add_parser("algebra", help="cross product table and identity suite")
    common(a)
    a.add_argument("--trials", type=int, default=10_000)
    a.add_argument("--table", help="JSON file with 7 signed rows replacing the built-in table")
    a.set_defaults(func=cmd_algebra)

    pl = sub.add_parser("plane", help="classify the span of 2 to 4 vectors")
    common(pl)
    pl.add_argument("vectors", nargs="+", help="e1..e7 or seven comma-separated numbers")
    pl.set_defaults(func=cmd_plane)

    s = sub.add_parser("synth", help="integrate F and F+- on a grid; writes grid.csv and grid.json")
    common(s)
    surface_args(s)
    s.set_defaults(func=cmd_synth)

    i = sub.add_parser("invariants", help="classification report for a map")
    common(i)
    surface_args(i)
    i.add_argument("--pointwise", action="store_true", help="include per-point residual arrays")
    i.set_defaults(func=cmd_invariants)

    c = sub.add_parser("check", help="run the acceptance criteria")
    common(c)
    c.add_argument("--list", action="store_true", help="list criteria without running them")
    c.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these criteria")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResidualError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL


if __name__ == "__main__":
    sys.exit(main())
