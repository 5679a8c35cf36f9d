"""Command-line front end.

Every run writes one JSON report (``version: report_v1``, keys sorted, no
timestamps) to ``--out`` or stdout. Exit status: 0 when every ``holds`` flag
is true, 1 on a violated bound or a computation error, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from heightdist.auxpoly import angular_via_auxpoly, short_multiple
from heightdist.discrepancy import (
    TWO_PI,
    AnnulusSpec,
    SectorSpec,
    angular_mean_stat,
    erdos_turan_check,
    radial_mean_stat,
)
from heightdist.ensembles import (
    OrbitEnsemble,
    galois_stable_ensemble,
    kummer_ensemble,
    load_ensemble,
)
from heightdist.equidist import (
    DEFAULT_NODES,
    cell_counts,
    choose_offset,
    default_N,
    select_embeddings,
    test_function_library,
    thm31_mean_check,
)
from heightdist.errors import HeightDistError
from heightdist.heights import mahler_jensen
from heightdist.polyparse import PolyParseError, parse_poly
from heightdist.rootfind import DEFAULT_TOL, roots, roots_with_multiplicity
from heightdist.zpoly import IntPolynomial

REPORT_VERSION = "report_v1"
# The Jensen cross-check loses accuracy on huge-coefficient inputs.
JENSEN_MAX_DEGREE = 400


class UsageError(Exception):
    pass


def _workers() -> int:
    raw = os.environ.get("EQ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"EQ_THREADS must be an integer, got {raw!r}") from None


def _run_ordered(tasks: list) -> list:
    """Run zero-argument callables, possibly concurrently, in input order."""
    n = _workers()
    if n == 1 or len(tasks) < 2:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda t: t(), tasks))


def _parse_N(text: str):
    if text == "auto":
        return "auto"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("N must be an integer >= 2 or 'auto'") from None
    if v < 2:
        raise argparse.ArgumentTypeError("N must be >= 2")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _resolve_N(N, ens: OrbitEnsemble) -> int:
    return default_N(ens.h_S) if N == "auto" else N


def _check_common(args) -> None:
    if getattr(args, "r", None) is not None and not args.r > 1:
        raise UsageError("--r must exceed 1")
    if getattr(args, "eps", None) is not None and not 0 < args.eps < 1:
        raise UsageError("--eps must lie in (0, 1)")
    if getattr(args, "theta", None) is not None and not 0 <= args.theta <= TWO_PI:
        raise UsageError("--theta must lie in [0, 2 pi]")
    if getattr(args, "nodes", None) is not None and args.nodes < 16:
        raise UsageError("--nodes must be at least 16")


def _build_ensemble(args) -> tuple[OrbitEnsemble, IntPolynomial | None]:
    given = [x for x in ("poly", "family", "ensemble") if getattr(args, x, None)]
    if len(given) != 1:
        raise UsageError("give exactly one of --poly, --family, --ensemble")
    if args.poly:
        try:
            p = parse_poly(args.poly)
        except PolyParseError as exc:
            raise UsageError(f"bad --poly: {exc}") from exc
        return galois_stable_ensemble(p, args.tol), p
    if args.family:
        if args.family != "kummer":
            raise UsageError(f"unknown family {args.family!r}")
        if args.m is None or args.n is None:
            raise UsageError("family kummer needs --m and --n")
        if args.m < 3:
            raise UsageError("--m must be >= 3")
        return kummer_ensemble(args.m, args.n, args.height_mode), None
    return load_ensemble(args.ensemble), None


def _library_reports(ens: OrbitEnsemble, r: float, N: int, nodes: int) -> list[dict]:
    tasks = [(lambda f=f: thm31_mean_check(ens, f, r, N, nodes).to_dict())
             for f in test_function_library(r)]
    return _run_ordered(tasks)


def _write_cells_csv(path: Path, ens: OrbitEnsemble, N: int) -> None:
    part = choose_offset(ens, N)
    labels = ens.set_labels or tuple(range(len(ens)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["set", "cell", "count", "expected", "deviation"])
        for lab, s, rad in zip(labels, ens.conjugate_sets, ens.radii):
            counts, _ = cell_counts(s, part, rad)
            for j, c in enumerate(counts):
                exp = ens.card_S / N
                w.writerow([lab, j, int(c), repr(exp), repr(float(c - exp))])


def _write_points_csv(path: Path, ens: OrbitEnsemble) -> None:
    labels = ens.set_labels or tuple(range(len(ens)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["set", "re", "im", "radius"])
        for lab, s, rad in zip(labels, ens.conjugate_sets, ens.radii):
            for z, e in zip(s, rad):
                w.writerow([lab, repr(float(z.real)), repr(float(z.imag)), repr(float(e))])


def _emit_csvs(args, ens: OrbitEnsemble, N: int) -> list[str]:
    if not args.csv_dir:
        return []
    d = Path(args.csv_dir)
    d.mkdir(parents=True, exist_ok=True)
    _write_points_csv(d / "points.csv", ens)
    _write_cells_csv(d / "cells.csv", ens, N)
    return ["points.csv", "cells.csv"]


def cmd_analyze(args) -> dict:
    ens, p = _build_ensemble(args)
    N = _resolve_N(args.N, ens)
    sector = SectorSpec(args.start, args.theta)
    tasks = [
        lambda: radial_mean_stat(ens, AnnulusSpec(args.r)).to_dict(),
        lambda: angular_mean_stat(ens, sector).to_dict(),
    ]
    radial, angular = _run_ordered(tasks)
    out = {
        "heights": ens.heights.to_dict(),
        "radial": radial,
        "angular": angular,
        "thm31": _library_reports(ens, args.r, N, args.nodes),
        "N": N,
    }
    if p is not None:
        if p.coeffs[0] != 0:
            out["erdos_turan"] = erdos_turan_check(
                p, sector, roots(p, args.tol)).to_dict()
        out["log_mahler_roots"] = ens.heights.mahler_log
        if p.degree <= JENSEN_MAX_DEGREE:
            out["log_mahler_jensen"] = math.log(mahler_jensen(p, max(args.nodes, 1 << 14)))
    out["csv"] = _emit_csvs(args, ens, N)
    return out


def littlewood(rng: np.random.Generator, degree: int) -> IntPolynomial:
    signs = rng.integers(0, 2, degree + 1) * 2 - 1
    return IntPolynomial(tuple(int(s) for s in signs))


def cmd_et_fuzz(args) -> dict:
    rng = np.random.default_rng(args.seed)
    polys = [littlewood(rng, args.degree) for _ in range(args.count)]
    starts = [TWO_PI * k / args.sectors + args.start for k in range(args.sectors)]

    def check(p):
        rs = roots_with_multiplicity(p, args.tol)
        reps = [erdos_turan_check(p, SectorSpec(s, args.theta), rs) for s in starts]
        return [(r.holds, r.statistic / r.bound, r.boundary_warnings) for r in reps]

    results = _run_ordered([(lambda p=p: check(p)) for p in polys])
    flat = [x for row in results for x in row]
    violations = [(i, j) for i, row in enumerate(results) for j, x in enumerate(row) if not x[0]]
    return {
        "checks": len(flat),
        "violations": len(violations),
        "violating_cases": [{"poly": i, "sector": j} for i, j in violations[:50]],
        "max_ratio": max(x[1] for x in flat),
        "boundary_warnings": sum(x[2] for x in flat),
        "holds": not violations,
    }


def cmd_bound_check(args) -> dict:
    ens, _ = _build_ensemble(args)
    N = _resolve_N(args.N, ens)
    sector = SectorSpec(args.start, args.theta)
    part = choose_offset(ens, N)
    cells = [angular_mean_stat(ens, part.cell(j)).to_dict() for j in range(N)]
    return {
        "heights": ens.heights.to_dict(),
        "radial": radial_mean_stat(ens, AnnulusSpec(args.r)).to_dict(),
        "angular": angular_mean_stat(ens, sector).to_dict(),
        "angular_cells": cells,
        "thm31": _library_reports(ens, args.r, N, args.nodes),
        "N": N,
        "offset_x": part.offset_x,
        "csv": _emit_csvs(args, ens, N),
    }


def _select_payload(ens: OrbitEnsemble, args) -> dict:
    N = _resolve_N(args.N, ens)
    selected, rep = select_embeddings(ens, args.r, N, args.eps, args.degK)
    labels = ens.set_labels or tuple(range(len(ens)))
    return {"selection": rep.to_dict(), "selected": [labels[k] for k in selected], "N": N}


def cmd_select(args) -> dict:
    ens, _ = _build_ensemble(args)
    out = _select_payload(ens, args)
    out["csv"] = _emit_csvs(args, ens, out["N"])
    return out


def cmd_auxpoly(args) -> dict:
    if not args.poly:
        raise UsageError("auxpoly needs --poly")
    try:
        p = parse_poly(args.poly)
    except PolyParseError as exc:
        raise UsageError(f"bad --poly: {exc}") from exc
    out = {}
    if args.L is not None:
        F, achieved, rhs = short_multiple(p, args.L)
        out["short_multiple"] = {"L": args.L, "F": F.to_json(), "achieved_height": achieved,
                                 "siegel_rhs": rhs}
    out["pipeline"] = angular_via_auxpoly(p, SectorSpec(args.start, args.theta)).to_dict()
    return out


def cmd_family(args) -> dict:
    if args.name != "kummer":
        raise UsageError(f"unknown family {args.name!r}")
    if args.m is None or args.n is None:
        raise UsageError("family kummer needs --m and --n")
    if args.m < 3:
        raise UsageError("--m must be >= 3")
    ens = kummer_ensemble(args.m, args.n, args.height_mode)
    out = _select_payload(ens, args)
    predicted = [a for a in ens.set_labels
                 if (2 * math.sin(math.pi * a / args.m)) ** (1 / args.n) < 1 / args.r]
    failing = out["selection"]["details"]["failing_radial"]
    out["predicted_inside_hole"] = predicted
    out["failing_match_prediction"] = sorted(failing) == predicted
    out["radial"] = radial_mean_stat(ens, AnnulusSpec(args.r)).to_dict()
    out["angular"] = angular_mean_stat(ens, SectorSpec(args.start, args.theta)).to_dict()
    out["heights"] = ens.heights.to_dict()
    out["m_S_mode"] = ens.m_S_mode
    out["csv"] = _emit_csvs(args, ens, out["N"])
    return out


def _collect_holds(obj, path="") -> list[tuple[str, bool]]:
    found = []
    if isinstance(obj, dict):
        if "holds" in obj and isinstance(obj["holds"], bool):
            found.append((path or "report", obj["holds"]))
        for k, v in obj.items():
            if k != "holds":
                found.extend(_collect_holds(v, f"{path}.{k}" if path else k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            found.extend(_collect_holds(v, f"{path}[{i}]"))
    return found


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--csv-dir", help="directory for points.csv and cells.csv")
    common.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--theta", type=float, default=math.pi / 2, help="sector angle")
    common.add_argument("--start", type=float, default=0.1, help="sector start angle")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--poly", help="integer polynomial literal, e.g. 'x^64-2'")
    source.add_argument("--family", help="named family (kummer)")
    source.add_argument("--ensemble", help="ensemble JSON file")
    source.add_argument("--m", type=int)
    source.add_argument("--n", type=_positive_int)
    source.add_argument("--height-mode", choices=("exact", "bound"), default="exact")

    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--r", type=float, default=1.2)
    bounds.add_argument("--N", type=_parse_N, default="auto")

    sel = argparse.ArgumentParser(add_help=False)
    sel.add_argument("--eps", type=float, default=0.25)
    sel.add_argument("--degK", type=_positive_int, default=1)

    ap = argparse.ArgumentParser(prog="heightdist", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common, source, bounds],
                   help="heights, radial, angular and composite bounds")
    fz = sub.add_parser("et-fuzz", parents=[common], help="Erdos-Turan on random Littlewood polynomials")
    fz.add_argument("--count", type=_positive_int, default=1000)
    fz.add_argument("--degree", type=_positive_int, default=100)
    fz.add_argument("--sectors", type=_positive_int, default=16)
    sub.add_parser("bound-check", parents=[common, source, bounds],
                   help="all ensemble bounds, including per-cell angular reports")
    sub.add_parser("select", parents=[common, source, bounds, sel],
                   help="embedding selection against the radial and per-cell thresholds")
    ax = sub.add_parser("auxpoly", parents=[common, source], help="short multiple and auxiliary pipeline")
    ax.add_argument("--L", type=_positive_int)
    fam = sub.add_parser("family", parents=[common, source, bounds, sel], help="named family run")
    fam.add_argument("name", choices=("kummer",))
    return ap


COMMANDS = {
    "analyze": cmd_analyze,
    "et-fuzz": cmd_et_fuzz,
    "bound-check": cmd_bound_check,
    "select": cmd_select,
    "auxpoly": cmd_auxpoly,
    "family": cmd_family,
}


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "csv_dir")}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _check_common(args)
        payload = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (HeightDistError, ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        report = {"version": REPORT_VERSION, "command": args.command,
                  "config": _config_echo(args),
                  "error": {"type": type(exc).__name__, "message": str(exc)}, "all_hold": False}
        _write(args, report)
        return 1
    holds = _collect_holds(payload)
    failed = [name for name, ok in holds if not ok]
    report = {"version": REPORT_VERSION, "command": args.command, "config": _config_echo(args),
              "results": payload, "all_hold": not failed, "violated": failed}
    _write(args, report)
    for name in failed:
        print(f"violated: {name}", file=sys.stderr)
    return 1 if failed else 0


def _write(args, report: dict) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
