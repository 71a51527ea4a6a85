"""Command-line entry point.

    wpcurves compute {norm,hilbert,project,cauchy,weld,ba-extend} ...
    wpcurves suite {identities,besov,composition,welding,cauchy,holomorphy,quasiconformal,all} ...

Exit codes: 0 success, 1 suite failure, 2 invalid input, 3 numerical
failure, 64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .io import SCHEMA_VERSION, atomic_write, dumps, gridfunction_to_dict, load_gridfunction

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3, 64

SUITE_NAMES = ("identities", "besov", "composition", "welding", "cauchy", "holomorphy", "quasiconformal", "all")


class UsageError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        unknown = "invalid choice" in message and any(
            message.startswith(f"argument {name}") for name in ("command", "op", "suite"))
        raise UsageError(f"{self.prog}: {message}", EXIT_USAGE if unknown else EXIT_INPUT)


def _box(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("box must be four comma-separated numbers")
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("box must be xmin,xmax,ymin,ymax")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wpcurves", description="Weil-Petersson curve numerics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compute", help="apply one operation to user data")
    ops = comp.add_subparsers(dest="op", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input", help="GridFunction JSON or CSV (node,re,im)")
            p.add_argument("--domain", choices=("circle", "line"), default=None,
                           help="domain for CSV input (JSON carries its own)")
        p.add_argument("--out", help="output file (default: stdout)")
        return p

    p = common(ops.add_parser("norm", help="boundary seminorm of a grid function"))
    p.add_argument("--kind", required=True, choices=("bp", "bpsharp", "bmo", "w11", "w21", "bhat"))
    p.add_argument("--p", type=float, default=2.0)
    common(ops.add_parser("hilbert", help="Hilbert transform (circle or line)"))
    p = common(ops.add_parser("project", help="Riesz projection"))
    p.add_argument("--sign", choices=("plus", "minus"), default="plus")
    p = common(ops.add_parser("cauchy", help="Cauchy-type operator on a welded curve"))
    p.add_argument("--c2", type=float, nargs="+", default=None,
                   help="schlicht coefficients c2 [c3 ...]; omit for the unit circle")
    p.add_argument("--part", choices=("standardized", "plus", "minus"), default="standardized")
    p = common(ops.add_parser("weld", help="welding of the schlicht curve w + c2 w^2 + ..."), needs_input=False)
    p.add_argument("--c2", type=float, nargs="+", required=True, help="coefficients c2 [c3 ...]")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--tol", type=float, default=1e-11)
    p = common(ops.add_parser("ba-extend", help="Beurling-Ahlfors extension or Beltrami field norm"))
    p.add_argument("--box", type=_box, default=(-1.0, 1.0, 0.02, 1.0), help="xmin,xmax,ymin,ymax")
    p.add_argument("--p", type=float, default=2.0)

    suite = sub.add_parser("suite", help="run verification suites")
    suite.add_argument("suites", nargs="+", choices=SUITE_NAMES, metavar="suite",
                       help="one or more of: " + ", ".join(SUITE_NAMES))
    suite.add_argument("--n", type=int, default=1024, help="finest grid of the convergence pairs (n/2, n)")
    suite.add_argument("--c2", type=float, nargs="+", default=[0.1, 0.2, 0.3],
                       help="schlicht family coefficients")
    suite.add_argument("--tol", type=float, default=1e-11, help="Theodorsen iteration tolerance")
    suite.add_argument("--seed", type=int, default=0)
    suite.add_argument("--out", help="report JSON path (default: stdout); plots go next to it")
    suite.add_argument("--no-png", action="store_true", help="write CSV plot data only")
    return parser


def _emit(payload, out) -> None:
    text = dumps(payload)
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _load(args):
    return load_gridfunction(args.input, args.domain or "circle")


def _cmd_norm(args):
    from .norms import boundary_seminorm

    report = boundary_seminorm(_load(args), args.kind, args.p)
    return {"schema": SCHEMA_VERSION, "type": "NormReport", **report.to_dict()}


def _cmd_hilbert(args):
    from .transforms import hilbert_circle, hilbert_line

    f = _load(args)
    g = hilbert_circle(f) if f.domain == "circle" else hilbert_line(f)
    return gridfunction_to_dict(g)


def _cmd_project(args):
    from .transforms import riesz_project

    return gridfunction_to_dict(riesz_project(_load(args), args.sign))


def _cmd_cauchy(args):
    from .cauchy import identity_configuration, plemelj_projections, standardized_cauchy, welded_configuration

    f = _load(args)
    if f.domain != "circle":
        raise ValueError("the Cauchy operators act on circle functions")
    cfg = identity_configuration(f.grid) if args.c2 is None else welded_configuration(args.c2, f.grid)
    if args.part == "standardized":
        g = standardized_cauchy(cfg, f)
    else:
        plus, minus = plemelj_projections(cfg, f)
        g = plus if args.part == "plus" else minus
    return {**gridfunction_to_dict(g), "operator": args.part, "curve": cfg.kind}


def _cmd_weld(args):
    from .grid import make_grid
    from .welding import conformal_weld, curve_from_schlicht

    if args.n < 64 or args.n & (args.n - 1):
        raise ValueError("--n must be a power of two >= 64")
    if not args.tol > 0:
        raise ValueError("--tol must be positive")
    curve, samples = curve_from_schlicht(args.c2, make_grid(args.n))
    weld = conformal_weld(samples, tol=args.tol)
    return {"schema": SCHEMA_VERSION, "type": "WeldingResult", "coefficients": curve.coeffs,
            "certificate": curve.certificate, **weld.to_dict()}


def _cmd_ba_extend(args):
    from .operators import QuasisymmetricMap
    from .quasiconformal import (BeltramiField, BoundaryMassWarning, beurling_ahlfors_extend,
                                  complex_dilatation, hyperbolic_lp_norm)

    data = None
    if Path(args.input).suffix.lower() != ".csv":
        data = json.loads(Path(args.input).read_text(encoding="utf-8"))
    if isinstance(data, dict) and "mu" in data:
        mu = BeltramiField.from_dict(data)
        source = "field"
    else:
        f = load_gridfunction(args.input, args.domain or "line")
        if f.domain != "line":
            raise ValueError("ba-extend needs samples of a line homeomorphism")
        if np.abs(f.values.imag).max() > 1e-12 * max(np.abs(f.values).max(), 1.0):
            raise ValueError("homeomorphism samples must be real")
        h = QuasisymmetricMap.from_samples(f.grid, f.values.real, "line")
        mu = complex_dilatation(beurling_ahlfors_extend(h, args.box))
        source = "extension"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoundaryMassWarning)
        norm = hyperbolic_lp_norm(mu, args.p)
    return {"schema": SCHEMA_VERSION, "type": "BeltramiField", "source": source, "beltrami": mu.to_dict(),
            "sup": mu.sup, "p": args.p, "hyperbolic_norm": norm.value,
            "boundary_fraction": norm.boundary_fraction, "warnings": [str(w.message) for w in caught]}


_COMPUTE = {"norm": _cmd_norm, "hilbert": _cmd_hilbert, "project": _cmd_project,
            "cauchy": _cmd_cauchy, "weld": _cmd_weld, "ba-extend": _cmd_ba_extend}


def _cmd_suite(args) -> int:
    from .plotting import emit_plots
    from .suites import SuiteConfig, run_suites

    if args.n < 128 or args.n & (args.n - 1):
        raise ValueError("--n must be a power of two >= 128")
    config = SuiteConfig(tuple(args.suites), (args.n // 2, args.n), tuple(args.c2), args.tol, args.seed, args.out)
    started = time.time()
    results, timing = run_suites(config)
    for r in results:
        print(r.summary_line(), file=sys.stderr)
    plots = []
    if args.out:
        out = Path(args.out)
        plot_dir = out.with_name(out.stem + "_plots")
        plots = [f"{plot_dir.name}/{name}" for name in emit_plots(results, plot_dir, png=not args.no_png)]
    passed = all(r.passed for r in results)
    payload = {
        "schema": SCHEMA_VERSION,
        "type": "SuiteReport",
        "config": config.to_dict(),
        "passed": passed,
        "criteria": [r.to_dict() for r in results],
        "plots": plots,
        "timing": {"started": started, "seconds": timing},
    }
    _emit(payload, args.out)
    return EXIT_OK if passed else EXIT_FAIL


def _thread_limit():
    raw = os.environ.get("WPCURVES_THREADS")
    if not raw:
        return None
    try:
        limit = int(raw)
    except ValueError:
        limit = 0
    if limit < 1:
        raise UsageError(f"WPCURVES_THREADS must be a positive integer, got {raw!r}", EXIT_INPUT)
    return limit


def _run(args) -> int:
    if args.command == "suite":
        return _cmd_suite(args)
    _emit(_COMPUTE[args.op](args), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        limit = _thread_limit()
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    try:
        if limit is None:
            return _run(args)
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=limit):
            return _run(args)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"wpcurves: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"wpcurves: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
