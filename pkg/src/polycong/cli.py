"""Command-line front end.

Exit codes: 0 success, 1 invariant violation, 2 usage or parse error,
3 budget exceeded. The worker count comes from ``--threads``, else the
``POLYCONG_THREADS`` environment variable, else the CPU count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import bounds, chain, parallel
from .counting import (BudgetError, count_J, count_J_convolution, count_MF, count_NF, count_T,
                       DIRECT_BUDGET, TABLE_BUDGET)
from .cover import AnchorError, CoverageError, build_cover, verify_cover
from .experiment import ExperimentConfig, run_experiment
from .poly import PolynomialSyntaxError, index_count, parse
from .regions import RegionError, load_region

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    """``"1,2,5-8"`` -> ``[1, 2, 5, 6, 7, 8]``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _int_vector(text: str | None, n: int, name: str) -> list[int]:
    if text is None:
        return [0] * n
    vals = [int(v) for v in text.split(",") if v.strip()]
    if len(vals) != n:
        raise UsageError(f"--{name} needs {n} comma-separated integers, got {len(vals)}")
    return vals


def _emit(record: dict, elapsed: float, args: argparse.Namespace) -> None:
    if args.bare:
        print(record["count"])
        return
    out = dict(record)
    if not args.no_timing:
        out["elapsed_s"] = round(elapsed, 6)
    print(json.dumps(out, sort_keys=True))


# -- count -------------------------------------------------------------------

def cmd_count(args: argparse.Namespace) -> int:
    what = args.what
    if args.s is not None and args.s < 1:
        raise UsageError("s must be at least 1")
    if what in ("nf", "mf", "t"):
        if args.poly is None or args.mod is None:
            raise UsageError(f"count {what} needs --poly and --mod")
        F = parse(args.poly, args.mod, args.dims)
    if what == "nf":
        region = load_region(args.region, F.dims)
        res = count_NF(F, region, budget=args.budget or 10**9)
    elif what == "mf":
        if args.H is None or args.R is None:
            raise UsageError("count mf needs --H and --R")
        res = count_MF(F, _int_vector(args.K, F.dims, "K"), args.L, args.H, args.R)
    elif what == "t":
        if args.H is None or args.s is None:
            raise UsageError("count t needs --H and --s")
        res = count_T(F, args.u, args.H, args.s, method=args.method if args.method != "auto" else "histogram",
                      budget=args.budget or DIRECT_BUDGET)
    else:
        if None in (args.s, args.k, args.d, args.H):
            raise UsageError("count j needs --s, --k, --d and --H")
        U = _int_vector(args.U, index_count(args.k, args.d), "U") if args.U else None
        method = args.method
        if method == "auto":
            method = "direct" if args.H ** (2 * args.s * args.d) <= (args.budget or DIRECT_BUDGET) else "convolution"
        if method == "direct":
            res = count_J(args.s, args.k, args.d, U, args.H, budget=args.budget or DIRECT_BUDGET)
        elif method == "convolution":
            res = count_J_convolution(args.s, args.k, args.d, U, args.H, budget=args.budget or TABLE_BUDGET)
        else:
            raise UsageError(f"count j has no method {method!r}")
    _emit(res.record(), res.elapsed, args)
    return EXIT_OK


# -- cover -------------------------------------------------------------------

def cmd_cover(args: argparse.Namespace) -> int:
    region = load_region(args.region, args.dims)
    cover = build_cover(region, args.M, m=args.mod)
    if args.out:
        Path(args.out).write_text(cover.export())
    try:
        report = verify_cover(cover, sample_budget=args.samples, seed=args.seed, shell_budget=args.shell_budget)
    except CoverageError as exc:
        sys.stdout.write(exc.report.to_text())
        print(f"coverage violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    sys.stdout.write(report.to_text())
    return EXIT_OK


# -- verify-chain -------------------------------------------------------------

def _R_tags(text: str) -> list[str]:
    tags = [t.strip() for t in text.split(",") if t.strip()]
    for t in tags:
        if t not in ("H", "m") and not t.isdigit():
            raise UsageError(f"R values must be integers, 'H' or 'm', got {t!r}")
    return tags


def cmd_verify_chain(args: argparse.Namespace) -> int:
    if args.poly is not None:
        if args.mod is None:
            raise UsageError("single-instance mode needs --mod")
        try:
            H, R, s = int(args.H_list), int(args.R_list), int(args.s_list)
        except ValueError:
            raise UsageError("single-instance mode needs a single integer for each of --H, --R, --s") from None
        if s < 1:
            raise UsageError("s must be at least 1")
        F = parse(args.poly, args.mod, args.dims)
        res = chain.check_instance(F, _int_vector(args.K, F.dims, "K"), args.L, H, R, s)
        print(res.to_text())
        return EXIT_OK if res.ok else EXIT_VIOLATION
    grid = {"d": _ints(args.d_list), "k": _ints(args.k_list), "m": _ints(args.m_list),
            "H": _ints(args.H_list), "s": _ints(args.s_list), "R": _R_tags(args.R_list)}
    for key, vals in grid.items():
        if not vals:
            raise UsageError(f"grid axis {key} is empty")
    if min(grid["s"]) < 1:
        raise UsageError("s must be at least 1")
    if min(grid["m"]) < 3:
        raise UsageError("moduli must be at least 3")
    if min(grid["k"]) < 2:
        raise UsageError("the chain needs k >= 2")
    report = chain.run_grid(grid, seed=args.seed, polys=args.polys)
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"{report.instances} instances, {report.violations} violations", file=sys.stderr)
    return EXIT_VIOLATION if report.violations else EXIT_OK


# -- experiment ----------------------------------------------------------------

def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.load(args.config)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = run_experiment(cfg)
    out = args.out or cfg.output
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- bounds --------------------------------------------------------------------

def cmd_bounds(args: argparse.Namespace) -> int:
    if args.name == "params":
        if args.mu is None:
            raise UsageError("bounds params needs --mu")
        if args.rule == "thm34":
            pc = bounds.choose_params_thm34(args.m, args.mu, args.d)
        else:
            pc = bounds.choose_params_thm35(args.m, args.mu, args.k, args.d)
        print(f"rule={pc.rule} M={pc.M} N={pc.N} N_bracket={pc.N_bracket} eps={pc.eps!r} bracketing={'ok' if pc.check() else 'FAIL'}")
        return EXIT_OK
    params = {key: getattr(args, key) for key in ("H", "R", "h", "mu") if getattr(args, key) is not None}
    report = bounds.make_report(args.name, m=args.m, k=args.k, d=args.d, slack=args.slack,
                                observed=args.observed, **params)
    print(bounds.BoundReport.HEADER)
    print(report.csv_row())
    if args.name == "thm35":
        c = bounds.bound_thm35_cases(args.m, args.mu, args.k, args.d, args.slack)
        print(f"# case={c.case} threshold={c.threshold!r} large={c.large!r} small={c.small!r}")
    if report.observed is not None and report.observed > report.bound:
        return EXIT_VIOLATION
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polycong", description="Exact counts of polynomial congruence solutions.")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $POLYCONG_THREADS or CPU count)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="exact counts N_F, M_F, T or J")
    c.add_argument("what", choices=["nf", "mf", "t", "j"])
    c.add_argument("--poly", help='polynomial such as "x1^2+3*x1*x2-x2"')
    c.add_argument("--mod", type=int, help="modulus m >= 3")
    c.add_argument("--dims", type=int, help="number of variables (default: highest variable index)")
    c.add_argument("--region", default="full", help='"full", inline JSON or a JSON file (nf)')
    c.add_argument("--H", type=int, help="box side")
    c.add_argument("--R", type=int, help="interval length (mf)")
    c.add_argument("--K", help="box offsets K_1,..,K_d (mf, default 0)")
    c.add_argument("--L", type=int, default=0, help="interval offset (mf)")
    c.add_argument("--s", type=int, help="half the tuple length (t, j)")
    c.add_argument("--u", type=int, default=0, help="target residue (t)")
    c.add_argument("--k", type=int, help="degree (j)")
    c.add_argument("--d", type=int, help="dimension (j)")
    c.add_argument("--U", help="target vector, comma-separated in graded order (j, default 0)")
    c.add_argument("--method", default="auto", choices=["auto", "direct", "convolution", "histogram"])
    c.add_argument("--budget", type=int, help="enumeration cap")
    c.add_argument("--bare", action="store_true", help="print only the count")
    c.add_argument("--no-timing", action="store_true", help="omit the elapsed time")
    c.set_defaults(func=cmd_count)

    v = sub.add_parser("cover", help="build and verify a dyadic cube cover")
    v.add_argument("--region", required=True, help='"full", inline JSON or a JSON file')
    v.add_argument("--dims", type=int, help="dimension for 'full'")
    v.add_argument("--M", type=int, required=True, help="depth")
    v.add_argument("--mod", type=int, help="check the anchor against residue points x/m")
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--shell-budget", type=int, default=1_000_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="write the cover export here")
    v.set_defaults(func=cmd_cover)

    ch = sub.add_parser("verify-chain", help="check the M <= ... <= J(0) chain exactly")
    ch.add_argument("--d", dest="d_list", default="1,2")
    ch.add_argument("--k", dest="k_list", default="2,3")
    ch.add_argument("--m", dest="m_list", default="5-30")
    ch.add_argument("--H", dest="H_list", default="2-6")
    ch.add_argument("--R", dest="R_list", default="1,H,m", help="integers or the tags H, m")
    ch.add_argument("--s", dest="s_list", default="1,2")
    ch.add_argument("--polys", type=int, default=chain.POLYS_PER_CELL, help="random polynomials per cell")
    ch.add_argument("--seed", type=int, default=0)
    ch.add_argument("--out")
    single = ch.add_argument_group("single instance", "with --poly, --H/--R/--s take one integer each")
    single.add_argument("--poly")
    single.add_argument("--mod", type=int)
    single.add_argument("--dims", type=int)
    single.add_argument("--K", help="offsets K_1,..,K_d (default 0)")
    single.add_argument("--L", type=int, default=0)
    ch.set_defaults(func=cmd_verify_chain)

    e = sub.add_parser("experiment", help="run an experiment config and write CSV")
    e.add_argument("config", help="JSON config file")
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("bounds", help="evaluate a bound, or the depth choice with 'params'")
    b.add_argument("name", choices=sorted(bounds.BOUNDS) + ["params"])
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--d", type=int, default=2)
    b.add_argument("--H", type=float)
    b.add_argument("--R", type=float)
    b.add_argument("--h", type=float)
    b.add_argument("--mu", type=float)
    b.add_argument("--slack", type=float, default=1.0)
    b.add_argument("--observed", type=int)
    b.add_argument("--rule", choices=["thm34", "thm35"], default="thm34")
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    parallel.set_threads(args.threads)
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, PolynomialSyntaxError, RegionError, AnchorError, ValueError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        parallel.set_threads(None)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
