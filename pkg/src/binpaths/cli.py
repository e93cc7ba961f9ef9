"""Command line front end: price, study, bench."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .bench import records_to_csv, records_to_tables, run_bench
from .errors import PricingError, ProbabilityOutOfRange
from .exact import (
    LARGE_DEPTH,
    ValuationRequest,
    value_exact_parallel,
    value_exact_serial,
    value_leaf_formula,
)
from .mc import (
    McConfig,
    estimate_basic,
    estimate_partitioned,
    estimate_partitioned_equal,
    estimate_shared,
    run_repetitions,
)
from .model import MarketInputs, TreeParams, derive_crr, with_custom_probs
from .payoffs import PAYOFF_NAMES, parse_payoff

METHODS = ("exact", "exact-serial", "leaf", "mc", "pmc", "pmc-equal", "smc")
MC_METHODS = ("mc", "pmc", "pmc-equal", "smc")
ENUM_METHODS = ("exact", "exact-serial")
STUDY_TABLES = ("mc-convergence", "pmc-variance", "smc-vs-pmc")
STUDY_HEADER = "method,M-or-R,mean_estimate,mean_variance_estimate,empirical_variance"

_ESTIMATORS = {
    "mc": estimate_basic,
    "pmc": estimate_partitioned,
    "pmc-equal": estimate_partitioned_equal,
    "smc": estimate_shared,
}


def _float_list(text: str):
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str):
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_market_flags(sp, with_n: bool = True) -> None:
    sp.add_argument("--payoff", required=True, choices=PAYOFF_NAMES)
    sp.add_argument("--S0", required=True, type=float)
    sp.add_argument("--K", required=True, type=float)
    sp.add_argument("--q", required=True, type=float)
    sp.add_argument("--sigma", required=True, type=float)
    sp.add_argument("--T", required=True, type=float)
    if with_n:
        sp.add_argument("--N", required=True, type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binpaths",
        allow_abbrev=False,
        description="Exact and Monte Carlo valuation on recombinant binomial trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    price = sub.add_parser("price", help="value one contract")
    _add_market_flags(price)
    price.add_argument("--method", required=True, choices=METHODS)
    price.add_argument("--workers", type=int, default=1,
                       help="exact partition ranks or MC stratum count M")
    price.add_argument("--samples", type=int, help="MC draws R per repetition")
    price.add_argument("--seed", type=int, default=0)
    price.add_argument("--reps", type=int, default=1,
                       help="independent repetitions averaged in the report")
    price.add_argument("--probs", type=_float_list,
                       help="comma list of N per-step up probabilities")
    price.add_argument("--force-large", action="store_true",
                       help="allow exact enumeration beyond N=28")
    price.add_argument("--eval-threads", type=int, default=1,
                       help="threads for MC stratum evaluation (results unchanged)")
    price.add_argument("--format", choices=("json", "csv", "plain"), default="json")
    price.add_argument("--override-u", type=float, help=argparse.SUPPRESS)
    price.add_argument("--override-p", type=float, help=argparse.SUPPRESS)
    price.set_defaults(handler=cmd_price)

    study = sub.add_parser("study", help="repetition-averaged estimator tables")
    _add_market_flags(study)
    study.add_argument("--table", required=True, choices=STUDY_TABLES)
    study.add_argument("--R-list", type=_int_list, dest="R_list")
    study.add_argument("--M-list", type=_int_list, dest="M_list")
    study.add_argument("--samples", type=int, help="R used by the M sweeps")
    study.add_argument("--seed", type=int, default=0)
    study.add_argument("--reps", type=int, default=1000)
    study.add_argument("--probs", type=_float_list)
    study.set_defaults(handler=cmd_study)

    bench = sub.add_parser("bench", help="scaling grid for the exact engine")
    _add_market_flags(bench, with_n=False)
    bench.add_argument("--N-list", required=True, type=_int_list, dest="N_list")
    bench.add_argument("--M-list", required=True, type=_int_list, dest="M_list")
    bench.add_argument("--reps", type=int, default=3,
                       help="timing repetitions per cell; the median is kept")
    bench.add_argument("--force-large", action="store_true")
    bench.add_argument("--format", choices=("csv", "plain"), default="csv")
    bench.set_defaults(handler=cmd_bench)

    return parser


def _usage_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _tree_for(args, n: int):
    inputs = MarketInputs(S0=args.S0, K=args.K, q=args.q, sigma=args.sigma,
                          T=args.T, N=n)
    probs = getattr(args, "probs", None)
    if probs is not None:
        params = with_custom_probs(inputs, probs)
    else:
        params = derive_crr(inputs)
    u_over = getattr(args, "override_u", None)
    p_over = getattr(args, "override_p", None)
    if u_over is not None or p_over is not None:
        u = u_over if u_over is not None else params.u
        if u <= 1.0:
            raise ProbabilityOutOfRange(f"override u must exceed 1, got {u!r}")
        if p_over is not None:
            if not 0.0 < p_over < 1.0:
                raise ProbabilityOutOfRange(
                    f"override p {p_over!r} is outside the open interval (0, 1)"
                )
            up_probs = np.full(n, float(p_over))
        else:
            up_probs = params.up_probs
        params = TreeParams(dt=params.dt, u=u, d=1.0 / u, beta=0.5 * (u + 1.0 / u),
                            up_probs=up_probs)
    return inputs, params


def _positive(args, names) -> str:
    for name in names:
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None and value < 1:
            return f"--{name} must be at least 1"
    return ""


def _print_report(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report))
    elif fmt == "csv":
        print(",".join(report.keys()))
        print(",".join(str(v) for v in report.values()))
    else:
        width = max(len(k) for k in report)
        for k, v in report.items():
            print(f"{k.ljust(width)}  {v}")


def cmd_price(args) -> int:
    msg = _positive(args, ("workers", "reps", "eval-threads"))
    if msg:
        return _usage_error(msg)
    if args.seed < 0:
        return _usage_error("--seed must be nonnegative")
    if args.method in MC_METHODS:
        if args.samples is None:
            return _usage_error(f"--samples is required for method {args.method}")
        if args.samples < 1:
            return _usage_error("--samples must be at least 1")
    if args.method in ENUM_METHODS and args.N > LARGE_DEPTH and not args.force_large:
        return _usage_error(
            f"exact enumeration at N={args.N} visits 2^{args.N} paths; "
            "pass --force-large to confirm"
        )

    inputs, params = _tree_for(args, args.N)
    kind = parse_payoff(args.payoff)
    req = ValuationRequest(inputs=inputs, params=params, kind=kind,
                           workers=args.workers, force_large=args.force_large)

    reps_used = 1
    empirical = None
    t0 = time.perf_counter()
    if args.method == "exact":
        value, variance, r_used, m_used = value_exact_parallel(req), 0.0, 0, args.workers
    elif args.method == "exact-serial":
        value, variance, r_used, m_used = value_exact_serial(req), 0.0, 0, 1
    elif args.method == "leaf":
        value, variance, r_used, m_used = value_leaf_formula(req), 0.0, 0, 1
    else:
        m_used = 1 if args.method == "mc" else args.workers
        cfg = McConfig(R=args.samples, M=m_used, seed=args.seed, reps=args.reps)
        kwargs = {} if args.method == "mc" else {"eval_threads": args.eval_threads}
        summary = run_repetitions(_ESTIMATORS[args.method], req, cfg, **kwargs)
        value = summary.mean_value
        variance = summary.mean_variance
        r_used = summary.estimates[0].R_used
        reps_used = cfg.reps
        if cfg.reps > 1:
            empirical = summary.empirical_variance
    wall = time.perf_counter() - t0

    report = {
        "method": args.method,
        "payoff": args.payoff,
        "S0": inputs.S0,
        "K": inputs.K,
        "q": inputs.q,
        "sigma": inputs.sigma,
        "T": inputs.T,
        "N": inputs.N,
        "M": m_used,
        "R": r_used,
        "seed": args.seed,
        "reps": reps_used,
        "value": value,
        "variance": variance,
        "std_error": math.sqrt(variance),
        "wall_seconds": wall,
    }
    if empirical is not None:
        report["empirical_variance"] = empirical
    _print_report(report, args.format)
    return 0


def _study_rows(args, req):
    if args.table == "mc-convergence":
        if not args.R_list:
            raise _StudyUsage("--R-list is required for table mc-convergence")
        for r in args.R_list:
            cfg = McConfig(R=r, M=1, seed=args.seed, reps=args.reps)
            summary = run_repetitions(estimate_basic, req, cfg)
            yield "mc", r, summary
        return
    if not args.M_list:
        raise _StudyUsage(f"--M-list is required for table {args.table}")
    if args.samples is None:
        raise _StudyUsage(f"--samples is required for table {args.table}")
    if args.table == "pmc-variance":
        for m in args.M_list:
            cfg = McConfig(R=args.samples, M=m, seed=args.seed, reps=args.reps)
            summary = run_repetitions(estimate_partitioned, req, cfg)
            yield "pmc", m, summary
        return
    for m in args.M_list:
        cfg = McConfig(R=args.samples, M=m, seed=args.seed, reps=args.reps)
        for tag, estimator in (("pmc-equal", estimate_partitioned_equal),
                               ("smc", estimate_shared)):
            summary = run_repetitions(estimator, req, cfg)
            yield tag, m, summary


class _StudyUsage(Exception):
    pass


def cmd_study(args) -> int:
    msg = _positive(args, ("reps",))
    if msg:
        return _usage_error(msg)
    if args.seed < 0:
        return _usage_error("--seed must be nonnegative")
    inputs, params = _tree_for(args, args.N)
    kind = parse_payoff(args.payoff)
    req = ValuationRequest(inputs=inputs, params=params, kind=kind)
    lines = [STUDY_HEADER]
    try:
        for tag, sweep, summary in _study_rows(args, req):
            lines.append(
                f"{tag},{sweep},{summary.mean_value!r},"
                f"{summary.mean_variance!r},{summary.empirical_variance!r}"
            )
    except _StudyUsage as exc:
        return _usage_error(str(exc))
    print("\n".join(lines))
    return 0


def cmd_bench(args) -> int:
    msg = _positive(args, ("reps",))
    if msg:
        return _usage_error(msg)
    if any(n < 1 for n in args.N_list) or any(m < 1 for m in args.M_list):
        return _usage_error("--N-list and --M-list entries must be at least 1")
    if any(m2 <= m1 for m1, m2 in zip(args.M_list, args.M_list[1:])):
        return _usage_error("--M-list must be strictly ascending")
    too_deep = [n for n in args.N_list if n > LARGE_DEPTH]
    if too_deep and not args.force_large:
        return _usage_error(
            f"N={too_deep[0]} needs --force-large to enumerate 2^{too_deep[0]} paths"
        )
    kind = parse_payoff(args.payoff)
    cores = os.cpu_count() or 1
    oversub = [m for m in args.M_list if m > cores]
    if oversub:
        print(
            f"note: worker counts {oversub} exceed the {cores} available "
            "cores; those cells measure oversubscription",
            file=sys.stderr,
        )

    trees = {}
    for n in args.N_list:
        trees[n] = _tree_for(args, n)

    def runner(n: int, m: int) -> None:
        inputs, params = trees[n]
        req = ValuationRequest(inputs=inputs, params=params, kind=kind,
                               workers=m, force_large=args.force_large)
        value_exact_parallel(req)

    pairs = [(n, m) for n in args.N_list for m in args.M_list]
    records = run_bench(pairs, runner, repetitions=args.reps)
    if args.format == "csv":
        sys.stdout.write(records_to_csv(records))
    else:
        print(records_to_tables(records))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, int):
            return exc.code
        return 0 if exc.code is None else 2
    try:
        return args.handler(args)
    except PricingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main_entry() -> None:
    raise SystemExit(main())
