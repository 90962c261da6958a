"""``budgreed`` command line.

Exit codes: 0 success, 2 usage error, 3 bad input data, 4 a checked claim
failed (bound not certified, adversarial claim failed, oracle violation).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings

from .core import DomainError, InfeasibleGuessError, InstanceFormatError, load_instance, residual, validate_oracle

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ASSERT = 0, 2, 3, 4

log = logging.getLogger("budgreed")


class UsageError(Exception):
    pass


def _default_workers() -> int:
    raw = os.environ.get("BUDGREED_WORKERS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise UsageError(f"BUDGREED_WORKERS must be an integer, got {raw!r}") from None
    if w < 1:
        raise UsageError(f"BUDGREED_WORKERS must be >= 1, got {w}")
    return w


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _emit(obj, as_json: bool, text: str):
    if as_json:
        print(json.dumps(obj, sort_keys=True))
    else:
        print(text)


# -- run ----------------------------------------------------------------------

def cmd_run(args) -> int:
    from .greedy import ParameterError, run_algorithm

    inst = load_instance(args.instance)
    names = [a for a in args.alg.split(",") if a]
    if not names:
        raise UsageError("--alg needs at least one algorithm name")
    results = []
    for name in names:
        try:
            res = run_algorithm(name, inst, workers=args.workers)
        except ParameterError as e:
            raise UsageError(str(e)) from None
        results.append(res)
    if args.format == "json":
        out = []
        for r in results:
            d = r.to_dict()
            if not args.trajectory:
                d.pop("trajectory")
            out.append(d)
        print(json.dumps(out, sort_keys=True))
    else:
        for r in results:
            print(f"{r.algorithm}: value={r.value!r} cost={r.solution.cost!r} "
                  f"set={sorted(inst.lift(r.members))} queries={r.oracle_queries} winner={r.winner}")
    return EXIT_OK


# -- ratio batch ------------------------------------------------------------------

def _seed_range(text):
    if ":" in text:
        a, b = text.split(":", 1)
        return range(int(a), int(b))
    return range(int(text))


def cmd_ratio_batch(args) -> int:
    from .exact import PROFILES, ratio_batch, summarize, write_csv
    from .greedy import ParameterError, resolve

    algs = [a for a in args.alg.split(",") if a]
    for a in algs:
        try:
            resolve(a)
        except ParameterError as e:
            raise UsageError(str(e)) from None
    profiles = PROFILES if args.profile == "all" else args.profile.split(",")
    for p in profiles:
        if p not in PROFILES:
            raise UsageError(f"unknown cost profile {p!r}")
    if args.n > args.cap:
        raise UsageError(f"--n {args.n} exceeds the brute-force cap {args.cap}")
    try:
        seeds = _seed_range(args.seeds)
    except ValueError:
        raise UsageError(f"bad --seeds {args.seeds!r}; use COUNT or START:STOP") from None
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for p in profiles:
            rows += ratio_batch(args.family, args.n, seeds, p, algs, workers=args.workers, cap=args.cap)
    rows += summarize(rows)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, fh)
    else:
        sys.stdout.write(write_csv(rows))
    return EXIT_OK


# -- verify-bound -----------------------------------------------------------------

def cmd_verify_bound(args) -> int:
    from .bound import BoundParameterError, certify
    from .rational import parse_rational

    try:
        rho = parse_rational(args.rho)
        delta = parse_rational(args.delta)
        grid = None if args.grid == "exact" else int(args.grid)
        rep = certify(rho, delta, grid, workers=args.workers, force=None if args.backend == "auto" else args.backend)
    except (ValueError, BoundParameterError) as e:
        raise UsageError(str(e)) from None
    _emit(rep.to_dict(), args.json, rep.format_text())
    return EXIT_OK if rep.certified else EXIT_ASSERT


# -- adversarial ----------------------------------------------------------------

def cmd_adversarial(args) -> int:
    from .adversarial import AdversarialParams, verify_adversarial

    try:
        params = AdversarialParams(n=args.n, eps=args.eps, alpha=args.alpha)
    except DomainError as e:
        raise UsageError(str(e)) from None
    rep = verify_adversarial(params, engine="generic" if args.full_engine else "auto")
    _emit(rep.to_dict(), args.json, rep.format_text())
    return EXIT_OK if rep.ok else EXIT_ASSERT


# -- analytic -------------------------------------------------------------------

def cmd_analytic(args) -> int:
    from .analytic import analytic_report

    rep = analytic_report(points=args.points)
    d = rep.to_dict()
    if not args.grid:
        d.pop("z_grid")
        d.pop("p_grid")
    _emit(d, args.json, rep.format_text())
    return EXIT_OK


# -- validate-oracle --------------------------------------------------------------

def cmd_validate_oracle(args) -> int:
    sources = [args.instance is not None, args.random is not None, args.adversarial is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --instance, --random, --adversarial")
    if args.instance is not None:
        inst = load_instance(args.instance)
    elif args.random is not None:
        from .exact import random_instance

        try:
            family, n, seed, profile = args.random.split(":")
            inst = random_instance(family, int(n), int(seed), profile)
        except ValueError as e:
            raise UsageError(f"--random expects FAMILY:N:SEED:PROFILE ({e})") from None
    else:
        from .adversarial import AdversarialParams, build_adversarial

        try:
            n, eps, alpha = args.adversarial.split(":")
            inst = build_adversarial(AdversarialParams(int(n), float(eps), float(alpha)))
        except ValueError as e:
            raise UsageError(f"--adversarial expects N:EPS:ALPHA ({e})") from None
    if args.residual:
        guess = [int(v) for v in args.residual.split(",") if v]
        inst = residual(inst, guess)
    rep = validate_oracle(inst.oracle, trials=args.trials, seed=args.seed)
    d = rep.to_dict()
    text = f"kind={rep.kind} n={rep.n} trials={rep.trials} checks={rep.checks} violations={len(rep.violations)}"
    for v in rep.violations[:10]:
        text += f"\n  {v.kind}: S={list(v.S)} T={list(v.T)} u={v.u} v={v.v} lhs={v.lhs!r} rhs={v.rhs!r}"
    _emit(d, args.json, text)
    return EXIT_OK if rep.ok else EXIT_ASSERT


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="budgreed", description="Greedy algorithms for budgeted submodular maximization.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run algorithms on an instance file")
    r.add_argument("--instance", required=True)
    r.add_argument("--alg", default="greedy",
                   help="comma list: plain-greedy, greedy, greedy-plus, threshold:<eps>:<base>, k-guess:<k>:<inner>")
    r.add_argument("--workers", type=_positive_int, default=None)
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.add_argument("--trajectory", action="store_true", help="include trajectories in JSON output")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("ratio-batch", help="brute-force ratio experiment, CSV output")
    b.add_argument("--family", choices=("coverage", "modular"), default="coverage")
    b.add_argument("--n", type=_positive_int, default=14)
    b.add_argument("--seeds", default="200", help="COUNT or START:STOP")
    b.add_argument("--profile", default="uniform", help="uniform, harmonic, heavy-one, a comma list, or all")
    b.add_argument("--alg", default="plain-greedy,greedy,greedy-plus")
    b.add_argument("--cap", type=_positive_int, default=22)
    b.add_argument("--workers", type=_positive_int, default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_ratio_batch)

    v = sub.add_parser("verify-bound", help="certify a lower bound on the ratio of Greedy")
    v.add_argument("--rho", default="427/1000")
    v.add_argument("--delta", default="1/1000")
    v.add_argument("--grid", default="1000000000", help="grid denominator D, or 'exact'")
    v.add_argument("--workers", type=_positive_int, default=None)
    v.add_argument("--backend", choices=("auto", "numba", "numpy"), default="auto")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify_bound)

    a = sub.add_parser("adversarial", help="build and verify the hard instance for Greedy")
    a.add_argument("--alpha", type=float, default=0.461)
    a.add_argument("--eps", type=float, default=1e-4)
    a.add_argument("--n", type=int, default=100_000)
    a.add_argument("--full-engine", action="store_true", help="use the generic greedy engine (slow)")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_adversarial)

    z = sub.add_parser("analytic", help="z(y), p(x) and their checks")
    z.add_argument("--points", type=_positive_int, default=1000)
    z.add_argument("--grid", action="store_true", help="include full z and p grids in JSON")
    z.add_argument("--json", action="store_true")
    z.set_defaults(func=cmd_analytic)

    o = sub.add_parser("validate-oracle", help="randomized monotone/submodular audit")
    o.add_argument("--instance")
    o.add_argument("--random", help="FAMILY:N:SEED:PROFILE")
    o.add_argument("--adversarial", help="N:EPS:ALPHA")
    o.add_argument("--residual", help="comma list of guess ids to wrap the oracle with")
    o.add_argument("--trials", type=_positive_int, default=10_000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_validate_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        if hasattr(args, "workers") and args.workers is None:
            args.workers = _default_workers()
        return args.func(args)
    except (UsageError, InfeasibleGuessError) as e:
        print(f"budgreed: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, DomainError, OSError) as e:
        print(f"budgreed: data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
