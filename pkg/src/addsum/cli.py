"""addsum command line.

Exit codes: 0 success, 2 usage error, 3 size-guard violation, 4 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import mpmath

from . import harness as H
from .arith import default_threads
from .asymptotics import DEFAULT_N, eval_gcd_asymptotic, eval_lcm_asymptotic
from .catalog import parse_spec
from .errors import DomainError, RegimeError, SizeGuardError
from .exact import sum_gcd_exact, sum_gcd_mobius, sum_gcd_naive, sum_lcm_exact, sum_lcm_naive

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VERIFY = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _threads(value):
    if value is not None:
        return value
    return default_threads()


def _fmt(v, digits: int) -> str:
    if isinstance(v, int):
        return str(v)
    return mpmath.nstr(v, digits)


def cmd_exact(args) -> int:
    spec = parse_spec(args.f)
    threads = _threads(args.threads)
    if args.method == "identity":
        fn = sum_gcd_exact if args.mode == "gcd" else sum_lcm_exact
        res = fn(spec, args.k, args.x, threads=threads)
    elif args.method == "naive":
        res = (sum_gcd_naive if args.mode == "gcd" else sum_lcm_naive)(spec, args.k, args.x)
    else:
        if args.mode != "gcd":
            raise UsageError("the Moebius engine only computes gcd sums")
        res = sum_gcd_mobius(spec, args.k, args.x)
    print(_fmt(res.value, args.digits))
    print(f"# f={spec.name} k={res.k} x={res.x} mode={res.mode} method={res.method} elapsed={res.elapsed:.3f}s")
    return EXIT_OK


def cmd_constants(args) -> int:
    rows = []
    for name in args.names:
        try:
            cv = H.resolve_constant(name)
        except (DomainError, RegimeError) as exc:
            raise UsageError(f"{name}: {exc}") from None
        rows.append((name, mpmath.nstr(cv.value, args.digits), mpmath.nstr(cv.err_bound, 3), cv.method))
    print("name\tvalue\terr_bound\tmethod")
    for r in rows:
        print("\t".join(r))
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    spec = parse_spec(args.f)
    fn = eval_gcd_asymptotic if args.mode == "gcd" else eval_lcm_asymptotic
    ev = fn(spec, args.k, args.x, args.N)
    print(mpmath.nstr(ev.value, args.digits))
    print(f"# regime={ev.regime.label()} main_term={mpmath.nstr(ev.main_term, args.digits)}")
    for label, v in ev.components.items():
        print(f"#   {label}: {mpmath.nstr(v, args.digits)}")
    return EXIT_OK


def _converge_config(args) -> H.ExperimentConfig:
    base = H.read_config_file(args.config) if args.config else {}
    overrides = {
        "spec_name": args.f, "k": args.k, "mode": args.mode, "N": args.N, "output": args.output,
        "threads": args.threads, "precision_digits": args.digits,
        "x_grid": H.parse_grid(args.grid) if args.grid is not None else None,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if "spec_name" not in base:
        raise UsageError("converge needs --f or spec_name in the config file")
    base.setdefault("threads", default_threads())
    return H.ExperimentConfig(**base).validate()


def cmd_converge(args) -> int:
    cfg = _converge_config(args)
    rows = H.convergence_rows(cfg, log=lambda m: print(f"# {m}", file=sys.stderr), timings=args.timings)
    text = H.rows_to_csv(rows) if cfg.output == "csv" else H.rows_to_json(rows)
    out = args.out
    if out:
        if os.path.isdir(out):
            safe = cfg.spec_name.replace(":", "_")
            out = os.path.join(out, f"converge_{safe}_k{cfg.k}_{cfg.mode}.{cfg.output}")
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    ok, rev = H.trend_summary(rows)
    verdict = "decreased" if ok else f"did not decrease monotonically ({rev} reversals)"
    print(f"summary: {len(rows)} rows, rel_error_vs_main {verdict} across the grid"
          + (f"; written to {out}" if out else ""), file=sys.stderr if not out else sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    ref = H.read_reference_file(args.reference) if args.reference else None
    results = H.run_verify(args.level, ref)
    failed = [r.name for r in results if not r.passed]
    print("verify:", "all suites passed" if not failed else "FAILED " + ", ".join(failed))
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="addsum", description="gcd/lcm sums of additive functions")
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exact", help="exact gcd or lcm sum")
    ex.add_argument("--f", required=True, help="additive function, e.g. B, Omega:2, omega_m:2")
    ex.add_argument("--k", type=int, required=True)
    ex.add_argument("--x", type=int, required=True)
    ex.add_argument("--mode", choices=("gcd", "lcm"), default="gcd")
    ex.add_argument("--method", choices=("identity", "naive", "mobius"), default="identity")
    ex.add_argument("--threads", type=int)
    ex.add_argument("--digits", type=int, default=30)
    ex.set_defaults(func=cmd_exact)

    co = sub.add_parser("constants", help="evaluate named constants")
    co.add_argument("names", nargs="+", help="M, gamma, zeta:t, P:t, A:k,h, a:j,h,l,alpha, D:k:<f>, F|G|H:<f>,k")
    co.add_argument("--digits", type=int, default=30)
    co.set_defaults(func=cmd_constants)

    asy = sub.add_parser("asymptotic", help="evaluate the asymptotic expansion at x")
    asy.add_argument("--f", required=True)
    asy.add_argument("--k", type=int, required=True)
    asy.add_argument("--x", type=int, required=True)
    asy.add_argument("--mode", choices=("gcd", "lcm"), default="gcd")
    asy.add_argument("--N", type=int, default=DEFAULT_N)
    asy.add_argument("--digits", type=int, default=20)
    asy.set_defaults(func=cmd_asymptotic)

    cv = sub.add_parser("converge", help="exact vs asymptotic along an x grid")
    cv.add_argument("--config", help="key=value file; flags override it")
    cv.add_argument("--f")
    cv.add_argument("--k", type=int)
    cv.add_argument("--mode", choices=("gcd", "lcm"))
    cv.add_argument("--grid", help="comma list, e.g. 10^4,3*10^4,10^5")
    cv.add_argument("--N", type=int)
    cv.add_argument("--output", choices=("csv", "json"))
    cv.add_argument("--out", help="output file or directory (default: stdout)")
    cv.add_argument("--threads", type=int)
    cv.add_argument("--digits", type=int)
    cv.add_argument("--timings", action="store_true", help="fill the elapsed_* columns")
    cv.set_defaults(func=cmd_converge)

    ve = sub.add_parser("verify", help="run the verification suites")
    ve.add_argument("level", choices=("quick", "full"), nargs="?", default="quick")
    ve.add_argument("--reference", help="key=value table of reference constants to check against")
    ve.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeGuardError as exc:
        print(f"addsum: guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, H.ConfigError, DomainError, RegimeError, ValueError, OSError) as exc:
        print(f"addsum: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
