"""Experiment plumbing behind the command line: configs, convergence rows, constant lookup, verify suites."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, fields
from decimal import Decimal, localcontext
from fractions import Fraction

import mpmath

from . import constants as K
from .arith import default_threads
from .asymptotics import DEFAULT_N, gcd_expansion, lcm_expansion
from .catalog import AdditiveFunctionSpec, all_builtins, parse_spec, verify_class_membership
from .errors import DomainError, RegimeError, SizeGuardError
from .exact import (
    naive_prefix_tables, sum_gcd_exact, sum_gcd_mobius, sum_lcm_exact,
    transform_lhs_case1, transform_lhs_case2, transform_rhs_case1, transform_rhs_case2,
)
from .fracint import A_coeff, a_coeff

DEFAULT_GRID = (10**4, 3 * 10**4, 10**5, 3 * 10**5, 10**6, 3 * 10**6, 10**7)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    spec_name: str
    k: int = 1
    mode: str = "gcd"
    x_grid: list = field(default_factory=lambda: list(DEFAULT_GRID))
    N: int = DEFAULT_N
    output: str = "csv"
    threads: int = 1
    precision_digits: int = 30

    def validate(self) -> "ExperimentConfig":
        if not self.x_grid:
            raise ConfigError("x_grid must be nonempty")
        if any(b <= a for a, b in zip(self.x_grid, self.x_grid[1:])):
            raise ConfigError("x_grid must be strictly ascending")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.mode not in ("gcd", "lcm"):
            raise ConfigError("mode must be gcd or lcm")
        if self.output not in ("csv", "json"):
            raise ConfigError("output must be csv or json")
        if self.threads < 1 or self.precision_digits < 5:
            raise ConfigError("threads must be >= 1 and precision_digits >= 5")
        parse_spec(self.spec_name)
        return self


def parse_grid(text: str) -> list[int]:
    out = []
    for tok in text.replace(" ", "").split(","):
        if not tok:
            continue
        if "^" in tok:
            base, _, exp = tok.partition("^")
            coef = 1
            if "*" in base:
                c, _, base = base.partition("*")
                coef = int(c)
            out.append(coef * int(base) ** int(exp))
        else:
            out.append(int(float(tok)) if "e" in tok.lower() else int(tok))
    return out


_CONFIG_KEYS = {
    "spec_name": str, "f": str, "k": int, "mode": str, "x_grid": parse_grid, "grid": parse_grid,
    "N": int, "output": str, "threads": int, "precision_digits": int, "digits": int,
}
_ALIASES = {"f": "spec_name", "grid": "x_grid", "digits": "precision_digits"}


def read_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if not sep or key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: bad config line {raw.strip()!r}")
            out[_ALIASES.get(key, key)] = _CONFIG_KEYS[key](val)
    return out


# --- convergence rows --------------------------------------------------------------

ROW_FIELDS = ("x", "exact_value", "asymptotic_value", "main_term", "abs_error",
              "rel_error_vs_main", "regime_tag", "elapsed_exact", "elapsed_asymptotic")


@dataclass
class ConvergenceRow:
    x: int
    exact_value: Decimal
    asymptotic_value: Decimal
    main_term: Decimal
    abs_error: Decimal
    rel_error_vs_main: Decimal
    regime_tag: str
    elapsed_exact: Decimal | None = None
    elapsed_asymptotic: Decimal | None = None

    def numeric(self) -> tuple:
        return (self.x, self.exact_value, self.asymptotic_value, self.main_term, self.abs_error,
                self.rel_error_vs_main, self.regime_tag)


def _to_decimal(v, digits: int) -> Decimal:
    if isinstance(v, int):
        return Decimal(v)
    if isinstance(v, Fraction):
        with localcontext() as ctx:
            ctx.prec = digits
            return Decimal(v.numerator) / Decimal(v.denominator)
    return Decimal(mpmath.nstr(v, digits, strip_zeros=False, min_fixed=-30, max_fixed=60))


def convergence_rows(cfg: ExperimentConfig, log=None, timings: bool = False) -> list[ConvergenceRow]:
    cfg.validate()
    spec = parse_spec(cfg.spec_name)
    build = gcd_expansion if cfg.mode == "gcd" else lcm_expansion
    engine = sum_gcd_exact if cfg.mode == "gcd" else sum_lcm_exact
    expansion = build(spec, cfg.k, cfg.N)
    tag = expansion.regime.label()
    rows = []
    d = cfg.precision_digits
    for x in cfg.x_grid:
        t0 = time.perf_counter()
        try:
            ex = engine(spec, cfg.k, x, threads=cfg.threads)
        except (SizeGuardError, DomainError) as exc:
            if log:
                log(f"skipped x={x}: {exc}")
            continue
        t1 = time.perf_counter()
        ev = expansion.evaluate(x)
        t2 = time.perf_counter()
        exact_d = _to_decimal(ex.exact, d)
        asym_d = _to_decimal(ev.value, d)
        main_d = _to_decimal(ev.main_term, d)
        with localcontext() as ctx:
            ctx.prec = 2 * d + 40
            abs_err = abs(exact_d - asym_d)
            ctx.prec = d
            rel = abs_err / abs(main_d) if main_d else Decimal("NaN")
        rows.append(ConvergenceRow(
            x, exact_d, asym_d, main_d, abs_err, +rel if main_d else rel, tag,
            _to_decimal(t1 - t0, 6) if timings else None,
            _to_decimal(t2 - t1, 6) if timings else None,
        ))
    return rows


def trend_summary(rows: list[ConvergenceRow], allowed_reversals: int = 0) -> tuple[bool, int]:
    rel = [r.rel_error_vs_main for r in rows]
    reversals = sum(1 for a, b in zip(rel, rel[1:]) if b >= a)
    return reversals <= allowed_reversals, reversals


def _cell(v) -> str:
    return "" if v is None else str(v)


def rows_to_csv(rows: list[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in rows:
        w.writerow([_cell(getattr(r, f)) for f in ROW_FIELDS])
    return buf.getvalue()


def rows_to_json(rows: list[ConvergenceRow]) -> str:
    data = [{f: (None if getattr(r, f) is None else
                 getattr(r, f) if isinstance(getattr(r, f), (int, str)) else str(getattr(r, f)))
             for f in ROW_FIELDS} for r in rows]
    return json.dumps(data, indent=1) + "\n"


def _parse_row(rec: dict) -> ConvergenceRow:
    opt = lambda v: None if v in ("", None) else Decimal(v)
    return ConvergenceRow(
        int(rec["x"]), Decimal(rec["exact_value"]), Decimal(rec["asymptotic_value"]),
        Decimal(rec["main_term"]), Decimal(rec["abs_error"]), Decimal(rec["rel_error_vs_main"]),
        rec["regime_tag"], opt(rec["elapsed_exact"]), opt(rec["elapsed_asymptotic"]),
    )


def rows_from_csv(text: str) -> list[ConvergenceRow]:
    return [_parse_row(rec) for rec in csv.DictReader(io.StringIO(text))]


def rows_from_json(text: str) -> list[ConvergenceRow]:
    return [_parse_row(rec) for rec in json.loads(text)]


# --- constant names ------------------------------------------------------------------

def _spec_and_k(arg: str) -> tuple[AdditiveFunctionSpec, int]:
    spec_txt, sep, k_txt = arg.rpartition(",")
    if not sep:
        raise ValueError(f"expected <spec>,k in {arg!r}")
    return parse_spec(spec_txt), int(k_txt)


def resolve_constant(name: str) -> K.ConstantValue:
    """Evaluate a constant by its command-line name."""
    head, sep, rest = name.partition(":")
    try:
        if not sep:
            if head == "M":
                return K.mertens_const()
            if head == "gamma":
                return K.gamma_const()
        elif head == "zeta":
            return K.zeta(_number(rest))
        elif head == "P":
            return K.prime_zeta(_number(rest))
        elif head == "A":
            k, h = (int(t) for t in rest.split(","))
            return A_coeff(k, h)
        elif head == "a":
            j, h, ell, alpha = (int(t) for t in rest.split(","))
            return a_coeff(j, h, ell, alpha)
        elif head == "D":
            k_txt, _, spec_txt = rest.partition(":")
            spec = parse_spec(spec_txt)
            return K.D_coeff(int(k_txt), spec.g, spec.params.ell, spec.params.C0)
        elif head in ("F", "G", "H"):
            spec, k = _spec_and_k(rest)
            fn = {"F": K.F_const, "G": K.G_const, "H": K.H_const}[head]
            return fn(spec.params, spec.g, k)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (DomainError, RegimeError)):
            raise
        raise ValueError(f"bad constant name {name!r}: {exc}") from None
    raise ValueError(f"unknown constant {name!r}")


def _number(text: str):
    if "/" in text:
        return Fraction(text)
    return int(text) if text.lstrip("-").isdigit() else Fraction(text)


# --- verification suites ---------------------------------------------------------------

# reference digits recomputed independently (mpmath primezeta/zeta/stieltjes based oracles)
REFERENCE_CONSTANTS = {
    "M": "0.26149721284764278375542683860869585905156664826120",
    "gamma": "0.57721566490153286060651209008240243104215933593992",
    "zeta:3": "1.2020569031595942853997381615114499907649862923405",
    "P:2": "0.45224742004106549850654336483224793417323134323989",
    "D:1:B": "1.0346538818974379116197942984646382546703486484045",
    "G:A_l:1,2": "0.48296058424043872718006327449329467653880760656576",
    "a:1,0,0,1": "0.42278433509846713939348790991759756895784066406008",
}

SUITES = ("oracle", "membership", "identity", "constants", "trend")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    detail: str = ""


def _suite_oracle(full: bool) -> SuiteResult:
    ks = (1, 2, 3) if full else (1, 2)
    x_max = 100 if full else 30
    checks, bad = 0, []
    for spec in all_builtins(2):
        for k in ks:
            gcd_tab, lcm_tab = naive_prefix_tables(spec, k, x_max)
            for x in range(1, x_max + 1):
                pairs = [("gcd", sum_gcd_exact(spec, k, x).exact, gcd_tab[x]),
                         ("lcm", sum_lcm_exact(spec, k, x).exact, lcm_tab[x])]
                if x <= 40 or x % 10 == 0:
                    pairs.append(("mobius", sum_gcd_mobius(spec, k, x).exact, gcd_tab[x]))
                for what, got, want in pairs:
                    checks += 1
                    if got != want:
                        bad.append(f"{spec.name} k={k} x={x} {what}")
    return SuiteResult("oracle", not bad, checks, "; ".join(bad[:5]))


def _suite_membership(full: bool) -> SuiteResult:
    bad, checks = [], 0
    for spec in all_builtins(3):
        rep = verify_class_membership(spec, 200 if full else 50, 12 if full else 8)
        checks += rep.checked_pairs
        if not rep.ok:
            bad.append(spec.name)
    return SuiteResult("membership", not bad, checks, ", ".join(bad))


def _suite_identity(full: bool) -> SuiteResult:
    xs = (10**3, 10**4) if full else (10**3,)
    bad, checks = [], 0
    one = lambda a: 1
    for x in xs:
        for r, k in ((1, 1), (2, 1), (2, 2), (3, 2)):
            checks += 1
            if transform_lhs_case1(r, k, x) != transform_rhs_case1(r, k, x):
                bad.append(f"case1 r={r} k={k} x={x}")
        for s, k in ((4, 2), (6, 3)):
            checks += 1
            if transform_lhs_case2(one, s, k, x) != transform_rhs_case2(one, s, k, x):
                bad.append(f"case2 s={s} k={k} x={x}")
    return SuiteResult("identity", not bad, checks, "; ".join(bad))


def _suite_constants(reference: dict, full: bool) -> SuiteResult:
    bad = []
    tol = mpmath.mpf(10) ** (-20)
    with mpmath.workdps(K.WORK_DPS):
        for name, ref in reference.items():
            got = resolve_constant(name)
            want = mpmath.mpf(ref)
            scale = max(1, abs(want))
            digits = len(ref.split(".")[-1]) if "." in ref else 0
            local_tol = max(tol, mpmath.mpf(10) ** (-(digits - 1))) * scale
            if abs(got.value - want) > local_tol + got.err_bound:
                bad.append(f"{name}: got {got.digits(22)} want {ref}")
    return SuiteResult("constants", not bad, len(reference), "; ".join(bad))


def _suite_trend(full: bool) -> SuiteResult:
    grid = [10**4, 10**5, 10**6, 10**7] if full else [10**4, 10**5, 10**6]
    cfg = ExperimentConfig("A", 1, "gcd", grid, 1, threads=default_threads())
    rows = convergence_rows(cfg)
    ok, rev = trend_summary(rows)
    return SuiteResult("trend", ok, len(rows), f"A k=1 relative error reversals: {rev}")


def run_verify(level: str, reference: dict | None = None, log=print) -> list[SuiteResult]:
    if level not in ("quick", "full"):
        raise ValueError("level must be quick or full")
    full = level == "full"
    ref = dict(REFERENCE_CONSTANTS if reference is None else reference)
    suites = [
        lambda: _suite_oracle(full),
        lambda: _suite_membership(full),
        lambda: _suite_identity(full),
        lambda: _suite_constants(ref, full),
        lambda: _suite_trend(full),
    ]
    out = []
    for name, run in zip(SUITES, suites):
        t0 = time.perf_counter()
        try:
            res = run()
        except Exception as exc:  # a crashing suite is a failed suite
            res = SuiteResult(name, False, 0, f"{type(exc).__name__}: {exc}")
        out.append(res)
        if log:
            status = "PASS" if res.passed else "FAIL"
            log(f"{res.name:<11} {status}  checks={res.checks:<7} {time.perf_counter() - t0:6.1f}s  {res.detail}")
    return out


def read_reference_file(path: str) -> dict:
    ref = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                key, _, val = line.partition("=")
                ref[key.strip()] = val.strip()
    return ref


def config_asdict(cfg: ExperimentConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}
