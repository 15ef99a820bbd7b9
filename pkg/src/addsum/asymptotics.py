"""Main terms and expansions of gcd/lcm sums of additive functions.

An :class:`AsymptoticExpansion` is built once per (spec, k, N, mode) from the
constants module and then evaluated cheaply at any x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import mpmath

from . import constants as K
from .catalog import AdditiveFunctionSpec
from .constants import ConstantValue, to_mpf
from .errors import DomainError, RegimeError
from .fracint import A_coeff, a_coeff
from .regimes import RegimeTag, classify_regime

DEFAULT_N = 3
MAX_N = 8
EVAL_DPS = 30

__all__ = [
    "AsymptoticExpansion", "AsymptoticEvaluation", "RegimeTag", "classify_regime",
    "gcd_expansion", "lcm_expansion", "eval_gcd_asymptotic", "eval_lcm_asymptotic",
    "eval_prop31", "eval_prop32", "eval_fracparts", "fracparts_x_threshold",
]


@dataclass
class AsymptoticEvaluation:
    x: int
    value: mpmath.mpf
    main_term: mpmath.mpf
    components: dict
    regime: RegimeTag


@dataclass
class AsymptoticExpansion:
    """Named coefficients plus a list of (label, coefficient, x-basis) terms, leading term first."""

    regime: RegimeTag
    N: int
    coefficients: dict
    terms: list = field(repr=False)
    components: dict = field(default_factory=dict)

    def evaluate(self, x) -> AsymptoticEvaluation:
        if to_mpf(x) <= mpmath.e:
            raise DomainError("asymptotic formulas need x > e")
        with mpmath.workdps(EVAL_DPS):
            xx = to_mpf(x)
            comps = {label: coef * basis(xx) for label, coef, basis in self.terms}
            value = mpmath.fsum(comps.values())
            self.components = comps
            # leading term with a nonzero coefficient (C = 0 drops the log log term)
            lead = next((label for label, coef, _ in self.terms if coef != 0), self.terms[0][0])
            main = comps[lead]
        return AsymptoticEvaluation(x, value, main, comps, self.regime)

    def value_at(self, x) -> mpmath.mpf:
        return self.evaluate(x).value


def _check_N(N: int) -> int:
    if not isinstance(N, int) or N < 1 or N > MAX_N:
        raise ValueError(f"expansion depth N must be in 1..{MAX_N}, got {N!r}")
    return N


def _C_value(rule: str, spec: AdditiveFunctionSpec) -> mpmath.mpf:
    p = spec.params
    l1, l2, g2 = to_mpf(p.lambda1), to_mpf(p.lambda2), to_mpf(spec.g(2))
    return {
        "lambda1": l1,
        "lambda2*g(2)": l2 * g2,
        "lambda1+lambda2*g(2)": l1 + l2 * g2,
    }[rule]


def _loglog(x):
    return mpmath.log(mpmath.log(x))


def _power(e) -> Callable:
    e = to_mpf(e)
    return lambda x: x**e


def _log_series_terms(scale: mpmath.mpf, k_exp: int, k_A: int, N: int, label: str, coeffs: dict) -> list:
    """scale * x^k/log x * sum_{h<N} A_{k_A,h}/(log x)^h as separate terms."""
    out = []
    for h in range(N):
        a = A_coeff(k_A, h)
        coeffs[f"A_{{{k_A},{h}}}"] = a
        out.append((f"{label}{h}", scale * a.value,
                    (lambda hh: lambda x: x**k_exp / mpmath.log(x) ** (hh + 1))(h)))
    return out


_CACHE: dict = {}


def _cached(key, build):
    hit = _CACHE.get(key)
    if hit is None:
        hit = _CACHE[key] = build()
    return hit


def gcd_expansion(spec: AdditiveFunctionSpec, k: int, N: int = DEFAULT_N) -> AsymptoticExpansion:
    _check_N(N)
    return _cached(("gcd", spec, id(spec.g), k, N), lambda: _build_gcd(spec, k, N))


def _build_gcd(spec: AdditiveFunctionSpec, k: int, N: int) -> AsymptoticExpansion:
    p = spec.params
    tag = classify_regime(p, k, "gcd")
    with mpmath.workdps(K.WORK_DPS):
        if tag.theorem == "T1-Form1":
            F = K.F_const(p, spec.g, k)
            return AsymptoticExpansion(tag, N, {"F": F}, [("F*x^k", F.value, _power(k))])
        if tag.theorem == "T1-Form2":
            C = _C_value(tag.C_rule, spec)
            G = K.G_const(p, spec.g, k)
            coeffs = {"C": ConstantValue(C, mpmath.mpf(0), tag.C_rule), "G": G}
            if "D_k" in G.method:
                coeffs["D_k"] = K.D_coeff(k, spec.g, p.ell, p.C0)
            terms = [("C*x^k*loglog x", C, lambda x: x**k * _loglog(x)), ("G*x^k", G.value, _power(k))]
            terms += _log_series_terms(C, k, k, N, "C*A_k,h*x^k/log^(h+1) x: h=", coeffs)
            return AsymptoticExpansion(tag, N, coeffs, terms)
        # T2: single main term
        C = _C_value(tag.C_rule, spec)
        mu1 = to_mpf(tag.mu) + 1
        z = K.zeta_alt_sum(k, mu1)
        coeffs = {"C": ConstantValue(C, mpmath.mpf(0), tag.C_rule), "zeta_alt": z}
        core = C * z.value / mu1
        return AsymptoticExpansion(tag, N, coeffs,
                                   [("C*zeta_alt*x^(mu+1)/((mu+1) log x)", core, lambda x: x**mu1 / mpmath.log(x))])


def lcm_expansion(spec: AdditiveFunctionSpec, k: int, N: int = DEFAULT_N) -> AsymptoticExpansion:
    _check_N(N)
    return _cached(("lcm", spec, id(spec.g), k, N), lambda: _build_lcm(spec, k, N))


def _build_lcm(spec: AdditiveFunctionSpec, k: int, N: int) -> AsymptoticExpansion:
    p = spec.params
    tag = classify_regime(p, k, "lcm")
    with mpmath.workdps(K.WORK_DPS):
        if tag.theorem == "uncovered":
            if k == 1:
                # a single lcm is the number itself, so the gcd theorems apply
                return _build_gcd(spec, 1, N)
            raise RegimeError(f"lcm sum for (r,s,l)=({p.r},{p.s},{p.ell}), k={k} is not covered: "
                              + "; ".join(tag.violated))
        if tag.theorem == "T3-case1":
            z = K.zeta(p.r + 1)
            core = k * to_mpf(p.lambda1) * z.value / (p.r + 1)
            e = k + p.r
            return AsymptoticExpansion(tag, N, {"zeta(r+1)": z},
                                       [("k*l1*zeta(r+1)/(r+1)*x^(k+r)/log x", core, lambda x: x**e / mpmath.log(x))])
        if tag.theorem == "T3-case2":
            half = mpmath.mpf(p.s + 1) / 2
            z = K.zeta(half)
            core = 2 * k * to_mpf(spec.g(2)) * to_mpf(p.lambda2) * z.value / (p.s + 1)
            e = k + (half - 1)
            return AsymptoticExpansion(tag, N, {"zeta((s+1)/2)": z},
                                       [("2k*g(2)*l2*zeta((s+1)/2)/(s+1)*x^(k+(s-1)/2)/log x", core,
                                         lambda x: x**e / mpmath.log(x))])
        C = _C_value(tag.C_rule, spec)
        H = K.H_const(p, spec.g, k)
        coeffs = {"C": ConstantValue(C, mpmath.mpf(0), tag.C_rule), "H": H}
        terms = [("k*C*x^k*loglog x", k * C, lambda x: x**k * _loglog(x)), ("H*x^k", H.value, _power(k))]
        terms += _log_series_terms(k * C, k, 1, N, "k*C*A_1,h*x^k/log^(h+1) x: h=", coeffs)
        return AsymptoticExpansion(tag, N, coeffs, terms)


def eval_gcd_asymptotic(spec: AdditiveFunctionSpec, k: int, x, N: int = DEFAULT_N) -> AsymptoticEvaluation:
    return gcd_expansion(spec, k, N).evaluate(x)


def eval_lcm_asymptotic(spec: AdditiveFunctionSpec, k: int, x, N: int = DEFAULT_N) -> AsymptoticEvaluation:
    return lcm_expansion(spec, k, N).evaluate(x)


def eval_prop31(r: int, k: int, x, N: int = DEFAULT_N) -> mpmath.mpf:
    """Main term of sum_{p<=x} p^r floor(x/p)^k."""
    _check_N(N)
    with mpmath.workdps(EVAL_DPS):
        xx = to_mpf(x)
        L = mpmath.log(xx)
        if k >= r + 2:
            return xx**k * K.prime_zeta(k - r).value
        if k == r + 1:
            series = mpmath.fsum(A_coeff(k, h).value / L ** (h + 1) for h in range(N))
            return xx**k * (mpmath.log(L) + K.mertens_const().value + series)
        return xx ** (r + 1) / ((r + 1) * L) * K.zeta_alt_sum(k, r + 1).value


def eval_prop32(g: Callable[[int], float], ell: int, s: int, k: int, x, N: int = DEFAULT_N, c0: float = 1) -> mpmath.mpf:
    """Main term of sum_{p^a<=x, a>=2} g(a) p^s floor(x/p^a)^k; log log sqrt(x) taken literally."""
    _check_N(N)
    with mpmath.workdps(EVAL_DPS):
        xx = to_mpf(x)
        L = mpmath.log(xx)
        g2 = to_mpf(g(2))
        if s <= 2 * k - 2:
            return xx**k * K.prime_double_sum(g, lambda al: al * k - s, 2, ell, c0).value
        if s == 2 * k - 1:
            series = mpmath.fsum(A_coeff(k, h).value / L ** (h + 1) for h in range(N))
            D = K.D_coeff(k, g, ell, c0).value
            return xx**k * (g2 * mpmath.log(L / 2) + D + g2 * series)
        half = mpmath.mpf(s + 1) / 2
        return 2 * g2 * xx**half / ((s + 1) * L) * K.zeta_alt_sum(k, half).value


def eval_fracparts(j: int, ell: int, alpha: int, x, N: int = DEFAULT_N) -> mpmath.mpf:
    """x^((l+1)/alpha)/log x * sum_{h<N} a(j,h,l,alpha)/(log x)^h."""
    _check_N(N)
    with mpmath.workdps(EVAL_DPS):
        xx = to_mpf(x)
        L = mpmath.log(xx)
        s = mpmath.fsum(a_coeff(j, h, ell, alpha).value / L**h for h in range(N))
        return xx ** (mpmath.mpf(ell + 1) / alpha) / L * s


def fracparts_x_threshold(N: int, ell: int, alpha: int) -> mpmath.mpf:
    """x0 = (3N alpha/(e(l+1)))^(6N alpha/(l+1)), from which x >= (log x)^(2N alpha/(l+1)) holds.

    Reported, not enforced.  The companion condition on the prime number
    theorem remainder involves a non-effective constant and is not computable.
    """
    _check_N(N)
    with mpmath.workdps(EVAL_DPS):
        q = mpmath.mpf(N * alpha) / (ell + 1)
        return max(mpmath.e, (3 * q / mpmath.e) ** (6 * q))


def clear_caches() -> None:
    _CACHE.clear()
