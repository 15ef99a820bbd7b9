"""High-precision constants: zeta, prime zeta, gamma, Mertens and friends.

Values are mpmath numbers carried at ``WORK_DPS`` digits; every result comes
with an error bound and a short description of the series that produced it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable

import mpmath

from .arith import primes_up_to
from .catalog import ClassParams
from .errors import DomainError, RegimeError
from .regimes import classify_regime

DIGITS = 40
WORK_DPS = DIGITS + 20

# Euler-Mascheroni constant, 40 digits (standard reference value; a test
# recomputes it from an independent zeta series).
GAMMA_LITERAL = "0.5772156649015328606065120900824024310422"

# primes at most SMALL_PRIME_CUT are summed directly; the rest go through
# Moebius / log-zeta acceleration
SMALL_PRIME_CUT = 100
_SMALL_PRIMES = tuple(primes_up_to(SMALL_PRIME_CUT).tolist())


@dataclass(frozen=True)
class ConstantValue:
    value: mpmath.mpf
    err_bound: mpmath.mpf
    method: str

    def __float__(self) -> float:
        return float(self.value)

    def digits(self, n: int = 25) -> str:
        return mpmath.nstr(self.value, n)

    def __add__(self, other: "ConstantValue") -> "ConstantValue":
        with mpmath.workdps(WORK_DPS):
            return ConstantValue(self.value + other.value, self.err_bound + other.err_bound,
                                 f"{self.method} + {other.method}")

    def scaled(self, c, label: str | None = None) -> "ConstantValue":
        with mpmath.workdps(WORK_DPS):
            c = to_mpf(c)
            return ConstantValue(c * self.value, abs(c) * self.err_bound,
                                 label or f"{mpmath.nstr(c, 8)}*({self.method})")


@dataclass(frozen=True)
class TailBound:
    p: int
    k: int
    ell: int
    z: float
    bound: mpmath.mpf


def to_mpf(v) -> mpmath.mpf:
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(v, mpmath.mpf):
        return v
    return mpmath.mpf(v)


def _eps(dps: int = WORK_DPS) -> mpmath.mpf:
    return mpmath.mpf(10) ** (-dps)


# --- zeta ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _bernoulli(n: int) -> mpmath.mpf:
    with mpmath.workdps(WORK_DPS + 40):
        return mpmath.bernoulli(n)


@lru_cache(maxsize=4096)
def _zeta_em(s: mpmath.mpf, dps: int) -> tuple[mpmath.mpf, mpmath.mpf, int, int]:
    """Euler-Maclaurin: sum to N-1, integral and half term, Bernoulli corrections."""
    with mpmath.workdps(dps + 10):
        eps = _eps(dps + 5)
        n_cut = max(20, dps)
        head = mpmath.fsum(mpmath.mpf(n) ** (-s) for n in range(1, n_cut))
        N = mpmath.mpf(n_cut)
        total = head + N ** (1 - s) / (s - 1) + N ** (-s) / 2
        rising = s  # (s)_{2j-1}
        npow = N ** (-s - 1)  # N^{-s-2j+1}
        last = mpmath.mpf(0)
        j = 1
        while True:
            term = _bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * npow
            if abs(term) < eps or j > 400:
                last = abs(term)
                break
            total += term
            rising *= (s + 2 * j - 1) * (s + 2 * j)
            npow /= N * N
            j += 1
        # for real s > -2m-1 the remainder is bounded by the first omitted term
        return +total, last, n_cut, j


def zeta(t, dps: int = WORK_DPS) -> ConstantValue:
    """Riemann zeta at real t > 1 by Euler-Maclaurin summation."""
    with mpmath.workdps(dps + 10):
        s = to_mpf(t)
        if s <= 1:
            raise DomainError(f"zeta needs t > 1, got {t}")
        val, err, n_cut, m = _zeta_em(s, dps)
        method = f"euler-maclaurin N={n_cut} terms={m}"
        if s < 1.5:
            # outside the precision contract: widen the bound by the pole scale
            err = err / (s - 1) + _eps(dps - 10)
            method += " (t<3/2, widened bound)"
        return ConstantValue(val, err, method)


# --- prime zeta -----------------------------------------------------------

def _zeta_minus_small(s: mpmath.mpf, dps: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    """log of zeta(s) * prod_{p<=100}(1 - p^-s), i.e. log of the Euler factor over large primes."""
    z = zeta(s, dps)
    prod = mpmath.mpf(1)
    for p in _SMALL_PRIMES:
        prod *= 1 - mpmath.mpf(p) ** (-s)
    return mpmath.log(z.value * prod), 2 * z.err_bound


def _large_prime_tail_bound(w) -> mpmath.mpf:
    # sum_{p > 100} p^-w <= sum_{n >= 101} n^-w <= 100^(1-w)/(w-1)
    w = to_mpf(w)
    return mpmath.mpf(SMALL_PRIME_CUT) ** (1 - w) / (w - 1)


@lru_cache(maxsize=4096)
def _prime_zeta_tail(w: mpmath.mpf, dps: int) -> tuple[mpmath.mpf, mpmath.mpf, int]:
    """sum_{p > 100} p^-w = sum_n mu(n)/n log(zeta_{>100}(n w))."""
    with mpmath.workdps(dps + 10):
        eps = _eps(dps + 5)
        total = mpmath.mpf(0)
        err = mpmath.mpf(0)
        n = 1
        while True:
            if _large_prime_tail_bound(n * w) < eps:
                # the remaining terms decay at least geometrically with ratio 100^-w
                err += 2 * _large_prime_tail_bound(n * w)
                break
            mu = _mobius_small(n)
            if mu:
                lz, e = _zeta_minus_small(n * w, dps)
                total += mu * lz / n
                err += e / n
            n += 1
        return +total, err, n - 1


@lru_cache(maxsize=None)
def _mobius_small(n: int) -> int:
    out, m, d = 1, n, 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            out = -out
        d += 1
    return -out if m > 1 else out


def prime_zeta_tail(t, dps: int = WORK_DPS) -> ConstantValue:
    """P_{>100}(t) = sum over primes p > 100 of p^-t, for real t > 1."""
    with mpmath.workdps(dps + 10):
        w = to_mpf(t)
        if w <= 1:
            raise DomainError("prime zeta tail needs t > 1")
        val, err, n = _prime_zeta_tail(w, dps)
        return ConstantValue(val, err, f"mobius-log-zeta over p>{SMALL_PRIME_CUT}, {n} terms")


def prime_zeta(t, dps: int | None = None) -> ConstantValue:
    """P(t) = sum_p p^-t for t >= 2."""
    w = to_mpf(t)
    if w < 2:
        raise DomainError(f"prime_zeta supports t >= 2, got {t}")
    if dps is None:
        # keep relative accuracy when P(t) ~ 2^-t is tiny
        dps = WORK_DPS + int(float(w) * 0.302) + 1
    with mpmath.workdps(dps + 10):
        head = mpmath.fsum(mpmath.mpf(p) ** (-w) for p in _SMALL_PRIMES)
        if _large_prime_tail_bound(w) < _eps(dps + 5):
            return ConstantValue(+head, _large_prime_tail_bound(w),
                                 f"direct p<={SMALL_PRIME_CUT}, tail bounded by integral")
        tail = prime_zeta_tail(w, dps)
        return ConstantValue(head + tail.value, tail.err_bound + _eps(dps),
                             f"direct p<={SMALL_PRIME_CUT} + {tail.method}")


# --- gamma and Mertens ------------------------------------------------------

def gamma_const() -> ConstantValue:
    with mpmath.workdps(WORK_DPS):
        return ConstantValue(mpmath.mpf(GAMMA_LITERAL), mpmath.mpf(10) ** -40, "stored 40-digit literal")


@lru_cache(maxsize=None)
def mertens_const() -> ConstantValue:
    """M = gamma + sum_p (log(1-1/p) + 1/p), with the large primes as -sum_j P_{>100}(j)/j."""
    with mpmath.workdps(WORK_DPS + 10):
        g = gamma_const()
        head = mpmath.fsum(mpmath.log(1 - mpmath.mpf(1) / p) + mpmath.mpf(1) / p for p in _SMALL_PRIMES)
        tail = mpmath.mpf(0)
        err = g.err_bound
        j = 2
        while True:
            bound = _large_prime_tail_bound(j) / j
            if bound < _eps():
                err += 2 * bound
                break
            t = prime_zeta_tail(j)
            tail += t.value / j
            err += t.err_bound / j
            j += 1
        return ConstantValue(g.value + head - tail, err,
                             f"gamma + direct p<={SMALL_PRIME_CUT} - sum_(j=2..{j - 1}) P_>{SMALL_PRIME_CUT}(j)/j")


# --- the Toth-type tail bound ------------------------------------------------

def toth_hypothesis(p, k, ell, z) -> bool:
    z = float(z)
    if z < 1:
        return False
    lhs = k * math.log(p)
    return lhs > max(ell * max(1.0, math.log(z)) / z, ell / z + 0.5)


def toth_tail_bound(p: int, k: int, ell: int, z) -> TailBound:
    """Bound 3 z^l / p^(kz) for sum_{alpha > z} alpha^l / p^(alpha k)."""
    if not toth_hypothesis(p, k, ell, z):
        raise DomainError(f"tail-bound hypothesis fails for p={p}, k={k}, l={ell}, z={z}; increase z or p")
    with mpmath.workdps(WORK_DPS):
        zz = to_mpf(z)
        b = 3 * zz**ell / mpmath.mpf(p) ** (k * zz)
    return TailBound(p, k, ell, z, b)


# --- prime double sums ---------------------------------------------------------

def _affine_exponent(weight_exponent: Callable[[int], int], alpha_min: int) -> tuple[int, int]:
    w0 = weight_exponent(alpha_min)
    a = weight_exponent(alpha_min + 1) - w0
    for i in range(2, 24):
        if weight_exponent(alpha_min + i) != w0 + a * i:
            raise DomainError("weight exponent must be affine in alpha")
    if a < 1 or w0 < 2:
        raise DomainError(f"divergent double sum: exponent starts at {w0} with slope {a}")
    return a, w0 - a * alpha_min


@lru_cache(maxsize=None)
def _g_value(g, alpha):
    return to_mpf(g(alpha))


def prime_double_sum(g: Callable[[int], float], weight_exponent: Callable[[int], int], alpha_min: int,
                     ell: int = 0, c0: float = 1) -> ConstantValue:
    """sum_p sum_{alpha >= alpha_min} g(alpha) / p^w(alpha) for affine increasing w.

    ``|g(alpha)| <= c0 * alpha**ell`` is used for the alpha-truncation: the
    small primes are cut with the Toth-type bound, the large primes via
    P_{>100}(w(alpha)) and a geometric bound.
    """
    if alpha_min < 1:
        raise DomainError("alpha_min must be >= 1")
    a, b = _affine_exponent(weight_exponent, alpha_min)
    with mpmath.workdps(WORK_DPS + 10):
        eps = _eps()
        gv = lambda al: _g_value(g, al)
        total = mpmath.mpf(0)
        err = mpmath.mpf(0)
        z_max = alpha_min
        for p in _SMALL_PRIMES:
            pm = mpmath.mpf(p)
            z = max(alpha_min - 1, 1)
            while True:
                if toth_hypothesis(p, a, ell, z):
                    tb = c0 * toth_tail_bound(p, a, ell, z).bound * pm ** (-b)
                    if tb < eps:
                        break
                z += 1
            total += mpmath.fsum(gv(al) * pm ** (-(a * al + b)) for al in range(alpha_min, z + 1))
            err += tb
            z_max = max(z_max, z)
        big = mpmath.mpf(0)
        al = alpha_min
        while True:
            w = a * al + b
            head_bound = c0 * al**ell * _large_prime_tail_bound(w)
            ratio = (mpmath.mpf(al + 1) / al) ** ell * mpmath.mpf(SMALL_PRIME_CUT) ** (-a)
            if head_bound < eps and ratio <= 0.5:
                err += 2 * head_bound
                break
            coeff = gv(al)
            if coeff:
                t = prime_zeta_tail(w)
                big += coeff * t.value
                err += abs(coeff) * t.err_bound
            al += 1
        method = (f"p<={SMALL_PRIME_CUT} direct to alpha<={z_max} (toth bound), "
                  f"p>{SMALL_PRIME_CUT} via P_>(w) for alpha<{al}; w(alpha)={a}*alpha{b:+d}")
        return ConstantValue(total + big, err, method)


def _sum_parts(parts: list) -> ConstantValue:
    if not parts:
        return ConstantValue(mpmath.mpf(0), mpmath.mpf(0), "0")
    out = parts[0]
    for part in parts[1:]:
        out = out + part
    return out


def D_coeff(k: int, g: Callable[[int], float], ell: int = 0, c0: float = 1) -> ConstantValue:
    """D_k = g(2) M + sum_p sum_{alpha >= 3} g(alpha) / p^(1 + k(alpha - 2))."""
    if k < 1:
        raise DomainError("k must be >= 1")
    with mpmath.workdps(WORK_DPS):
        g2 = to_mpf(g(2))
        m = mertens_const()
        inner = prime_double_sum(g, lambda al: 1 + k * (al - 2), 3, ell, c0)
        return ConstantValue(g2 * m.value + inner.value, abs(g2) * m.err_bound + inner.err_bound,
                             f"g(2)*M + [{inner.method}]")


def _spec_bits(params: ClassParams):
    return to_mpf(params.lambda1), to_mpf(params.lambda2)


def F_const(params: ClassParams, g: Callable[[int], float], k: int) -> ConstantValue:
    """Pure-power coefficient lambda1 P(k-r) + lambda2 sum_p sum_{alpha>=2} g(alpha)/p^(alpha k - s)."""
    tag = classify_regime(params, k, "gcd")
    if tag.theorem != "T1-Form1":
        raise RegimeError(f"F needs the pure-power regime, got {tag.label()}")
    r, s = params.r, params.s
    with mpmath.workdps(WORK_DPS):
        l1, l2 = _spec_bits(params)
        parts = []
        if l1:
            parts.append(prime_zeta(k - r).scaled(l1, f"l1*P({k - r})"))
        if l2:
            ds = prime_double_sum(g, lambda al: al * k - s, 2, params.ell, params.C0)
            parts.append(ds.scaled(l2, f"l2*[{ds.method}]"))
        return _sum_parts(parts)


def G_const(params: ClassParams, g: Callable[[int], float], k: int) -> ConstantValue:
    """Second-order coefficient of the log log regime, row by row."""
    tag = classify_regime(params, k, "gcd")
    if tag.theorem != "T1-Form2":
        raise RegimeError(f"G needs the log log regime, got {tag.label()}")
    r, s = params.r, params.s
    with mpmath.workdps(WORK_DPS):
        l1, l2 = _spec_bits(params)
        parts = []
        if tag.row == "r<=k-2,s=2k-1":
            if l2:
                parts.append(_d_minus_log2(params, g, k).scaled(l2, "l2*(D_k - g(2) log 2)"))
            if l1:
                parts.append(prime_zeta(k - r).scaled(l1, f"l1*P({k - r})"))
        else:
            if l1:
                parts.append(mertens_const().scaled(l1, "l1*M"))
            if l2 and tag.row == "r=k-1,s<=2k-2":
                ds = prime_double_sum(g, lambda al: al * k - s, 2, params.ell, params.C0)
                parts.append(ds.scaled(l2, f"l2*[{ds.method}]"))
            elif l2:
                parts.append(_d_minus_log2(params, g, k).scaled(l2, "l2*(D_k - g(2) log 2)"))
        out = _sum_parts(parts)
        return ConstantValue(out.value, out.err_bound, f"{tag.row}: {out.method}")


def _d_minus_log2(params: ClassParams, g, k: int) -> ConstantValue:
    d = D_coeff(k, g, params.ell, params.C0)
    with mpmath.workdps(WORK_DPS):
        return ConstantValue(d.value - to_mpf(g(2)) * mpmath.log(2), d.err_bound + _eps(), d.method)


def H_const(params: ClassParams, g: Callable[[int], float], k: int) -> ConstantValue:
    """Constant term of the lcm log log regime: k G_{0,s,l}(1) + sum_j (-1)^(j-1) C(k,j) F_{0,s,l}(j)."""
    if params.r != 0 or params.s not in (0, 1):
        raise RegimeError("H needs r = 0 and s in {0, 1}")
    if k < 1:
        raise DomainError("k must be >= 1")
    with mpmath.workdps(WORK_DPS):
        out = G_const(params, g, 1).scaled(k, f"{k}*G(1)")
        for j in range(2, k + 1):
            sign = (-1) ** (j - 1) * comb(k, j)
            out = out + F_const(params, g, j).scaled(sign, f"{sign}*F({j})")
        return out


# --- alternating zeta sums and the truncated min-series ----------------------------

def zeta_alt_sum(k: int, m) -> ConstantValue:
    """sum_{j=0}^{k-1} (-1)^(k-1-j) C(k,j) zeta(m-j)."""
    if k < 1:
        raise DomainError("k must be >= 1")
    with mpmath.workdps(WORK_DPS):
        mm = to_mpf(m)
        if mm - (k - 1) <= 1:
            raise DomainError(f"need m - (k-1) > 1, got k={k}, m={m}")
        val = mpmath.mpf(0)
        err = mpmath.mpf(0)
        for j in range(k):
            z = zeta(mm - j)
            c = (-1) ** (k - 1 - j) * comb(k, j)
            val += c * z.value
            err += abs(c) * z.err_bound
        return ConstantValue(val, err, f"alternating zeta sum k={k}")


def xi_truncated(k: int, m: int, ell: int, limit: int) -> ConstantValue:
    """Sum over n_1..n_k <= limit of max(n)^l / max(n)^m, grouped by the maximum.

    err_bound bounds the distance to the full series: for l = 0 the
    min-series bound ((1/((m/k-1)L^(m/k-1)) + L^(-m/k) + zeta(m/k))^k - zeta(m/k)^k),
    otherwise (and also if tighter) the direct tail k L^(k+l-m)/(m-l-k).
    """
    if k < 1 or limit < 1 or ell < 0:
        raise DomainError("need k >= 1, limit >= 1, l >= 0")
    if m - k - ell < 1:
        raise DomainError(f"divergent: need m - k - l >= 1, got k={k}, m={m}, l={ell}")
    with mpmath.workdps(WORK_DPS):
        val = mpmath.fsum(mpmath.mpf(M) ** (ell - m) * (M**k - (M - 1) ** k) for M in range(1, limit + 1))
        L = mpmath.mpf(limit)
        direct = k * L ** (k + ell - m) / (m - ell - k)
        method = f"grouped by maximum to {limit}; tail k L^(k+l-m)/(m-l-k)"
        bound = direct
        if ell == 0 and m > 1.5 * k:
            q = mpmath.mpf(m) / k
            zq = zeta(q).value
            lemma = (1 / ((q - 1) * L ** (q - 1)) + L ** (-q) + zq) ** k - zq**k
            method += f"; min-series bound {mpmath.nstr(lemma, 6)}"
            bound = min(bound, lemma)
        return ConstantValue(val, bound, method)


# --- Li_beta -------------------------------------------------------------

def li_beta(beta: int, x) -> ConstantValue:
    """Li_beta(x) = integral from 2 to x of t^beta / log t dt."""
    if beta < 0:
        raise DomainError("beta must be >= 0")
    with mpmath.workdps(30):
        xx = to_mpf(x)
        if xx < 2:
            raise DomainError("li_beta needs x >= 2")
        if xx == 2:
            return ConstantValue(mpmath.mpf(0), mpmath.mpf(0), "empty interval")
        pts = [mpmath.mpf(2)]
        while pts[-1] * 4 < xx:
            pts.append(pts[-1] * 4)
        pts.append(xx)
        val, err = mpmath.quad(lambda t: t**beta / mpmath.log(t), pts, error=True)
        err = max(err, abs(val) * mpmath.mpf(10) ** -25)
        return ConstantValue(val, err, f"tanh-sinh on {len(pts) - 1} geometric panels")


def clear_caches() -> None:
    """Drop memoised values (used to time cold evaluations)."""
    for fn in (_zeta_em, _prime_zeta_tail, mertens_const, _g_value):
        fn.cache_clear()
