"""Exact evaluation of gcd/lcm sums and the finite prime sums behind them.

The identity engine reduces a gcd sum to one pass over the primes up to x
plus a short pass over higher prime powers:

    sum_{n_1..n_k <= x} f(gcd) = sum_p f(p) floor(x/p)^k
                                + sum_{p^a <= x, a >= 2} (f(p^a) - f(p^(a-1))) floor(x/p^a)^k

and lcm sums follow from the alternating binomial combination of gcd sums.
Two oracles that never touch these identities (tuple enumeration and the
Moebius count of tuples with a given gcd) are provided for cross-checking.
"""

from __future__ import annotations

import itertools
import math
import time
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from .arith import (
    MAX_X,
    SEGMENT_ODDS,
    BigAccumulator,
    default_threads,
    iroot,
    iter_prime_segments,
    mobius_table,
    ordered_reduce,
    prime_powers_up_to,
    primes_up_to,
    smallest_prime_factor_table,
    split_range,
)
from .catalog import AdditiveFunctionSpec, eval_additive
from .errors import DomainError, SizeGuardError

K_MAX = 16
NAIVE_MAX_TUPLES = 10**7
NAIVE_MAX_X = 200
MOBIUS_MAX_X = 10**5
CHUNK_WIDTH = 2 * SEGMENT_ODDS
_INT64_SAFE = 1 << 62
_LIMB = 31


@dataclass
class ExactSumResult:
    value: object
    x: int
    k: int
    mode: str
    method: str
    elapsed: float = 0.0
    exact: object = None
    err_bound: Fraction = field(default_factory=Fraction)

    def __post_init__(self):
        if self.exact is None:
            self.exact = self.value


def _check_xk(x: int, k: int, x_max: int = MAX_X):
    if k < 1 or k > K_MAX:
        raise SizeGuardError(f"k must be in [1, {K_MAX}], got {k}")
    if x < 1:
        raise DomainError("x must be >= 1")
    if x > x_max:
        raise SizeGuardError(f"x = {x} exceeds the engine guard {x_max}")


def _as_exact(v):
    if isinstance(v, (int, Fraction)):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return Fraction(v)


def _finish(total, x, k, mode, method, t0, err=Fraction(0)):
    if isinstance(total, Fraction) and total.denominator == 1:
        total = total.numerator
    if isinstance(total, Fraction):
        with mpmath.workdps(40):
            value = mpmath.mpf(total.numerator) / total.denominator
    else:
        value = total
    return ExactSumResult(value, x, k, mode, method, time.perf_counter() - t0, total, err)


# --- prime pass --------------------------------------------------------------


def _block_power_sums(arr: np.ndarray, starts: np.ndarray, r: int) -> list[int]:
    if r == 0:
        ends = np.append(starts[1:], arr.size)
        return (ends - starts).tolist()
    pmax = int(arr[-1])
    if pmax**r < _INT64_SAFE:
        pw = arr**r
        lo = np.add.reduceat(pw & ((1 << _LIMB) - 1), starts).tolist()
        hi = np.add.reduceat(pw >> _LIMB, starts).tolist()
        return [(h << _LIMB) + l for h, l in zip(hi, lo)]
    vals = [p**r for p in arr.tolist()]
    bounds = starts.tolist() + [arr.size]
    return [sum(vals[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]


def _prime_pass_chunk(x: int, ks: Sequence[int], r: int, lo: int, hi: int) -> list[int]:
    """sum_{lo<=p<=hi} p^r floor(x/p)^k for every k in ks, grouped by quotient."""
    totals = [0] * len(ks)
    for arr in iter_prime_segments(hi, lo):
        q = x // arr
        starts = np.concatenate(([0], np.flatnonzero(np.diff(q)) + 1))
        sums = _block_power_sums(arr, starts, r)
        for qv, s in zip(q[starts].tolist(), sums):
            for i, k in enumerate(ks):
                totals[i] += qv**k * s
    return totals


def prime_floor_sums(x: int, ks: Sequence[int], r: int, threads: int | None = None, lo: int = 2, hi: int | None = None) -> list[int]:
    """Exact sum_{lo <= p <= hi} p^r floor(x/p)^k for each k in ks (hi defaults to x)."""
    hi = x if hi is None else hi
    threads = default_threads() if threads is None else threads
    chunks = split_range(lo, hi, CHUNK_WIDTH)

    def combine(acc, part):
        return [a + b for a, b in zip(acc, part)]

    return ordered_reduce(lambda c: _prime_pass_chunk(x, ks, r, *c), chunks, combine, [0] * len(ks), threads)


def _prime_power_increments(spec: AdditiveFunctionSpec, x: int) -> list[tuple[int, object]]:
    out = []
    for pp in prime_powers_up_to(x, 2):
        inc = _as_exact(spec.fpp(pp.p, pp.alpha)) - _as_exact(spec.fpp(pp.p, pp.alpha - 1))
        if inc:
            out.append((pp.value, inc))
    return out


def _gcd_sums(spec: AdditiveFunctionSpec, ks: Sequence[int], x: int, threads, prime_values: str) -> list:
    pr = spec.params
    if prime_values == "class":
        lam1 = _as_exact(pr.lambda1)
        prime = prime_floor_sums(x, ks, pr.r, threads) if lam1 else [0] * len(ks)
        prime = [lam1 * v for v in prime]
    elif prime_values == "direct":
        prime = [0] * len(ks)
        for p in primes_up_to(x):
            fp = _as_exact(spec.fpp(p, 1))
            for i, k in enumerate(ks):
                prime[i] += fp * (x // p) ** k
    else:
        raise ValueError(f"prime_values must be 'class' or 'direct', got {prime_values!r}")
    incs = _prime_power_increments(spec, x)
    out = []
    for i, k in enumerate(ks):
        out.append(prime[i] + sum((inc * (x // q) ** k for q, inc in incs), 0))
    return out


def sum_gcd_exact(spec: AdditiveFunctionSpec, k: int, x: int, threads: int | None = None, prime_values: str = "class") -> ExactSumResult:
    """sum over n_1..n_k <= x of f(gcd(n_1..n_k)), exactly.

    With ``prime_values="class"`` the prime term uses f(p) = lambda1 p^r from
    the class parameters (fast, streaming); ``"direct"`` evaluates f(p) per
    prime instead.
    """
    t0 = time.perf_counter()
    _check_xk(x, k)
    (total,) = _gcd_sums(spec, [k], x, threads, prime_values)
    return _finish(total, x, k, "gcd", "identity", t0)


def lcm_from_gcd(gcd_by_j: Sequence, k: int, x: int):
    """sum_{j=1}^k (-1)^(j-1) C(k,j) x^(k-j) G_j with G_j the j-fold gcd sum."""
    return sum(((-1) ** (j - 1) * math.comb(k, j) * x ** (k - j) * gcd_by_j[j - 1] for j in range(1, k + 1)), 0)


def sum_lcm_exact(spec: AdditiveFunctionSpec, k: int, x: int, threads: int | None = None, prime_values: str = "class") -> ExactSumResult:
    t0 = time.perf_counter()
    _check_xk(x, k)
    gsums = _gcd_sums(spec, list(range(1, k + 1)), x, threads, prime_values)
    return _finish(lcm_from_gcd(gsums, k, x), x, k, "lcm", "identity", t0)


# --- oracles -----------------------------------------------------------------


def _naive_guard(k: int, x: int):
    if not 1 <= k <= 3:
        raise SizeGuardError("naive enumeration supports k in {1, 2, 3}")
    if x < 1:
        raise DomainError("x must be >= 1")
    if x > NAIVE_MAX_X or x**k > NAIVE_MAX_TUPLES:
        raise SizeGuardError(f"naive enumeration guard: x <= {NAIVE_MAX_X} and x^k <= {NAIVE_MAX_TUPLES}")


def _tuple_grid(k: int, x: int):
    """Broadcastable coordinate arrays for [1, x]^k."""
    axes = []
    for i in range(k):
        shape = [1] * k
        shape[i] = x
        axes.append(np.arange(1, x + 1, dtype=np.int64).reshape(shape))
    return axes


@lru_cache(maxsize=4)
def _spf_table(size: int) -> np.ndarray:
    return smallest_prime_factor_table(size)


@lru_cache(maxsize=None)
def _factor_small(n: int) -> tuple[tuple[int, int], ...]:
    spf = _spf_table(1 << max(n.bit_length(), 10))
    out = []
    while n > 1:
        p, a = int(spf[n]), 0
        while n % p == 0:
            n //= p
            a += 1
        out.append((p, a))
    return tuple(out)


def _f_lookup(spec, values: np.ndarray) -> dict:
    """f on each distinct value, by factorization (trial division for small sets)."""
    uniq = np.unique(values).tolist()
    if len(uniq) <= 256 and uniq[-1] <= 10**6:
        return {v: _as_exact(eval_additive(spec, v)) for v in uniq}
    return {v: sum((_as_exact(spec.fpp(p, a)) for p, a in _factor_small(v)), 0) for v in uniq}


def _naive(spec, k, x, mode):
    axes = _tuple_grid(k, x)
    red = np.gcd if mode == "gcd" else np.lcm
    acc = axes[0]
    for a in axes[1:]:
        acc = red(acc, a)
    acc = np.broadcast_to(acc, (x,) * k)
    vals, counts = np.unique(acc, return_counts=True)
    fv = _f_lookup(spec, vals)
    return sum((fv[int(v)] * int(c) for v, c in zip(vals, counts)), 0)


def sum_gcd_naive(spec: AdditiveFunctionSpec, k: int, x: int) -> ExactSumResult:
    """Literal enumeration of all k-tuples; f by factorization."""
    t0 = time.perf_counter()
    _naive_guard(k, x)
    return _finish(_naive(spec, k, x, "gcd"), x, k, "gcd", "naive", t0)


def sum_lcm_naive(spec: AdditiveFunctionSpec, k: int, x: int) -> ExactSumResult:
    t0 = time.perf_counter()
    _naive_guard(k, x)
    return _finish(_naive(spec, k, x, "lcm"), x, k, "lcm", "naive", t0)


def naive_prefix_tables(spec: AdditiveFunctionSpec, k: int, x_max: int) -> tuple[list, list]:
    """Enumerate [1, x_max]^k once and return ([gcd sum at x], [lcm sum at x]) for x = 0..x_max.

    Each tuple is credited to the bucket of its largest coordinate, so the
    prefix sums over buckets are the sums over [1, x]^k.
    """
    _naive_guard(k, x_max)
    axes = _tuple_grid(k, x_max)
    g = l = m = axes[0]
    for a in axes[1:]:
        g, l, m = np.gcd(g, a), np.lcm(l, a), np.maximum(m, a)
    shape = (x_max,) * k
    g, l, m = (np.broadcast_to(v, shape).ravel() for v in (g, l, m))
    tables = []
    for vals in (g, l):
        uniq, inv = np.unique(vals, return_inverse=True)
        fv = _f_lookup(spec, uniq)
        if spec.integer_valued:
            fa = np.array([fv[int(u)] for u in uniq], dtype=np.int64)
            bucket = np.zeros(x_max + 1, dtype=np.int64)
            np.add.at(bucket, m, fa[inv])
            bucket = bucket.tolist()
        else:
            bucket = [Fraction(0)] * (x_max + 1)
            for mm, ii in zip(m.tolist(), inv.tolist()):
                bucket[mm] += fv[int(uniq[ii])]
        tables.append(list(itertools.accumulate(bucket)))
    return tables[0], tables[1]


def _f_values_spf(spec, x: int) -> list:
    spf = smallest_prime_factor_table(x).tolist()
    vals = [0] * (x + 1)
    for n in range(2, x + 1):
        m, total = n, 0
        while m > 1:
            p, a = spf[m], 0
            while m % p == 0:
                m //= p
                a += 1
            total += _as_exact(spec.fpp(p, a))
        vals[n] = total
    return vals


def sum_gcd_mobius(spec: AdditiveFunctionSpec, k: int, x: int) -> ExactSumResult:
    """sum_{d <= x} f(d) * #{tuples with gcd exactly d}, counted with Moebius inversion."""
    t0 = time.perf_counter()
    _check_xk(x, k, MOBIUS_MAX_X)
    mu = mobius_table(x).tolist()
    fv = _f_values_spf(spec, x)
    pw = [0] + [(x // n) ** k for n in range(1, x + 1)]
    total = 0
    for d in range(2, x + 1):
        if not fv[d]:
            continue
        count = 0
        for m in range(1, x // d + 1):
            if mu[m]:
                count += mu[m] * pw[d * m]
        total += fv[d] * count
    return _finish(total, x, k, "gcd", "mobius", t0)


# --- weighted prime sums -------------------------------------------------------


def weighted_prime_floor_sum(r: int, k: int, x: int, threads: int | None = None) -> ExactSumResult:
    t0 = time.perf_counter()
    if r < 0:
        raise DomainError("r must be >= 0")
    _check_xk(x, k)
    (total,) = prime_floor_sums(x, [k], r, threads)
    return _finish(total, x, k, "weighted-prime", "direct", t0)


def weighted_primepower_floor_sum(g: Callable[[int], object], s: int, k: int, x: int) -> ExactSumResult:
    """sum over p^a <= x with a >= 2 of g(a) p^s floor(x/p^a)^k."""
    t0 = time.perf_counter()
    if s < 0:
        raise DomainError("s must be >= 0")
    _check_xk(x, k)
    total = sum((_as_exact(g(pp.alpha)) * pp.p**s * (x // pp.value) ** k for pp in prime_powers_up_to(x, 2)), 0)
    return _finish(total, x, k, "weighted-prime-power", "direct", t0)


def pi_beta(beta: int, x: int, threads: int | None = None) -> ExactSumResult:
    """sum_{p <= x} p^beta."""
    t0 = time.perf_counter()
    if beta < 0:
        raise DomainError("beta must be >= 0")
    if x < 1:
        raise DomainError("x must be >= 1")
    if x > MAX_X:
        raise SizeGuardError(f"x = {x} exceeds the engine guard {MAX_X}")
    (total,) = prime_floor_sums(x, [0], beta, threads)
    return _finish(total, x, 1, "pi-beta", "direct", t0)


def _frac_chunk(x, j, ell, alpha, frac_bits, lo, hi):
    acc = BigAccumulator("compensated-real", frac_bits)
    for arr in iter_prime_segments(hi, lo):
        for p in arr.tolist():
            if j == 0:
                acc.add(p**ell)
                continue
            q = p**alpha
            rem = x % q
            if rem:
                acc.add_ratio(p**ell * rem**j, q**j)
    return acc


def frac_power_sum(j: int, ell: int, alpha: int, x: int, threads: int | None = None, frac_bits: int = 160) -> ExactSumResult:
    """sum_{p <= x^(1/alpha)} p^ell {x/p^alpha}^j, fractional parts from exact remainders.

    Each term is floored to a 2^-frac_bits grid, so ``err_bound`` is a rigorous
    bound on the total rounding error.
    """
    t0 = time.perf_counter()
    if j < 0 or ell < 0 or alpha < 1:
        raise DomainError("need j >= 0, ell >= 0, alpha >= 1")
    if x < 2:
        raise DomainError("x must be >= 2")
    if x > MAX_X:
        raise SizeGuardError(f"x = {x} exceeds the engine guard {MAX_X}")
    threads = default_threads() if threads is None else threads
    y = iroot(x, alpha)
    chunks = split_range(2, y, CHUNK_WIDTH)

    def combine(acc, part):
        acc.merge(part)
        return acc

    acc = ordered_reduce(lambda c: _frac_chunk(x, j, ell, alpha, frac_bits, *c), chunks,
                         combine, BigAccumulator("compensated-real", frac_bits), threads)
    res = _finish(acc.exact, x, j, "frac-power", "direct", t0, acc.err_bound)
    return res


# --- transformation identities -------------------------------------------------


def _floor_real(expr: Callable[[], mpmath.mpf]) -> int:
    with mpmath.workdps(60):
        v = expr()
        f = int(mpmath.floor(v))
        if abs(v - f) < mpmath.mpf(10) ** -40 or abs(v - f - 1) < mpmath.mpf(10) ** -40:
            raise DomainError("threshold too close to an integer to decide comparisons")
        return f


def _prime_prefix(primes: list[int], power: int) -> list[int]:
    return [0] + list(itertools.accumulate(p**power for p in primes))


def _range_sum(primes, prefix, lo_excl: int, hi_incl: int) -> int:
    a = bisect_right(primes, lo_excl)
    b = bisect_right(primes, hi_incl)
    return prefix[b] - prefix[a] if b > a else 0


def _max_counts(limit: int, k: int):
    """(M, number of tuples in [1, limit]^k whose maximum is M)."""
    return [(m, m**k - (m - 1) ** k) for m in range(1, limit + 1)]


def transform_lhs_case1(r: int, k: int, x: int) -> int:
    """sum over x/log x < p <= x of p^r floor(x/p)^k."""
    t = _floor_real(lambda: mpmath.mpf(x) / mpmath.log(x))
    return sum((p**r * (x // p) ** k for p in primes_up_to(x) if p > t), 0)


def transform_rhs_case1(r: int, k: int, x: int, enumerate_tuples: bool = False) -> int:
    """Nested n-sum form: tuples with every n_i < log x, primes in (x/log x, x/max n]."""
    if r < 1 or not 1 <= k <= r:
        raise DomainError("case 1 needs r >= 1 and 1 <= k <= r")
    if x < 3:
        raise DomainError("x must exceed e")
    t = _floor_real(lambda: mpmath.mpf(x) / mpmath.log(x))
    nmax = _floor_real(lambda: mpmath.log(x))
    primes = primes_up_to(x).tolist()
    prefix = _prime_prefix(primes, r)
    if enumerate_tuples:
        return sum((_range_sum(primes, prefix, t, x // max(tup)) for tup in itertools.product(range(1, nmax + 1), repeat=k)), 0)
    return sum((c * _range_sum(primes, prefix, t, x // m) for m, c in _max_counts(nmax, k)), 0)


def transform_N(x: int) -> int:
    """floor(log x / log(sqrt(x)/log x))."""
    with mpmath.workdps(60):
        lx = mpmath.log(x)
        den = mpmath.log(mpmath.sqrt(x) / lx)
        if den <= 0:
            raise DomainError("sqrt(x)/log x must exceed 1")
    return _floor_real(lambda: mpmath.log(x) / mpmath.log(mpmath.sqrt(x) / mpmath.log(x)))


def transform_lhs_case2(g: Callable[[int], object], s: int, k: int, x: int) -> object:
    """sum over sqrt(x)/log x < p <= sqrt(x) of p^s sum_{2 <= a, p^a <= x} g(a) floor(x/p^a)^k."""
    t = _floor_real(lambda: mpmath.sqrt(x) / mpmath.log(x))
    total = 0
    for p in primes_up_to(math.isqrt(x)):
        if p <= t:
            continue
        q, a, inner = p * p, 2, 0
        while q <= x:
            inner += _as_exact(g(a)) * (x // q) ** k
            q *= p
            a += 1
        total += p**s * inner
    return total


def transform_rhs_case2(g: Callable[[int], object], s: int, k: int, x: int, enumerate_tuples: bool = False) -> object:
    """sum_{a=2}^{N} g(a) sum_{n_i < x^(1-a/2) (log x)^a} sum_{sqrt(x)/log x < p <= (x/max n)^(1/a)} p^s."""
    if s < 1 or k < 1 or s < 2 * k:
        raise DomainError("case 2 needs s >= 2k")
    if x < 3:
        raise DomainError("x must exceed e")
    t = _floor_real(lambda: mpmath.sqrt(x) / mpmath.log(x))
    big_n = transform_N(x)
    primes = primes_up_to(math.isqrt(x)).tolist()
    prefix = _prime_prefix(primes, s)
    total = 0
    for a in range(2, big_n + 1):
        lim = _floor_real(lambda: mpmath.power(x, 1 - mpmath.mpf(a) / 2) * mpmath.log(x) ** a)
        if enumerate_tuples:
            inner = sum((_range_sum(primes, prefix, t, iroot(x // max(tup), a)) for tup in itertools.product(range(1, lim + 1), repeat=k)), 0)
        else:
            inner = sum((c * _range_sum(primes, prefix, t, iroot(x // m, a)) for m, c in _max_counts(lim, k)), 0)
        total += _as_exact(g(a)) * inner
    return total
