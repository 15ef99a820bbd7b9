"""Prime enumeration, prime powers, Moebius values and exact accumulation.

Everything here is pure and deterministic.  The sieve is segmented over odd
numbers so that enumerating primes up to 10^9 only ever holds one segment of
flags in memory; callers that do not need the whole list should consume
:func:`iter_prime_segments` directly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import mpmath
import numpy as np

SEGMENT_ODDS = 1 << 20
MAX_X = 10**9


def iroot(x: int, n: int) -> int:
    """Largest integer r with r**n <= x (x >= 0, n >= 1)."""
    if x < 0 or n < 1:
        raise ValueError("iroot needs x >= 0 and n >= 1")
    if n == 1 or x < 2:
        return x
    if n == 2:
        return math.isqrt(x)
    r = int(round(x ** (1.0 / n)))
    while r**n > x:
        r -= 1
    while (r + 1) ** n <= x:
        r += 1
    return r


def _simple_sieve(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def iter_prime_segments(hi: int, lo: int = 2, segment_odds: int = SEGMENT_ODDS) -> Iterator[np.ndarray]:
    """Yield ascending int64 arrays whose concatenation is the primes in [lo, hi]."""
    lo = max(lo, 2)
    if hi < lo:
        return
    base = _simple_sieve(math.isqrt(hi))
    odd_base = base[1:].tolist()
    if lo <= 2:
        yield np.array([2], dtype=np.int64)
    low = max(lo, 3)
    if low % 2 == 0:
        low += 1
    while low <= hi:
        n = min(segment_odds, (hi - low) // 2 + 1)
        high = low + 2 * n  # exclusive, odd numbers low, low+2, ..., high-2
        mask = np.ones(n, dtype=bool)
        for p in odd_base:
            pp = p * p
            if pp >= high:
                break
            start = max(pp, -(-low // p) * p)
            if start % 2 == 0:
                start += p
            if start < high:
                mask[(start - low) // 2 :: p] = False
        seg = low + 2 * np.flatnonzero(mask).astype(np.int64)
        if seg.size:
            yield seg
        low = high


@dataclass(frozen=True)
class PrimeRange:
    lo: int
    hi: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.primes.size)

    def __iter__(self):
        return iter(self.primes.tolist())

    def tolist(self) -> list[int]:
        return self.primes.tolist()


def primes_in_range(lo: int, hi: int) -> PrimeRange:
    segs = list(iter_prime_segments(hi, lo))
    arr = np.concatenate(segs) if segs else np.zeros(0, dtype=np.int64)
    arr.flags.writeable = False
    return PrimeRange(max(lo, 2), hi, arr)


def primes_up_to(x: int) -> PrimeRange:
    """All primes <= x in ascending order (empty for x < 2)."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return primes_in_range(2, x)


@dataclass(frozen=True)
class PrimePower:
    p: int
    alpha: int
    value: int

    def __post_init__(self):
        if self.alpha < 1 or self.p**self.alpha != self.value:
            raise ValueError(f"inconsistent prime power {self}")


def prime_powers_up_to(x: int, min_alpha: int = 1) -> list[PrimePower]:
    """All p^alpha <= x with alpha >= min_alpha, ordered by p then alpha."""
    if x < 1 or min_alpha < 1:
        raise ValueError("need x >= 1 and min_alpha >= 1")
    out = []
    for p in primes_up_to(iroot(x, min_alpha)):
        q = p**min_alpha
        a = min_alpha
        while q <= x:
            out.append(PrimePower(p, a, q))
            q *= p
            a += 1
    return out


def mobius_up_to(x: int) -> np.ndarray:
    """mu(1), ..., mu(x) as an int8 array (element i holds mu(i + 1))."""
    if x < 1:
        raise ValueError("x must be >= 1")
    return mobius_table(x)[1:]


def mobius_table(x: int) -> np.ndarray:
    """Array indexed by n in [0, x] with mu(n); entry 0 is 0."""
    mu = np.ones(x + 1, dtype=np.int8)
    mu[0] = 0
    for p in _simple_sieve(x).tolist():
        mu[p::p] *= -1
        if p * p <= x:
            mu[p * p :: p * p] = 0
    return mu


def smallest_prime_factor_table(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in _simple_sieve(math.isqrt(n)).tolist():
        block = spf[p * p :: p]
        block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    return spf


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization, [(p, alpha), ...] with p ascending."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            a = 0
            while n % d == 0:
                n //= d
                a += 1
            out.append((d, a))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def floor_pow(x: int, d: int, k: int) -> int:
    """Exact floor(x/d)**k as a Python integer."""
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    return (x // d) ** k


class BigAccumulator:
    """Order-independent summation.

    ``exact-integer`` keeps an exact rational total (integers in practice).
    ``compensated-real`` is binary fixed point with ``frac_bits`` fractional
    bits: each added ratio is floored to the grid, so the total is exact up to
    ``err_bound`` = (number of rounded addends) * 2**-frac_bits, and the order
    of additions cannot change the result.
    """

    MODES = ("exact-integer", "compensated-real")

    def __init__(self, mode: str = "exact-integer", frac_bits: int = 160):
        if mode not in self.MODES:
            raise ValueError(f"unknown accumulator mode {mode!r}")
        self.mode = mode
        self.frac_bits = frac_bits
        self._total = 0 if mode == "exact-integer" else 0
        self._rounded = 0

    def add(self, value) -> None:
        if isinstance(value, int):
            self._total += value if self.mode == "exact-integer" else value << self.frac_bits
            return
        frac = Fraction(value)
        self.add_ratio(frac.numerator, frac.denominator)

    def add_ratio(self, num: int, den: int) -> None:
        if self.mode == "exact-integer":
            self._total += Fraction(num, den)
            return
        q, r = divmod(num << self.frac_bits, den)
        self._total += q
        if r:
            self._rounded += 1

    def merge(self, other: "BigAccumulator") -> None:
        if other.mode != self.mode or other.frac_bits != self.frac_bits:
            raise ValueError("cannot merge accumulators of different modes")
        self._total += other._total
        self._rounded += other._rounded

    @property
    def exact(self):
        """Exact total: int/Fraction in exact mode, Fraction of the fixed-point grid otherwise."""
        if self.mode == "exact-integer":
            t = self._total
            if isinstance(t, Fraction) and t.denominator == 1:
                return t.numerator
            return t
        return Fraction(self._total, 1 << self.frac_bits)

    @property
    def err_bound(self) -> Fraction:
        if self.mode == "exact-integer":
            return Fraction(0)
        return Fraction(self._rounded, 1 << self.frac_bits)

    def value(self, dps: int = 40):
        t = self.exact
        if isinstance(t, int):
            return t
        with mpmath.workdps(dps):
            return mpmath.mpf(t.numerator) / t.denominator


def default_threads() -> int:
    env = os.environ.get("ADDSUM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"ADDSUM_THREADS must be an integer, got {env!r}") from None
    return 1


def split_range(lo: int, hi: int, width: int) -> list[tuple[int, int]]:
    """Fixed partition of [lo, hi] into consecutive closed blocks of `width` integers."""
    if hi < lo:
        return []
    return [(a, min(a + width - 1, hi)) for a in range(lo, hi + 1, width)]


def ordered_reduce(fn: Callable, chunks: Sequence, combine: Callable, initial, threads: int = 1):
    """Apply fn to every chunk (possibly concurrently) and fold results in chunk order.

    The fold order is the chunk index order, never completion order, so the
    result does not depend on `threads`.
    """
    if threads <= 1 or len(chunks) <= 1:
        results: Iterable = map(fn, chunks)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fn, chunks))
    acc = initial
    for r in results:
        acc = combine(acc, r)
    return acc
