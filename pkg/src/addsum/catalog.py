"""Additive functions of the class F(r, s, l; lambda1, lambda2).

A member f is pinned down by its prime values ``f(p) = lambda1 * p**r`` and
its increments ``f(p^a) - f(p^(a-1)) = lambda2 * p**s * g(a)`` for a >= 2,
with ``|g(a)| <= C0 * a**l``.  Built-ins are addressed by strings such as
``"Omega:2"``, ``"A_l:3"`` or ``"omega_m:2"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, isfinite
from typing import Callable

import numpy as np

from .arith import factorize, primes_up_to


def kronecker(i: int, j: int) -> int:
    return 1 if i == j else 0


@dataclass(frozen=True)
class ClassParams:
    r: int
    s: int
    ell: int
    lambda1: float | int
    lambda2: float | int
    C0: float | int = 1

    def __post_init__(self):
        for name in ("r", "s", "ell"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")
        for name in ("lambda1", "lambda2", "C0"):
            v = getattr(self, name)
            if not isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    def astuple(self):
        return (self.r, self.s, self.ell, self.lambda1, self.lambda2)


@dataclass(frozen=True)
class AdditiveFunctionSpec:
    name: str
    params: ClassParams
    g: Callable[[int], int | float] = field(repr=False, compare=False)
    fpp: Callable[[int, int], int | float] = field(repr=False, compare=False)
    value_kind: str = "integer-valued"

    @property
    def integer_valued(self) -> bool:
        return self.value_kind == "integer-valued"


@dataclass
class MembershipReport:
    checked_pairs: int
    max_residual: float
    violations: list = field(default_factory=list)
    tolerance: float = 0.0
    notes: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations


@lru_cache(maxsize=None)
def oeis_a064372(n: int) -> int:
    """a(1) = 1 and a(n) = sum of a(e) over the exponents e of n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1
    return sum(oeis_a064372(e) for _, e in factorize(n))


def _power_difference(ell: int) -> Callable[[int], int]:
    if ell == 0:
        return lambda a: 0
    return lambda a: a**ell - (a - 1) ** ell


def _zero(a: int) -> int:
    return 0


def _one(a: int) -> int:
    return 1


def _omega_power(ell: int) -> AdditiveFunctionSpec:
    return AdditiveFunctionSpec(
        name=f"Omega:{ell}",
        params=ClassParams(0, 0, max(ell - 1, 0), 1, 1, max(ell, 1)),
        g=_power_difference(ell),
        fpp=lambda p, a: a**ell,
    )


def _t_function(ell: int) -> AdditiveFunctionSpec:
    g = (lambda a: comb(a + ell - 2, ell - 1)) if ell >= 1 else _zero
    return AdditiveFunctionSpec(
        name=f"T:{ell}",
        params=ClassParams(0, 0, max(ell - 1, 0), 1, 1, 1),
        g=g,
        fpp=lambda p, a: comb(a + ell - 1, ell),
    )


def _a_power(ell: int) -> AdditiveFunctionSpec:
    return AdditiveFunctionSpec(
        name=f"A_l:{ell}",
        params=ClassParams(1, 1, max(ell - 1, 0), 1, 1, max(ell, 1)),
        g=_power_difference(ell),
        fpp=lambda p, a: a**ell * p,
    )


def _omega_m(m: int) -> AdditiveFunctionSpec:
    if m < 1:
        raise ValueError("omega_m needs m >= 1")
    return AdditiveFunctionSpec(
        name=f"omega_m:{m}",
        params=ClassParams(0, 0, 0, kronecker(1, m), 1, 1),
        g=lambda a: kronecker(a, m),
        fpp=lambda p, a: 1 if a >= m else 0,
    )


def _oeis_f() -> AdditiveFunctionSpec:
    # C0 = 2 from f(n) <= Omega(n) + 1 <= 2 Omega(n) for n > 1.
    return AdditiveFunctionSpec(
        name="oeis_f",
        params=ClassParams(0, 0, 1, 1, 1, 2),
        g=lambda a: oeis_a064372(a) - oeis_a064372(a - 1),
        fpp=lambda p, a: oeis_a064372(a),
    )


_FIXED = {
    "A": lambda: AdditiveFunctionSpec("A", ClassParams(1, 1, 0, 1, 1, 1), _one, lambda p, a: a * p),
    "Astar": lambda: AdditiveFunctionSpec("Astar", ClassParams(1, 0, 0, 1, 0, 1), _zero, lambda p, a: p),
    "B": lambda: AdditiveFunctionSpec("B", ClassParams(0, 1, 0, 0, 1, 1), _one, lambda p, a: (a - 1) * p),
    "oeis_f": _oeis_f,
}

_PARAMETRIC = {
    "Omega": _omega_power,
    "T": _t_function,
    "A_l": _a_power,
    "omega_m": _omega_m,
    "omega": _omega_m,
}

BUILTIN_NAMES = tuple(_FIXED) + tuple(k for k in _PARAMETRIC if k != "omega")


def builtin(name: str, param: int | None = None) -> AdditiveFunctionSpec:
    """Return a built-in spec.  Parametric families need `param` (l or m)."""
    if name in _FIXED:
        if param is not None:
            raise ValueError(f"{name} takes no parameter")
        return _FIXED[name]()
    if name in _PARAMETRIC:
        if param is None:
            raise ValueError(f"{name} needs a parameter, e.g. '{name}:2'")
        if not isinstance(param, int) or param < 0:
            raise ValueError(f"parameter of {name} must be a nonnegative integer")
        return _PARAMETRIC[name](param)
    raise ValueError(f"unknown additive function {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def parse_spec(text: str) -> AdditiveFunctionSpec:
    """Parse CLI names like 'B', 'Omega:2', 'omega_m:2'."""
    name, sep, arg = text.strip().partition(":")
    if not sep:
        return builtin(name)
    try:
        param = int(arg)
    except ValueError:
        raise ValueError(f"bad parameter in {text!r}") from None
    return builtin(name, param)


def custom(name: str, params: ClassParams, g: Callable, fpp: Callable, value_kind: str = "real-valued"):
    return AdditiveFunctionSpec(name, params, g, fpp, value_kind)


def all_builtins(max_param: int = 3) -> list[AdditiveFunctionSpec]:
    specs = [builtin(n) for n in _FIXED]
    for ell in range(max_param + 1):
        specs += [builtin("Omega", ell), builtin("T", ell), builtin("A_l", ell)]
    for m in range(1, max_param + 1):
        specs.append(builtin("omega_m", m))
    return specs


def eval_prime_power(spec: AdditiveFunctionSpec, p: int, alpha: int):
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    return spec.fpp(p, alpha)


def eval_additive(spec: AdditiveFunctionSpec, n: int):
    """f(n) by factorization; f(1) = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum((spec.fpp(p, a) for p, a in factorize(n)), 0)


def additive_table(spec: AdditiveFunctionSpec, n_max: int) -> np.ndarray:
    """f(0..n_max) via prime-power increments; entry 0 is unused (0).

    Integer-valued specs give an int64 array, others an object array of
    Fractions so that downstream sums stay exact.
    """
    if spec.integer_valued:
        vals = np.zeros(n_max + 1, dtype=np.int64)
        conv = int
    else:
        vals = np.empty(n_max + 1, dtype=object)
        vals[:] = Fraction(0)
        conv = Fraction
    for p in primes_up_to(n_max):
        q, a, prev = p, 1, 0
        while q <= n_max:
            cur = spec.fpp(p, a)
            vals[q::q] += conv(cur - prev)
            prev = cur
            q *= p
            a += 1
    return vals


def verify_class_membership(spec: AdditiveFunctionSpec, p_max: int, alpha_max: int, tol: float = 1e-12) -> MembershipReport:
    """Check f(p) = l1 p^r, the increment identity and |g(a)| <= C0 a^l on a grid."""
    if p_max < 2 or alpha_max < 2:
        raise ValueError("need p_max >= 2 and alpha_max >= 2")
    pr = spec.params
    checked, worst, bad = 0, 0.0, []

    def record(key, expected, actual):
        nonlocal worst
        resid = abs(expected - actual)
        worst = max(worst, float(resid))
        if resid > tol:
            bad.append((*key, expected, actual))

    for alpha in range(2, alpha_max + 1):
        gv = spec.g(alpha)
        cap = pr.C0 * alpha**pr.ell
        excess = max(0.0, abs(gv) - cap)
        worst = max(worst, float(excess))
        if excess > tol:
            bad.append((None, alpha, cap, gv))
    for p in primes_up_to(p_max):
        record((p, 1), pr.lambda1 * p**pr.r, spec.fpp(p, 1))
        checked += 1
        for alpha in range(2, alpha_max + 1):
            inc = spec.fpp(p, alpha) - spec.fpp(p, alpha - 1)
            record((p, alpha), pr.lambda2 * p**pr.s * spec.g(alpha), inc)
            checked += 1
    return MembershipReport(checked, worst, bad, tol)
