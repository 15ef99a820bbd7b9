"""Moments of fractional parts: a(j,h,l,alpha) and the combinations A(k,h).

    a(j,h,l,alpha) = int_1^oo {u}^j (log u)^h / u^(1+beta) du,  beta = (l+1)/alpha.

Unit panels [n, n+1] are exactly the smooth pieces of the integrand, so the
integral is Gauss-Legendre on panels up to ``PANELS`` and, beyond, the
expansion of {u}^j into periodic Bernoulli functions followed by
Euler-Maclaurin summation of each piece.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial

import mpmath

from .constants import WORK_DPS, ConstantValue, _bernoulli, to_mpf
from .errors import DomainError

PANELS = 40
GAUSS_POINTS = 32


@lru_cache(maxsize=None)
def gauss_legendre(n: int, dps: int = WORK_DPS) -> tuple[tuple, tuple]:
    """Nodes and weights on [-1, 1] by Newton iteration on P_n."""
    with mpmath.workdps(dps + 20):
        nodes, weights = [], []
        for i in range(1, n + 1):
            x = mpmath.cos(mpmath.pi * (i - mpmath.mpf(1) / 4) / (n + mpmath.mpf(1) / 2))
            for _ in range(100):
                p0, p1 = mpmath.mpf(1), x
                for m in range(2, n + 1):
                    p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpmath.mpf(10) ** (-(dps + 15)):
                    break
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        return tuple(nodes), tuple(weights)


def _beta(ell: int, alpha: int) -> mpmath.mpf:
    return mpmath.mpf(ell + 1) / alpha


def _phi_derivative_polys(h: int, c: mpmath.mpf, count: int) -> list[list]:
    """phi(u) = (log u)^h u^-c; phi^(m)(u) = u^(-c-m) P_m(log u). Returns P_0..P_count coefficient lists."""
    polys = [[mpmath.mpf(0)] * h + [mpmath.mpf(1)]]
    for m in range(count):
        prev = polys[-1]
        nxt = [-(c + m) * a for a in prev]
        for i in range(1, len(prev)):
            nxt[i - 1] += i * prev[i]
        polys.append(nxt)
    return polys


def _polyval(coeffs, L):
    acc = mpmath.mpf(0)
    for a in reversed(coeffs):
        acc = acc * L + a
    return acc


def _tail_power_integral(h: int, beta: mpmath.mpf, N: int) -> mpmath.mpf:
    """int_N^oo (log u)^h u^(-1-beta) du in closed (incomplete gamma) form."""
    L = mpmath.log(N)
    y = beta * L
    return mpmath.exp(-y) * mpmath.fsum(
        mpmath.mpf(factorial(h)) / factorial(i) * L**i / beta ** (h + 1 - i) for i in range(h + 1))


def _bernoulli_tail(j: int, h: int, beta: mpmath.mpf, N: int, eps) -> tuple[mpmath.mpf, mpmath.mpf, int]:
    """int_N^oo {u}^j phi(u) du via {u}^j = (1/(j+1)) sum_i C(j+1,i) Btilde_i(u)."""
    c = 1 + beta
    terms_max = 120
    polys = _phi_derivative_polys(h, c, terms_max)
    L = mpmath.log(N)
    Nm = mpmath.mpf(N)
    dphi = [Nm ** (-c - m) * _polyval(polys[m], L) for m in range(terms_max)]
    total = _tail_power_integral(h, beta, N)
    err = mpmath.mpf(0)
    used = 0
    for i in range(1, j + 1):
        # J_i = int_N^oo Btilde_i phi = sum_m (-1)^m i!/(i+m)! B_{i+m} phi^(m-1)(N) + R
        acc = mpmath.mpf(0)
        m = 1
        while True:
            scale = mpmath.factorial(i) / mpmath.factorial(i + m)
            term = (-1) ** m * scale * _bernoulli(i + m) * dphi[m - 1]
            # remainder after m terms: i!/(i+m)! sup|Btilde_{i+m}| int_N^oo |phi^(m)|
            sup_b = 4 * mpmath.factorial(i + m) / (2 * mpmath.pi) ** (i + m)
            rem = scale * sup_b * abs(dphi[m]) * 2
            acc += term
            if rem < eps or m + 1 >= terms_max:
                err += comb(j + 1, i) * rem
                break
            m += 1
        used = max(used, m)
        total += comb(j + 1, i) * acc
    return total / (j + 1), err / (j + 1), used


def _panel_sum(j: int, h: int, c: mpmath.mpf, N: int, points: int) -> mpmath.mpf:
    nodes, weights = gauss_legendre(points)
    half = mpmath.mpf(1) / 2
    out = mpmath.mpf(0)
    for n in range(1, N):
        for x, w in zip(nodes, weights):
            t = half * (x + 1)
            u = n + t
            out += w * t**j * mpmath.log(u) ** h * u ** (-c)
    return out * half


def _gauss_error_estimate(points: int) -> mpmath.mpf:
    # worst panel [1, 2]: singularity at u = 0, Bernstein ellipse rho = 3 + sqrt 8
    rho = 3 + mpmath.sqrt(8)
    return 64 * rho ** (-2 * points)


@lru_cache(maxsize=None)
def _a_coeff_quad(j: int, h: int, ell: int, alpha: int, panels: int, points: int) -> ConstantValue:
    with mpmath.workdps(WORK_DPS + 10):
        beta = _beta(ell, alpha)
        eps = mpmath.mpf(10) ** (-WORK_DPS)
        if j == 0:
            # {u}^0 = 1: no panel structure needed beyond the closed tail
            head = _panel_sum(0, h, 1 + beta, panels, points)
            tail = _tail_power_integral(h, beta, panels)
            err = _gauss_error_estimate(points) * panels
            return ConstantValue(head + tail, err, f"gauss {points}pt on {panels - 1} panels + closed tail")
        head = _panel_sum(j, h, 1 + beta, panels, points)
        tail, terr, used = _bernoulli_tail(j, h, beta, panels, eps)
        err = _gauss_error_estimate(points) * panels + terr
        return ConstantValue(head + tail, err,
                             f"gauss {points}pt on {panels - 1} panels + bernoulli/euler-maclaurin tail ({used} terms)")


def a_coeff(j: int, h: int, ell: int, alpha: int, force_quadrature: bool = False,
            panels: int = PANELS, points: int = GAUSS_POINTS) -> ConstantValue:
    """int_1^oo {u}^j (log u)^h u^-(1+(l+1)/alpha) du."""
    if min(j, h, ell) < 0 or alpha < 1:
        raise DomainError("need j, h, l >= 0 and alpha >= 1")
    if j == 0 and not force_quadrature:
        with mpmath.workdps(WORK_DPS):
            val = factorial(h) * (mpmath.mpf(alpha) / (ell + 1)) ** (h + 1)
            return ConstantValue(val, mpmath.mpf(0), "closed form h!/beta^(h+1)")
    return _a_coeff_quad(j, h, ell, alpha, panels, points)


def A_coeff(k: int, h: int) -> ConstantValue:
    """sum_{j=1}^k (-1)^j C(k,j) a(j, h, j-1, 1)."""
    if k < 1 or h < 0:
        raise DomainError("need k >= 1 and h >= 0")
    with mpmath.workdps(WORK_DPS):
        val = mpmath.mpf(0)
        err = mpmath.mpf(0)
        for j in range(1, k + 1):
            a = a_coeff(j, h, j - 1, 1)
            c = (-1) ** j * comb(k, j)
            val += c * a.value
            err += abs(c) * a.err_bound
        return ConstantValue(val, err, f"alternating combination of a(j,{h},j-1,1), j<={k}")



def clear_caches() -> None:
    _a_coeff_quad.cache_clear()
    gauss_legendre.cache_clear()
