from functools import lru_cache
from math import factorial

import mpmath
import pytest

from addsum.errors import DomainError
from addsum.fracint import A_coeff, a_coeff, gauss_legendre

TOL = mpmath.mpf(10) ** -35


def zeta_oracle(h, beta):
    """a(1,h,l,1) = (-1)^h d^h/ds^h [1/(s-1) - zeta(s)/s] at s = beta, for beta > 1."""
    with mpmath.workdps(80):
        f = lambda s: 1 / (s - 1) - mpmath.zeta(s) / s
        return (-1) ** h * mpmath.diff(f, mpmath.mpf(beta), h)


@lru_cache(maxsize=None)
def _stieltjes(n):
    with mpmath.workdps(80):
        return mpmath.stieltjes(n)


def stieltjes_oracle(h):
    """beta = 1: 1/(s-1) - zeta(s)/s = (1 - sum_n (-1)^n gamma_n (s-1)^n / n!) / s near s = 1."""
    with mpmath.workdps(80):
        coeffs = [(-1) ** n * _stieltjes(n) / mpmath.factorial(n) for n in range(30)]
        f = lambda s: (1 - mpmath.polyval(coeffs[::-1], s - 1)) / s
        return (-1) ** h * mpmath.diff(f, mpmath.mpf(1), h)


def test_gauss_legendre_exact_on_polynomials():
    nodes, weights = gauss_legendre(12)
    for deg in range(0, 24):
        got = mpmath.fsum(w * x**deg for x, w in zip(nodes, weights))
        want = mpmath.mpf(2) / (deg + 1) if deg % 2 == 0 else 0
        assert abs(got - want) < mpmath.mpf(10) ** -50


def test_a_100_is_one_minus_gamma():
    a = a_coeff(1, 0, 0, 1)
    assert abs(a.value - (1 - mpmath.euler)) < 1e-12
    assert abs(a.value - (1 - mpmath.euler)) < TOL


@pytest.mark.parametrize("h", [0, 1, 2, 3])
def test_a_beta_one_vs_stieltjes(h):
    a = a_coeff(1, h, 0, 1)
    assert abs(a.value - stieltjes_oracle(h)) < mpmath.mpf(10) ** -30


@pytest.mark.parametrize("h,ell", [(0, 1), (1, 1), (2, 2), (3, 1), (0, 3)])
def test_a_vs_zeta_derivatives(h, ell):
    a = a_coeff(1, h, ell, 1)
    assert abs(a.value - zeta_oracle(h, ell + 1)) < mpmath.mpf(10) ** -30


@pytest.mark.parametrize("h,ell,alpha", [(0, 0, 1), (2, 1, 1), (3, 0, 2), (1, 2, 3)])
def test_j0_closed_form_and_quadrature(h, ell, alpha):
    closed = a_coeff(0, h, ell, alpha)
    assert closed.value == factorial(h) * (mpmath.mpf(alpha) / (ell + 1)) ** (h + 1)
    quad = a_coeff(0, h, ell, alpha, force_quadrature=True)
    assert abs(closed.value - quad.value) < mpmath.mpf(10) ** -30


@pytest.mark.parametrize("j,h,ell,alpha", [(2, 0, 1, 1), (3, 1, 2, 1), (2, 2, 0, 2), (4, 1, 0, 3), (1, 2, 0, 2)])
def test_a_vs_hurwitz(j, h, ell, alpha):
    # sum over unit panels: a = (-1)^h int_0^1 t^j d^h/ds^h zeta(s, 1 + t) dt at s = 1 + beta
    beta = mpmath.mpf(ell + 1) / alpha
    with mpmath.workdps(45):
        want = (-1) ** h * mpmath.quad(lambda t: t**j * mpmath.zeta(1 + beta, 1 + t, h), [0, 1])
    got = a_coeff(j, h, ell, alpha)
    assert abs(got.value - want) < mpmath.mpf(10) ** -30


def test_panels_converge():
    a = a_coeff(2, 1, 1, 1)
    b = a_coeff(2, 1, 1, 1, panels=60, points=40)
    assert abs(a.value - b.value) < mpmath.mpf(10) ** -35
    assert a.err_bound < mpmath.mpf(10) ** -30


def test_A_is_alternating_combination():
    for k in (1, 2, 3):
        for h in (0, 2):
            want = mpmath.fsum((-1) ** j * mpmath.binomial(k, j) * a_coeff(j, h, j - 1, 1).value for j in range(1, k + 1))
            assert A_coeff(k, h).value == want


def test_A1_values():
    # A_{1,h} = -a(1,h,0,1)
    assert abs(A_coeff(1, 0).value - (mpmath.euler - 1)) < TOL
    assert abs(float(A_coeff(1, 1).value) - (-0.49560)) < 1e-5


def test_domain():
    with pytest.raises(DomainError):
        a_coeff(1, -1, 0, 1)
    with pytest.raises(DomainError):
        A_coeff(0, 0)
