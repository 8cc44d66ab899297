from fractions import Fraction

import pytest
from flint import acb, arb

from optwkb import oracles as orc
from optwkb.cheb import make_grid
from optwkb.numerics import max_abs, to_float, workprec
from optwkb.wkb import phase_table

from _util import absdiff, relerr

BITS = 113


def test_airy_at_zero():
    ai, bi, _, _ = orc.airy_pair(0, BITS)
    with workprec(BITS + 20):
        g = (arb(2) / 3).gamma()
        ai0 = arb(3) ** (arb(-2) / 3) / g
        bi0 = arb(3) ** (arb(-1) / 6) / g
    assert relerr(ai, ai0) < 2.0 ** (-BITS + 8)
    assert relerr(bi, bi0) < 2.0 ** (-BITS + 8)


@pytest.mark.parametrize("y", [0, -5, -64, -128, 3])
def test_airy_wronskian(y):
    ai, bi, aip, bip = orc.airy_pair(y, BITS)
    with workprec(BITS + 20):
        w = ai * bip - aip * bi
        ref = 1 / arb.pi()
    assert relerr(w, ref) < 2.0 ** (-BITS + 8)


def test_bessel_at_zero():
    assert absdiff(orc.bessel01("J", 0, 0, BITS), 1) == 0
    assert absdiff(orc.bessel01("J", 1, 0, BITS), 0) == 0


@pytest.mark.parametrize("x", [1, 50, 500, 2 * 12.1825 / 5 * 100])
def test_bessel_wronskian(x):
    J0, J1, Y0, Y1 = orc.bessel_all(x, BITS)
    with workprec(BITS + 20):
        w = J1 * Y0 - J0 * Y1
        ref = 2 / (arb.pi() * arb(x))
    assert relerr(w, ref) < 2.0 ** (-BITS + 8)


def test_bessel_matches_flint_reference():
    with workprec(BITS + 40):
        for x in (arb(3) / 7, arb(17), arb(260)):
            J0, J1, Y0, Y1 = orc.bessel_all(x, BITS)
            assert relerr(J0, x.bessel_j(0)) < 1e-30
            assert relerr(Y1, x.bessel_y(1)) < 1e-30


def test_airy_cross_oracle():
    eps = Fraction(1, 64)
    exact = orc.airy_solution(eps, BITS)
    num = orc.taylor_integrate("x", (1, 2), eps, exact.phi0, exact.phi1, p=BITS)
    for x in (1.25, 1.5, 2):
        assert absdiff(exact.evaluate(x)[0], num.evaluate(x)[0]) <= 1e-25


def test_bessel_cross_oracle():
    eps = Fraction(1, 100)
    exact = orc.bessel_solution(eps, BITS)
    num = orc.taylor_integrate("exp(5*x)", (0, 1), eps, 1, 0, p=BITS)
    for x in (0.5, 1):
        assert absdiff(exact.evaluate(x)[0], num.evaluate(x)[0]) <= 1e-25


def test_trinomial_initial_data():
    phi, ephi = orc.trinomial_exact(0, Fraction(1, 8), BITS)
    assert absdiff(phi, 1) < 1e-32
    assert absdiff(ephi, 1) < 1e-32


def test_trinomial_cross_oracle():
    eps = Fraction(1, 512)
    exact = orc.trinomial_solution(eps, BITS)
    num = orc.taylor_integrate("(1+x+x^2)^-2", (0, 1), eps, 1, 1, p=BITS)
    for x in (0.5, 1):
        assert absdiff(exact.evaluate(x)[0], num.evaluate(x)[0]) <= 1e-25


def test_taylor_exact_cosine_and_energy():
    eps = Fraction(1, 2)
    sol = orc.taylor_integrate("4", (0, 3), eps, 1, 0, p=BITS)
    with workprec(BITS):
        for x in (arb(1) / 3, arb(2), arb(3)):
            phi, ephi = sol.evaluate(x)
            assert absdiff(phi, (4 * x).cos()) <= 2.0 ** (-BITS + 16)
            energy = abs(ephi) ** 2 + 4 * abs(phi) ** 2
            assert absdiff(energy, 4) <= 2.0 ** (-BITS + 20)


def test_plane_wave_oracle():
    eps = Fraction(1, 10)
    sol = orc.plane_wave_solution(9, (0, 1), eps, 1, 0, BITS)
    with workprec(BITS):
        x = arb(1) / 7
        phi, ephi = sol.evaluate(x)
        assert absdiff(phi, (30 * x).cos()) < 1e-32
        assert absdiff(ephi, -3 * (30 * x).sin()) < 1e-32


def test_catalan_numbers():
    a = orc.catalan_numbers(30)
    assert a[:5] == [1, 1, 2, 5, 14]
    assert a[9] == 4862
    ratios = [a[n + 1] / a[n] for n in range(20, 29)]
    assert all(r1 < r2 < 4 for r1, r2 in zip(ratios, ratios[1:]))


def test_catalan_closed_form_base_case():
    g = make_grid(10, 0, 1, BITS)
    t = phase_table("(1+x+x^2)^-2", g, 2)
    s2 = orc.catalan_s2n(1, 1, 1, g, 1, BITS)
    for u, v in zip(s2, t.dS[2]):
        assert relerr(u, v) < 2.0 ** (-BITS + 24)


def test_catalan_closed_form_general_coefficients():
    g = make_grid(8, 0, 1, BITS)
    t = phase_table("(2+x/2+3*x^2)^-2", g, 8)
    for n in range(1, 5):
        closed = orc.catalan_s2n(2, Fraction(1, 2), 3, g, n, BITS)
        for u, v in zip(closed, t.dS[2 * n]):
            assert relerr(u, v) < 2.0 ** (-BITS + 24)
    for n in (1, 2, 3):
        assert to_float(max_abs(t.dS[2 * n + 1])) <= 2.0 ** (-BITS + 16) * to_float(max_abs(t.dS[2 * n]))


def test_exact_phase_coefficients():
    c = orc.airy_phase_coefficients(3, BITS)
    assert absdiff(c[0], acb(0, 1)) == 0
    assert absdiff(c[1], -0.25) < 1e-32
    c5 = orc.exp5_phase_coefficients(2, BITS)
    assert absdiff(c5[1], -1.25) < 1e-32
