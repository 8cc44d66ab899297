from fractions import Fraction

import pytest
from flint import acb, arb

from optwkb import oracles as orc
from optwkb import truncation as tr
from optwkb.cheb import make_grid
from optwkb.expr import eval_complex, eval_jet, parse
from optwkb.numerics import Jet, jet_analytic, jet_derivative, max_abs, to_float, to_real, workprec
from optwkb.wkb import (
    DegenerateScattering,
    TurningPoint,
    branch_minus,
    bvp_residuals,
    bvp_scale,
    eval_solution,
    make_solution,
    phase_table,
    residual_f,
    symbolic_phase_exprs,
)
from optwkb.cheb import OutOfDomain, eval_series

from _util import absdiff, relerr

BITS = 113
EXAMPLES = [("x", (1, 2)), ("exp(5*x)", (0, 1)), ("(1+x+x^2)^-2", (0, 1))]
I = acb(0, 1)


def test_constant_a_terminates():
    t = phase_table("7", make_grid(6, 0, 1, BITS), 5)
    with workprec(BITS):
        root = I * arb(7).sqrt()
    assert all(absdiff(v, root) < 1e-32 for v in t.dS[0])
    assert all(v == 0 for n in range(1, 7) for v in t.dS[n])


def test_first_order_term_for_a_equal_x(airy_table_small):
    t = airy_table_small
    with workprec(BITS):
        for x, v in zip(t.grid.nodes, t.dS[1]):
            assert absdiff(v, -1 / (4 * x)) < 1e-32


def test_trinomial_third_order_vanishes():
    t = phase_table("(1+x+x^2)^-2", make_grid(10, 0, 1, BITS), 4)
    scale = to_float(max_abs(t.dS[2]))
    assert to_float(max_abs(t.dS[3])) <= 2.0 ** (-BITS + 16) * scale


def test_turning_point_rejected():
    with pytest.raises(TurningPoint):
        phase_table("x", make_grid(8, -1, 1), 3)


def test_branch_minus_parity(airy_table_small):
    t = airy_table_small
    for n in (0, 1, 2, 3):
        d, s = branch_minus(t, n)
        flip = n % 2 == 0
        with workprec(BITS):
            assert all(u == (-v if flip else v) for u, v in zip(d, t.dS[n]))
            assert all(u == (-v if flip else v) for u, v in zip(s, t.anti_at_nodes(n)))


@pytest.mark.parametrize("a,iv", EXAMPLES)
@pytest.mark.parametrize("backend", ["jet", "symbolic"])
def test_parity_invariant(a, iv, backend):
    t = phase_table(a, make_grid(8, *iv, BITS), 12, backend=backend)
    for n, col in enumerate(t.dS):
        for v in col:
            off = v.real if n % 2 == 0 else v.imag
            assert to_float(abs(off)) <= 2.0 ** (-BITS + 16) * max(1e-300, to_float(abs(v)))
    for n in range(t.n_max + 1):
        for v in t.anti_at_nodes(n):
            assert (v.real if n % 2 == 0 else v.imag) == 0
        assert eval_series(t.anti[n], t.grid.xi) == 0


@pytest.mark.parametrize("a,iv", EXAMPLES)
def test_jet_and_symbolic_backends_agree(a, iv):
    g = make_grid(8, *iv, BITS)
    tj = phase_table(a, g, 11)
    ts = phase_table(a, g, 11, backend="symbolic")
    for n in range(13):
        scale = to_float(max_abs(ts.dS[n]))
        below = to_float(max_abs(ts.dS[n - 1])) if n else scale
        if scale <= 2.0 ** (-BITS + 16) * below:
            # an identically vanishing order (odd orders of the trinomial):
            # both routes must give zero to parity tolerance
            assert to_float(max_abs(tj.dS[n])) <= 2.0 ** (-BITS + 16) * below
            continue
        for u, v in zip(tj.dS[n], ts.dS[n]):
            assert absdiff(u, v) <= 2.0 ** (-BITS + 24) * scale


def test_make_solution_examples(airy_table_small):
    t = airy_table_small
    root = t.dS[0][t.xi_index]  # i sqrt(a(xi))
    s = make_solution(t, Fraction(1, 16), 0, 1, -root)
    assert absdiff(s.alpha, 1) < 1e-32 and absdiff(s.beta, 0) < 1e-32
    s = make_solution(t, Fraction(1, 16), 0, 1, root)
    assert absdiff(s.alpha, 0) < 1e-32 and absdiff(s.beta, 1) < 1e-32
    s = make_solution(t, Fraction(1, 16), 7, 0, 0)
    assert s.alpha == 0 and s.beta == 0
    s = make_solution(t, Fraction(1, 16), 5, acb(0.5, 2), acb(-1, 3))
    with workprec(BITS):
        assert s.alpha + s.beta == s.phi0


def test_initial_conditions_reproduced(airy_table_small):
    t = airy_table_small
    for N in (0, 3, 8):
        s = make_solution(t, Fraction(1, 32), N, acb(0.25, -1), acb(2, 0.5))
        phi, ephi = eval_solution(s, 1)
        with workprec(BITS):
            assert phi == s.phi0
        assert absdiff(ephi, s.phi1) <= 2.0 ** (-BITS + 16)


def test_evaluation_outside_interval(airy_table_small):
    s = make_solution(airy_table_small, Fraction(1, 8), 2, 1, 0)
    with pytest.raises(OutOfDomain):
        eval_solution(s, 2.5)


def test_plane_wave_exact():
    t = phase_table("7", make_grid(12, 0, 1, BITS), 3)
    eps = Fraction(1, 10)
    with workprec(BITS):
        r7 = arb(7).sqrt()
        s = make_solution(t, eps, 0, 1, -I * r7)
    with workprec(BITS):
        for x in (arb(0), arb(1) / 3, arb(1)):
            ref = (-I * r7 * x * 10).exp()
            assert absdiff(eval_solution(s, x)[0], ref) < 1e-30


def test_airy_third_order_error_scale(airy_table_small):
    t = airy_table_small
    xs = list(t.grid.nodes)
    ratios = []
    for k in (4, 5, 6):
        eps = Fraction(1, 2**k)
        o = orc.airy_solution(eps, BITS)
        err = tr.wkb_errors(t, eps, [3], o.phi0, o.phi1, xs, [o.evaluate(x)[0] for x in xs])[3]
        ratios.append(to_float(err) / float(eps) ** 3)
        if k == 5:
            assert 1e-7 < to_float(err) < 1e-5
    assert max(ratios) / min(ratios) < 1.5


def test_residual_examples(airy_table_small):
    t = airy_table_small
    f = residual_f(t, 1, 0, "+")
    assert absdiff(f[t.xi_index], I / 2) < 1e-32
    fm = residual_f(t, 1, 0, "-")
    assert absdiff(fm[t.xi_index], -I / 2) < 1e-32
    tc = phase_table("3", make_grid(5, 0, 1, BITS), 6)
    for N in range(6):
        assert all(v == 0 for v in residual_f(tc, Fraction(1, 4), N))


def _phase_jet(terms, eps, x0, K):
    """Jet of ``sum eps^(n-1) S_n`` at ``x0`` from jets of ``S_n'`` (constant term dropped)."""
    with workprec(BITS):
        total = Jet.constant(0, x0, K, BITS)
        w = 1 / eps
        for d in terms:
            coeffs = [acb(0)] + [d[k] / (k + 1) for k in range(K)]
            total = total + Jet(coeffs, x0, K, BITS) * w
            w *= eps
    return total


@pytest.mark.parametrize("a,iv,N", [("x", (1, 2), 3), ("x", (1, 2), 6), ("(1+x+x^2)^-2", (0, 1), 3)])
def test_residual_identity(a, iv, N):
    """eps^2 phi'' + a phi = phi f at nodes, with phi built from exact phase derivatives."""
    eps = to_real(Fraction(1, 8))
    e = parse(a)
    t = phase_table(a, make_grid(6, *iv, BITS), N)
    exprs = symbolic_phase_exprs(e, N + 1)
    K = 3
    for branch in ("+", "-"):
        f = residual_f(t, eps, N, branch)
        for k, x0 in enumerate(t.grid.nodes):
            terms = []
            for n in range(N + 1):
                j = eval_jet(exprs[n], x0, K, BITS)
                # even orders are stored as i R_n, odd ones as R_n
                unit = 1 if n % 2 else (-I if branch == "-" else I)
                with workprec(BITS):
                    terms.append([unit * c for c in j.coeffs])
            phi = jet_analytic("exp", _phase_jet(terms, eps, x0, K))
            d2 = jet_derivative(jet_derivative(phi))
            with workprec(BITS):
                lhs = (eps * eps) * d2[0] + eval_complex(e, x0, BITS) * phi[0]
                rhs = phi[0] * f[k]
                scale = abs(eval_complex(e, x0, BITS) * phi[0])
            assert to_float(abs(lhs - rhs) / scale) <= 2.0 ** (-BITS + 32)


def test_linear_power_family_exact():
    """a = (1 + x)^-4 makes S2' vanish, so N >= 1 is exact up to quadrature."""
    t = phase_table("(1+x)^-4", make_grid(30, 0, 1, BITS), 4)
    assert to_float(max_abs(t.dS[2])) < 1e-30
    eps = Fraction(1, 16)
    ref = orc.taylor_integrate("(1+x)^-4", (0, 1), eps, 1, 0, p=BITS)
    xs = [arb(k) / 16 for k in range(17)]
    exact = [ref.evaluate(x)[0] for x in xs]
    errs = tr.wkb_errors(t, eps, [0, 1, 2, 3], 1, 0, xs, exact)
    assert to_float(errs[0]) > 1e-6
    # every order above one vanishes, so N = 1, 2, 3 agree and sit at the M = 30 quadrature floor
    for N in (1, 2, 3):
        assert to_float(errs[N]) < 1e-20
        assert relerr(errs[N], errs[1]) < 1e-6


def test_constant_a_matches_plane_wave_for_all_orders():
    t = phase_table("5", make_grid(10, 0, 2, BITS), 5)
    eps = Fraction(1, 32)
    ref = orc.plane_wave_solution(5, (0, 2), eps, acb(1, 1), acb(0, 2), BITS)
    xs = [arb(k) / 8 for k in range(17)]
    errs = tr.wkb_errors(t, eps, range(6), ref.phi0, ref.phi1, xs, [ref.evaluate(x)[0] for x in xs])
    assert all(to_float(v) < 1e-28 for v in errs.values())


def test_bvp_plane_wave():
    E = 9
    eps = Fraction(1, 4)
    t = phase_table(str(E), make_grid(8, 0, 1, BITS), 2)
    with workprec(BITS):
        k = arb(E).sqrt() / to_real(eps)
        s = make_solution(t, eps, 0, 1, -I * arb(E).sqrt())
    c = bvp_scale(s, k, k)
    with workprec(BITS):
        assert to_float(abs(abs(c) - 1)) < 1e-30
    left, right = bvp_residuals(s, k, k, c)
    assert to_float(abs(left)) < 1e-28 and to_float(abs(right)) < 1e-28


def test_bvp_zero_solution():
    t = phase_table("x", make_grid(8, 1, 2, BITS), 2)
    s = make_solution(t, Fraction(1, 8), 2, 0, 0)
    with pytest.raises(DegenerateScattering):
        bvp_scale(s, 8, 8 * 2**0.5)
