from fractions import Fraction

import pytest
from flint import acb, arb
from hypothesis import given, settings
from hypothesis import strategies as st

from optwkb.numerics import (
    BranchCut,
    DegenerateJet,
    Jet,
    JetMismatch,
    OrderExhausted,
    Precision,
    jet_analytic,
    jet_derivative,
    jet_ring_op,
    workprec,
)

from _util import absdiff, relerr


def exact(q) -> acb:
    if isinstance(q, acb):
        return q
    q = Fraction(q)
    with workprec(512):
        return acb(arb(q.numerator) / q.denominator)


def coeffs_close(j: Jet, expected, tol=1e-30):
    assert len(j) == len(expected)
    for c, e in zip(j.coeffs, expected):
        assert absdiff(c, exact(e)) <= tol, (j, expected)


def test_precision_default_and_floor():
    assert Precision().bits == 113
    with pytest.raises(ValueError):
        Precision(52)


def test_mul_truncates():
    u = Jet([1, 1])
    v = Jet([1, -1])
    coeffs_close(jet_ring_op("mul", u, v), [1, 0])


def test_div_geometric_series():
    coeffs_close(jet_ring_op("div", Jet([1, 0, 0]), Jet([1, 1, 0])), [1, -1, 1])


def test_add_inverse_is_zero():
    u = Jet([3, -2, 0.5, 7])
    coeffs_close(jet_ring_op("add", u, jet_ring_op("neg", u)), [0, 0, 0, 0])


def test_div_by_zero_constant_term():
    with pytest.raises(DegenerateJet):
        Jet([1, 2]) / Jet([0, 1])


def test_mismatched_jets():
    with pytest.raises(JetMismatch):
        Jet([1, 2]) * Jet([1, 2, 3])
    with pytest.raises(JetMismatch):
        Jet([1, 2], base_point=0) + Jet([1, 2], base_point=1)


def test_exp_of_zero_jet():
    coeffs_close(jet_analytic("exp", Jet([0, 0, 0, 0])), [1, 0, 0, 0])


def test_sqrt_of_square():
    coeffs_close(jet_analytic("sqrt", Jet([1, 2, 1])), [1, 1, 0])


def test_ln_maclaurin():
    coeffs_close(jet_analytic("ln", Jet([1, 1], order=2)), [0, 1, Fraction(-1, 2)])


def test_branch_cut_reported():
    with pytest.raises(BranchCut):
        jet_analytic("ln", Jet([-1, 1]))
    with pytest.raises(BranchCut):
        jet_analytic("sqrt", Jet([0, 1]))


def test_negative_power_of_zero_jet():
    with pytest.raises(DegenerateJet):
        jet_analytic("pow_int", Jet([0, 1]), -2)


def test_pow_int_matches_repeated_product():
    u = Jet([2, 1, -3, 0.25])
    coeffs_close(jet_analytic("pow_int", u, 3), (u * u * u).coeffs)
    coeffs_close(jet_analytic("pow_int", u, -2) * u * u, [1, 0, 0, 0])


def test_derivative_examples():
    coeffs_close(jet_derivative(Jet([5, 7, 3])), [7, 6])
    coeffs_close(jet_derivative(Jet.constant(4, 0, 3)), [0, 0, 0])
    coeffs_close(jet_derivative(jet_derivative(Jet([0, 0, 1]))), [2])


def test_derivative_of_order_zero():
    with pytest.raises(OrderExhausted):
        jet_derivative(Jet([1]))


small = st.floats(min_value=-4, max_value=4, allow_nan=False, allow_infinity=False)
jets = st.integers(min_value=1, max_value=10).flatmap(
    lambda K: st.tuples(
        st.lists(small, min_size=K + 1, max_size=K + 1),
        st.lists(small, min_size=K + 1, max_size=K + 1),
    )
)


@settings(max_examples=40, deadline=None)
@given(jets)
def test_mul_is_convolution(pair):
    a, b = pair
    prod = Jet(a) * Jet(b)
    for k in range(len(a)):
        direct = sum(Fraction(a[j]) * Fraction(b[k - j]) for j in range(k + 1))
        size = sum(abs(a[j] * b[k - j]) for j in range(k + 1))
        assert absdiff(prod[k], exact(direct)) <= 2.0**-110 * (1 + size)


@settings(max_examples=40, deadline=None)
@given(jets)
def test_div_inverts_mul(pair):
    a, b = pair
    b[0] = b[0] + (5 if b[0] >= 0 else -5)
    u, v = Jet(a), Jet(b)
    back = (u * v) / v
    scale = max(1.0, max(abs(x) for x in a))
    for c, e in zip(back.coeffs, a):
        assert absdiff(c, e) <= 2.0 ** (-113 + 8) * scale * 10**len(a)


@settings(max_examples=40, deadline=None)
@given(jets)
def test_exp_derivative_rule(pair):
    a, _ = pair
    u = Jet(a)
    lhs = jet_derivative(jet_analytic("exp", u))
    rhs = jet_analytic("exp", u.truncate(u.order - 1)) * jet_derivative(u)
    for x, y in zip(lhs.coeffs, rhs.coeffs):
        assert absdiff(x, y) <= 2.0 ** (-113 + 8) * max(1.0, abs(complex(y.mid())))


def test_precision_shrinks_discrepancy():
    errs = []
    for bits in (64, 113, 200):
        with workprec(bits):
            u = Jet([0.3, 1.7, -2.1, 0.9, 0.4], p=bits)
            v = Jet([1.1, 0.2, 0.5, -0.7, 0.3], p=bits)
            back = (u * v) / v
        errs.append(max(relerr(x, y) for x, y in zip(back.coeffs[1:], u.coeffs[1:])))
    assert errs[0] >= errs[1] >= errs[2]
    assert errs[2] < 1e-50
