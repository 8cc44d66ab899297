import math

import pytest
from flint import acb, arb
from hypothesis import given, settings
from hypothesis import strategies as st

from optwkb import expr as ex
from optwkb.expr import EvalDomain, ParseError, differentiate, eval_complex, eval_jet, parse, to_text
from optwkb.numerics import workprec

from _util import absdiff, relerr


def test_parse_variable():
    assert parse("x") is ex.X
    assert parse("x").kind == "Var"


def test_parse_exp():
    e = parse("exp(5*x)")
    assert e.kind == "Exp"
    (arg,) = e.args
    assert arg.kind == "Mul"
    assert arg is ex.mul(ex.const(5), ex.X)


def test_parse_trinomial_power():
    e = parse("(1+x+x^2)^-2")
    assert e.kind == "PowInt" and e.value == -2
    assert e.args[0] is parse("1 + x + x^2")


def test_constant_folding_is_exact():
    assert parse("1/3 + 1/6").value == ex.Fraction(1, 2)
    assert parse("sqrt(4)").value == 2


@pytest.mark.parametrize("src,pos", [("x +", 3), ("2*(x", 4), ("foo(x)", 0), ("x^1.5", 2), ("x $ 2", 2)])
def test_parse_errors_have_positions(src, pos):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert info.value.position == pos


def test_differentiate_examples():
    assert differentiate(ex.X) is ex.ONE
    e = parse("exp(5*x)")
    assert differentiate(e) is ex.mul(ex.const(5), e)
    t = parse("(1+x+x^2)^-2")
    want = parse("-2*(1+2*x)*(1+x+x^2)^-3")
    for z in (0, 0.3, 1.7):
        assert relerr(eval_complex(differentiate(t), z), eval_complex(want, z)) < 1e-30


def test_eval_complex_examples():
    z = acb(1.5, 0.4)
    assert absdiff(eval_complex(ex.X, z), z) == 0
    with workprec(113):
        root = (acb(-1) + acb(0, 1) * arb(3).sqrt()) / 2
        ipi5 = acb(0, 1) * arb.pi() / 5
    with pytest.raises(EvalDomain):
        eval_complex(parse("(1+x+x^2)^-2"), root)
    assert absdiff(eval_complex(parse("exp(5*x)"), ipi5), -1) < 1e-32


def test_eval_jet_examples():
    def values(j):
        return [complex(c.mid()) for c in j.coeffs]

    assert values(eval_jet(ex.X, 2, 3)) == [2, 1, 0, 0]
    assert values(eval_jet(parse("exp(5*x)"), 0, 2)) == [1, 5, 12.5]
    assert values(eval_jet(parse("x^2"), 3, 2)) == [9, 6, 1]


def test_hash_consing_reuses_exp_nodes():
    e = parse("exp(5*x)")
    differentiate(e)
    before = ex.node_count("Exp")
    differentiate(differentiate(e))
    assert ex.node_count("Exp") == before


SOURCES = [
    "x",
    "exp(5*x)",
    "(1+x+x^2)^-2",
    "sqrt(1+x^2)*cos(x)",
    "ln(2+x)/(3-x)",
    "sin(x)^3 - 1/7*x",
    "exp(-x^2/2)",
]


@pytest.mark.parametrize("src", SOURCES)
def test_print_round_trip(src):
    e = parse(src)
    assert parse(to_text(e)) is e


leaves = st.sampled_from(["x", "2", "1/3", "(x+1)"])


def _compose(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: f"({t[0]}+{t[1]})"),
        st.tuples(children, children).map(lambda t: f"({t[0]}*{t[1]})"),
        st.tuples(children, children).map(lambda t: f"({t[0]}-{t[1]})"),
        children.map(lambda c: f"exp({c}/4)"),
        children.map(lambda c: f"sin({c})"),
        children.map(lambda c: f"({c})^2"),
        children.map(lambda c: f"sqrt(3+({c})^2)"),
        children.map(lambda c: f"1/(2+({c})^2)"),
    )


exprs = st.recursive(leaves, _compose, max_leaves=6)


@settings(max_examples=30, deadline=None)
@given(exprs, st.floats(min_value=-1, max_value=1))
def test_jet_matches_iterated_derivatives(src, x0):
    e = parse(src)
    K = 6
    j = eval_jet(e, x0, K, 113)
    d = e
    for k in range(K + 1):
        v = eval_complex(d, x0, 113)
        with workprec(113):
            ref = v / math.factorial(k)
        scale = max(1.0, abs(complex(ref.mid())))
        assert absdiff(j[k], ref) <= 2.0 ** (-113 + 16) * scale
        d = differentiate(d)


@settings(max_examples=30, deadline=None)
@given(exprs)
def test_round_trip_random(src):
    e = parse(src)
    assert parse(to_text(e)) is e
