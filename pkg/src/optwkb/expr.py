"""Expressions for the coefficient function ``a(x)``.

Nodes are hash-consed: building a structurally equal node twice returns the
same object, so identity comparison is structural comparison.  Constructors
fold constant subtrees with exact rational arithmetic and apply a handful of
identities (``x + 0``, ``1 * x``, ``x ^ 1``, ...).  Every node therefore exists
only in canonical form, which is what makes ``parse(to_text(e)) is e`` hold.

Grammar (``^`` binds tightest and is right associative, then unary minus,
then ``* /``, then ``+ -``)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | 'x' | FUNC '(' sum ')' | '(' sum ')'
"""

from __future__ import annotations

import re
import threading
from fractions import Fraction
from math import isqrt
from typing import Callable, Union

from flint import acb, arb

from .numerics import (
    Jet,
    Number,
    Precision,
    as_precision,
    jet_analytic,
    mid,
    to_complex,
    to_real,
    workprec,
)

CONST, VAR, ADD, SUB, MUL, DIV, NEG, POW, EXP, LN, SQRT, SIN, COS = (
    "Const", "Var", "Add", "Sub", "Mul", "Div", "Neg", "PowInt", "Exp", "Ln", "Sqrt", "Sin", "Cos",
)
FUNCTIONS = {"exp": EXP, "ln": LN, "sqrt": SQRT, "sin": SIN, "cos": COS}
_FUNC_NAMES = {v: k for k, v in FUNCTIONS.items()}


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    """Malformed source text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvalDomain(ArithmeticError):
    """Evaluation hit a pole or a branch cut at ``node``."""

    def __init__(self, message: str, node: "Expr") -> None:
        super().__init__(f"{message} in {to_text(node)}")
        self.node = node


class Expr:
    __slots__ = ("kind", "args", "value", "_key", "__weakref__")

    kind: str
    args: tuple["Expr", ...]
    value: Union[Fraction, int, None]

    def __new__(cls, *a, **k):  # noqa: D102
        raise TypeError("build expressions with parse() or the module constructors")

    def __repr__(self) -> str:
        return f"Expr({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    def __hash__(self) -> int:
        return id(self)

    def __eq__(self, other: object) -> bool:
        return self is other

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    def __add__(self, o: Union["Expr", int, Fraction]) -> "Expr":
        return add(self, _lift(o))

    def __radd__(self, o: Union[int, Fraction]) -> "Expr":
        return add(_lift(o), self)

    def __sub__(self, o: Union["Expr", int, Fraction]) -> "Expr":
        return sub(self, _lift(o))

    def __rsub__(self, o: Union[int, Fraction]) -> "Expr":
        return sub(_lift(o), self)

    def __mul__(self, o: Union["Expr", int, Fraction]) -> "Expr":
        return mul(self, _lift(o))

    def __rmul__(self, o: Union[int, Fraction]) -> "Expr":
        return mul(_lift(o), self)

    def __truediv__(self, o: Union["Expr", int, Fraction]) -> "Expr":
        return div(self, _lift(o))

    def __rtruediv__(self, o: Union[int, Fraction]) -> "Expr":
        return div(_lift(o), self)

    def __neg__(self) -> "Expr":
        return neg(self)

    def __pow__(self, n: int) -> "Expr":
        return powi(self, n)


def _lift(o: Union[Expr, int, Fraction]) -> Expr:
    return o if isinstance(o, Expr) else const(o)


_table: dict[tuple, Expr] = {}
_lock = threading.Lock()


def _intern(kind: str, args: tuple[Expr, ...] = (), value: Union[Fraction, int, None] = None) -> Expr:
    key = (kind, value, tuple(id(a) for a in args))
    node = _table.get(key)
    if node is not None:
        return node
    with _lock:
        node = _table.get(key)
        if node is None:
            node = object.__new__(Expr)
            node.kind = kind
            node.args = args
            node.value = value
            node._key = key
            _table[key] = node
    return node


def node_count(kind: str | None = None) -> int:
    """Number of interned nodes, optionally of one kind."""
    with _lock:
        if kind is None:
            return len(_table)
        return sum(1 for n in _table.values() if n.kind == kind)


# -- constructors ---------------------------------------------------------


def const(q: Union[int, Fraction, str]) -> Expr:
    if isinstance(q, bool):
        raise TypeError("bool is not a constant")
    return _intern(CONST, (), Fraction(q))


def var() -> Expr:
    return _intern(VAR)


ZERO = const(0)
ONE = const(1)
X = var()


def _cv(e: Expr) -> Fraction:
    assert e.kind == CONST
    return e.value  # type: ignore[return-value]


def add(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(_cv(a) + _cv(b))
    if a is ZERO:
        return b
    if b is ZERO:
        return a
    return _intern(ADD, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(_cv(a) - _cv(b))
    if b is ZERO:
        return a
    if a is ZERO:
        return neg(b)
    if a is b:
        return ZERO
    return _intern(SUB, (a, b))


def neg(a: Expr) -> Expr:
    if a.is_const:
        return const(-_cv(a))
    if a.kind == NEG:
        return a.args[0]
    return _intern(NEG, (a,))


def mul(a: Expr, b: Expr) -> Expr:
    if b.is_const and not a.is_const:
        a, b = b, a
    if a.is_const:
        ca = _cv(a)
        if b.is_const:
            return const(ca * _cv(b))
        if ca == 0:
            return ZERO
        if ca == 1:
            return b
        if b.kind == MUL and b.args[0].is_const:
            return mul(const(ca * _cv(b.args[0])), b.args[1])
        return _intern(MUL, (a, b))
    return _intern(MUL, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if b.is_const:
        cb = _cv(b)
        if cb == 0:
            raise ExprError("division by the constant zero")
        if a.is_const:
            return const(_cv(a) / cb)
        if cb == 1:
            return a
        return mul(const(1 / cb), a)
    if a is ZERO:
        return ZERO
    return _intern(DIV, (a, b))


def powi(a: Expr, n: int) -> Expr:
    if isinstance(n, Fraction):
        if n.denominator != 1:
            raise ExprError("exponents must be integers")
        n = n.numerator
    n = int(n)
    if a.is_const:
        ca = _cv(a)
        if ca == 0 and n < 0:
            raise ExprError("negative power of the constant zero")
        return const(ca**n)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if a.kind == POW:
        return powi(a.args[0], a.value * n)  # type: ignore[operator]
    return _intern(POW, (a,), n)


def _exact_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def func(kind: str, a: Expr) -> Expr:
    """Apply one of exp, ln, sqrt, sin, cos (by node kind)."""
    if a.is_const:
        c = _cv(a)
        if kind == EXP and c == 0:
            return ONE
        if kind == LN and c == 1:
            return ZERO
        if kind == SIN and c == 0:
            return ZERO
        if kind == COS and c == 0:
            return ONE
        if kind == SQRT:
            r = _exact_sqrt(c)
            if r is not None:
                return const(r)
    if kind not in _FUNC_NAMES:
        raise ExprError(f"unknown function kind {kind!r}")
    return _intern(kind, (a,))


def exp(a: Expr) -> Expr:
    return func(EXP, a)


def ln(a: Expr) -> Expr:
    return func(LN, a)


def sqrt(a: Expr) -> Expr:
    return func(SQRT, a)


def sin(a: Expr) -> Expr:
    return func(SIN, a)


def cos(a: Expr) -> Expr:
    return func(COS, a)


# -- parsing --------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, src: str) -> None:
        self.src = src
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(src):
            if src[pos:].strip() == "":
                break
            m = _TOKEN.match(src, pos)
            if m is None or m.end() == pos:
                bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
                raise ParseError(f"unexpected character {src[bad]!r}", bad)
            kind = m.lastgroup or ""
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        if self.i < len(self.toks):
            return self.toks[self.i]
        return ("end", "", len(self.src))

    def take(self) -> tuple[str, str, int]:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        kind, val, pos = self.take()
        if val != text or kind != "op":
            got = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {text!r}, got {got}", pos)

    def parse(self) -> Expr:
        e = self.sum()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            r = self.product()
            e = add(e, r) if op == "+" else sub(e, r)
        return e

    def product(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.take()[1:]
            r = self.unary()
            if op == "*":
                e = mul(e, r)
            else:
                try:
                    e = div(e, r)
                except ExprError as exc:
                    raise ParseError(str(exc), pos) from None
        return e

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            pos = self.take()[2]
            ex = self.unary()
            if not ex.is_const or _cv(ex).denominator != 1:
                raise ParseError("exponent must be an integer constant", pos + 1)
            try:
                return powi(base, _cv(ex).numerator)
            except ExprError as exc:
                raise ParseError(str(exc), pos) from None
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return const(Fraction(val))
        if kind == "name":
            if val == "x":
                return X
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.sum()
                self.expect(")")
                return func(FUNCTIONS[val], arg)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if (kind, val) == ("op", "("):
            e = self.sum()
            self.expect(")")
            return e
        got = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {got}", pos)


def parse(source: str) -> Expr:
    """Parse ``source`` into a canonical, hash-consed expression."""
    if not isinstance(source, str):
        raise TypeError("source must be a string")
    return _Parser(source).parse()


# -- printing -------------------------------------------------------------


def _const_text(q: Fraction) -> str:
    body = str(abs(q.numerator)) if q.denominator == 1 else f"{abs(q.numerator)}/{q.denominator}"
    if q < 0:
        return f"(-{body})"
    return body if q.denominator == 1 else f"({body})"


def to_text(e: Expr) -> str:
    """Fully parenthesised text that parses back to the same node."""
    memo: dict[int, str] = {}

    def go(n: Expr) -> str:
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        k = n.kind
        if k == CONST:
            s = _const_text(_cv(n))
        elif k == VAR:
            s = "x"
        elif k in (ADD, SUB, MUL, DIV):
            op = {ADD: "+", SUB: "-", MUL: "*", DIV: "/"}[k]
            s = f"({go(n.args[0])} {op} {go(n.args[1])})"
        elif k == NEG:
            s = f"(-{go(n.args[0])})"
        elif k == POW:
            p = n.value
            s = f"({go(n.args[0])}^{p if p >= 0 else f'({p})'})"  # type: ignore[operator]
        else:
            s = f"{_FUNC_NAMES[k]}({go(n.args[0])})"
        memo[id(n)] = s
        return s

    return go(e)


def walk(e: Expr) -> list[Expr]:
    """Nodes of the DAG below ``e`` in post-order, each once."""
    seen: set[int] = set()
    out: list[Expr] = []
    stack: list[tuple[Expr, bool]] = [(e, False)]
    while stack:
        n, done = stack.pop()
        if done:
            out.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        for c in reversed(n.args):
            if id(c) not in seen:
                stack.append((c, False))
    return out


def dag_size(e: Expr) -> int:
    return len(walk(e))


# -- differentiation ------------------------------------------------------

_dcache: dict[int, Expr] = {}


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to ``x``; results are memoized per node."""
    for n in walk(e):
        if id(n) in _dcache:
            continue
        _dcache[id(n)] = _d(n)
    return _dcache[id(e)]


def _d(n: Expr) -> Expr:
    k = n.kind
    if k == CONST:
        return ZERO
    if k == VAR:
        return ONE
    a = n.args[0]
    da = _dcache[id(a)]
    if k == NEG:
        return neg(da)
    if k in (ADD, SUB, MUL, DIV):
        b = n.args[1]
        db = _dcache[id(b)]
        if k == ADD:
            return add(da, db)
        if k == SUB:
            return sub(da, db)
        if k == MUL:
            return add(mul(da, b), mul(a, db))
        return div(sub(mul(da, b), mul(a, db)), powi(b, 2))
    if k == POW:
        p = n.value
        return mul(mul(const(p), powi(a, p - 1)), da)  # type: ignore[operator]
    if k == EXP:
        return mul(da, n)
    if k == LN:
        return div(da, a)
    if k == SQRT:
        return div(da, mul(const(2), n))
    if k == SIN:
        return mul(da, cos(a))
    if k == COS:
        return neg(mul(da, sin(a)))
    raise ExprError(f"cannot differentiate node kind {k}")


def derivatives(e: Expr, count: int) -> list[Expr]:
    """``[e, e', ..., e^(count)]``."""
    out = [e]
    for _ in range(count):
        out.append(differentiate(out[-1]))
    return out


# -- evaluation -----------------------------------------------------------

_GUARD = 4096


def _near_zero(v: acb) -> bool:
    if v == 0:
        return True
    if v.contains(0):
        return True
    m = abs(mid(v)).mid()
    return m <= _GUARD * abs(v).rad()


def _check_cut(v: acb, n: Expr, what: str) -> None:
    im, re = v.imag, v.real
    if (im == 0 or im.contains(0)) and (re.contains(0) or re.mid() <= 0):
        raise EvalDomain(f"{what} argument on the branch cut (-inf, 0]", n)


def _evaluate(e: Expr, leaf: Callable[[Expr], object], apply: Callable[[Expr, list], object]) -> object:
    vals: dict[int, object] = {}
    for n in walk(e):
        if n.kind in (CONST, VAR):
            vals[id(n)] = leaf(n)
        else:
            vals[id(n)] = apply(n, [vals[id(c)] for c in n.args])
    return vals[id(e)]


def eval_complex(e: Expr, z: Number, p: Union[Precision, int, None] = None) -> acb:
    """Value of ``e`` at the complex point ``z`` (principal branches)."""
    prec = as_precision(p)
    with workprec(prec):
        zz = to_complex(z)

        def leaf(n: Expr) -> acb:
            if n.kind == VAR:
                return zz
            return to_complex(_cv(n))

        def apply(n: Expr, a: list) -> acb:
            k = n.kind
            if k == ADD:
                return a[0] + a[1]
            if k == SUB:
                return a[0] - a[1]
            if k == MUL:
                return a[0] * a[1]
            if k == NEG:
                return -a[0]
            if k == DIV:
                if _near_zero(a[1]):
                    raise EvalDomain("pole: division by zero", n)
                return a[0] / a[1]
            if k == POW:
                if n.value < 0 and _near_zero(a[0]):  # type: ignore[operator]
                    raise EvalDomain("pole: negative power of zero", n)
                return a[0] ** n.value
            if k == EXP:
                return a[0].exp()
            if k == SIN:
                return a[0].sin()
            if k == COS:
                return a[0].cos()
            if k == LN:
                _check_cut(a[0], n, "ln")
                return a[0].log()
            if k == SQRT:
                _check_cut(a[0], n, "sqrt")
                return a[0].sqrt()
            raise ExprError(k)

        v = _evaluate(e, leaf, apply)
        if not v.is_finite():  # type: ignore[union-attr]
            raise EvalDomain("non-finite value", e)
        return mid(v)  # type: ignore[arg-type]


def eval_real(e: Expr, x: Number, p: Union[Precision, int, None] = None) -> arb:
    """Real part of :func:`eval_complex` at a real point."""
    return eval_complex(e, x, p).real


def eval_jet(e: Expr, x0: Number, order: int, p: Union[Precision, int, None] = None) -> Jet:
    """Taylor jet of ``e`` at the real point ``x0``; each DAG node is evaluated once."""
    prec = as_precision(p)
    with workprec(prec):
        base = to_real(x0)
        xj = Jet.variable(base, order, prec)

        def leaf(n: Expr) -> Jet:
            if n.kind == VAR:
                return xj
            return Jet.constant(_cv(n), base, order, prec)

        def apply(n: Expr, a: list) -> Jet:
            k = n.kind
            if k == ADD:
                return a[0] + a[1]
            if k == SUB:
                return a[0] - a[1]
            if k == MUL:
                return a[0] * a[1]
            if k == NEG:
                return -a[0]
            c0 = a[-1].coeffs[0] if k in (DIV, POW, LN, SQRT) else None
            if k == DIV:
                if c0 == 0:
                    raise EvalDomain("pole: division by zero", n)
                return a[0] / a[1]
            if k == POW:
                if n.value < 0 and c0 == 0:  # type: ignore[operator]
                    raise EvalDomain("pole: negative power of zero", n)
                return jet_analytic("pow_int", a[0], n.value)  # type: ignore[arg-type]
            if k in (LN, SQRT):
                if c0.imag == 0 and c0.real <= 0:  # type: ignore[union-attr]
                    raise EvalDomain(f"{_FUNC_NAMES[k]} argument on the branch cut (-inf, 0]", n)
            return jet_analytic(_FUNC_NAMES[k], a[0])

        return _evaluate(e, leaf, apply)  # type: ignore[return-value]
