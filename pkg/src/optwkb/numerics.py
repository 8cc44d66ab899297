"""Configurable-precision scalars and truncated Taylor jets.

Scalars are python-flint ``arb`` (real) and ``acb`` (complex) values.  flint
keeps its working precision in a process-wide context, so every public entry
point of the package runs its arithmetic inside :func:`workprec`.  Balls are
used as plain floating-point numbers: radii are dropped with :func:`mid`
whenever a value is published.

A :class:`Jet` holds Taylor coefficients ``f^(k)(x0)/k!`` for ``k = 0..K``.
Products and compositions are delegated to flint's power-series kernels.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

from flint import acb, acb_series, arb, ctx, fmpq

Real = arb
Complex = acb
Number = Union[int, float, str, Fraction, arb, acb, complex]

# Series lengths are controlled explicitly; flint's default cap of 10 terms
# would silently truncate every jet.
_SERIES_CAP = 1 << 20


class NumericsError(ArithmeticError):
    """Base class for numerical failures raised by this package."""


class NonFinite(NumericsError):
    """A NaN or infinite value reached a module boundary."""


class DegenerateJet(NumericsError):
    """Division by a jet whose constant term vanishes."""


class BranchCut(NumericsError):
    """A logarithm or square root was asked for on its branch cut."""


class OrderExhausted(NumericsError):
    """A jet of order zero cannot be differentiated."""


class JetMismatch(NumericsError):
    """Jets with different base points or orders were combined."""


@dataclass(frozen=True)
class Precision:
    """Binary mantissa precision; 113 bits matches IEEE quadruple."""

    bits: int = 113

    def __post_init__(self) -> None:
        if not isinstance(self.bits, int) or self.bits < 53:
            raise ValueError(f"precision must be an integer >= 53 bits, got {self.bits!r}")

    def tol(self, shift: int = 0) -> float:
        """Return ``2**(-bits + shift)`` as a float."""
        return math.ldexp(1.0, -self.bits + shift)

    def escalated(self, extra: int) -> "Precision":
        return Precision(self.bits + max(0, int(extra)))


DEFAULT_PRECISION = Precision()


def as_precision(p: Union[Precision, int, None]) -> Precision:
    if p is None:
        return DEFAULT_PRECISION
    if isinstance(p, Precision):
        return p
    return Precision(int(p))


@contextmanager
def workprec(p: Union[Precision, int, None]) -> Iterator[Precision]:
    """Run the enclosed flint arithmetic at precision ``p``."""
    prec = as_precision(p)
    old_prec, old_cap = ctx.prec, ctx.cap
    ctx.prec = prec.bits
    ctx.cap = _SERIES_CAP
    try:
        yield prec
    finally:
        ctx.prec = old_prec
        ctx.cap = old_cap


def mid(z: Union[arb, acb]) -> Union[arb, acb]:
    """Drop the radius of a ball."""
    if isinstance(z, acb):
        return acb(z.real.mid(), z.imag.mid())
    return z.mid()


def ensure_finite(z: Union[arb, acb], what: str = "value") -> Union[arb, acb]:
    if not z.is_finite():
        raise NonFinite(f"{what} is not finite")
    return z


def to_real(x: Number) -> arb:
    """Convert to ``arb`` at the current precision, rejecting non-finite input."""
    if isinstance(x, arb):
        r = x
    elif isinstance(x, acb):
        if x.imag != 0:
            raise ValueError("complex value where a real one was expected")
        r = x.real
    elif isinstance(x, Fraction):
        r = arb(fmpq(x.numerator, x.denominator))
    elif isinstance(x, bool):
        raise TypeError("bool is not a number here")
    elif isinstance(x, (int, float, str)):
        r = arb(x)
    else:
        raise TypeError(f"cannot convert {type(x).__name__} to a real")
    return ensure_finite(r, "real input")


def to_complex(z: Number) -> acb:
    """Convert to ``acb`` at the current precision, rejecting non-finite input."""
    if isinstance(z, acb):
        c = z
    elif isinstance(z, complex):
        c = acb(z.real, z.imag)
    else:
        c = acb(to_real(z))
    return ensure_finite(c, "complex input")


def fmt(x: Union[arb, acb], digits: int = 40) -> str:
    """Midpoint as a decimal string with at most ``digits`` significant digits."""
    if isinstance(x, acb):
        re, im = fmt(x.real, digits), fmt(x.imag, digits)
        sign = "" if im.startswith("-") else "+"
        return f"{re}{sign}{im}j"
    if not x.is_finite():
        return "inf"
    m = x.mid()
    if m == 0:
        return "0"
    return m.str(digits, radius=False)


def cabs(z: Union[arb, acb]) -> arb:
    return mid(abs(z))


def max_abs(values: Iterable[Union[arb, acb]]) -> arb:
    best = arb(0)
    for v in values:
        a = abs(v).mid()
        if a > best:
            best = a
    return best


def to_float(x: Union[arb, acb]) -> float:
    if isinstance(x, acb):
        raise TypeError("use abs() or .real before converting a complex value")
    return float(x.mid())


def log2_abs(x: Union[arb, acb]) -> float:
    """``log2 |x|`` without overflowing a double; ``-inf`` for zero."""
    a = abs(x).mid()
    if a == 0:
        return -math.inf
    man, exp = a.man_exp()
    man = int(man)
    return math.log2(man) + int(exp)


class Jet:
    """Truncated Taylor expansion ``sum_k c_k (x - x0)^k`` of order ``K``.

    Instances are immutable.  Binary operations require the same base point
    and order; the result keeps that order.
    """

    __slots__ = ("_s", "_x0", "_order", "_bits")

    def __init__(
        self,
        coeffs: Sequence[Number],
        base_point: Number = 0,
        order: int | None = None,
        p: Union[Precision, int, None] = None,
    ) -> None:
        prec = as_precision(p)
        K = len(coeffs) - 1 if order is None else int(order)
        if K < 0:
            raise ValueError("jet order must be >= 0")
        with workprec(prec):
            cs = [to_complex(c) for c in coeffs[: K + 1]]
            self._s = acb_series(cs, prec=K + 1)
            self._x0 = to_real(base_point)
        self._order = K
        self._bits = prec.bits

    @classmethod
    def _wrap(cls, s: acb_series, x0: arb, order: int, bits: int) -> "Jet":
        j = cls.__new__(cls)
        j._s = s
        j._x0 = x0
        j._order = order
        j._bits = bits
        return j

    @classmethod
    def constant(cls, c: Number, base_point: Number, order: int, p: Union[Precision, int, None] = None) -> "Jet":
        return cls([c], base_point, order, p)

    @classmethod
    def variable(cls, base_point: Number, order: int, p: Union[Precision, int, None] = None) -> "Jet":
        """Jet of the identity map ``x`` at ``base_point``."""
        return cls([base_point, 1], base_point, order, p)

    @property
    def order(self) -> int:
        return self._order

    @property
    def base_point(self) -> arb:
        return self._x0

    @property
    def precision(self) -> Precision:
        return Precision(self._bits)

    @property
    def series(self) -> acb_series:
        return self._s

    @property
    def coeffs(self) -> tuple[acb, ...]:
        cs = [mid(c) for c in self._s.coeffs()[: self._order + 1]]
        cs.extend(acb(0) for _ in range(self._order + 1 - len(cs)))
        return tuple(cs)

    def __getitem__(self, k: int) -> acb:
        return self.coeffs[k]

    def __len__(self) -> int:
        return self._order + 1

    def __repr__(self) -> str:
        body = ", ".join(fmt(c, 12) for c in self.coeffs)
        return f"Jet(order={self._order}, x0={fmt(self._x0, 12)}, [{body}])"

    def _check(self, other: "Jet") -> None:
        if self._order != other._order:
            raise JetMismatch(f"jet orders differ: {self._order} vs {other._order}")
        if self._x0 is not other._x0 and self._x0.mid() != other._x0.mid():
            raise JetMismatch("jet base points differ")

    def _coerce(self, other: Union["Jet", Number]) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return other
        return Jet.constant(other, self._x0, self._order, self._bits)

    def _like(self, s: acb_series, bits: int | None = None) -> "Jet":
        return Jet._wrap(s, self._x0, self._order, bits or self._bits)

    def _stripped(self) -> acb_series:
        return acb_series([mid(c) for c in self._s.coeffs()], prec=self._order + 1)

    def __add__(self, other: Union["Jet", Number]) -> "Jet":
        o = self._coerce(other)
        bits = max(self._bits, o._bits)
        with workprec(bits):
            return self._like(self._s + o._s, bits)

    __radd__ = __add__

    def __sub__(self, other: Union["Jet", Number]) -> "Jet":
        o = self._coerce(other)
        bits = max(self._bits, o._bits)
        with workprec(bits):
            return self._like(self._s - o._s, bits)

    def __rsub__(self, other: Number) -> "Jet":
        return self._coerce(other) - self

    def __neg__(self) -> "Jet":
        with workprec(self._bits):
            return self._like(-self._s)

    def __mul__(self, other: Union["Jet", Number]) -> "Jet":
        if not isinstance(other, Jet):
            with workprec(self._bits):
                return self._like(self._s * to_complex(other))
        self._check(other)
        bits = max(self._bits, other._bits)
        with workprec(bits):
            return self._like(self._s * other._s, bits)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Jet", Number]) -> "Jet":
        o = self._coerce(other)
        bits = max(self._bits, o._bits)
        with workprec(bits):
            c0 = o._s.coeffs()[:1]
            if not c0 or mid(c0[0]) == 0:
                raise DegenerateJet("division by a jet with zero constant term")
            return self._like(self._s * o._stripped().inv(), bits)

    def __rtruediv__(self, other: Number) -> "Jet":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "Jet":
        return jet_analytic("pow_int", self, n)

    def truncate(self, order: int) -> "Jet":
        """Keep coefficients ``0..order``; ``order`` may not exceed the current order."""
        if order > self._order or order < 0:
            raise ValueError(f"cannot truncate order {self._order} jet to order {order}")
        with workprec(self._bits):
            s = self._s + acb_series([], prec=order + 1)
        return Jet._wrap(s, self._x0, order, self._bits)

    def derivative(self) -> "Jet":
        return jet_derivative(self)

    def value(self) -> acb:
        return self.coeffs[0]


def jet_ring_op(kind: str, u: Jet, v: Jet | None = None) -> Jet:
    """Ring operation ``kind`` in {add, sub, mul, div, neg} on jets."""
    if kind == "neg":
        return -u
    if v is None:
        raise TypeError(f"{kind} needs two operands")
    if not isinstance(v, Jet):
        raise TypeError("second operand must be a Jet")
    u._check(v)
    if kind == "add":
        return u + v
    if kind == "sub":
        return u - v
    if kind == "mul":
        return u * v
    if kind == "div":
        return u / v
    raise ValueError(f"unknown ring operation {kind!r}")


def _on_cut(c0: acb) -> bool:
    c0 = mid(c0)
    return c0.imag == 0 and c0.real <= 0


def jet_analytic(kind: str, u: Jet, n: int | None = None) -> Jet:
    """Compose ``u`` with exp, ln, sqrt, sin, cos or an integer power."""
    with workprec(u._bits):
        s = u._stripped()
        c0 = s.coeffs()[0] if s.coeffs() else acb(0)
        if kind == "exp":
            r = s.exp()
        elif kind == "sin":
            r = s.sin()
        elif kind == "cos":
            r = s.cos()
        elif kind in ("ln", "sqrt"):
            if _on_cut(c0):
                raise BranchCut(f"{kind} of a jet whose constant term lies on (-inf, 0]")
            r = s.log() if kind == "ln" else s.sqrt()
        elif kind == "pow_int":
            if n is None or int(n) != n:
                raise ValueError("pow_int needs an integer exponent")
            n = int(n)
            if n < 0:
                if mid(c0) == 0:
                    raise DegenerateJet("negative power of a jet with zero constant term")
                s = s.inv()
                n = -n
            r = _series_pow(s, n, u._order)
        else:
            raise ValueError(f"unknown analytic function {kind!r}")
        return u._like(r)


def _series_pow(s: acb_series, n: int, order: int) -> acb_series:
    result = acb_series([1], prec=order + 1)
    base = s
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def jet_derivative(u: Jet) -> Jet:
    """Jet of ``u'``; the order drops by one."""
    if u._order == 0:
        raise OrderExhausted("cannot differentiate an order-0 jet")
    with workprec(u._bits):
        s = u._s.derivative() + acb_series([], prec=u._order)
    return Jet._wrap(s, u._x0, u._order - 1, u._bits)
