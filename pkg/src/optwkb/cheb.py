"""Chebyshev grids, coefficient transforms and Clenshaw-Curtis antiderivatives.

Nodes are ordered ``k = 0..M`` with ``x_0 = eta`` and ``x_M = xi``, i.e. in
decreasing order.  A :class:`ChebSeries` stores plain coefficients of
``sum_r a_r T_r(l)`` where ``l`` is the reference variable on ``[-1, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

from flint import acb, acb_mat, arb, arb_mat

from .numerics import Number, Precision, as_precision, mid, to_complex, to_real, workprec


class BadGrid(ValueError):
    pass


class BadShape(ValueError):
    pass


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Grid:
    M: int
    xi: arb
    eta: arb
    nodes: tuple[arb, ...]
    ref: tuple[arb, ...]
    bits: int

    @property
    def interval(self) -> tuple[arb, arb]:
        return (self.xi, self.eta)

    @property
    def precision(self) -> Precision:
        return Precision(self.bits)

    def __len__(self) -> int:
        return self.M + 1

    def to_ref(self, x: arb) -> arb:
        """Map ``x`` in ``[xi, eta]`` to ``l`` in ``[-1, 1]``."""
        return (2 * x - self.xi - self.eta) / (self.eta - self.xi)


@lru_cache(maxsize=64)
def _ref_nodes(M: int, bits: int) -> tuple[arb, ...]:
    with workprec(bits):
        pi = arb.pi()
        # cos(k pi / M) with exact symmetry and exact zero at the centre
        half = [mid((pi * k / M).cos()) for k in range(M // 2 + 1)]
        out = []
        for k in range(M + 1):
            if 2 * k == M:
                out.append(arb(0))
            elif k <= M // 2:
                out.append(half[k])
            else:
                out.append(-half[M - k])
        return tuple(out)


def make_grid(M: int, xi: Number, eta: Number, p: Union[Precision, int, None] = None) -> Grid:
    """Chebyshev extreme points mapped to ``[xi, eta]``."""
    prec = as_precision(p)
    if not isinstance(M, int) or M < 1:
        raise BadGrid(f"M must be a positive integer, got {M!r}")
    with workprec(prec):
        a, b = mid(to_real(xi)), mid(to_real(eta))
        if not a < b:
            raise BadGrid("interval needs xi < eta")
        ref = _ref_nodes(M, prec.bits)
        nodes = []
        for k, l in enumerate(ref):
            if k == 0:
                nodes.append(b)
            elif k == M:
                nodes.append(a)
            else:
                nodes.append(mid(b * (1 + l) / 2 + a * (1 - l) / 2))
        return Grid(M, a, b, tuple(nodes), ref, prec.bits)


@dataclass(frozen=True, eq=False)
class ChebSeries:
    xi: arb
    eta: arb
    coeffs: tuple[acb, ...]
    bits: int

    @property
    def interval(self) -> tuple[arb, arb]:
        return (self.xi, self.eta)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: Number) -> acb:
        return eval_series(self, x)


@lru_cache(maxsize=32)
def _dct_matrix(M: int, bits: int) -> acb_mat:
    """Matrix ``W`` with ``a = W f`` for the collocation system on extreme points."""
    ref = _ref_nodes(M, bits)
    with workprec(bits):

        def cosine(j: int) -> arb:
            j %= 2 * M
            return ref[j] if j <= M else ref[2 * M - j]

        rows = []
        for r in range(M + 1):
            cr = arb(1) if r in (0, M) else arb(2)
            row = []
            for k in range(M + 1):
                ck = arb(1) / 2 if k in (0, M) else arb(1)
                row.append(cr * ck * cosine(r * k) / M)
            rows.append(row)
        return acb_mat(arb_mat(rows))


def to_coeffs(values: Sequence[Number], g: Grid) -> ChebSeries:
    """Chebyshev coefficients interpolating ``values`` at the nodes of ``g``.

    This is a type-I discrete cosine transform with half weights on the two
    end nodes, evaluated by direct summation.
    """
    if len(values) != g.M + 1:
        raise BadShape(f"expected {g.M + 1} samples, got {len(values)}")
    with workprec(g.bits):
        f = acb_mat([[to_complex(v)] for v in values])
        a = _dct_matrix(g.M, g.bits) * f
        coeffs = tuple(mid(a[r, 0]) for r in range(g.M + 1))
    return ChebSeries(g.xi, g.eta, coeffs, g.bits)


def to_coeffs_many(columns: Sequence[Sequence[Number]], g: Grid) -> list[ChebSeries]:
    """:func:`to_coeffs` for several sample vectors at once."""
    if not columns:
        return []
    for col in columns:
        if len(col) != g.M + 1:
            raise BadShape(f"expected {g.M + 1} samples, got {len(col)}")
    with workprec(g.bits):
        F = acb_mat([[to_complex(col[k]) for col in columns] for k in range(g.M + 1)])
        A = _dct_matrix(g.M, g.bits) * F
        return [
            ChebSeries(g.xi, g.eta, tuple(mid(A[r, j]) for r in range(g.M + 1)), g.bits)
            for j in range(len(columns))
        ]


def cc_antiderivative(s: ChebSeries) -> ChebSeries:
    """Antiderivative of ``s`` that vanishes at ``xi``, truncated to the same degree."""
    a = s.coeffs
    M = len(a) - 1
    with workprec(s.bits):
        scale = (s.eta - s.xi) / 2
        b = [acb(0)] * (M + 1)
        if M >= 1:
            for r in range(1, M + 1):
                lo = 2 * a[0] if r == 1 else a[r - 1]
                hi = a[r + 1] if r + 1 <= M else acb(0)
                b[r] = mid((lo - hi) / (2 * r) * scale)
        total = acb(0)
        for r in range(1, M + 1):
            total += -b[r] if r % 2 else b[r]
        b[0] = -total
        return ChebSeries(s.xi, s.eta, tuple(mid(c) for c in b), s.bits)


def clenshaw(coeffs: Sequence[acb], l: Union[arb, acb]) -> acb:
    """Evaluate ``sum_r c_r T_r(l)`` by Clenshaw's recurrence."""
    b1 = acb(0)
    b2 = acb(0)
    two_l = 2 * l
    for c in reversed(coeffs[1:]):
        b1, b2 = c + two_l * b1 - b2, b1
    return coeffs[0] + l * b1 - b2 if coeffs else acb(0)


def eval_series(s: ChebSeries, x: Number) -> acb:
    """Value of the series at ``x`` in ``[xi, eta]``."""
    with workprec(s.bits):
        xx = to_real(x)
        if xx < s.xi or xx > s.eta:
            raise OutOfDomain("evaluation point outside the series interval")
        if xx == s.eta or xx == s.xi:
            # T_r(1) = 1 and T_r(-1) = (-1)^r; summed in the same order as
            # cc_antiderivative so its value at xi is exactly zero
            odd = -1 if xx == s.xi else 1
            tail = acb(0)
            for r in range(1, len(s.coeffs)):
                tail += odd * s.coeffs[r] if r % 2 else s.coeffs[r]
            return mid(s.coeffs[0] + tail)
        l = mid((2 * xx - s.xi - s.eta) / (s.eta - s.xi))
        return mid(clenshaw(s.coeffs, l))


def chebyshev_basis(xs: Sequence[Number], xi: arb, eta: arb, degree: int, bits: int) -> arb_mat:
    """Matrix ``T_r(l(x_i))`` of shape ``len(xs) x (degree + 1)``."""
    with workprec(bits):
        rows = []
        for x in xs:
            xx = to_real(x)
            if xx < xi or xx > eta:
                raise OutOfDomain("evaluation point outside the series interval")
            l = mid((2 * xx - xi - eta) / (eta - xi))
            row = [arb(1), l]
            for _ in range(2, degree + 1):
                row.append(mid(2 * l * row[-1] - row[-2]))
            rows.append(row[: degree + 1])
        return arb_mat(rows)


def eval_many(series: Sequence[ChebSeries], xs: Sequence[Number]) -> list[list[acb]]:
    """``out[n][i]`` = ``series[n](xs[i])``, via one matrix product.

    All series must share an interval, degree and precision.
    """
    if not series:
        return []
    s0 = series[0]
    deg = s0.degree
    for s in series:
        if s.degree != deg or s.xi != s0.xi or s.eta != s0.eta:
            raise BadShape("series must share interval and degree")
    T = chebyshev_basis(xs, s0.xi, s0.eta, deg, s0.bits)
    with workprec(s0.bits):
        C = acb_mat([[s.coeffs[r] for s in series] for r in range(deg + 1)])
        V = acb_mat(T) * C
        return [[mid(V[i, n]) for i in range(len(xs))] for n in range(len(series))]


def diff_matrix(g: Grid) -> arb_mat:
    """Chebyshev differentiation matrix for the nodes of ``g``, scaled to ``[xi, eta]``.

    Off-diagonal entries use the closed form; each diagonal entry is the
    negative sum of its row.
    """
    M = g.M
    l = g.ref
    with workprec(g.bits):
        c = [2 if k in (0, M) else 1 for k in range(M + 1)]
        rows = []
        for i in range(M + 1):
            row = []
            for j in range(M + 1):
                if i == j:
                    row.append(arb(0))
                    continue
                sign = -1 if (i + j) % 2 else 1
                row.append(mid(arb(sign * c[i]) / c[j] / (l[i] - l[j])))
            diag = arb(0)
            for v in row:
                diag -= v
            row[i] = diag
            rows.append(row)
        scale = 2 / (g.eta - g.xi)
        return arb_mat([[mid(v * scale) for v in row] for row in rows])


def apply_matrix(D: arb_mat, values: Sequence[acb], bits: int) -> list[acb]:
    with workprec(bits):
        v = acb_mat(D) * acb_mat([[to_complex(x)] for x in values])
        return [mid(v[k, 0]) for k in range(len(values))]
