"""Phase functions, truncated WKB solutions, residuals and BVP scaling.

The phase derivatives obey

    S0' = i sqrt(a),  S1' = -S0''/(2 S0'),
    Sn' = -(sum_{j=1}^{n-1} Sj' S_{n-j}' + S_{n-1}'') / (2 S0'),

on the '+' branch.  The '-' branch differs only in the sign of the even
terms, so it is never stored.  A :class:`PhaseTable` keeps node values of
``Sn'`` together with Chebyshev series of ``Sn'`` and of the antiderivatives
``S~n`` (vanishing at ``xi``).  Tables do not depend on ``eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol, Sequence, Union

from flint import acb, acb_mat, arb

from . import expr as ex
from .cheb import (
    ChebSeries,
    Grid,
    OutOfDomain,
    cc_antiderivative,
    diff_matrix,
    eval_many,
    to_coeffs_many,
)
from .numerics import (
    Jet,
    Number,
    jet_analytic,
    NumericsError,
    Precision,
    as_precision,
    log2_abs,
    mid,
    to_complex,
    to_real,
    workprec,
)

BACKENDS = ("jet", "symbolic", "spectral")
I = acb(0, 1)


class TurningPoint(ValueError):
    """``a`` is not strictly positive at some grid node."""


class EpsilonTooLarge(NumericsError):
    """The initial-condition system is numerically singular for this ``eps``."""


class DegenerateScattering(NumericsError):
    """The BVP scaling factor has a vanishing denominator."""


@dataclass(frozen=True, eq=False)
class PhaseTable:
    """Node values of ``Sn'`` (n = 0..n_max+1) and Chebyshev series for them.

    ``anti`` holds the antiderivatives ``S~n``; ``overrides`` lets individual
    antiderivatives be replaced by exact callables (used to isolate the
    quadrature error of single terms).
    """

    a: ex.Expr
    grid: Grid
    n_max: int
    dS: tuple[tuple[acb, ...], ...]
    dseries: tuple[ChebSeries, ...]
    anti: tuple[ChebSeries, ...]
    backend: str
    bits: int
    overrides: dict = field(default_factory=dict)
    guard_bits: int = 0

    @property
    def interval(self) -> tuple[arb, arb]:
        return self.grid.interval

    @property
    def precision(self) -> Precision:
        return Precision(self.bits)

    @property
    def xi_index(self) -> int:
        return self.grid.M

    def with_exact_anti(self, n: int, fn: Callable[[arb], acb]) -> "PhaseTable":
        """Copy of the table whose ``S~n`` is ``fn`` instead of the quadrature."""
        ov = dict(self.overrides)
        ov[n] = fn
        return replace(self, overrides=ov)

    def anti_at_nodes(self, n: int) -> list[acb]:
        return _anti_values(self, n, list(self.grid.nodes))

    def norms(self) -> tuple[list[arb], list[arb]]:
        """Node maxima of ``|Sn'|`` and ``|S~n|`` for each stored ``n``."""
        from .numerics import max_abs

        ds = [max_abs(col) for col in self.dS]
        an = [max_abs(self.anti_at_nodes(n)) for n in range(len(self.anti))]
        return ds, an


def _check_positive(a: ex.Expr, g: Grid, bits: int) -> list[arb]:
    vals = []
    for x in g.nodes:
        v = ex.eval_complex(a, x, bits)
        if v.imag != 0 or not v.real > 0:
            raise TurningPoint(f"a(x) must be real and positive on the grid; a({x.mid()}) = {v}")
        vals.append(v.real)
    return vals


def _jet_column(a: ex.Expr, x: arb, K: int, bits: int) -> list[acb]:
    """Values ``Sn'(x)`` for n = 0..K from jets of order K."""
    aj = ex.eval_jet(a, x, K, bits)
    with workprec(bits):
        S0 = jet_analytic("sqrt", aj) * I
        inv = 1 / (-2 * S0)
        S = [S0]
        out = [S0.coeffs[0]]
        for n in range(1, K + 1):
            L = K - n
            acc = S[n - 1].derivative().truncate(L)
            pair = None
            for j in range(1, (n + 1) // 2):
                p = S[j].truncate(L) * S[n - j].truncate(L)
                pair = p if pair is None else pair + p
            if pair is not None:
                acc = acc + 2 * pair
            if n % 2 == 0:
                h = S[n // 2].truncate(L)
                acc = acc + h * h
            Sn = inv.truncate(L) * acc
            # radii are dropped level by level; the values are used as floats
            Sn = Jet._wrap(Sn._stripped(), Sn.base_point, L, bits)
            S.append(Sn)
            out.append(Sn.coeffs[0])
        return out


def jet_guard_bits(a: ex.Expr, x: arb, K: int, bits: int) -> int:
    """Guard bits for the jet recurrence, measured by a two-precision probe at ``x``.

    Terms whose magnitude is below ``2^-bits`` of the largest term count as
    zeros and do not enter the estimate.
    """
    lo_bits = bits + 32
    hi_bits = 2 * lo_bits + 6 * K
    lo = _jet_column(a, x, K, lo_bits)
    hi = _jet_column(a, x, K, hi_bits)
    with workprec(hi_bits):
        mags = [abs(h) for h in hi]
        top = max(log2_abs(m) for m in mags if m != 0)
        lost = 0.0
        for l, h, m in zip(lo, hi, mags):
            if m == 0 or log2_abs(m) < top - bits:
                continue
            d = abs(l - h)
            if d != 0:
                lost = max(lost, lo_bits + log2_abs(d) - log2_abs(m))
    return 32 * math.ceil((32 + max(lost, 0.0)) / 32)


def _jet_backend(a: ex.Expr, g: Grid, count: int, bits: int, guard: int) -> list[list[acb]]:
    wp = bits + guard
    cols = [_jet_column(a, x, count - 1, wp) for x in g.nodes]
    with workprec(bits):
        return [[mid(+cols[k][n]) for k in range(len(cols))] for n in range(count)]


def symbolic_phase_exprs(a: ex.Expr, count: int) -> list[ex.Expr]:
    """Real expressions ``Rn`` with ``Sn' = i Rn`` (n even) or ``Sn' = Rn`` (n odd)."""
    R = [ex.sqrt(a)]
    dR: dict[int, ex.Expr] = {}
    two_r0 = ex.mul(ex.const(2), R[0])
    for n in range(1, count):
        dR[n - 1] = ex.differentiate(R[n - 1])
        acc = dR[n - 1]
        for j in range(1, n):
            term = ex.mul(R[j], R[n - j])
            if n % 2 == 0 and j % 2 == 0:
                acc = ex.sub(acc, term)
            else:
                acc = ex.add(acc, term)
        r = ex.div(acc, two_r0)
        R.append(ex.neg(r) if n % 2 else r)
    return R


SYMBOLIC_GUARD = 64


def _symbolic_backend(a: ex.Expr, g: Grid, count: int, bits: int) -> list[list[acb]]:
    R = symbolic_phase_exprs(a, count)
    # the expanded expressions cancel heavily at high order; evaluate with
    # SYMBOLIC_GUARD extra bits and round once
    wp = bits + SYMBOLIC_GUARD
    rows = []
    for n, e in enumerate(R):
        vals = [ex.eval_complex(e, x, wp) for x in g.nodes]
        with workprec(bits):
            rows.append([mid(+(v * I)) if n % 2 == 0 else mid(+v) for v in vals])
    return rows


def _spectral_backend(a: ex.Expr, g: Grid, count: int, bits: int) -> list[list[acb]]:
    with workprec(bits):
        s0 = [mid(ex.eval_complex(ex.sqrt(a), x, bits) * I) for x in g.nodes]
        D = acb_mat(diff_matrix(g))
        inv = [mid(1 / (-2 * v)) for v in s0]
        rows = [s0]
        for n in range(1, count):
            prev = rows[n - 1]
            d = D * acb_mat([[v] for v in prev])
            new = []
            for k in range(g.M + 1):
                acc = d[k, 0]
                for j in range(1, n):
                    acc += rows[j][k] * rows[n - j][k]
                new.append(mid(acc * inv[k]))
            rows.append(new)
        return rows


def _project(s: ChebSeries, n: int) -> ChebSeries:
    """Even antiderivatives are made purely imaginary, odd ones purely real."""
    if n % 2 == 0:
        cs = tuple(acb(0, c.imag) for c in s.coeffs)
    else:
        cs = tuple(acb(c.real, 0) for c in s.coeffs)
    return replace(s, coeffs=cs)


def phase_table(
    a: Union[ex.Expr, str],
    g: Grid,
    n_max: int,
    backend: str = "jet",
    p: Union[Precision, int, None] = None,
    guard_bits: int | None = None,
) -> PhaseTable:
    """Compute ``Sn'`` at the nodes of ``g`` for n = 0..n_max+1 and integrate them.

    The jet backend works with ``guard_bits`` extra bits; by default these are
    measured with :func:`jet_guard_bits` at the grid midpoint.
    """
    if isinstance(a, str):
        a = ex.parse(a)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    bits = as_precision(p).bits if p is not None else g.bits
    if bits != g.bits:
        from .cheb import make_grid

        g = make_grid(g.M, g.xi, g.eta, bits)
    _check_positive(a, g, bits)
    count = n_max + 2
    guard = 0
    if backend == "jet":
        guard = jet_guard_bits(a, g.nodes[g.M // 2], count - 1, bits) if guard_bits is None else guard_bits
        rows = _jet_backend(a, g, count, bits, guard)
    elif backend == "symbolic":
        rows = _symbolic_backend(a, g, count, bits)
    else:
        rows = _spectral_backend(a, g, count, bits)
    dseries = to_coeffs_many(rows, g)
    anti = [_project(cc_antiderivative(s), n) for n, s in enumerate(dseries)]
    return PhaseTable(
        a=a,
        grid=g,
        n_max=n_max,
        dS=tuple(tuple(r) for r in rows),
        dseries=tuple(dseries),
        anti=tuple(anti),
        backend=backend,
        bits=bits,
        guard_bits=guard,
    )


def branch_minus(t: PhaseTable, n: int) -> tuple[list[acb], list[acb]]:
    """Node values of ``(Sn^-)'`` and ``S~n^-``; even orders change sign."""
    if n > t.n_max + 1 or n < 0:
        raise ValueError(f"order {n} not in table")
    sign = -1 if n % 2 == 0 else 1
    with workprec(t.bits):
        d = [sign * v for v in t.dS[n]]
        s = [sign * v for v in t.anti_at_nodes(n)]
    return d, s


def _anti_values(t: PhaseTable, n: int, xs: Sequence[arb]) -> list[acb]:
    fn = t.overrides.get(n)
    if fn is not None:
        with workprec(t.bits):
            vals = [mid(to_complex(fn(x))) for x in xs]
    else:
        vals = eval_many([t.anti[n]], xs)[0]
    # the antiderivatives vanish at xi by construction
    return [acb(0) if x == t.grid.xi else v for x, v in zip(xs, vals)]


@dataclass(frozen=True)
class TermSamples:
    """``anti[n][i]`` and ``deriv[n][i]`` at points ``xs``, n = 0..n_top."""

    xs: tuple[arb, ...]
    anti: tuple[tuple[acb, ...], ...]
    deriv: tuple[tuple[acb, ...], ...]


def sample_terms(t: PhaseTable, xs: Sequence[Number], n_top: int | None = None) -> TermSamples:
    """Evaluate ``S~n`` and ``Sn'`` off-grid through their Chebyshev series."""
    n_top = t.n_max + 1 if n_top is None else n_top
    with workprec(t.bits):
        pts = [mid(to_real(x)) for x in xs]
    for x in pts:
        if x < t.grid.xi or x > t.grid.eta:
            raise OutOfDomain("evaluation point outside the interval")
    anti = eval_many(list(t.anti[: n_top + 1]), pts)
    deriv = eval_many(list(t.dseries[: n_top + 1]), pts)
    for n in range(n_top + 1):
        if n in t.overrides:
            anti[n] = _anti_values(t, n, pts)
        else:
            anti[n] = [acb(0) if x == t.grid.xi else v for x, v in zip(pts, anti[n])]
    return TermSamples(tuple(pts), tuple(tuple(r) for r in anti), tuple(tuple(r) for r in deriv))


@dataclass(frozen=True, eq=False)
class WKBSolution:
    table: PhaseTable
    eps: arb
    N: int
    alpha: acb
    beta: acb
    phi0: acb
    phi1: acb

    @property
    def interval(self) -> tuple[arb, arb]:
        return self.table.interval

    def evaluate(self, x: Number) -> tuple[acb, acb]:
        return eval_solution(self, x)

    def evaluate_many(self, xs: Sequence[Number]) -> list[tuple[acb, acb]]:
        return eval_solution_many(self, xs)


def _ic_sums(t: PhaseTable, eps: arb, N: int) -> tuple[acb, acb]:
    k = t.xi_index
    P = acb(0)
    Q = acb(0)
    e = arb(1)
    for n in range(N + 1):
        v = t.dS[n][k]
        P += e * v
        Q += e * (-v if n % 2 == 0 else v)
        e *= eps
    return P, Q


def make_solution(t: PhaseTable, eps: Number, N: int, phi0: Number, phi1: Number) -> WKBSolution:
    """Fix ``alpha`` and ``beta`` from ``phi(xi) = phi0`` and ``eps phi'(xi) = phi1``."""
    if N < 0 or N > t.n_max:
        raise ValueError(f"N must be in 0..{t.n_max}, got {N}")
    with workprec(t.bits):
        e = mid(to_real(eps))
        if not e > 0:
            raise ValueError("eps must be positive")
        f0, f1 = mid(to_complex(phi0)), mid(to_complex(phi1))
        P, Q = _ic_sums(t, e, N)
        den = P - Q
        if abs(den).mid() < arb(2) ** (-(t.bits // 2)):
            raise EpsilonTooLarge(f"initial-condition determinant vanishes at eps = {e.mid()}")
        alpha = mid((f0 * P - f1) / den)
    # exact subtraction, so that alpha + beta == phi0 at the working precision
    with workprec(t.bits + 2048):
        beta = mid(f0 - alpha)
    return WKBSolution(t, e, N, alpha, beta, f0, f1)


def _combine(
    s: WKBSolution, anti: Sequence[Sequence[acb]], deriv: Sequence[Sequence[acb]], i: int
) -> tuple[acb, acb]:
    eps = s.eps
    Ep = acb(0)
    Em = acb(0)
    P = acb(0)
    Q = acb(0)
    w = 1 / eps
    for n in range(s.N + 1):
        A = anti[n][i]
        d = deriv[n][i]
        if n % 2 == 0:
            Ep += w * A
            Em -= w * A
            P += w * eps * d
            Q -= w * eps * d
        else:
            Ep += w * A
            Em += w * A
            P += w * eps * d
            Q += w * eps * d
        w *= eps
    xm, xp = Em.exp(), Ep.exp()
    bits = s.table.bits
    # beta carries extra bits (see make_solution); combine before rounding so
    # that phi(xi) == phi0 holds exactly
    with workprec(bits + 2048):
        em = s.alpha * xm
        ep = s.beta * xp
        phi, dphi = em + ep, em * Q + ep * P
    with workprec(bits):
        return mid(+phi), mid(+dphi)


def eval_solution(s: WKBSolution, x: Number) -> tuple[acb, acb]:
    """``(phi_N(x), eps phi_N'(x))``."""
    return eval_solution_many(s, [x])[0]


def eval_solution_many(s: WKBSolution, xs: Sequence[Number]) -> list[tuple[acb, acb]]:
    ts = sample_terms(s.table, xs, s.N)
    with workprec(s.table.bits):
        return [_combine(s, ts.anti, ts.deriv, i) for i in range(len(ts.xs))]


def solution_values(
    t: PhaseTable, ts: TermSamples, eps: Number, N: int, phi0: Number, phi1: Number
) -> list[tuple[acb, acb]]:
    """WKB values at pre-sampled points; used for sweeps over ``N``."""
    s = make_solution(t, eps, N, phi0, phi1)
    with workprec(t.bits):
        return [_combine(s, ts.anti, ts.deriv, i) for i in range(len(ts.xs))]


def residual_f(t: PhaseTable, eps: Number, N: int, branch: str = "+") -> list[acb]:
    """Node values of the residual factor ``f_{N,eps}`` of the truncated ansatz."""
    if N < 0 or N > t.n_max:
        raise ValueError(f"N must be in 0..{t.n_max}")
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    with workprec(t.bits):
        e = mid(to_real(eps))

        def d(n: int, k: int) -> acb:
            v = t.dS[n][k]
            return -v if branch == "-" and n % 2 == 0 else v

        out = []
        for k in range(t.grid.M + 1):
            f = -2 * e ** (N + 1) * d(0, k) * d(N + 1, k)
            for n in range(2, N + 1):
                for kk in range(2 + N - n, N + 1):
                    f += e ** (n + kk) * d(n, k) * d(kk, k)
            out.append(mid(f))
        return out


class HasEvaluate(Protocol):
    eps: arb

    @property
    def interval(self) -> tuple[arb, arb]: ...

    def evaluate(self, x: Number) -> tuple[acb, acb]: ...


def _bits_of(s: object, p: Union[Precision, int, None]) -> int:
    if p is not None:
        return as_precision(p).bits
    table = getattr(s, "table", None)
    if table is not None:
        return table.bits
    return as_precision(getattr(s, "bits", None)).bits


def bvp_scale(s: HasEvaluate, k_xi: Number, k_eta: Number, p: Union[Precision, int, None] = None) -> acb:
    """Factor turning the left-travelling IVP solution into the scattering state.

    With ``phi(xi) = 1`` and ``eps phi'(xi) = -i eps k(xi)``, the returned
    ``c`` makes ``psi = c phi`` satisfy ``psi'(eta) - i k(eta) psi(eta) = -2 i k(eta)``.
    """
    bits = _bits_of(s, p)
    with workprec(bits):
        k1 = to_real(k_eta)
        if not k1 > 0:
            raise ValueError("k(eta) must be positive")
        _, eta = s.interval
        phi, ephi = s.evaluate(eta)
        dphi = ephi / s.eps
        den = dphi - I * k1 * phi
        if abs(den).mid() == 0 or abs(den).mid() < abs(k1).mid() * arb(2) ** (-bits + 8):
            raise DegenerateScattering("phi'(eta) - i k(eta) phi(eta) vanishes")
        return mid(-2 * I * k1 / den)


def bvp_residuals(s: HasEvaluate, k_xi: Number, k_eta: Number, c: acb, p: Union[Precision, int, None] = None) -> tuple[acb, acb]:
    """Left and right boundary-row residuals of ``psi = c phi``."""
    bits = _bits_of(s, p)
    with workprec(bits):
        xi, eta = s.interval
        k0, k1 = to_real(k_xi), to_real(k_eta)
        p0, e0 = s.evaluate(xi)
        p1, e1 = s.evaluate(eta)
        left = c * (e0 / s.eps + I * k0 * p0)
        right = c * (e1 / s.eps - I * k1 * p1) + 2 * I * k1
        return mid(left), mid(right)

