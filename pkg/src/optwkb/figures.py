"""Built-in configurations producing the data behind figures 2 to 11.

Each builder returns panels; every panel is one table of plotted series.
Bound columns use ``C = 1`` and are meaningful up to that constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from flint import arb

from . import oracles as orc
from . import truncation as tr
from .cheb import make_grid
from .expr import parse
from .numerics import max_abs, mid, to_real, workprec
from .wkb import PhaseTable, phase_table

AIRY = ("x", (1, 2))
EXP5 = ("exp(5*x)", (0, 1))
TRINOMIAL = ("(1+x+x^2)^-2", (0, 1))

# fitted constants quoted with the norm plots
FIT_AIRY = (Fraction(10, 37), Fraction(1, 4))
FIT_EXP5 = (Fraction(9, 20), Fraction(3, 5))


@dataclass
class Panel:
    name: str
    columns: list[str]
    rows: list[list]
    bits: int
    config: tuple[tuple[str, str], ...] = ()
    notes: list[str] = field(default_factory=list)


def _table(problem: tuple[str, tuple[int, int]], M: int, n_max: int, bits: int, backend: str = "jet") -> PhaseTable:
    a, (xi, eta) = problem
    return phase_table(a, make_grid(M, xi, eta, bits), n_max, backend=backend, p=bits)


def _pow2(k: int) -> Fraction:
    return Fraction(1, 2**k)


def _oracle(problem: tuple, eps: Fraction, bits: int) -> orc.ReferenceSolution:
    if problem is AIRY:
        return orc.airy_solution(eps, bits)
    if problem is EXP5:
        return orc.bessel_solution(eps, bits)
    return orc.trinomial_solution(eps, bits)


def _errors(t: PhaseTable, problem: tuple, eps: Fraction, Ns: Sequence[int], bits: int) -> dict[int, arb]:
    o = _oracle(problem, eps, bits)
    xs = tr.dense_points(t.a, t.interval, eps, bits)
    vals = [o.evaluate(x)[0] for x in xs]
    return tr.wkb_errors(t, eps, Ns, o.phi0, o.phi1, xs, vals)


def _cfg(problem: tuple, **kw: object) -> tuple[tuple[str, str], ...]:
    a, (xi, eta) = problem
    items = [("a_expr", a), ("interval", f"{xi},{eta}")]
    items += [(k, str(v)) for k, v in kw.items()]
    return tuple(items)


def _solution_panel(problem: tuple, eps: Fraction, bits: int, real_only: bool) -> Panel:
    o = _oracle(problem, eps, bits)
    a, (xi, eta) = problem
    xs = tr.dense_points(parse(a), (arb(xi), arb(eta)), eps, bits, per_wavelength=16)
    rows = []
    for x in xs:
        v = o.evaluate(x)[0]
        rows.append([x, v.real] if real_only else [x, v.real, v.imag])
    cols = ["x", "phi_re"] if real_only else ["x", "phi_re", "phi_im"]
    return Panel("left", cols, rows, bits, _cfg(problem, eps=eps))


def _norm_panel(problem: tuple, M: int, n_top: int, bits: int, fitted: Optional[tuple[Fraction, Fraction]]) -> Panel:
    t = _table(problem, M, n_top, bits)
    a, iv = problem
    k = tr.k_constant(a, iv, p=113)
    cols = ["n", "norm_dS", "norm_anti", "bound_theory"]
    if fitted is not None:
        cols.append("bound_fitted")
    rows = []
    with workprec(bits):
        for n in range(n_top + 1):
            nn = arb(1) if n == 0 else arb(n) ** n
            row = [n, max_abs(t.dS[n]), max_abs(t.anti_at_nodes(n)), mid(arb(k.sup_S0) * arb(k.K2) ** n * nn)]
            if fitted is not None:
                K2f, sf = (to_real(v) for v in fitted)
                row.append(mid(sf * K2f**n * nn))
            rows.append(row)
    notes = [f"K2 = {k.K2!r}", f"sup_S0 = {k.sup_S0!r}"]
    return Panel("right", cols, rows, bits, _cfg(problem, M=M), notes)


def _eps_sweep(problem: tuple, M: int, Ns: Sequence[int], ks: Sequence[int], bits: int, name: str, exact_s0: bool = False) -> Panel:
    t = _table(problem, M, max(max(Ns), 1), bits)
    if exact_s0:
        coeffs = orc.airy_phase_coefficients(2, bits)
        t = t.with_exact_anti(0, lambda x: orc.airy_phase_exact(0, x, coeffs, bits))
    rows = []
    for k in ks:
        eps = _pow2(k)
        errs = _errors(t, problem, eps, Ns, bits)
        rows.extend([eps, N, errs[N]] for N in Ns)
    cfg = _cfg(problem, M=M, N=",".join(map(str, Ns)), eps=f"2^-{ks[0]}..2^-{ks[-1]}", exact_S0=exact_s0)
    return Panel(name, ["eps", "N", "err_inf"], rows, bits, cfg)


def _n_sweep(problem: tuple, M: int, N_top: int, ks: Sequence[int], bits: int, fitted: Optional[tuple]) -> Panel:
    t = _table(problem, M, N_top, bits)
    rows = []
    for k in ks:
        eps = _pow2(k)
        o = _oracle(problem, eps, bits)
        errs = _errors(t, problem, eps, range(N_top + 1), bits)
        for N in range(N_top + 1):
            row = [eps, N, errs[N]]
            if fitted is not None:
                row.append(tr.error_bound(fitted[0], fitted[1], t.interval, o.phi0, o.phi1, eps, N))
            rows.append(row)
    cols = ["eps", "N", "err_inf"] + (["bound_c1"] if fitted is not None else [])
    return Panel("right", cols, rows, bits, _cfg(problem, M=M, N_max=N_top))


def _orders(problem: tuple, M: int, n_max: int, bits: int, fitted: tuple, ks: Sequence[int]) -> list[Panel]:
    t = _table(problem, M, n_max, bits)
    left, right, pts = [], [], []
    for k in ks:
        eps = _pow2(k)
        N_max = min(n_max, math.ceil(1.6 / float(eps)) + 10)
        o = _oracle(problem, eps, bits)
        rep = tr.select_orders(t, eps, fitted, N_max, oracle=o)
        left.append([eps, rep.N_opt, rep.N_hat_opt, rep.N_heu, rep.N_hat_heu])
        right.append([eps, 1 / eps, rep.optimal_error, rep.rows[rep.N_hat_opt].bound])
        pts.append((eps, rep.optimal_error))
    r, C, rms = tr.fit_exp_rate(pts)
    with workprec(bits):
        for row in right:
            row.append(mid(arb(C) * (-arb(r) / to_real(row[0])).exp()))
    notes = [f"fit_r = {r!r}", f"fit_C = {C!r}", f"fit_rms = {rms!r}"]
    cfg = _cfg(problem, M=M, n_max=n_max, K2=fitted[0], sup_S0=fitted[1])
    return [
        Panel("left", ["eps", "N_opt", "N_hat_opt", "N_heu", "N_hat_heu"], left, bits, cfg, notes),
        Panel("right", ["eps", "inv_eps", "err_opt", "bound_c1_at_N_hat_opt", "fit_exp"], right, bits, cfg, notes),
    ]


def figure2() -> list[Panel]:
    bits, M = 113, 20
    cols: dict[str, list[arb]] = {}
    for a in ("x", "x^2"):
        tj = _table((a, (1, 2)), M, 10, bits)
        ts = _table((a, (1, 2)), M, 10, bits, backend="spectral")
        with workprec(bits):
            cols[a] = [max_abs([u - v for u, v in zip(tj.dS[n], ts.dS[n])]) for n in range(1, 11)]
    rows = [[n, cols["x"][n - 1], cols["x^2"][n - 1]] for n in range(1, 11)]
    return [Panel("main", ["n", "err_a_x", "err_a_x2"], rows, bits, (("interval", "1,2"), ("M", str(M))))]


def figure3() -> list[Panel]:
    return [_solution_panel(AIRY, _pow2(8), 113, real_only=True), _norm_panel(AIRY, 25, 40, 256, FIT_AIRY)]


def figure4() -> list[Panel]:
    ks, Ns = range(2, 10), list(range(5))
    return [
        _eps_sweep(AIRY, 8, Ns, list(ks), 113, "left"),
        _eps_sweep(AIRY, 8, Ns, list(ks), 113, "right", exact_s0=True),
    ]


def figure5() -> list[Panel]:
    return [
        _eps_sweep(AIRY, 25, list(range(5)), list(range(2, 10)), 113, "left"),
        _n_sweep(AIRY, 40, 50, [2, 3, 4, 5], 192, FIT_AIRY),
    ]


def figure6() -> list[Panel]:
    return _orders(AIRY, 100, 200, 320, FIT_AIRY, range(1, 8))


def figure7() -> list[Panel]:
    return [_solution_panel(EXP5, Fraction(1, 100), 113, real_only=True), _norm_panel(EXP5, 30, 40, 256, FIT_EXP5)]


def figure8() -> list[Panel]:
    return [_eps_sweep(EXP5, 30, list(range(5)), list(range(2, 10)), 113, "main")]


def figure9() -> list[Panel]:
    return _orders(EXP5, 60, 130, 320, FIT_EXP5, range(1, 8))


def figure10() -> list[Panel]:
    bits, M, n_top = 192, 30, 40
    t = _table(TRINOMIAL, M, n_top, bits)
    rows = []
    with workprec(bits):
        for n in range(0, n_top + 1, 2):
            m = n // 2
            # (m - 1)^(-3/2) |C1 C3 - C2^2/4|^(m - 1) with C1 = C2 = C3 = 1
            ref = mid(arb(m - 1) ** arb(-1.5) * (arb(3) / 4) ** (m - 1)) if m >= 2 else None
            rows.append([n, max_abs(t.dS[n]), max_abs(t.anti_at_nodes(n)), ref])
    right = Panel("right", ["n", "norm_dS", "norm_anti", "asymptotic_rhs"], rows, bits, _cfg(TRINOMIAL, M=M))
    return [_solution_panel(TRINOMIAL, _pow2(9), 113, real_only=True), right]


def figure11() -> list[Panel]:
    return [
        _eps_sweep(TRINOMIAL, 30, list(range(7)), list(range(2, 10)), 113, "left"),
        _n_sweep(TRINOMIAL, 30, 20, [1, 3, 5, 7], 113, None),
    ]


BUILDERS: dict[int, Callable[[], list[Panel]]] = {
    2: figure2,
    3: figure3,
    4: figure4,
    5: figure5,
    6: figure6,
    7: figure7,
    8: figure8,
    9: figure9,
    10: figure10,
    11: figure11,
}


def build_figure(fid: int) -> list[Panel]:
    return BUILDERS[fid]()
