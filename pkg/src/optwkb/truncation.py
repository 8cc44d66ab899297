"""Analyticity constants, explicit error bounds and truncation-order selection.

Four truncation orders are reported for a given ``eps``:

* ``N_opt``:      argmin of the measured L-infinity error (needs a reference);
* ``N_hat_opt``:  argmin of the explicit bound with ``C = 1``;
* ``N_heu``:      argmin of ``eps^n max|S~_{n+1}|`` over the grid nodes;
* ``N_hat_heu``:  ``round(1/(e K2 eps) - 1)`` clamped to ``[0, N_max]``.

Ties resolve to the smallest order.  Bounds are evaluated in log space;
a bound whose natural log exceeds :data:`LOG_OVERFLOW` is reported as ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from flint import acb, arb

from . import expr as ex
from .numerics import (
    Number,
    Precision,
    as_precision,
    log2_abs,
    max_abs,
    mid,
    to_complex,
    to_real,
    workprec,
)
from .wkb import PhaseTable, make_solution, sample_terms

LOG_OVERFLOW = 1e9
_BOUND_BITS = 64


class BadFit(ValueError):
    pass


# -- K2 from the stadium neighbourhood -------------------------------------


@dataclass(frozen=True)
class KEstimate:
    K2: float
    delta_opt: float
    sup_S0: float
    boundary_samples: int
    interval: tuple[float, float]
    delta_max: float = 1.0


def stadium_points(xi: float, eta: float, delta: float, samples: int) -> list[complex]:
    """Points on the boundary of ``{z : dist(z, [xi, eta]) = delta}``.

    Spacing is proportional to arc length; the four junctions and the two
    extreme points on the real axis are always included.
    """
    L = eta - xi
    total = 2 * L + 2 * math.pi * delta
    n_seg = max(2, int(round(samples * L / total)))
    n_arc = max(3, (samples - 2 * n_seg) // 2)
    pts: list[complex] = []
    for j in range(n_seg + 1):
        x = xi + L * j / n_seg
        pts.append(complex(x, delta))
        pts.append(complex(x, -delta))
    for j in range(n_arc + 1):
        th = math.pi / 2 + math.pi * j / n_arc
        pts.append(complex(xi + delta * math.cos(th), delta * math.sin(th)))
        pts.append(complex(eta - delta * math.cos(th), delta * math.sin(th)))
    pts.append(complex(xi - delta, 0.0))
    pts.append(complex(eta + delta, 0.0))
    return pts


def _sups(a: ex.Expr, pts: Sequence[complex], bits: int) -> tuple[float, float]:
    """``(sup |a|^-1, sup |a|^(1/2))`` over ``pts``."""
    inv = 0.0
    root = 0.0
    with workprec(bits):
        for z in pts:
            v = ex.eval_complex(a, acb(z.real, z.imag), bits)
            m = float(abs(v).mid())
            if m == 0.0:
                raise ex.EvalDomain("a vanishes on the boundary", a)
            inv = max(inv, 1.0 / m)
            root = max(root, math.sqrt(m))
    return inv, root


def k_constant(
    a: Union[ex.Expr, str],
    interval: tuple[Number, Number],
    samples: int = 2048,
    p: Union[Precision, int, None] = None,
    scan: int = 64,
    tol: float = 1e-4,
    delta_min: float = 1e-3,
) -> KEstimate:
    """Minimise ``e/(2e-1) sup|a|^-1 sup|a|^(1/2) / delta`` over ``0 < delta <= 1``.

    The sups are taken over sampled boundaries of stadium neighbourhoods of
    the interval.  A log-spaced scan locates the minimum, golden-section
    search refines it to ``tol``.  Deltas at which the evaluation meets a pole
    or a branch cut are excluded, and the largest usable one is reported.
    """
    if isinstance(a, str):
        a = ex.parse(a)
    bits = as_precision(p).bits
    xi, eta = float(to_real(interval[0]).mid()), float(to_real(interval[1]).mid())
    if not xi < eta:
        raise ValueError("interval needs xi < eta")
    pref = math.e / (2 * math.e - 1)
    cache: dict[float, tuple[float, float]] = {}

    def objective(d: float) -> float:
        if d not in cache:
            try:
                inv, root = _sups(a, stadium_points(xi, eta, d, samples), bits)
                cache[d] = (pref * inv * root / d, root)
            except (ex.EvalDomain, ZeroDivisionError):
                cache[d] = (math.inf, math.inf)
        return cache[d][0]

    deltas = list(np.logspace(math.log10(delta_min), 0.0, scan))
    deltas[-1] = 1.0
    vals = []
    delta_max = deltas[0]
    for d in deltas:
        v = objective(d)
        if not math.isfinite(v):
            break
        vals.append(v)
        delta_max = d
    if not vals:
        raise ex.EvalDomain("no usable neighbourhood", a)
    i = int(np.argmin(vals))
    lo = deltas[max(i - 1, 0)]
    hi = deltas[min(i + 1, len(vals) - 1)]
    g = (math.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    while hi - lo > tol:
        if objective(c) <= objective(d):
            hi, d = d, c
            c = hi - g * (hi - lo)
        else:
            lo, c = c, d
            d = lo + g * (hi - lo)
    cands = [lo, hi, (lo + hi) / 2, deltas[i]]
    best = min(cands, key=lambda t: (objective(t), -t))
    return KEstimate(
        K2=float(objective(best)),
        delta_opt=float(best),
        sup_S0=float(cache[best][1]),
        boundary_samples=samples,
        interval=(xi, eta),
        delta_max=float(delta_max),
    )


def fit_k2(table: PhaseTable, n_min: int = 1, n_max: Optional[int] = None) -> tuple[float, float]:
    """Least-squares fit of ``ln(max|Sn'| / n^n) = ln s + n ln K2``; returns ``(K2, s)``."""
    top = table.n_max + 1 if n_max is None else n_max
    ns, ys = [], []
    for n in range(max(n_min, 1), top + 1):
        m = max_abs(table.dS[n])
        if m == 0:
            continue
        ns.append(n)
        ys.append(log2_abs(m) * math.log(2) - n * math.log(n))
    if len(ns) < 2:
        raise BadFit("need at least two nonzero orders")
    A = np.vstack([np.ones(len(ns)), np.array(ns, dtype=float)]).T
    (c0, c1), *_ = np.linalg.lstsq(A, np.array(ys), rcond=None)
    return math.exp(c1), math.exp(c0)


# -- explicit bounds -------------------------------------------------------


def _pow_nn(x: arb, n: int) -> arb:
    """``(x n)^n`` with ``0^0 = 1``."""
    if n == 0:
        return arb(1)
    return (x * n) ** n


def _log(v: arb) -> float:
    if v == 0:
        return -math.inf
    return log2_abs(v) * math.log(2)


def _bound_parts(
    K2: Number, sup_S0: Number, interval: tuple[Number, Number], phi0: Number, phi1: Number, eps: Number, N: int
) -> tuple[float, float, float]:
    """Natural logs of the amplitude factor, the exponential factor and the order factor."""
    if N < 0:
        raise ValueError("N must be >= 0")
    with workprec(_BOUND_BITS):
        k, s, e = to_real(K2), to_real(sup_S0), to_real(eps)
        xi, eta = to_real(interval[0]), to_real(interval[1])
        f0, f1 = abs(to_complex(phi0)), abs(to_complex(phi1))
        ek = e * k
        u = [_pow_nn(ek, n) for n in range(N + 2)]
        amp = s * s * (f0 * s * sum(u[: N + 1], arb(0)) + f1)
        expo = arb(0)
        for n in range((N - 1) // 2 + 1) if N >= 1 else ():
            expo += e ** (2 * n) * k ** (2 * n + 1) * (2 * n + 1) ** (2 * n + 1)
        expo = (eta - xi) * s * expo
        # eps^N K2^(N+1) (N+1)^(N+1) = u_{N+1} / eps
        tail = u[N + 1] / e
        if N >= 2:
            prefix = [arb(0)]
            for v in u[: N + 1]:
                prefix.append(prefix[-1] + v)
            # sum_{n=2}^{N} u_n sum_{k=N+2-n}^{N} u_k / eps
            acc = arb(0)
            for n in range(2, N + 1):
                acc += u[n] * (prefix[N + 1] - prefix[N + 2 - n])
            tail += acc / e
        return _log(amp), float(expo.mid()), _log(tail)


def log_error_bound(
    K2: Number,
    sup_S0: Number,
    interval: tuple[Number, Number],
    phi0: Number,
    phi1: Number,
    eps: Number,
    N: int,
    C: Number = 1,
) -> float:
    """Natural log of :func:`error_bound`."""
    la, le, lt = _bound_parts(K2, sup_S0, interval, phi0, phi1, eps, N)
    return math.log(float(C)) + la + le + lt


def _from_log(lv: float) -> arb:
    if not math.isfinite(lv) and lv > 0 or lv > LOG_OVERFLOW:
        return arb("inf")
    if lv == -math.inf:
        return arb(0)
    with workprec(_BOUND_BITS):
        return mid(arb(lv).exp())


def error_bound(
    K2: Number,
    sup_S0: Number,
    interval: tuple[Number, Number],
    phi0: Number,
    phi1: Number,
    eps: Number,
    N: int,
    C: Number = 1,
) -> arb:
    """The three-factor a-priori bound on ``max|phi - phi_N|``; ``inf`` on overflow."""
    return _from_log(log_error_bound(K2, sup_S0, interval, phi0, phi1, eps, N, C))


def perturbed_bound(
    K2: Number,
    sup_S0: Number,
    interval: tuple[Number, Number],
    phi0: Number,
    phi1: Number,
    eps: Number,
    N: int,
    e: Sequence[Number],
    alpha: Number,
    beta: Number,
    C: Number = 1,
) -> arb:
    """Bound including quadrature errors ``e_n`` of the antiderivatives."""
    if len(e) < N + 1:
        raise ValueError("need quadrature errors e_0..e_N")
    la, le, lt = _bound_parts(K2, sup_S0, interval, phi0, phi1, eps, N)
    with workprec(_BOUND_BITS):
        eps_r = to_real(eps)
        en = [to_real(v) for v in e]
        if any(v < 0 for v in en):
            raise ValueError("quadrature errors must be non-negative")
        q = sum((eps_r ** (n - 1) * en[n] for n in range(N + 1)), arb(0))
        inner = sum((eps_r ** (2 * n) * en[2 * n + 1] for n in range((N - 1) // 2 + 1)), arb(0)) if N >= 1 else arb(0)
        w = abs(to_complex(alpha)) + abs(to_complex(beta))
        lq = _log(w * q) + float(inner.mid()) if q != 0 and w != 0 else -math.inf
    lb = math.log(float(C)) + la + lt
    m = max(lb, lq)
    if m == -math.inf:
        return arb(0)
    total = m + math.log1p(math.exp(min(lb, lq) - m)) if min(lb, lq) > -math.inf else m
    return _from_log(le + total)


# -- order selection --------------------------------------------------------


@dataclass(frozen=True)
class TruncationRow:
    N: int
    bound: arb
    log_bound: float
    true_error: Optional[arb]
    smallest_term: arb


@dataclass(frozen=True)
class TruncationReport:
    eps: arb
    rows: tuple[TruncationRow, ...]
    N_opt: Optional[int]
    N_hat_opt: int
    N_heu: int
    N_hat_heu: int
    eval_points: int = 0

    def errors(self) -> list[Optional[arb]]:
        return [r.true_error for r in self.rows]

    @property
    def optimal_error(self) -> Optional[arb]:
        if self.N_opt is None:
            return None
        return self.rows[self.N_opt].true_error


def argmin_first(values: Sequence[float]) -> int:
    """Index of the smallest value; the first one wins ties."""
    best = 0
    for i, v in enumerate(values):
        if v < values[best]:
            best = i
    return best


def dense_points(a: ex.Expr, interval: tuple[arb, arb], eps: Number, bits: int, per_wavelength: int = 8, cap: int = 100000, probes: int = 65) -> list[arb]:
    """Uniform points with at least ``per_wavelength`` per local wavelength ``2 pi eps / sqrt(a)``."""
    with workprec(bits):
        xi, eta = interval
        e = float(to_real(eps).mid())
        L = float((eta - xi).mid())
        amax = 0.0
        for j in range(probes):
            x = xi + (eta - xi) * j / (probes - 1)
            amax = max(amax, float(abs(ex.eval_complex(a, x, bits)).mid()))
        lam = 2 * math.pi * e / math.sqrt(amax)
        n = min(cap, max(2, math.ceil(per_wavelength * L / lam) + 1))
        pts = [mid(xi + (eta - xi) * j / (n - 1)) for j in range(n)]
        pts[0], pts[-1] = xi, eta
        return pts


def wkb_errors(
    t: PhaseTable,
    eps: Number,
    Ns: Sequence[int],
    phi0: Number,
    phi1: Number,
    xs: Sequence[arb],
    exact: Sequence[acb],
) -> dict[int, arb]:
    """``max_i |phi_N(x_i) - exact_i|`` for each ``N`` in ``Ns``."""
    top = max(Ns)
    ts = sample_terms(t, xs, top)
    out: dict[int, arb] = {}
    with workprec(t.bits):
        e = mid(to_real(eps))
        P = len(ts.xs)
        Ep = [acb(0)] * P
        Eo = [acb(0)] * P
        w = 1 / e
        wanted = set(Ns)
        for N in range(top + 1):
            row = ts.anti[N]
            if N % 2 == 0:
                Ep = [Ep[i] + w * row[i] for i in range(P)]
            else:
                Eo = [Eo[i] + w * row[i] for i in range(P)]
            w *= e
            if N not in wanted:
                continue
            s = make_solution(t, e, N, phi0, phi1)
            err = arb(0)
            for i in range(P):
                # '+' exponent is Ep + Eo, '-' exponent is -Ep + Eo
                o = Eo[i].exp()
                v = o * (s.alpha * (-Ep[i]).exp() + s.beta * Ep[i].exp())
                d = abs(v - exact[i]).mid()
                if d > err:
                    err = d
            out[N] = err
    return out


def select_orders(
    t: PhaseTable,
    eps: Number,
    k: Union[KEstimate, tuple[float, float]],
    N_max: int,
    oracle: Optional[object] = None,
    eval_points: Optional[int] = None,
    phi0: Optional[Number] = None,
    phi1: Optional[Number] = None,
    exact_values: Optional[tuple[Sequence[arb], Sequence[acb]]] = None,
) -> TruncationReport:
    """Tabulate bounds, smallest terms and (optionally) true errors for ``N = 0..N_max``."""
    if N_max > t.n_max:
        raise ValueError(f"N_max = {N_max} exceeds the table's n_max = {t.n_max}")
    K2, s0 = (k.K2, k.sup_S0) if isinstance(k, KEstimate) else k
    if phi0 is None or phi1 is None:
        if oracle is None or getattr(oracle, "phi0", None) is None:
            raise ValueError("initial data needed: pass phi0/phi1 or an oracle that carries them")
        phi0 = oracle.phi0 if phi0 is None else phi0  # type: ignore[union-attr]
        phi1 = oracle.phi1 if phi1 is None else phi1  # type: ignore[union-attr]
    with workprec(t.bits):
        e = mid(to_real(eps))
    interval = t.interval

    logs = [log_error_bound(K2, s0, interval, phi0, phi1, e, N) for N in range(N_max + 1)]
    smallest = []
    with workprec(t.bits):
        for n in range(N_max + 1):
            smallest.append(mid(e**n * max_abs(t.anti_at_nodes(n + 1))))

    errors: dict[int, arb] = {}
    n_pts = 0
    if exact_values is not None:
        xs, vals = exact_values
        errors = wkb_errors(t, e, range(N_max + 1), phi0, phi1, xs, vals)
        n_pts = len(xs)
    elif oracle is not None:
        if eval_points is None:
            xs = dense_points(t.a, interval, e, t.bits)
        else:
            with workprec(t.bits):
                xi, eta = interval
                xs = [mid(xi + (eta - xi) * j / (eval_points - 1)) for j in range(eval_points)]
                xs[0], xs[-1] = xi, eta
        vals = [oracle.evaluate(x)[0] for x in xs]  # type: ignore[union-attr]
        errors = wkb_errors(t, e, range(N_max + 1), phi0, phi1, xs, vals)
        n_pts = len(xs)

    rows = tuple(
        TruncationRow(N, _from_log(logs[N]), logs[N], errors.get(N), smallest[N]) for N in range(N_max + 1)
    )
    n_hat_heu = hat_heuristic_order(K2, e, N_max)
    n_heu = argmin_first([_log(v) for v in smallest])
    n_hat_opt = argmin_first(logs)
    n_opt = argmin_first([_log(errors[N]) for N in range(N_max + 1)]) if errors else None
    T = terminating_order(t)
    if T is not None:
        # higher orders add nothing, so every selector stops at T
        n_hat_heu, n_heu, n_hat_opt = min(n_hat_heu, T), min(n_heu, T), min(n_hat_opt, T)
        n_opt = None if n_opt is None else min(n_opt, T)
    return TruncationReport(e, rows, n_opt, n_hat_opt, n_heu, n_hat_heu, n_pts)


def terminating_order(t: PhaseTable, shift: int = 16) -> Optional[int]:
    """Last order with nonzero ``Sn'`` if all later stored orders vanish, else ``None``.

    Vanishing means ``max|Sn'| <= 2^(shift - bits) max|S0'|``; at least the two
    highest stored orders must vanish for the series to count as terminating.
    """
    with workprec(t.bits):
        ref = max_abs(t.dS[0]) * arb(2) ** (shift - t.bits)
        top = len(t.dS) - 1
        T = top
        while T >= 1 and max_abs(t.dS[T]) <= ref:
            T -= 1
    return T if T <= top - 2 else None


def hat_heuristic_order(K2: Number, eps: Number, N_max: int) -> int:
    """``round(1/(e K2 eps) - 1)`` clamped to ``[0, N_max]``."""
    with workprec(_BOUND_BITS):
        v = 1 / (arb.const_e() * to_real(K2) * to_real(eps)) - 1
        r = int(math.floor(float(v.mid()) + 0.5))
    return min(max(r, 0), N_max)


# -- exponential-rate fit ---------------------------------------------------


def fit_exp_rate(points: Sequence[tuple[Number, Number]]) -> tuple[float, float, float]:
    """Least-squares fit of ``ln err = ln C - r/eps``; returns ``(r, C, rms residual)``."""
    if len(points) < 3:
        raise BadFit("need at least three points")
    inv, logs = [], []
    for eps, err in points:
        with workprec(_BOUND_BITS):
            ev = to_real(eps)
            er = to_real(err) if not isinstance(err, acb) else abs(err)
        if not er > 0 or not ev > 0:
            raise BadFit("eps and errors must be positive")
        inv.append(1.0 / float(ev.mid()))
        logs.append(log2_abs(er) * math.log(2))
    x = np.array(inv)
    if np.ptp(x) == 0:
        raise BadFit("all eps values are equal")
    A = np.vstack([np.ones_like(x), -x]).T
    y = np.array(logs)
    (lnC, r), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([lnC, r])
    return float(r), math.exp(lnC), float(np.sqrt(np.mean(resid**2)))


def quadrature_errors(t: PhaseTable, exact: Callable[[int, arb], acb], n_top: int) -> list[arb]:
    """Node maxima of ``|S~n - Sn|`` against an exact antiderivative."""
    out = []
    with workprec(t.bits):
        for n in range(n_top + 1):
            approx = t.anti_at_nodes(n)
            err = arb(0)
            for x, v in zip(t.grid.nodes, approx):
                d = abs(v - to_complex(exact(n, x))).mid()
                if d > err:
                    err = d
            out.append(err)
    return out
