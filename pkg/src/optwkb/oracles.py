"""Reference solutions used to measure WKB errors.

Closed forms are provided for the three model problems

    a(x) = x on [1, 2]            (Airy functions),
    a(x) = exp(5x) on [0, 1]      (Bessel functions of order 0 and 1),
    a(x) = (1+x+x^2)^-2 on [0, 1] (elementary closed form),

together with an independent Taylor-series ODE integrator and the exact
phase functions of the first two problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

from flint import acb, arb

from . import expr as ex
from .cheb import Grid
from .numerics import (
    Number,
    NumericsError,
    Precision,
    as_precision,
    mid,
    to_complex,
    to_real,
    workprec,
)

I = acb(0, 1)
DEFAULT_CEILING = 1 << 16


class PrecisionCeiling(NumericsError):
    """Precision escalation would exceed the configured ceiling."""


class StiffnessError(NumericsError):
    """The Taylor integrator's step size underflowed."""


def _escalate(bits: int, extra: int, ceiling: int) -> int:
    wp = bits + extra
    if wp > ceiling:
        raise PrecisionCeiling(f"needs {wp} bits, ceiling is {ceiling}")
    return wp


def _mag_bits(x: arb) -> float:
    a = abs(x).mid()
    if a == 0:
        return -math.inf
    man, e = a.man_exp()
    return math.log2(int(man)) + int(e)


# -- Airy functions -------------------------------------------------------


def airy_pair(
    y: Number, p: Union[Precision, int, None] = None, ceiling: int = DEFAULT_CEILING
) -> tuple[arb, arb, arb, arb]:
    """``(Ai(y), Bi(y), Ai'(y), Bi'(y))`` for real ``y`` from the Maclaurin series."""
    prec = as_precision(p)
    with workprec(prec):
        yy = mid(to_real(y))
    ay = abs(float(yy.mid()))
    if ay > 1e3:
        raise ValueError("airy_pair supports |y| <= 1000")
    wp = _escalate(prec.bits, math.ceil(0.97 * ay**1.5 / math.log(2)) + 64, ceiling)
    with workprec(wp):
        y3 = yy**3
        c1 = arb(3) ** (arb(-2) / 3) / arb.gamma(arb(2) / 3)
        c2 = arb(3) ** (arb(-1) / 3) / arb.gamma(arb(1) / 3)
        eps = arb(2) ** (-wp)
        # f = sum t_k, g = sum u_k, and their derivatives fp, gp
        f = t = arb(1)
        g = u = yy
        fp = tp = yy * yy / 2
        gp = up = arb(1)
        k = 0
        while True:
            t = t * y3 / ((3 * k + 2) * (3 * k + 3))
            u = u * y3 / ((3 * k + 3) * (3 * k + 4))
            if k >= 1:
                tp = tp * y3 / ((3 * k) * (3 * k + 2))
            up = up * y3 / ((3 * k + 1) * (3 * k + 3))
            f += t
            g += u
            if k >= 1:
                fp += tp
            gp += up
            k += 1
            big = max(abs(t).mid(), abs(u).mid(), abs(tp).mid(), abs(up).mid())
            if 9 * k * k > abs(y3).mid() + 1 and big <= eps:
                break
        s3 = arb(3).sqrt()
        ai = c1 * f - c2 * g
        bi = s3 * (c1 * f + c2 * g)
        aip = c1 * fp - c2 * gp
        bip = s3 * (c1 * fp + c2 * gp)
    with workprec(prec):
        return tuple(mid(+v) for v in (ai, bi, aip, bip))  # type: ignore[return-value]


# -- Bessel functions of order 0 and 1 --------------------------------------


def _bessel_series(x: arb, bits: int, ceiling: int) -> tuple[arb, arb, arb, arb]:
    wp = _escalate(bits, math.ceil(float(x.mid()) * math.log2(math.e)) + 64, ceiling)
    with workprec(wp):
        h = x / 2
        q = -(h * h)
        eps = arb(2) ** (-wp)
        gamma = arb.const_euler()
        # J0 = sum q^k/(k!)^2, J1 = h sum q^k/(k!(k+1)!)
        t0 = arb(1)
        t1 = arb(1)
        J0 = arb(1)
        J1s = arb(1)
        H = arb(0)
        Y0s = arb(0)
        # psi(1) + psi(2) = 1 - 2 gamma
        Y1s = 1 - 2 * gamma
        k = 0
        while True:
            k += 1
            t0 = t0 * q / (k * k)
            t1 = t1 * q / (k * (k + 1))
            H = H + arb(1) / k
            J0 += t0
            J1s += t1
            Y0s += H * t0
            # psi(k+1) + psi(k+2) = H_k + H_{k+1} - 2 gamma
            Y1s += (H + H + arb(1) / (k + 1) - 2 * gamma) * t1
            if k * k > abs(q).mid() and max(abs(t0).mid(), abs(t1).mid()) * (H + 1).mid() <= eps:
                break
        pi = arb.pi()
        lg = (h).log()
        J1 = h * J1s
        Y0 = 2 / pi * ((lg + gamma) * J0 - Y0s)
        Y1 = -2 / (pi * x) + 2 / pi * lg * J1 - h / pi * Y1s
        return J0, J1, Y0, Y1


def _bessel_hankel(x: arb, bits: int) -> tuple[arb, arb, arb, arb] | None:
    """Hankel expansion; ``None`` when the smallest term does not reach the target."""
    wp = bits + 32
    with workprec(wp):
        target = arb(2) ** (-bits - 8)
        out = []
        for nu in (0, 1):
            mu = 4 * nu * nu
            P = arb(1)
            Q = arb(0)
            a = arb(1)
            xp = arb(1)
            k = 0
            last = math.inf
            ok = False
            while k < 100000:
                k += 1
                a = a * (mu - (2 * k - 1) ** 2) / (8 * k)
                xp = xp * x
                term = a / xp
                mag = abs(term).mid()
                if mag > last:
                    break
                last = mag
                sgn = -1 if (k // 2) % 2 else 1
                if k % 2 == 0:
                    P += sgn * term
                else:
                    Q += sgn * term
                if mag <= target:
                    ok = True
                    break
            if not ok:
                return None
            w = x - (2 * nu + 1) * arb.pi() / 4
            amp = (2 / (arb.pi() * x)).sqrt()
            c, s = w.cos(), w.sin()
            out.append((amp * (P * c - Q * s), amp * (P * s + Q * c)))
        (J0, Y0), (J1, Y1) = out
        return J0, J1, Y0, Y1


def bessel_all(
    x: Number, p: Union[Precision, int, None] = None, ceiling: int = DEFAULT_CEILING
) -> tuple[arb, arb, arb, arb]:
    """``(J0(x), J1(x), Y0(x), Y1(x))`` for ``0 < x <= 1e4``."""
    prec = as_precision(p)
    with workprec(prec):
        xx = mid(to_real(x))
    if not xx > 0 or xx > 10**4:
        raise ValueError("bessel functions need 0 < x <= 1e4")
    vals = None
    if float(xx.mid()) > 40:
        vals = _bessel_hankel(xx, prec.bits)
    if vals is None:
        vals = _bessel_series(xx, prec.bits, ceiling)
    with workprec(prec):
        return tuple(mid(+v) for v in vals)  # type: ignore[return-value]


def bessel01(
    kind: str, order: int, x: Number, p: Union[Precision, int, None] = None, ceiling: int = DEFAULT_CEILING
) -> arb:
    """One of J0, J1, Y0, Y1 at a real point; ``J0(0) = 1`` and ``J1(0) = 0``."""
    if kind not in ("J", "Y") or order not in (0, 1):
        raise ValueError("kind must be 'J' or 'Y' and order 0 or 1")
    prec = as_precision(p)
    with workprec(prec):
        xx = to_real(x)
    if xx == 0 and kind == "J":
        return arb(1) if order == 0 else arb(0)
    J0, J1, Y0, Y1 = bessel_all(xx, prec, ceiling)
    return {("J", 0): J0, ("J", 1): J1, ("Y", 0): Y0, ("Y", 1): Y1}[(kind, order)]


# -- reference solutions ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    """Callable ``x -> (phi(x), eps phi'(x))`` on ``interval``."""

    kind: str
    eps: arb
    interval: tuple[arb, arb]
    bits: int
    accuracy: float
    _fn: Callable[[arb], tuple[acb, acb]] = field(repr=False)
    phi0: acb | None = None
    phi1: acb | None = None

    def evaluate(self, x: Number) -> tuple[acb, acb]:
        with workprec(self.bits):
            xx = mid(to_real(x))
        return self._fn(xx)

    def evaluate_many(self, xs: Sequence[Number]) -> list[tuple[acb, acb]]:
        return [self.evaluate(x) for x in xs]


def _real_eps(eps: Number, bits: int) -> arb:
    with workprec(bits):
        e = mid(to_real(eps))
    if not e > 0:
        raise ValueError("eps must be positive")
    return e


def airy_initial_data(eps: Number, p: Union[Precision, int, None] = None) -> tuple[acb, acb]:
    """``(phi(1), eps phi'(1))`` of ``Ai(-x eps^(-2/3)) + i Bi(-x eps^(-2/3))``."""
    sol = airy_solution(eps, p)
    return sol.evaluate(1)


def airy_solution(
    eps: Number, p: Union[Precision, int, None] = None, ceiling: int = DEFAULT_CEILING
) -> ReferenceSolution:
    prec = as_precision(p)
    e = _real_eps(eps, prec.bits)
    with workprec(prec.bits + 32):
        s = e ** (arb(-2) / 3)
        e13 = e ** (arb(1) / 3)

    def fn(x: arb) -> tuple[acb, acb]:
        with workprec(prec.bits + 32):
            y = -x * s
        ai, bi, aip, bip = airy_pair(y, prec.bits + 32, ceiling)
        with workprec(prec):
            phi = acb(ai, bi)
            dphi = -e13 * acb(aip, bip)
            return mid(phi), mid(dphi)

    sol = ReferenceSolution("airy", e, (arb(1), arb(2)), prec.bits, 2.0 ** (-prec.bits + 40), fn)
    p0, p1 = fn(arb(1))
    return ReferenceSolution("airy", e, (arb(1), arb(2)), prec.bits, sol.accuracy, fn, p0, p1)


def bessel_solution(
    eps: Number, p: Union[Precision, int, None] = None, ceiling: int = DEFAULT_CEILING
) -> ReferenceSolution:
    """Solution of ``eps^2 phi'' + exp(5x) phi = 0`` with ``phi(0) = 1``, ``eps phi'(0) = 0``."""
    prec = as_precision(p)
    wp = prec.bits + 32
    e = _real_eps(eps, prec.bits)
    with workprec(wp):
        z0 = 2 / (5 * e)
    J0a, J1a, Y0a, Y1a = bessel_all(z0, wp, ceiling)
    with workprec(wp):
        W = J0a * Y1a - J1a * Y0a

    def fn(x: arb) -> tuple[acb, acb]:
        with workprec(wp):
            z = z0 * (5 * x / 2).exp()
        J0, J1, Y0, Y1 = bessel_all(z, wp, ceiling)
        with workprec(wp):
            phi = (J0 * Y1a - Y0 * J1a) / W
            dphi = e * (5 * z / 2) * (Y1 * J1a - J1 * Y1a) / W
        with workprec(prec):
            return mid(acb(phi)), mid(acb(dphi))

    return ReferenceSolution(
        "bessel_e5x", e, (arb(0), arb(1)), prec.bits, 2.0 ** (-prec.bits + 40), fn, acb(1), acb(0)
    )


def trinomial_exact(
    x: Number,
    eps: Number,
    p: Union[Precision, int, None] = None,
    phi0: Number = 1,
    phi1: Number = 1,
) -> tuple[acb, acb]:
    """Closed-form solution for ``a = (1+x+x^2)^-2`` with the given initial data at 0.

    ``phi = A (c1 sin(g t) + c2 cos(g t))`` with ``A = sqrt(1+x+x^2)``,
    ``t = atan((2x+1)/sqrt 3) - pi/6`` and ``g = sqrt(3 eps^2 + 4)/(sqrt 3 eps)``.
    """
    prec = as_precision(p)
    wp = prec.bits + 16
    with workprec(wp):
        xx = to_real(x)
        e = to_real(eps)
        f0, f1 = to_complex(phi0), to_complex(phi1)
        s3 = arb(3).sqrt()
        g = (3 * e * e + 4).sqrt() / (s3 * e)
        c2 = f0
        c1 = (2 * f1 / e - f0) / (s3 * g)
        q = 1 + xx + xx * xx
        A = q.sqrt()
        dA = (1 + 2 * xx) / (2 * A)
        t = ((2 * xx + 1) / s3).atan() - arb.pi() / 6
        dt = s3 / (2 * q)
        sn, cs = (g * t).sin(), (g * t).cos()
        phi = A * (c1 * sn + c2 * cs)
        dphi = dA * (c1 * sn + c2 * cs) + A * g * dt * (c1 * cs - c2 * sn)
    with workprec(prec):
        return mid(+phi), mid(e * dphi)


def trinomial_solution(
    eps: Number, p: Union[Precision, int, None] = None, phi0: Number = 1, phi1: Number = 1
) -> ReferenceSolution:
    prec = as_precision(p)
    e = _real_eps(eps, prec.bits)
    with workprec(prec):
        f0, f1 = mid(to_complex(phi0)), mid(to_complex(phi1))

    def fn(x: arb) -> tuple[acb, acb]:
        return trinomial_exact(x, e, prec, f0, f1)

    return ReferenceSolution(
        "closed_form_trinomial", e, (arb(0), arb(1)), prec.bits, 2.0 ** (-prec.bits + 40), fn, f0, f1
    )


# -- Taylor-series integrator ---------------------------------------------


@dataclass(frozen=True, eq=False)
class _Step:
    x0: arb
    h: arb
    coeffs: tuple[acb, ...]


def taylor_integrate(
    a: Union[ex.Expr, str],
    interval: tuple[Number, Number],
    eps: Number,
    phi0: Number,
    phi1: Number,
    order: int = 48,
    safety: float = 0.5,
    p: Union[Precision, int, None] = None,
) -> ReferenceSolution:
    """Integrate ``eps^2 phi'' + a phi = 0`` from ``xi`` to ``eta`` by Taylor steps.

    At each step ``phi``'s coefficients follow from
    ``c_{k+2} = -(a phi)_k / (eps^2 (k+1)(k+2))``.  The step is
    ``h = 2 safety rho tol^(1/K)`` where ``rho`` is the root-test radius of
    the last two coefficients, so the truncated tail stays near ``tol``.
    """
    if order < 10:
        raise ValueError("order must be >= 10")
    if isinstance(a, str):
        a = ex.parse(a)
    prec = as_precision(p)
    wp = prec.bits + 32
    K = order
    with workprec(wp):
        xi, eta = mid(to_real(interval[0])), mid(to_real(interval[1]))
        if not xi < eta:
            raise ValueError("interval needs xi < eta")
        e = mid(to_real(eps))
        if not e > 0:
            raise ValueError("eps must be positive")
        e2 = e * e
        f0 = mid(to_complex(phi0))
        d0 = mid(to_complex(phi1) / e)
        tol = arb(2) ** (-prec.bits - 8)
        root = float(tol.mid()) ** (1.0 / K) if prec.bits < 900 else 2.0 ** (-(prec.bits + 8) / K)
        hmin = (eta - xi) * arb(2) ** (-60)
        steps: list[_Step] = []
        x = xi
        phi, dphi = f0, d0
        err = arb(0)
        while x < eta:
            aj = ex.eval_jet(a, x, K, wp).coeffs
            c = [phi, dphi]
            for k in range(K - 1):
                acc = acb(0)
                for j in range(k + 1):
                    acc += aj[j] * c[k - j]
                c.append(mid(-acc / (e2 * (k + 1) * (k + 2))))
            scale = max(abs(c[0]).mid(), (abs(c[1]) * e).mid(), arb(2) ** (-wp))
            rho = None
            for k in (K - 1, K):
                m = abs(c[k]).mid()
                if m > 0:
                    r = float(((scale / m).log() / k).exp().mid())
                    rho = r if rho is None else min(rho, r)
            h = arb(2 * safety * root * rho) if rho is not None else eta - x
            if h > eta - x:
                h = eta - x
            if h < hmin:
                raise StiffnessError(f"step size underflow at x = {x.mid()}")
            # error estimate from the last retained term
            err += abs(c[K]).mid() * h**K
            steps.append(_Step(x, h, tuple(c)))
            phi, dphi = _horner(c, h)
            x = mid(x + h)
            if eta - x < hmin:
                x = eta
        acc_est = float(err.mid()) if err.mid() > 0 else 0.0

    step_x = [s.x0 for s in steps]

    def fn(xq: arb) -> tuple[acb, acb]:
        if xq < xi or xq > eta:
            raise ValueError("point outside the integration interval")
        lo, hi = 0, len(steps) - 1
        while lo < hi:
            m = (lo + hi + 1) // 2
            if step_x[m] <= xq:
                lo = m
            else:
                hi = m - 1
        st = steps[lo]
        with workprec(wp):
            v, dv = _horner(st.coeffs, xq - st.x0)
        with workprec(prec):
            return mid(+v), mid(e * dv)

    return ReferenceSolution("taylor_ode", e, (xi, eta), prec.bits, acc_est, fn, f0, mid(d0 * e))


def _horner(c: Sequence[acb], t: arb) -> tuple[acb, acb]:
    v = acb(0)
    dv = acb(0)
    n = len(c) - 1
    for k in range(n, -1, -1):
        v = v * t + c[k]
        if k >= 1:
            dv = dv * t + k * c[k]
    return mid(v), mid(dv)


# -- Catalan closed form for (C1 + C2 x + C3 x^2)^-2 ------------------------


def catalan_numbers(count: int) -> list[int]:
    """``a_1, ..., a_count`` with ``a_1 = 1`` and ``a_{n+1} = sum_j a_j a_{n+1-j}``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    a = [0, 1]
    for n in range(1, count):
        a.append(sum(a[j] * a[n + 1 - j] for j in range(1, n + 1)))
    return a[1 : count + 1]


def catalan_ratio(C1: Number, C2: Number, C3: Number) -> Fraction | float:
    """``S2'/S0' = C1 C3 / 2 - C2^2 / 8``."""
    vals = [Fraction(c) if isinstance(c, (int, Fraction, str)) else c for c in (C1, C2, C3)]
    return vals[0] * vals[2] / 2 - vals[1] ** 2 / 8


def catalan_s2n(
    C1: Number, C2: Number, C3: Number, g: Grid, n: int, p: Union[Precision, int, None] = None
) -> list[acb]:
    """Node values of ``S2n' = S2' (-S2'/(2 S0'))^(n-1) a_n`` on ``g``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    prec = as_precision(p)
    an = catalan_numbers(n)[-1]
    with workprec(prec):
        c1, c2, c3 = (to_real(c) for c in (C1, C2, C3))
        kappa = c1 * c3 / 2 - c2 * c2 / 8
        out = []
        for x in g.nodes:
            q = c1 + c2 * x + c3 * x * x
            if q == 0 or q.contains(0):
                raise ex.EvalDomain("pole of a on the grid", ex.X)
            s0 = I / abs(q)
            s2 = kappa * s0
            out.append(mid(s2 * (-kappa / 2) ** (n - 1) * an))
        return out


# -- exact phase functions -------------------------------------------------


def airy_phase_coefficients(count: int, p: Union[Precision, int, None] = None) -> list[acb]:
    """``c_n`` with ``Sn' = c_n x^((1-3n)/2)`` for ``a = x``."""
    prec = as_precision(p)
    with workprec(prec):
        c = [I]
        for n in range(1, count):
            s = acb(0)
            for j in range(1, n):
                s += c[j] * c[n - j]
            s += c[n - 1] * arb(4 - 3 * n) / 2
            c.append(mid(-s / (2 * I)))
        return c


def airy_phase_exact(n: int, x: Number, coeffs: Sequence[acb], p: Union[Precision, int, None] = None) -> acb:
    """``Sn(x) = integral from 1 to x of Sn'`` for ``a = x``."""
    prec = as_precision(p)
    with workprec(prec):
        xx = to_real(x)
        if n == 1:
            return mid(coeffs[1] * xx.log())
        q = arb(3 - 3 * n) / 2
        return mid(coeffs[n] * (xx**q - 1) / q)


def exp5_phase_coefficients(count: int, p: Union[Precision, int, None] = None) -> list[acb]:
    """``c_n`` with ``Sn' = c_n exp(5(1-n)x/2)`` (``n >= 1``) for ``a = exp(5x)``."""
    prec = as_precision(p)
    with workprec(prec):
        lam = [arb(5) / 2] + [arb(5 * (1 - n)) / 2 for n in range(1, count)]
        c = [I]
        for n in range(1, count):
            s = acb(0)
            for j in range(1, n):
                s += c[j] * c[n - j]
            s += c[n - 1] * lam[n - 1]
            c.append(mid(-s / (2 * I)))
        return c


def exp5_phase_exact(n: int, x: Number, coeffs: Sequence[acb], p: Union[Precision, int, None] = None) -> acb:
    prec = as_precision(p)
    with workprec(prec):
        xx = to_real(x)
        lam = arb(5) / 2 if n == 0 else arb(5 * (1 - n)) / 2
        if n == 1:
            return mid(coeffs[1] * xx)
        return mid(coeffs[n] * ((lam * xx).exp() - 1) / lam)


def plane_wave_solution(
    a_value: Number,
    interval: tuple[Number, Number],
    eps: Number,
    phi0: Number,
    phi1: Number,
    p: Union[Precision, int, None] = None,
) -> ReferenceSolution:
    """Exact solution for constant ``a > 0``: ``phi0 cos(k t) + phi1/sqrt(a) sin(k t)``, ``k = sqrt(a)/eps``."""
    prec = as_precision(p)
    e = _real_eps(eps, prec.bits)
    wp = prec.bits + 32
    with workprec(wp):
        av = to_real(a_value)
        if not av > 0:
            raise ValueError("a must be positive")
        xi, eta = mid(to_real(interval[0])), mid(to_real(interval[1]))
        if not xi < eta:
            raise ValueError("interval needs xi < eta")
        r = av.sqrt()
        k = r / e
        f0, f1 = mid(to_complex(phi0)), mid(to_complex(phi1))

    def fn(x: arb) -> tuple[acb, acb]:
        with workprec(wp):
            s, c = (k * (x - xi)).sin_cos()
            v = f0 * c + f1 / r * s
            dv = -f0 * r * s + f1 * c
        with workprec(prec):
            return mid(+v), mid(+dv)

    return ReferenceSolution("plane_wave", e, (xi, eta), prec.bits, 2.0 ** (-prec.bits + 8), fn, f0, f1)
