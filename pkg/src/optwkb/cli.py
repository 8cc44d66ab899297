"""Command-line front end: ``solve``, ``sweep``, ``truncation``, ``kconst`` and ``figure``.

Exit codes: 0 on success, 2 on a configuration error (the message names the
offending field), 3 on a numerical failure.  Tables are written as CSV with
``#``-prefixed header lines echoing the configuration, or as JSON carrying
the same records.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, TextIO, Union

from flint import acb, arb

from . import expr as ex
from . import oracles as orc
from . import truncation as tr
from .cheb import BadGrid, make_grid
from .numerics import NumericsError, fmt, max_abs, mid, to_real, workprec
from .wkb import (
    BACKENDS,
    PhaseTable,
    TurningPoint,
    eval_solution_many,
    make_solution,
    phase_table,
    residual_f,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

ORACLES = ("auto", "none", "airy", "bessel", "trinomial", "taylor", "plane-wave")
FORMATS = ("csv", "json")
FIGURES = tuple(range(2, 12))

# model problems with closed-form reference solutions
KNOWN = {
    "airy": ("x", (Fraction(1), Fraction(2))),
    "bessel": ("exp(5*x)", (Fraction(0), Fraction(1))),
    "trinomial": ("(1+x+x^2)^-2", (Fraction(0), Fraction(1))),
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# -- literal parsing --------------------------------------------------------

_POW2 = re.compile(r"^\s*2\s*\^\s*\(?\s*([+-]?\d+)\s*\)?\s*$")


def parse_real(text: str, field_name: str = "value") -> Fraction:
    """Exact value of ``0.03125``, ``1/32``, ``2^-5`` or ``1e-3``."""
    s = str(text).strip()
    m = _POW2.match(s)
    if m:
        return Fraction(2) ** int(m.group(1))
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(field_name, f"cannot read {text!r} as a real number") from None


def parse_eps_list(text: str) -> tuple[Fraction, ...]:
    """``2^-5``, ``0.03125``, comma lists, and ranges ``2^-4..2^-9`` of powers of two."""
    out: list[Fraction] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            raise ConfigError("eps", "empty entry")
        if ".." in part:
            lo, hi = (p.strip() for p in part.split("..", 1))
            m1, m2 = _POW2.match(lo), _POW2.match(hi)
            if not (m1 and m2):
                raise ConfigError("eps", "ranges must be written as 2^-a..2^-b")
            a, b = int(m1.group(1)), int(m2.group(1))
            step = 1 if b >= a else -1
            out.extend(Fraction(2) ** k for k in range(a, b + step, step))
        else:
            out.append(parse_real(part, "eps"))
    for e in out:
        if e <= 0:
            raise ConfigError("eps", "must be positive")
    return tuple(out)


def parse_int_list(text: str, field_name: str) -> tuple[int, ...]:
    """``3``, ``0,1,2`` or ``0..4``."""
    out: list[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = (int(p) for p in part.split("..", 1))
                step = 1 if hi >= lo else -1
                out.extend(range(lo, hi + step, step))
            else:
                out.append(int(part))
    except ValueError:
        raise ConfigError(field_name, f"cannot read {text!r} as integers") from None
    if not out:
        raise ConfigError(field_name, "empty")
    if any(v < 0 for v in out):
        raise ConfigError(field_name, "must be >= 0")
    return tuple(out)


def parse_complex(text: str, field_name: str) -> tuple[Fraction, Fraction]:
    """``1``, ``-0.5``, ``2i``, ``-i``, ``1+2i`` or ``1-2j``."""
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ConfigError(field_name, "empty")
    if s[-1] not in "ij":
        return parse_real(s, field_name), Fraction(0)
    body = s[:-1]
    cut = -1
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE^(":
            cut = k
            break
    re_part, im_part = (body[:cut], body[cut:]) if cut > 0 else ("0", body)
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return parse_real(re_part, field_name), parse_real(im_part, field_name)


# -- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    a_expr: str = ""
    a: Optional[ex.Expr] = None
    interval: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))
    eps: tuple[Fraction, ...] = (Fraction(1, 16),)
    N: tuple[int, ...] = (4,)
    N_max: int = 40
    M: int = 25
    bits: int = 113
    backend: str = "jet"
    phi0: str = ""
    phi1: str = ""
    oracle: str = "auto"
    fmt: str = "csv"
    out: str = "-"
    K2: Optional[Fraction] = None
    sup_S0: Optional[Fraction] = None
    samples: int = 2048
    points: Optional[int] = None
    figure: Optional[int] = None
    out_dir: str = "."
    echo: tuple[tuple[str, str], ...] = field(default=())

    @property
    def digits(self) -> int:
        return min(40, math.ceil(self.bits * math.log10(2)))


_FIELDS = {
    "a_expr", "interval", "eps", "N", "N_max", "M", "bits", "backend", "phi0", "phi1",
    "oracle", "format", "out", "K2", "sup_S0", "samples", "points", "out_dir",
}


def read_config_file(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as err:
        raise ConfigError("config", f"cannot read {path}: {err.strerror}") from None
    out: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        key = k.lstrip("-").replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError("config", f"line {lineno}: unknown key {k!r}")
        out[key] = v
    return out


def _canonical(text: str) -> ex.Expr:
    return ex.parse(text)


def _known_problem(a: ex.Expr, interval: tuple[Fraction, Fraction]) -> Optional[str]:
    for name, (src, iv) in KNOWN.items():
        if a is _canonical(src) and tuple(interval) == iv:
            return name
    return None


def build_config(command: str, raw: dict[str, Optional[str]]) -> RunConfig:
    """Validate every field before any computation."""
    vals: dict = {"command": command}
    echo: list[tuple[str, str]] = [("command", command)]

    def get(key: str) -> Optional[str]:
        v = raw.get(key)
        if v is not None:
            echo.append((key, str(v)))
        return v

    needs_problem = command in ("solve", "sweep", "truncation", "kconst")
    a_text = get("a_expr")
    iv_text = get("interval")
    if needs_problem:
        if not a_text:
            raise ConfigError("a_expr", "required (use --a-expr)")
        if not iv_text:
            raise ConfigError("interval", "required (use --interval xi,eta)")
        try:
            vals["a"] = ex.parse(a_text)
        except ex.ParseError as err:
            raise ConfigError("a_expr", str(err)) from None
        vals["a_expr"] = a_text
        parts = iv_text.split(",")
        if len(parts) != 2:
            raise ConfigError("interval", "expected two numbers xi,eta")
        xi, eta = (parse_real(p, "interval") for p in parts)
        if not xi < eta:
            raise ConfigError("interval", "needs xi < eta")
        vals["interval"] = (xi, eta)

    if (v := get("eps")) is not None:
        vals["eps"] = parse_eps_list(v)
    if (v := get("N")) is not None:
        vals["N"] = parse_int_list(v, "N")
    for key, lo in (("N_max", 0), ("M", 1), ("bits", 53), ("samples", 16), ("points", 2)):
        if (v := get(key)) is not None:
            try:
                n = int(v)
            except ValueError:
                raise ConfigError(key, f"expected an integer, got {v!r}") from None
            if n < lo:
                raise ConfigError(key, f"must be >= {lo}")
            vals[key] = n
    if (v := get("backend")) is not None:
        if v not in BACKENDS:
            raise ConfigError("backend", f"must be one of {', '.join(BACKENDS)}")
        vals["backend"] = v
    if (v := get("oracle")) is not None:
        if v not in ORACLES:
            raise ConfigError("oracle", f"must be one of {', '.join(ORACLES)}")
        vals["oracle"] = v
    if (v := get("format")) is not None:
        if v not in FORMATS:
            raise ConfigError("format", "must be csv or json")
        vals["fmt"] = v
    for key in ("out", "out_dir"):
        if (v := get(key)) is not None:
            vals[key] = v
    for key in ("K2", "sup_S0"):
        if (v := get(key)) is not None:
            x = parse_real(v, key)
            if x <= 0:
                raise ConfigError(key, "must be positive")
            vals[key] = x
    for key in ("phi0", "phi1"):
        if (v := get(key)) is not None:
            v = v.strip()
            if v not in ("airy-ic", "left-traveling"):
                parse_complex(v, key)
            vals[key] = v
    if (vals.get("K2") is None) != (vals.get("sup_S0") is None):
        raise ConfigError("K2", "give both --K2 and --sup-S0, or neither")
    if command == "solve" and len(vals.get("N", (4,))) != 1:
        raise ConfigError("N", "solve takes a single order")
    if command == "solve" and len(vals.get("eps", (1,))) != 1:
        raise ConfigError("eps", "solve takes a single eps")

    if needs_problem and command != "kconst":
        _check_oracle(vals)
    cfg = RunConfig(**vals, echo=tuple(echo))
    if command in ("solve", "sweep") and max(cfg.N) > 400:
        raise ConfigError("N", "orders above 400 are not supported")
    return cfg


def _check_oracle(vals: dict) -> None:
    a, iv = vals["a"], vals["interval"]
    name = vals.get("oracle", "auto")
    known = _known_problem(a, iv)
    if name == "auto":
        if known is not None:
            name = known
        elif a.is_const:
            name = "plane-wave"
        else:
            name = "none"
        vals["oracle"] = name
    if name in KNOWN and known != name:
        src, (xi, eta) = KNOWN[name]
        raise ConfigError("oracle", f"the {name} oracle needs --a-expr '{src}' on [{xi}, {eta}]")
    if name == "plane-wave" and not a.is_const:
        raise ConfigError("oracle", "plane-wave needs a constant a")
    if name == "plane-wave" and not a.value > 0:
        raise ConfigError("a_expr", "a must be positive")
    p0, p1 = vals.get("phi0", ""), vals.get("phi1", "")
    if name == "airy" and (p0 or p1) and (p0, p1) != ("airy-ic", "airy-ic"):
        raise ConfigError("phi0", "the airy oracle fixes the initial data (use airy-ic or omit)")
    if name == "bessel" and (p0 or p1):
        if not p0 or not p1 or parse_complex(p0, "phi0") != (1, 0) or parse_complex(p1, "phi1") != (0, 0):
            raise ConfigError("phi0", "the bessel oracle fixes phi0 = 1, phi1 = 0")


# -- numerical pipeline -----------------------------------------------------


def initial_data(cfg: RunConfig, eps: Fraction) -> tuple[acb, acb]:
    """Resolve ``phi0``/``phi1`` (literals or tokens) for one ``eps``."""
    defaults = {"airy": None, "bessel": ("1", "0"), "trinomial": ("1", "1")}
    p0, p1 = cfg.phi0, cfg.phi1
    if not p0 and not p1:
        if cfg.oracle == "airy":
            p0 = p1 = "airy-ic"
        else:
            p0, p1 = defaults.get(cfg.oracle) or ("1", "0")
    p0, p1 = p0 or "1", p1 or "0"
    out = []
    airy = None
    with workprec(cfg.bits):
        for which, tok in ((0, p0), (1, p1)):
            if tok == "airy-ic":
                if airy is None:
                    airy = orc.airy_initial_data(eps, cfg.bits)
                out.append(airy[which])
            elif tok == "left-traveling":
                if which == 0:
                    out.append(acb(1))
                else:
                    a0 = ex.eval_complex(cfg.a, to_real(cfg.interval[0]), cfg.bits)
                    out.append(mid(-acb(0, 1) * a0.sqrt()))
            else:
                re_, im_ = parse_complex(tok, f"phi{which}")
                out.append(acb(to_real(re_), to_real(im_)))
    return out[0], out[1]


def make_oracle(cfg: RunConfig, eps: Fraction, phi0: acb, phi1: acb) -> Optional[orc.ReferenceSolution]:
    if cfg.oracle == "airy":
        return orc.airy_solution(eps, cfg.bits)
    if cfg.oracle == "bessel":
        return orc.bessel_solution(eps, cfg.bits)
    if cfg.oracle == "trinomial":
        return orc.trinomial_solution(eps, cfg.bits, phi0, phi1)
    if cfg.oracle == "taylor":
        return orc.taylor_integrate(cfg.a, cfg.interval, eps, phi0, phi1, p=cfg.bits)
    if cfg.oracle == "plane-wave":
        return orc.plane_wave_solution(cfg.a.value, cfg.interval, eps, phi0, phi1, cfg.bits)
    return None


def build_table(cfg: RunConfig, n_max: int, M: Optional[int] = None) -> PhaseTable:
    g = make_grid(M or cfg.M, cfg.interval[0], cfg.interval[1], cfg.bits)
    return phase_table(cfg.a, g, n_max, backend=cfg.backend, p=cfg.bits)


def eval_points(cfg: RunConfig, t: PhaseTable, eps: Fraction) -> list[arb]:
    if cfg.points is None:
        return tr.dense_points(t.a, t.interval, eps, cfg.bits)
    with workprec(cfg.bits):
        xi, eta = t.interval
        n = cfg.points
        xs = [mid(xi + (eta - xi) * j / (n - 1)) for j in range(n)]
        xs[0], xs[-1] = xi, eta
        return xs


def k_values(cfg: RunConfig) -> tuple[float, float]:
    if cfg.K2 is not None:
        return float(cfg.K2), float(cfg.sup_S0)
    k = tr.k_constant(cfg.a, cfg.interval, samples=cfg.samples, p=min(cfg.bits, 113))
    return k.K2, k.sup_S0


def quadrature_estimates(cfg: RunConfig, t: PhaseTable, count: int = 4) -> list[arb]:
    """``e_n`` estimated against a run with doubled ``M``."""
    fine = build_table(cfg, max(count - 2, 0), 2 * t.grid.M)
    from .cheb import eval_many

    nodes = list(t.grid.nodes)
    out = []
    with workprec(cfg.bits):
        for n in range(count):
            coarse = t.anti_at_nodes(n)
            ref = eval_many([fine.anti[n]], nodes)[0]
            out.append(max_abs([u - v for u, v in zip(coarse, ref)]))
    return out


# -- output -----------------------------------------------------------------


Cell = Union[int, float, str, arb, acb, Fraction, None]


def format_cell(v: Cell, digits: int) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        with workprec(max(64, int(digits * 3.33) + 8)):
            return trim(fmt(to_real(v), digits))
    if isinstance(v, float):
        if not math.isfinite(v):
            return "inf"
        return repr(v)
    if isinstance(v, acb):
        return fmt(v, digits)
    if isinstance(v, arb):
        return trim(fmt(v, digits))
    return str(v)


def trim(text: str) -> str:
    """Drop trailing zeros of a decimal mantissa: ``0.2500`` -> ``0.25``."""
    mant, sep, exp = text.partition("e")
    if "." in mant:
        mant = mant.rstrip("0").rstrip(".")
    return mant + sep + exp


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list[Cell]]
    notes: list[str] = field(default_factory=list)


def write_tables(tables: Sequence[Table], cfg: RunConfig, target: str, stream: TextIO) -> list[str]:
    """Write each table to ``target`` (``-`` for the stream); extra tables get a suffix."""
    written = []
    for i, tab in enumerate(tables):
        text = render(tab, cfg)
        if target == "-":
            stream.write(text)
            continue
        path = Path(target)
        if i > 0:
            path = path.with_name(f"{path.stem}.{tab.name}{path.suffix or '.' + cfg.fmt}")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        written.append(str(path))
    return written


def render(tab: Table, cfg: RunConfig) -> str:
    header = [f"{k} = {v}" for k, v in cfg.echo] + [f"bits = {cfg.bits}"] + tab.notes
    cells = [[format_cell(v, cfg.digits) for v in row] for row in tab.rows]
    if cfg.fmt == "json":
        doc = {
            "table": tab.name,
            "header": header,
            "columns": tab.columns,
            "records": [dict(zip(tab.columns, r)) for r in cells],
        }
        return json.dumps(doc, indent=1) + "\n"
    lines = [f"# {h}" for h in header]
    lines.append(",".join(tab.columns))
    lines.extend(",".join(r) for r in cells)
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------


def cmd_solve(cfg: RunConfig, stream: TextIO) -> int:
    eps = cfg.eps[0]
    N = cfg.N[0]
    t = build_table(cfg, N)
    phi0, phi1 = initial_data(cfg, eps)
    sol = make_solution(t, eps, N, phi0, phi1)
    xs = eval_points(cfg, t, eps)
    vals = eval_solution_many(sol, xs)
    ref = make_oracle(cfg, eps, phi0, phi1)
    columns = ["x", "phi_re", "phi_im", "eps_dphi_re", "eps_dphi_im"]
    rows: list[list[Cell]] = []
    linf: Optional[arb] = None
    if ref is not None:
        columns.append("err_abs")
        linf = arb(0)
    for x, (p, dp) in zip(xs, vals):
        row: list[Cell] = [x, p.real, p.imag, dp.real, dp.imag]
        if ref is not None:
            with workprec(cfg.bits):
                d = abs(p - ref.evaluate(x)[0]).mid()
            linf = max(linf, d)  # type: ignore[type-var]
            row.append(d)
        rows.append(row)
    res = max_abs(residual_f(t, eps, N))
    summary = [f"residual_inf = {format_cell(res, cfg.digits)}"]
    if linf is not None:
        summary.insert(0, f"linf_error = {format_cell(linf, cfg.digits)}")
    tab = Table("solution", columns, rows, summary)
    write_tables([tab], cfg, cfg.out, stream)
    if cfg.out != "-":
        stream.write("\n".join(summary) + "\n")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, stream: TextIO) -> int:
    Ns = sorted(set(cfg.N))
    t = build_table(cfg, max(max(Ns), 2))
    K2, s0 = k_values(cfg)
    q = quadrature_estimates(cfg, t)
    rows: list[list[Cell]] = []
    for eps in cfg.eps:
        phi0, phi1 = initial_data(cfg, eps)
        ref = make_oracle(cfg, eps, phi0, phi1)
        errs: dict[int, arb] = {}
        if ref is not None:
            xs = eval_points(cfg, t, eps)
            vals = [ref.evaluate(x)[0] for x in xs]
            errs = tr.wkb_errors(t, eps, Ns, phi0, phi1, xs, vals)
        for N in Ns:
            with workprec(cfg.bits):
                small = mid(to_real(eps) ** N * max_abs(t.anti_at_nodes(N + 1)))
            bound = tr.error_bound(K2, s0, t.interval, phi0, phi1, eps, N)
            rows.append([eps, N, errs.get(N), bound, small, *q])
    notes = [f"K2 = {K2!r}", f"sup_S0 = {s0!r}", "bound_c1 uses C = 1 (argmin calibrated, values up to a constant)"]
    cols = ["eps", "N", "err_inf", "bound_c1", "smallest_term", "e0", "e1", "e2", "e3"]
    write_tables([Table("sweep", cols, rows, notes)], cfg, cfg.out, stream)
    return EXIT_OK


def cmd_truncation(cfg: RunConfig, stream: TextIO) -> int:
    t = build_table(cfg, cfg.N_max)
    K2, s0 = k_values(cfg)
    rows: list[list[Cell]] = []
    orders: list[list[Cell]] = []
    fit_pts = []
    for eps in cfg.eps:
        phi0, phi1 = initial_data(cfg, eps)
        ref = make_oracle(cfg, eps, phi0, phi1)
        rep = tr.select_orders(t, eps, (K2, s0), cfg.N_max, oracle=ref, eval_points=cfg.points, phi0=phi0, phi1=phi1)
        for r in rep.rows:
            rows.append([eps, r.N, r.bound, r.true_error, r.smallest_term])
        orders.append([eps, rep.N_opt, rep.N_hat_opt, rep.N_heu, rep.N_hat_heu, rep.optimal_error])
        if rep.optimal_error is not None and rep.optimal_error > 0:
            fit_pts.append((eps, rep.optimal_error))
    notes = [f"K2 = {K2!r}", f"sup_S0 = {s0!r}"]
    if len(fit_pts) >= 3:
        r, C, resid = tr.fit_exp_rate(fit_pts)
        notes += [f"fit_r = {r!r}", f"fit_C = {C!r}", f"fit_rms = {resid!r}"]
    tabs = [
        Table("report", ["eps", "N", "bound_c1", "err_inf", "smallest_term"], rows, notes),
        Table("orders", ["eps", "N_opt", "N_hat_opt", "N_heu", "N_hat_heu", "err_opt"], orders, notes),
    ]
    write_tables(tabs, cfg, cfg.out, stream)
    if cfg.out != "-":
        stream.write("\n".join(notes) + "\n")
    return EXIT_OK


def cmd_kconst(cfg: RunConfig, stream: TextIO) -> int:
    k = tr.k_constant(cfg.a, cfg.interval, samples=cfg.samples, p=cfg.bits)
    row: list[Cell] = [k.K2, k.delta_opt, k.sup_S0, k.delta_max, k.boundary_samples]
    tab = Table("kconst", ["K2", "delta_opt", "sup_S0", "delta_max", "samples"], [row])
    write_tables([tab], cfg, cfg.out, stream)
    return EXIT_OK


def cmd_figure(cfg: RunConfig, stream: TextIO) -> int:
    from .figures import build_figure

    out_dir = Path(cfg.out_dir)
    for panel in build_figure(cfg.figure):  # type: ignore[arg-type]
        pcfg = RunConfig(
            command="figure",
            bits=panel.bits,
            fmt=cfg.fmt,
            echo=(("figure", str(cfg.figure)), ("panel", panel.name)) + panel.config,
        )
        path = out_dir / f"fig{cfg.figure}_{panel.name}.{cfg.fmt}"
        write_tables([Table(panel.name, panel.columns, panel.rows, panel.notes)], pcfg, str(path), stream)
        stream.write(f"{path}\n")
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig, TextIO], int]] = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "truncation": cmd_truncation,
    "kconst": cmd_kconst,
    "figure": cmd_figure,
}


# -- argument parsing -------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="optwkb", description="Optimally truncated WKB approximations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, problem: bool = True) -> None:
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--bits", help="working precision in bits (default 113)")
        sp.add_argument("--format", choices=None, help="csv (default) or json")
        sp.add_argument("--out", help="output path, '-' for stdout")
        if problem:
            sp.add_argument("--a-expr", dest="a_expr", help="coefficient a(x), e.g. 'x' or 'exp(5*x)'")
            sp.add_argument("--interval", help="xi,eta")
            sp.add_argument("--samples", help="boundary samples for K2 (default 2048)")

    def wkb(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--eps", help="eps, e.g. 2^-5, 0.03125 or 2^-4..2^-9")
        sp.add_argument("--M", help="Chebyshev modes (default 25)")
        sp.add_argument("--backend", help="jet (default), symbolic or spectral")
        sp.add_argument("--phi0", help="phi(xi): number, airy-ic or left-traveling")
        sp.add_argument("--phi1", help="eps phi'(xi): number, airy-ic or left-traveling")
        sp.add_argument("--oracle", help=f"one of {', '.join(ORACLES)} (default auto)")
        sp.add_argument("--points", help="evaluation points (default: 8 per local wavelength)")
        sp.add_argument("--K2", help="K2 for the bound (default: computed)")
        sp.add_argument("--sup-S0", dest="sup_S0", help="sup |S0'| for the bound (default: computed)")

    s = sub.add_parser("solve", help="one WKB approximation")
    common(s)
    wkb(s)
    s.add_argument("--N", help="truncation order")
    s = sub.add_parser("sweep", help="errors over eps and N")
    common(s)
    wkb(s)
    s.add_argument("--N", help="orders, e.g. 0..4")
    s = sub.add_parser("truncation", help="truncation-order report")
    common(s)
    wkb(s)
    s.add_argument("--N-max", dest="N_max", help="largest order scanned (default 40)")
    s = sub.add_parser("kconst", help="analyticity constant K2")
    common(s)
    s = sub.add_parser("figure", help="datasets behind figures 2-11")
    common(s, problem=False)
    s.add_argument("id", help="figure number, 2..11")
    s.add_argument("--out-dir", dest="out_dir", help="output directory (default .)")
    return p


def parse_args(argv: Sequence[str]) -> RunConfig:
    ns = _parser().parse_args(list(argv))
    raw = {k: v for k, v in vars(ns).items() if k not in ("command", "config", "id")}
    if ns.config:
        file_vals = read_config_file(ns.config)
        for k, v in file_vals.items():
            if raw.get(k) is None:
                raw[k] = v
    cfg = build_config(ns.command, raw)
    if ns.command == "figure":
        try:
            fid = int(ns.id)
        except ValueError:
            fid = -1
        if fid not in FIGURES:
            raise ConfigError("id", f"unknown figure {ns.id!r}; valid ids: {', '.join(map(str, FIGURES))}")
        cfg = RunConfig(**{**cfg.__dict__, "figure": fid})
    return cfg


def main(argv: Optional[Sequence[str]] = None, stream: Optional[TextIO] = None) -> int:
    stream = stream or sys.stdout
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except SystemExit as err:
        return EXIT_CONFIG if err.code not in (0, None) else EXIT_OK
    except ConfigError as err:
        print(f"optwkb: config error in {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.command](cfg, stream)
    except ConfigError as err:
        print(f"optwkb: config error in {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericsError, ex.EvalDomain, TurningPoint, BadGrid, tr.BadFit, ArithmeticError) as err:
        print(f"optwkb: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
