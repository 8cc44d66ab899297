"""Optimally truncated WKB approximations for eps^2 phi'' + a(x) phi = 0."""

from .numerics import Jet, Precision, workprec
from .expr import parse, differentiate, eval_complex, eval_jet
from .cheb import make_grid, to_coeffs, cc_antiderivative, eval_series, diff_matrix

__version__ = "0.1.0"

__all__ = [
    "Jet",
    "Precision",
    "workprec",
    "parse",
    "differentiate",
    "eval_complex",
    "eval_jet",
    "make_grid",
    "to_coeffs",
    "cc_antiderivative",
    "eval_series",
    "diff_matrix",
]
