"""Symbolic expression kernel backed by sympy and mpmath."""

from .expr import (
    MAX_TOWER_DEPTH,
    StructuralError,
    depends_on,
    diff,
    free_symbols,
    normalize,
    substitute,
    sym,
    syms,
    t,
    x,
    y,
)
from .paramfn import ParamFn, ParamFnBase, apply_paramfn, is_paramfn, paramfn_atoms
from .parse import ParseContext, ParseError, default_context, parse, print_expr, to_string
from .zero import ZeroVerdict, combine, configure, is_zero, is_zero_many, numeric_residuals, symbolic_zero

__all__ = [
    "MAX_TOWER_DEPTH", "StructuralError", "depends_on", "diff", "free_symbols", "normalize",
    "substitute", "sym", "syms", "t", "x", "y", "ParamFn", "ParamFnBase", "apply_paramfn",
    "is_paramfn", "paramfn_atoms", "ParseContext", "ParseError", "default_context", "parse",
    "print_expr", "to_string", "ZeroVerdict", "combine", "configure", "is_zero", "is_zero_many",
    "numeric_residuals", "symbolic_zero",
]
