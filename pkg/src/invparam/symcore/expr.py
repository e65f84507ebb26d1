"""Expression construction, canonical form, differentiation and substitution.

Expressions are plain sympy objects.  The canonical form is the fixpoint of
a small rewrite system: eliminate ``sin(u)**n`` for ``n >= 2`` in favour of
``cos(u)``, then expand products, powers and exponentials of sums.  Side
relations of parameter functions are applied when atoms are constructed.
"""

from __future__ import annotations

import threading
from typing import Dict, Iterable, Mapping

import sympy as sp

from .paramfn import ParamFnBase

_SYM_LOCK = threading.Lock()
_SYMBOLS: Dict[str, sp.Symbol] = {}

POSITIVE_NAMES = frozenset({"t"})

MAX_TOWER_DEPTH = 12


class StructuralError(ValueError):
    """Raised when an expression leaves the supported fragment."""


def sym(name: str) -> sp.Symbol:
    """Return the unique symbol used for ``name`` across the package.

    ``t`` lives on the positive chart; every other symbol is real.
    """
    s = _SYMBOLS.get(name)
    if s is not None:
        return s
    with _SYM_LOCK:
        s = _SYMBOLS.get(name)
        if s is None:
            if name in POSITIVE_NAMES:
                s = sp.Symbol(name, positive=True)
            else:
                s = sp.Symbol(name, real=True)
            _SYMBOLS[name] = s
    return s


def syms(names: str):
    return tuple(sym(n) for n in names.replace(",", " ").split())


t, x, y = syms("t x y")


def _tower_depth(e) -> int:
    if not e.args:
        return 0
    inner = max(_tower_depth(a) for a in e.args)
    if isinstance(e, (sp.Pow, sp.exp)):
        return inner + 1
    return inner


def _eliminate_sin_powers(e):
    def is_sin_pow(a):
        return (
            isinstance(a, sp.Pow)
            and isinstance(a.base, sp.sin)
            and a.exp.is_Integer
            and a.exp >= 2
        )

    def rewrite(a):
        u = a.base.args[0]
        n = int(a.exp)
        return sp.sin(u) ** (n % 2) * (1 - sp.cos(u) ** 2) ** (n // 2)

    return e.replace(is_sin_pow, rewrite)


def _step(e):
    e = _eliminate_sin_powers(e)
    return sp.expand(e, deep=True, power_exp=True, power_base=False, log=False)


def normalize(e, max_depth: int = MAX_TOWER_DEPTH):
    """Canonical form; idempotent."""
    e = sp.sympify(e)
    if _tower_depth(e) > max_depth:
        raise StructuralError("exponent tower deeper than %d" % max_depth)
    for _ in range(6):
        n = _step(e)
        if n == e:
            return n
        e = n
    return e


def diff(e, s, n: int = 1, canonical: bool = True):
    """Exact partial derivative with respect to a symbol."""
    d = sp.diff(sp.sympify(e), s, n)
    return normalize(d) if canonical else d


def substitute(e, bindings: Mapping, canonical: bool = True):
    """Simultaneous substitution followed by normalization."""
    b = {sp.sympify(k): sp.sympify(v) for k, v in bindings.items()}
    r = sp.sympify(e).subs(b, simultaneous=True)
    return normalize(r) if canonical else r


def free_symbols(e) -> set:
    return set(sp.sympify(e).free_symbols)


def paramfn_atoms(e) -> set:
    return {a for a in sp.sympify(e).atoms(sp.Function) if isinstance(a, ParamFnBase)}


def depends_on(e, symbols: Iterable) -> bool:
    fs = free_symbols(e)
    return any(s in fs for s in symbols)
