"""Opaque parameter functions.

A parameter function is an undefined smooth function such as ``beta(t)`` or
``delta(t, x, y)``.  Each derivative is its own atom, keyed by the function
name and a derivative multi-index over its argument slots, so sympy's chain
rule applies unchanged when the arguments are composite expressions.

A function may carry a harmonic side relation on two of its argument slots
(for instance ``delta_xx + delta_yy = 0``); the derivative with two or more
differentiations in the first slot is then eliminated on construction.
"""

from __future__ import annotations

import threading
from typing import Dict, Optional, Sequence, Tuple

import sympy as sp

_LOCK = threading.Lock()
_CLASSES: Dict[Tuple, type] = {}


class ParamFnBase(sp.Function):
    """Common base of every parameter-function atom."""

    pf_name: str = ""
    pf_index: Tuple[int, ...] = ()
    pf_harmonic: Optional[Tuple[int, int]] = None

    @classmethod
    def eval(cls, *args):
        return None

    def fdiff(self, argindex=1):
        idx = list(self.pf_index)
        idx[argindex - 1] += 1
        return apply_paramfn(self.pf_name, self.args, tuple(idx), self.pf_harmonic)

    def _eval_is_real(self):
        return True


def _class_for(name: str, index: Tuple[int, ...], harmonic) -> type:
    key = (name, index, harmonic)
    cls = _CLASSES.get(key)
    if cls is not None:
        return cls
    with _LOCK:
        cls = _CLASSES.get(key)
        if cls is None:
            label = name if not any(index) else "%s[%s]" % (name, ",".join(map(str, index)))
            cls = type(
                label,
                (ParamFnBase,),
                {
                    "pf_name": name,
                    "pf_index": index,
                    "pf_harmonic": harmonic,
                    "nargs": len(index),
                },
            )
            _CLASSES[key] = cls
    return cls


def reduce_index(index: Tuple[int, ...], harmonic) -> Tuple[int, Tuple[int, ...]]:
    """Apply the harmonic side relation; returns (sign, reduced index)."""
    if harmonic is None:
        return 1, index
    i, j = harmonic
    idx = list(index)
    sign = 1
    while idx[i] >= 2:
        idx[i] -= 2
        idx[j] += 2
        sign = -sign
    return sign, tuple(idx)


def apply_paramfn(
    name: str,
    args: Sequence,
    index: Optional[Sequence[int]] = None,
    harmonic: Optional[Tuple[int, int]] = None,
) -> sp.Expr:
    """Build the atom ``name[index](*args)`` with side relations applied."""
    args = tuple(sp.sympify(a) for a in args)
    if index is None:
        index = (0,) * len(args)
    index = tuple(int(k) for k in index)
    if len(index) != len(args):
        raise ValueError("derivative index length does not match argument count")
    if harmonic is not None:
        harmonic = (int(harmonic[0]), int(harmonic[1]))
    sign, index = reduce_index(index, harmonic)
    atom = _class_for(name, index, harmonic)(*args)
    return atom if sign == 1 else -atom


class ParamFn:
    """Handle for a named parameter function with a fixed argument list."""

    def __init__(self, name: str, args: Sequence, harmonic: Optional[Tuple[int, int]] = None):
        self.name = name
        self.args = tuple(sp.sympify(a) for a in args)
        self.harmonic = harmonic

    def __call__(self, *args, index=None):
        use = args if args else self.args
        return apply_paramfn(self.name, use, index, self.harmonic)

    def d(self, *counts):
        return apply_paramfn(self.name, self.args, counts, self.harmonic)

    def __repr__(self):
        return "ParamFn(%s)" % self.name


def is_paramfn(e) -> bool:
    return isinstance(e, ParamFnBase)


def paramfn_atoms(e):
    return {a for a in sp.sympify(e).atoms(sp.Function) if isinstance(a, ParamFnBase)}
