"""Vector fields, prolongation, commutators and the infinitesimal symmetry test."""

from __future__ import annotations

import threading
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy as sp

from .jet import JetSpec, OrderOverflow, SolutionManifold, delta, mi_add, mi_sub, vorticity_spec
from .symcore.expr import normalize
from .symcore.zero import ZeroVerdict, combine, is_zero, is_zero_many


class VectorField:
    """First-order operator ``sum_c coeffs[c] * d/dc``; absent keys are zero."""

    __slots__ = ("coeffs", "label")

    def __init__(self, coeffs: Mapping = None, label: str = "", canonical: bool = True):
        items = {}
        for k, v in (coeffs or {}).items():
            v = normalize(v) if canonical else sp.sympify(v)
            if v != 0:
                items[k] = v
        self.coeffs: Dict[sp.Symbol, sp.Expr] = items
        self.label = label

    def __getitem__(self, key):
        return self.coeffs.get(key, sp.Integer(0))

    def keys(self):
        return self.coeffs.keys()

    def apply(self, e, canonical: bool = True):
        e = sp.sympify(e)
        fs = e.free_symbols
        out = sp.Add(*[v * sp.diff(e, k) for k, v in self.coeffs.items() if k in fs])
        return normalize(out) if canonical else out

    __call__ = apply

    def __add__(self, other: "VectorField") -> "VectorField":
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0) + v
        return VectorField(c)

    def __neg__(self):
        return VectorField({k: -v for k, v in self.coeffs.items()}, canonical=False)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "VectorField":
        return VectorField({k: s * v for k, v in self.coeffs.items()})

    def __rmul__(self, s):
        return self.scale(s)

    def subs(self, bindings) -> "VectorField":
        return VectorField({k: sp.sympify(v).subs(bindings) for k, v in self.coeffs.items()})

    def restrict(self, keys: Iterable) -> "VectorField":
        keys = set(keys)
        return VectorField({k: v for k, v in self.coeffs.items() if k in keys}, canonical=False)

    def zero_verdicts(self, **kw) -> Dict[sp.Symbol, ZeroVerdict]:
        keys = list(self.coeffs)
        return dict(zip(keys, is_zero_many([self.coeffs[k] for k in keys], **kw)))

    def is_zero(self, **kw) -> ZeroVerdict:
        return combine(list(self.zero_verdicts(**kw).values()))

    def __repr__(self):
        body = " + ".join("(%s)*d_%s" % (v, k) for k, v in sorted(self.coeffs.items(), key=lambda kv: str(kv[0])))
        return "VectorField(%s)" % (body or "0")


def commutator(q1: VectorField, q2: VectorField) -> VectorField:
    """``[Q1, Q2]``: coefficient of d_c is Q1(Q2^c) - Q2(Q1^c)."""
    keys = set(q1.keys()) | set(q2.keys())
    return VectorField({c: q1.apply(q2[c], False) - q2.apply(q1[c], False) for c in keys})


class ProlongedField:
    """Lazy prolongation of the point part of a vector field to a jet."""

    def __init__(self, q: VectorField, spec: JetSpec):
        self.q = q
        self.spec = spec
        self.xi = [q[b] for b in spec.base]
        self._phi: Dict[Tuple[int, Tuple[int, ...]], sp.Expr] = {}
        self._lock = threading.Lock()
        for a in range(len(spec.dependent)):
            self._phi[(a, (0,) * spec.p)] = q[spec.coord(a, (0,) * spec.p)]

    def phi(self, a: int, alpha) -> sp.Expr:
        alpha = tuple(alpha)
        key = (a, alpha)
        v = self._phi.get(key)
        if v is not None:
            return v
        spec = self.spec
        if sum(alpha) > spec.order:
            raise OrderOverflow("prolongation beyond order cap %d" % spec.order)
        i = next(k for k, n in enumerate(alpha) if n > 0)
        prev_alpha = mi_sub(alpha, delta(spec.p, i))
        prev = self.phi(a, prev_alpha)
        out = spec.total_derivative(prev, i, canonical=False)
        for j in range(spec.p):
            dxi = spec.total_derivative(self.xi[j], i, canonical=False)
            if dxi != 0:
                out -= dxi * spec.coord(a, mi_add(prev_alpha, delta(spec.p, j)))
        v = normalize(out)
        with self._lock:
            self._phi.setdefault(key, v)
        return self._phi[key]

    def coefficient(self, s) -> sp.Expr:
        spec = self.spec
        if s in spec.base:
            return self.xi[spec.base.index(s)]
        info = spec.info(s)
        if info is None:
            return sp.Integer(0)
        kind, key, alpha = info
        if kind == "coord":
            return self.phi(key, alpha)
        al = spec.aliases[key]
        return sp.Add(*[c * self.phi(al.dependent, mi_add(alpha, off)) for c, off in al.terms])

    def apply(self, e, canonical: bool = True):
        e = sp.sympify(e)
        out = sp.Integer(0)
        for s in e.free_symbols:
            c = self.coefficient(s)
            if c != 0:
                out += c * sp.diff(e, s)
        return normalize(out) if canonical else out

    def to_field(self, r: int) -> VectorField:
        spec = self.spec
        coeffs = {b: self.xi[k] for k, b in enumerate(spec.base)}
        for s in spec.coords(r)[spec.p:]:
            coeffs[s] = self.coefficient(s)
        return VectorField(coeffs, canonical=False)


def point_part(q: VectorField, spec: Optional[JetSpec] = None) -> VectorField:
    spec = spec or vorticity_spec()
    keys = list(spec.base) + [spec.coord(a, (0,) * spec.p) for a in range(len(spec.dependent))]
    return q.restrict(keys)


def prolong(q: VectorField, r: int, spec: Optional[JetSpec] = None) -> VectorField:
    """Prolongation of the point part of ``q`` to all coordinates of order <= r."""
    spec = spec or vorticity_spec()
    if r > spec.order:
        raise OrderOverflow("requested order %d exceeds cap %d" % (r, spec.order))
    return ProlongedField(point_part(q, spec), spec).to_field(r)


def symmetry_residual(q: VectorField, m: SolutionManifold, order: Optional[int] = None):
    """``Q_(r) Delta`` reduced on the manifold and written in chart coordinates."""
    spec = m.spec
    delta_eq = m.equation()
    r = spec.order_of(delta_eq) if order is None else order
    if r > spec.order:
        raise OrderOverflow("requested order %d exceeds cap %d" % (r, spec.order))
    pf = ProlongedField(point_part(q, spec), spec)
    val = pf.apply(delta_eq, canonical=False)
    return m.reduce(val)


def check_symmetry(q: VectorField, m: SolutionManifold, order: Optional[int] = None, **kw) -> ZeroVerdict:
    """Infinitesimal invariance test of the manifold's equation under ``q``."""
    return is_zero(symmetry_residual(q, m, order), **kw)


# ---------------------------------------------------------------- presentations


class AlgebraPresentation:
    """Named generators plus a matcher that labels fields in the template span.

    ``rows`` optionally gives a second instance of every generator with
    independent parameter functions, so that a table cell ``[A(f~), B(f)]``
    is computed between distinct instances of the same family.  The matcher
    returns ``(label, verdict)``; a failing verdict means the field left the
    span of the templates.
    """

    def __init__(self, name: str, generators: Mapping[str, VectorField], matcher, rows: Optional[Mapping[str, VectorField]] = None):
        self.name = name
        self.generators = dict(generators)
        self.rows = dict(rows) if rows is not None else dict(generators)
        self.matcher = matcher

    def names(self) -> List[str]:
        return list(self.generators)


class TableCell:
    __slots__ = ("row", "col", "field", "label", "verdict")

    def __init__(self, row, col, field, label, verdict):
        self.row, self.col, self.field, self.label, self.verdict = row, col, field, label, verdict

    @property
    def matched(self) -> bool:
        return self.verdict.passes

    def __repr__(self):
        return "[%s, %s] = %s (%s)" % (self.row, self.col, self.label, self.verdict.label)


def commutator_table(pres: AlgebraPresentation, workers: int = 1) -> Dict[Tuple[str, str], TableCell]:
    """All commutators ``[row, col]``, each labelled by the presentation matcher.

    Cells are independent; with ``workers > 1`` they run on a thread pool.
    The result is keyed by ``(row, col)`` and does not depend on scheduling.
    """
    pairs = [(r, c) for r in pres.rows for c in pres.generators]

    def cell(rc):
        r, c = rc
        q = commutator(pres.rows[r], pres.generators[c])
        label, verdict = pres.matcher(q)
        return TableCell(r, c, q, label, verdict)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(cell, pairs))
    else:
        cells = [cell(p) for p in pairs]
    return {(c.row, c.col): c for c in cells}
