"""Jet-space bookkeeping.

Jet coordinates are ordinary symbols named ``psi``, ``psi_t``, ``psi_txy``
and so on; the letters after the underscore spell the multi-index, grouped in
the order of the independent variables.  A spec may declare aliases such as
``zeta = psi_xx + psi_yy``; alias coordinates ``zeta_x``, ``zeta_xy`` are
symbols as well and are shifted by total derivatives like jet coordinates.

A :class:`SolutionManifold` stores an equation solved for a principal
coordinate and produces differential consequences on demand.  With an alias
whose leading term lies in the spatial chart, :meth:`JetSpec.to_chart`
rewrites the remaining derivatives into an independent coordinate system
(on the vorticity jet: every ``psi_a`` with at least two y-derivatives becomes
``zeta_(a-yy) - psi_(a-yy+xx)``), which is what the zero tests run on.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy as sp

from .symcore.expr import StructuralError, normalize, sym

MultiIndex = Tuple[int, ...]

DEFAULT_ORDER = 6
_order_cap = [DEFAULT_ORDER]


def set_max_order(n: int) -> None:
    """Global jet order cap used by the default specs."""
    if n < 1:
        raise ValueError("order cap must be positive")
    _order_cap[0] = int(n)


def max_order() -> int:
    return _order_cap[0]


class OrderOverflow(StructuralError):
    """A computation needed a jet coordinate above the order cap."""


def mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(i + j for i, j in zip(a, b))


def mi_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(i - j for i, j in zip(a, b))


def mi_ge(a: MultiIndex, b: MultiIndex) -> bool:
    return all(i >= j for i, j in zip(a, b))


def delta(p: int, i: int) -> MultiIndex:
    return tuple(1 if k == i else 0 for k in range(p))


def multi_indices(p: int, r: int) -> List[MultiIndex]:
    """All multi-indices of length p with |a| <= r, graded lexicographic."""
    out = []
    for n in range(r + 1):
        for combo in combinations_with_replacement(range(p), n):
            a = [0] * p
            for k in combo:
                a[k] += 1
            out.append(tuple(a))
    return sorted(set(out), key=lambda a: (sum(a), tuple(-k for k in a)))


@dataclass(frozen=True)
class Alias:
    """``name_b = sum coef * dep_(b + offset)``, defined for every b."""

    name: str
    dependent: int
    terms: Tuple[Tuple[int, MultiIndex], ...]
    lead: MultiIndex
    chart_vars: Tuple[int, ...]


class JetSpec:
    """Independent and dependent variables plus an order cap."""

    def __init__(
        self,
        independent: Sequence[str] = ("t", "x", "y"),
        dependent: Sequence[str] = ("psi",),
        order: int = DEFAULT_ORDER,
        aliases: Sequence[Alias] = (),
    ):
        if len(independent) < 1 or len(dependent) < 1 or order < 0:
            raise ValueError("need p >= 1, q >= 1, r >= 0")
        for n in independent:
            if len(n) != 1:
                raise ValueError("independent variable names must be single letters")
        self.independent = tuple(independent)
        self.dependent = tuple(dependent)
        self.order = int(order)
        self.base = tuple(sym(n) for n in independent)
        self.p = len(independent)
        self.aliases = {a.name: a for a in aliases}
        self._lock = threading.Lock()
        self._coords: Dict[Tuple[int, MultiIndex], sp.Symbol] = {}
        self._info: Dict[sp.Symbol, Tuple[str, int, MultiIndex]] = {}

    def with_order(self, order: int) -> "JetSpec":
        return JetSpec(self.independent, self.dependent, order, tuple(self.aliases.values()))

    # naming -----------------------------------------------------------

    def _letters(self, alpha: MultiIndex) -> str:
        return "".join(n * k for n, k in zip(self.independent, alpha))

    def _name(self, head: str, alpha: MultiIndex) -> str:
        return head if not any(alpha) else "%s_%s" % (head, self._letters(alpha))

    def coord(self, a, alpha: MultiIndex) -> sp.Symbol:
        """Jet coordinate ``u^a_alpha`` (``a`` an index or a name)."""
        a = self.dependent.index(a) if isinstance(a, str) else a
        alpha = tuple(alpha)
        key = (a, alpha)
        s = self._coords.get(key)
        if s is None:
            s = sym(self._name(self.dependent[a], alpha))
            with self._lock:
                self._coords[key] = s
                self._info[s] = ("coord", a, alpha)
        return s

    def alias_coord(self, name: str, beta: MultiIndex) -> sp.Symbol:
        s = sym(self._name(name, tuple(beta)))
        with self._lock:
            self._info[s] = ("alias", name, tuple(beta))
        return s

    def parse_name(self, name: str):
        """``("coord", a, alpha)``, ``("alias", name, beta)`` or None."""
        head, _, letters = name.partition("_")
        if head in self.dependent:
            kind, key = "coord", self.dependent.index(head)
        elif head in self.aliases:
            kind, key = "alias", head
        else:
            return None
        if "_" in name and not letters:
            return None
        alpha = [0] * self.p
        for ch in letters:
            if ch not in self.independent:
                return None
            alpha[self.independent.index(ch)] += 1
        return kind, key, tuple(alpha)

    def canonical_name(self, name: str) -> Optional[str]:
        info = self.parse_name(name)
        if info is None:
            return None
        kind, key, alpha = info
        head = self.dependent[key] if kind == "coord" else key
        return self._name(head, alpha)

    def info(self, s):
        r = self._info.get(s)
        if r is not None:
            return r
        if not isinstance(s, sp.Symbol):
            return None
        r = self.parse_name(s.name)
        if r is None or self.canonical_name(s.name) != s.name or sym(s.name) != s:
            return None
        with self._lock:
            self._info[s] = r
        return r

    def coord_order(self, s) -> Optional[int]:
        r = self.info(s)
        if r is None:
            return None
        if r[0] == "coord":
            return sum(r[2])
        return sum(r[2]) + sum(self.aliases[r[1]].lead)

    def coords(self, r: Optional[int] = None) -> List[sp.Symbol]:
        """Base symbols followed by all jet coordinates up to order r."""
        r = self.order if r is None else r
        out = list(self.base)
        for a in range(len(self.dependent)):
            out += [self.coord(a, al) for al in multi_indices(self.p, r)]
        return out

    def coord_count(self, r: int) -> int:
        return self.p + len(self.dependent) * comb(self.p + r, r)

    def jet_symbols(self, e) -> List[sp.Symbol]:
        return [s for s in sp.sympify(e).free_symbols if self.info(s) is not None]

    def order_of(self, e) -> int:
        orders = [self.coord_order(s) for s in self.jet_symbols(e)]
        return max(orders, default=0)

    # total derivatives --------------------------------------------------

    def shift(self, s, i: int) -> sp.Symbol:
        kind, key, alpha = self.info(s)
        new = list(alpha)
        new[i] += 1
        new = tuple(new)
        if kind == "coord":
            if sum(new) > self.order:
                raise OrderOverflow("jet order %d exceeds cap %d" % (sum(new), self.order))
            return self.coord(key, new)
        if sum(new) + sum(self.aliases[key].lead) > self.order:
            raise OrderOverflow("jet order exceeds cap %d" % self.order)
        return self.alias_coord(key, new)

    def total_derivative(self, e, i, canonical: bool = True):
        """``D_i e``; ``i`` is an index or an independent-variable name."""
        if isinstance(i, str):
            i = self.independent.index(i)
        e = sp.sympify(e)
        out = sp.diff(e, self.base[i])
        for s in self.jet_symbols(e):
            out += self.shift(s, i) * sp.diff(e, s)
        return normalize(out) if canonical else out

    def D(self, e, *indices, canonical: bool = True):
        for i in indices:
            e = self.total_derivative(e, i, canonical=False)
        return normalize(e) if canonical else e

    def poisson_bracket(self, a, b):
        ix, iy = self.independent.index("x"), self.independent.index("y")
        return normalize(
            self.total_derivative(a, ix, False) * self.total_derivative(b, iy, False)
            - self.total_derivative(a, iy, False) * self.total_derivative(b, ix, False)
        )

    # aliases and chart ----------------------------------------------------

    def alias_value(self, name: str, beta: MultiIndex):
        al = self.aliases[name]
        return sp.Add(*[c * self.coord(al.dependent, mi_add(beta, off)) for c, off in al.terms])

    def expand_aliases(self, e, predicate=None):
        """Replace alias coordinates (those satisfying ``predicate``) by definitions."""
        e = sp.sympify(e)
        rep = {}
        for s in e.free_symbols:
            r = self.info(s)
            if r is not None and r[0] == "alias" and (predicate is None or predicate(r[1], r[2])):
                rep[s] = self.alias_value(r[1], r[2])
        return e.xreplace(rep) if rep else e

    def _in_chart(self, al: Alias, beta: MultiIndex) -> bool:
        return all(k == 0 for i, k in enumerate(beta) if i not in al.chart_vars)

    def to_chart(self, e, canonical: bool = True):
        """Rewrite chart-spatial derivatives past the alias lead into aliases."""
        e = sp.sympify(e)
        if not self.aliases:
            return normalize(e) if canonical else e
        e = self.expand_aliases(e, lambda n, b: not self._in_chart(self.aliases[n], b))
        rep = {}
        for s in self.jet_symbols(e):
            v = self._chart_value(s)
            if v is not None:
                rep[s] = v
        if rep:
            e = e.xreplace(rep)
        return normalize(e) if canonical else e

    def _chart_value(self, s):
        r = self.info(s)
        if r is None or r[0] != "coord":
            return None
        _, a, gamma = r
        for al in self.aliases.values():
            if al.dependent != a or not self._in_chart(al, gamma) or not mi_ge(gamma, al.lead):
                continue
            beta = mi_sub(gamma, al.lead)
            lead_coef = [c for c, off in al.terms if off == al.lead][0]
            val = self.alias_coord(al.name, beta)
            for c, off in al.terms:
                if off != al.lead:
                    other = self.coord(a, mi_add(beta, off))
                    sub = self._chart_value(other)
                    val -= c * (other if sub is None else sub)
            return val / lead_coef
        return None

    def euler_operator(self, H, dependent: int = 0):
        """Euler operator of H with respect to one dependent variable."""
        H = sp.sympify(H)
        out = sp.Integer(0)
        for s in self.jet_symbols(H):
            kind, a, alpha = self.info(s)
            if kind != "coord" or a != dependent:
                raise StructuralError("Euler operator: unexpected dependency on %s" % s)
        for s in self.jet_symbols(H):
            _, _, alpha = self.info(s)
            term = sp.diff(H, s)
            for i, k in enumerate(alpha):
                for _ in range(k):
                    term = -self.total_derivative(term, i, canonical=False)
            out += term
        return normalize(out)


def vorticity_spec(order: Optional[int] = None) -> JetSpec:
    """Jet of psi(t, x, y) with the vorticity alias ``zeta = psi_xx + psi_yy``."""
    zeta = Alias("zeta", 0, ((1, (0, 2, 0)), (1, (0, 0, 2))), (0, 0, 2), (1, 2))
    return JetSpec(("t", "x", "y"), ("psi",), order or max_order(), (zeta,))


def zeta_spec(order: Optional[int] = None) -> JetSpec:
    """Spatial jet of zeta(x, y), t a parameter."""
    return JetSpec(("x", "y"), ("zeta",), order or max_order())


class SolutionManifold:
    """An equation solved for a principal coordinate, with lazy consequences."""

    def __init__(self, spec: JetSpec, principal, rhs):
        self.spec = spec
        r = spec.info(principal)
        if r is None or r[0] != "coord":
            raise ValueError("principal must be a jet coordinate")
        self.principal = principal
        self.dependent = r[1]
        self.alpha0 = r[2]
        self.rhs = normalize(rhs)
        self._cache: Dict[MultiIndex, sp.Expr] = {}
        self._lock = threading.Lock()
        self._local = threading.local()
        if any(self.principal_offset(s) is not None for s in spec.jet_symbols(self._expand(self.rhs))):
            raise StructuralError("right side contains a principal derivative")

    def principal_offset(self, s) -> Optional[MultiIndex]:
        r = self.spec.info(s)
        if r is None or r[0] != "coord" or r[1] != self.dependent:
            return None
        if mi_ge(r[2], self.alpha0):
            return mi_sub(r[2], self.alpha0)
        return None

    def _alias_hits_principal(self, name, beta) -> bool:
        return any(self.principal_offset(s) is not None for s in self.spec.alias_value(name, beta).free_symbols)

    def _expand(self, e):
        return self.spec.expand_aliases(e, self._alias_hits_principal)

    def equation(self):
        """Left minus right side as a function on the jet."""
        return normalize(self.principal - self.rhs)

    def consequence(self, beta: MultiIndex):
        beta = tuple(beta)
        v = self._cache.get(beta)
        if v is not None:
            return v
        if sum(self.alpha0) + sum(beta) > self.spec.order:
            raise OrderOverflow("consequence beyond order cap %d" % self.spec.order)
        busy = getattr(self._local, "busy", None)
        if busy is None:
            busy = self._local.busy = set()
        if beta in busy:
            raise StructuralError("reduction does not terminate")
        busy.add(beta)
        try:
            if not any(beta):
                v = self.rhs
            else:
                i = next(k for k, b in enumerate(beta) if b > 0)
                prev = self.consequence(mi_sub(beta, delta(self.spec.p, i)))
                v = self.on_manifold(self.spec.total_derivative(prev, i, canonical=False))
        finally:
            busy.discard(beta)
        with self._lock:
            self._cache.setdefault(beta, v)
        return self._cache[beta]

    def on_manifold(self, e, canonical: bool = True):
        """Replace principal derivatives by their parametric expressions."""
        e = self._expand(sp.sympify(e))
        rep = {}
        for s in self.spec.jet_symbols(e):
            off = self.principal_offset(s)
            if off is not None:
                rep[s] = self.consequence(off)
        if rep:
            e = e.xreplace(rep)
        return normalize(e) if canonical else e

    def reduce(self, e):
        """On-manifold value in independent chart coordinates."""
        return self.spec.to_chart(self.on_manifold(e, canonical=False))


def total_derivative(e, i, spec: Optional[JetSpec] = None):
    return (spec or vorticity_spec()).total_derivative(e, i)


def poisson_bracket(a, b, spec: Optional[JetSpec] = None):
    return (spec or vorticity_spec()).poisson_bracket(a, b)


def euler_operator(H, spec: Optional[JetSpec] = None):
    """Euler operator in the spatial jet of zeta; psi and its derivatives are rejected."""
    spec = spec or zeta_spec()
    outer = vorticity_spec()
    for s in sp.sympify(H).free_symbols:
        if spec.info(s) is None and outer.info(s) is not None:
            raise StructuralError("Euler operator: unexpected dependency on %s" % s)
    return spec.euler_operator(H)


def on_manifold(e, m: SolutionManifold):
    return m.on_manifold(e)


def vorticity_manifold(H=0, spec: Optional[JetSpec] = None) -> SolutionManifold:
    """``zeta_t + {psi, zeta} = H`` solved for ``psi_tyy``."""
    spec = spec or vorticity_spec()
    psi_x = spec.coord(0, (0, 1, 0))
    psi_y = spec.coord(0, (0, 0, 1))
    zx = spec.alias_coord("zeta", (0, 1, 0))
    zy = spec.alias_coord("zeta", (0, 0, 1))
    rhs = -spec.coord(0, (1, 2, 0)) - psi_x * zy + psi_y * zx + H
    return SolutionManifold(spec, spec.coord(0, (1, 0, 2)), rhs)
