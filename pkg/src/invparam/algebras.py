"""Generator templates of the vorticity symmetry and equivalence algebras.

Point fields live on ``(t, x, y, psi)``.  Equivalence fields additionally
carry coefficients on ``zeta_x, zeta_y, f1, f2``; that coordinate set is
closed under commutation, so commutators are computed there directly.

:func:`decompose` recognises an equivalence field as a combination of the
templates (constants ``c0, c1, c2`` and parameter functions ``beta, gamma1,
gamma2, sigma, delta, chi`` plus the gauge function ``rho`` through its
gradient) and reports whether the recomposition is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy as sp

from .liealg import AlgebraPresentation, TableCell, VectorField, commutator_table
from .symcore.expr import normalize, sym
from .symcore.paramfn import ParamFn
from .symcore.parse import ParseContext, default_context, parse, to_string
from .symcore.zero import ZeroVerdict, combine, is_zero, is_zero_many

t, x, y = sym("t"), sym("x"), sym("y")
psi = sym("psi")
zx, zy = sym("zeta_x"), sym("zeta_y")
f1, f2 = sym("f1"), sym("f2")

POINT_KEYS = (t, x, y, psi)
EQUIV_KEYS = (t, x, y, psi, zx, zy, f1, f2)
R2 = x ** 2 + y ** 2


def _d(e, *s):
    return sp.diff(sp.sympify(e), *s) if s else sp.sympify(e)


# ---------------------------------------------------------------- equivalence templates


def D1() -> VectorField:
    return VectorField({t: t, psi: -psi, zx: -zx, zy: -zy, f1: -2 * f1, f2: -2 * f2}, "D1")


def Dt() -> VectorField:
    return VectorField({t: 1}, "Dt")


def D2() -> VectorField:
    return VectorField({x: x, y: y, psi: 2 * psi, zx: -zx, zy: -zy, f1: f1, f2: f2}, "D2")


def J(beta=1) -> VectorField:
    b = sp.sympify(beta)
    bt, btt = _d(b, t), _d(b, t, 2)
    return VectorField(
        {
            x: -b * y,
            y: b * x,
            psi: bt / 2 * R2,
            zx: -b * zy,
            zy: b * zx,
            f1: btt * x - b * f2,
            f2: btt * y + b * f1,
        },
        "J(%s)" % b,
    )


def X(g) -> VectorField:
    g = sp.sympify(g)
    return VectorField({x: g, psi: -_d(g, t) * y}, "X(%s)" % g)


def Y(g) -> VectorField:
    g = sp.sympify(g)
    return VectorField({y: g, psi: _d(g, t) * x}, "Y(%s)" % g)


def R(s) -> VectorField:
    s = sp.sympify(s)
    return VectorField(
        {psi: s / 2 * R2, f1: s / 2 * R2 * zy + _d(s, t) * x, f2: -s / 2 * R2 * zx + _d(s, t) * y},
        "R(%s)" % s,
    )


def H(d) -> VectorField:
    d = sp.sympify(d)
    return VectorField({psi: d, f1: d * zy, f2: -d * zx}, "H(%s)" % d)


def G(rho) -> VectorField:
    rho = sp.sympify(rho)
    return VectorField({f1: -_d(rho, y), f2: _d(rho, x)}, "G(%s)" % rho)


def Z(c) -> VectorField:
    return VectorField({psi: sp.sympify(c)}, "Z(%s)" % c)


def K(d) -> VectorField:
    return H(d) - Z(d)


def J1() -> VectorField:
    return J(1)


def Jt() -> VectorField:
    return J(t)


EQUIV_FAMILIES: Dict[str, Callable] = {
    "D1": D1, "Dt": Dt, "D2": D2, "J": J, "J1": J1, "Jt": Jt,
    "X": X, "Y": Y, "R": R, "H": H, "G": G, "Z": Z, "K": K,
}
FIXED = ("D1", "Dt", "D2", "J1", "Jt")


def project(q: VectorField) -> VectorField:
    """Projection to the space of ``(t, x, y, psi)``."""
    return q.restrict(POINT_KEYS)


# ---------------------------------------------------------------- point algebra g0


def g0_generators(
    gamma1: Optional[sp.Expr] = None, gamma2: Optional[sp.Expr] = None, chi: Optional[sp.Expr] = None
) -> Dict[str, VectorField]:
    """The eight generators of the vorticity symmetry algebra (opaque by default)."""
    gamma1 = ParamFn("gamma1", (t,))() if gamma1 is None else gamma1
    gamma2 = ParamFn("gamma2", (t,))() if gamma2 is None else gamma2
    chi = ParamFn("chi", (t,))() if chi is None else chi
    gens = {
        "D1": project(D1()),
        "Dt": project(Dt()),
        "D2": project(D2()),
        "J": project(J(1)),
        "Jt": project(J(t)),
        "X": project(X(gamma1)),
        "Y": project(Y(gamma2)),
        "Z": project(Z(chi)),
    }
    for k, v in gens.items():
        v.label = k
    return gens


def g1_generators(tag: str = "") -> Dict[str, VectorField]:
    """The ten equivalence-algebra families with opaque parameter functions."""
    pf = lambda n, args=(t,), h=None: ParamFn(n + tag, args, h)()
    gens = {
        "D1": D1(),
        "D2": D2(),
        "Dt": Dt(),
        "J": J(pf("beta")),
        "X": X(pf("gamma1")),
        "Y": Y(pf("gamma2")),
        "R": R(pf("sigma")),
        "H": H(pf("delta", (t, x, y), (1, 2))),
        "G": G(pf("rho", (t, x, y))),
        "Z": Z(pf("chi")),
    }
    for k, v in gens.items():
        v.label = k
    return gens


# ---------------------------------------------------------------- decomposition


@dataclass
class Decomposition:
    c0: sp.Expr = sp.Integer(0)
    c1: sp.Expr = sp.Integer(0)
    c2: sp.Expr = sp.Integer(0)
    beta: sp.Expr = sp.Integer(0)
    gamma1: sp.Expr = sp.Integer(0)
    gamma2: sp.Expr = sp.Integer(0)
    sigma: sp.Expr = sp.Integer(0)
    delta: sp.Expr = sp.Integer(0)
    chi: sp.Expr = sp.Integer(0)
    rho_grad: Tuple[sp.Expr, sp.Expr] = (sp.Integer(0), sp.Integer(0))
    verdict: ZeroVerdict = field(default_factory=lambda: ZeroVerdict("Zero"))
    checks: Dict[str, ZeroVerdict] = field(default_factory=dict)

    @property
    def matched(self) -> bool:
        return self.verdict.passes

    def components(self) -> Dict[str, sp.Expr]:
        return {
            "D1": self.c1, "Dt": self.c0, "D2": self.c2, "J": self.beta, "X": self.gamma1,
            "Y": self.gamma2, "R": self.sigma, "H": self.delta, "Z": self.chi,
        }

    def label(self) -> str:
        parts = []
        for k, v in self.components().items():
            if v == 0:
                continue
            if k in ("D1", "Dt", "D2"):
                parts.append(_scaled(v, k))
            else:
                parts.append("%s(%s)" % (k, to_string(v)))
        gx, gy = self.rho_grad
        if gx != 0 or gy != 0:
            parts.append("G[grad=(%s, %s)]" % (to_string(gx), to_string(gy)))
        return " + ".join(parts) or "0"


def _scaled(v, name: str) -> str:
    if v == 1:
        return name
    if v == -1:
        return "-" + name
    s = to_string(v)
    return "%s*%s" % (s if sp.sympify(v).is_Atom and not s.startswith("(") else "(%s)" % s, name)


def _const_check(e) -> List:
    return [sp.diff(e, s) for s in EQUIV_KEYS]


def decompose(q: VectorField, point_only: bool = False) -> Decomposition:
    """Recognise ``q`` as a combination of equivalence (or point) templates."""
    xi0, xi1, xi2 = q[t], q[x], q[y]
    c1 = normalize(sp.diff(xi0, t))
    c0 = normalize(xi0 - c1 * t)
    c2 = normalize(sp.diff(xi1, x))
    beta = normalize(-sp.diff(xi1, y))
    g1 = normalize(xi1 - c2 * x + beta * y)
    g2 = normalize(xi2 - beta * x - c2 * y)
    fixed = c1 * D1() + c0 * Dt() + c2 * D2() + J(beta) + X(g1) + Y(g2)
    w = q - fixed
    if point_only:
        w = project(w)
    h = w[psi]
    if point_only:
        kk = sp.Integer(0)
    else:
        kk = normalize(sp.diff(w[f1], zy))
    sigma = normalize((sp.diff(kk, x, 2) + sp.diff(kk, y, 2)) / 2)
    dl = normalize(kk - sigma / 2 * R2)
    chi = normalize(h - kk)
    rest = w - R(sigma) - H(dl) - Z(chi)
    if point_only:
        rest = project(rest)
    gx, gy = normalize(rest[f2]), normalize(-rest[f1])
    dec = Decomposition(c0, c1, c2, beta, g1, g2, sigma, dl, chi, (gx, gy))
    checks: Dict[str, List] = {
        "constants": _const_check(c0) + _const_check(c1) + _const_check(c2),
        "time-only": [sp.diff(e, s) for e in (beta, g1, g2, sigma) for s in EQUIV_KEYS if s != t],
        "chi": [sp.diff(chi, s) for s in EQUIV_KEYS if s != t] if point_only else [sp.diff(chi, s) for s in EQUIV_KEYS if s != t],
        "harmonic": [sp.diff(dl, x, 2) + sp.diff(dl, y, 2)] + [sp.diff(dl, s) for s in (psi, zx, zy, f1, f2)],
        "gauge": [sp.diff(gx, y) - sp.diff(gy, x)] + [sp.diff(g, s) for g in (gx, gy) for s in (psi, zx, zy, f1, f2)],
        "recompose": [(rest - G_from_grad(gx, gy))[k] for k in EQUIV_KEYS],
    }
    if point_only:
        checks["point"] = [sp.diff(beta, t, 2), sigma, dl]
    names, exprs = [], []
    for k, lst in checks.items():
        for e in lst:
            names.append(k)
            exprs.append(e)
    verdicts = is_zero_many(exprs)
    grouped: Dict[str, List[ZeroVerdict]] = {}
    for n, v in zip(names, verdicts):
        grouped.setdefault(n, []).append(v)
    dec.checks = {k: combine(v) for k, v in grouped.items()}
    dec.verdict = combine(list(dec.checks.values()))
    return dec


def G_from_grad(gx, gy) -> VectorField:
    """Gauge field with prescribed gradient of its potential."""
    return VectorField({f1: -gy, f2: gx})


def decompose_g0(q: VectorField) -> Decomposition:
    """Recognise a point field as an element of the vorticity symmetry algebra."""
    return decompose(project(q), point_only=True)


def g0_label(dec: Decomposition) -> str:
    """Label in the basis D1, Dt, D2, J, Jt, X, Y, Z."""
    b0 = normalize(dec.beta.subs(t, 0))
    b1 = normalize(sp.diff(dec.beta, t))
    parts = []
    for name, v in (("D1", dec.c1), ("Dt", dec.c0), ("D2", dec.c2), ("J", b0), ("Jt", b1)):
        if v != 0:
            parts.append(_scaled(v, name))
    for name, v in (("X", dec.gamma1), ("Y", dec.gamma2), ("Z", dec.chi)):
        if v != 0:
            parts.append("%s(%s)" % (name, to_string(v)))
    return " + ".join(parts) or "0"


def span_coordinates(q: VectorField) -> Optional[List[sp.Expr]]:
    """Coefficients over (D1, Dt, D2, J, Jt) of the projection of ``q``.

    Returns None if the projection leaves that five-dimensional span modulo
    the kernel directions X, Y, Z.
    """
    dec = decompose_g0(project(q))
    if not dec.matched:
        return None
    if not is_zero(sp.diff(dec.beta, t, 2)).passes:
        return None
    b0 = normalize(dec.beta.subs(t, 0))
    b1 = normalize(sp.diff(dec.beta, t))
    return [dec.c1, dec.c0, dec.c2, b0, b1]


# ---------------------------------------------------------------- element grammar


_MARK = "__fam_"


def element_context(**kw) -> ParseContext:
    """Parse context where family names become markers."""
    ctx = default_context(expand_aliases=False, **kw)
    for name in EQUIV_FAMILIES:
        ctx.macros[name] = sp.Symbol(_MARK + name)
        ctx.families[name] = (lambda n: (lambda *a: sp.Function(_MARK + n)(*a)))(name)
    ctx.functions.setdefault("delta", (1, 2))
    ctx.functions.setdefault("deltaT", (1, 2))
    return ctx


def parse_element(src: str, ctx: Optional[ParseContext] = None) -> VectorField:
    """Parse ``"D1 + b*D2 + a*J(1) + K(c*t)"`` into an equivalence field."""
    ctx = ctx or element_context()
    e = sp.expand(parse(src, ctx))
    total = VectorField({})
    for term in sp.Add.make_args(e):
        if term == 0:
            continue
        markers = []
        coef = sp.Integer(1)
        for f in sp.Mul.make_args(term):
            if isinstance(f, sp.Symbol) and f.name.startswith(_MARK):
                markers.append((f.name[len(_MARK):], ()))
            elif isinstance(f, sp.core.function.AppliedUndef) and f.func.__name__.startswith(_MARK):
                markers.append((f.func.__name__[len(_MARK):], f.args))
            else:
                coef *= f
        if len(markers) != 1:
            raise ValueError("term %s is not linear in one algebra element" % term)
        name, args = markers[0]
        total = total + EQUIV_FAMILIES[name](*args).scale(coef)
    total.label = src
    return total


# ---------------------------------------------------------------- presentations and Table data


def g1_matcher(q: VectorField):
    dec = decompose(q)
    return dec.label(), dec.verdict


def g0_matcher(q: VectorField):
    dec = decompose_g0(q)
    return g0_label(dec), dec.verdict


def g1_presentation() -> AlgebraPresentation:
    """The ten equivalence families; rows carry independent (``T``) functions."""
    return AlgebraPresentation("g1", g1_generators(), g1_matcher, rows=g1_generators("T"))


def g0_presentation() -> AlgebraPresentation:
    t_ = lambda n: ParamFn(n, (t,))()
    rows = g0_generators(t_("gamma1T"), t_("gamma2T"), t_("chiT"))
    return AlgebraPresentation("g0", g0_generators(), g0_matcher, rows=rows)


def fields_equal(a: VectorField, b: VectorField) -> ZeroVerdict:
    """Coefficientwise comparison of two fields."""
    return (a - b).is_zero()


def decompositions_equal(a: Decomposition, b: Decomposition) -> ZeroVerdict:
    """Parameter-by-parameter comparison of two template decompositions."""
    ca, cb = a.components(), b.components()
    exprs = [ca[k] - cb[k] for k in ca] + [a.rho_grad[i] - b.rho_grad[i] for i in (0, 1)]
    return combine(is_zero_many(exprs))


@dataclass
class CellCheck:
    row: str
    col: str
    expected: str
    computed: str
    span: ZeroVerdict
    template: ZeroVerdict
    direct: ZeroVerdict

    @property
    def verdict(self) -> ZeroVerdict:
        return combine([self.span, self.template, self.direct])


def load_table5() -> dict:
    from .invariants import _load_yaml

    return _load_yaml("table5.yaml")


def check_cell(cell: TableCell, expected_src: str, ctx: Optional[ParseContext] = None) -> CellCheck:
    """Compare a computed commutator with a table entry along two routes.

    The template route decomposes both fields and compares parameters; the
    direct route compares coefficients.  Both must pass.
    """
    expected = parse_element(expected_src, ctx or element_context())
    dc, de = decompose(cell.field), decompose(expected)
    return CellCheck(
        cell.row, cell.col, expected_src, cell.label, cell.verdict,
        decompositions_equal(dc, de), fields_equal(cell.field, expected),
    )


def verify_table5(workers: int = 1) -> Tuple[List[CellCheck], List[CellCheck]]:
    """Compute the full commutator table and check it against the stored entries.

    Returns the checks for the stored cells and, separately, for the printed
    forms listed under ``literal``.
    """
    data = load_table5()
    ctx = element_context()
    rows = {k: parse_element(v, ctx) for k, v in data["rows"].items()}
    cols = {k: parse_element(v, ctx) for k, v in data["columns"].items()}
    pres = AlgebraPresentation("table5", cols, g1_matcher, rows=rows)
    cells = commutator_table(pres, workers=workers)
    checks = [check_cell(cells[(r, c)], data["cells"][r][c], ctx) for r in rows for c in cols]
    literal = [check_cell(cells[(e["row"], e["col"])], e["expr"], ctx) for e in data.get("literal", [])]
    return checks, literal
