"""Differential invariants, invariant differentiations and functional independence."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import sympy as sp
import yaml

from .algebras import g0_generators, project, Dt, J, Z
from .jet import JetSpec, OrderOverflow, vorticity_spec
from .liealg import ProlongedField, VectorField, point_part
from .symcore.expr import normalize, sym
from .symcore.paramfn import ParamFn
from .symcore.parse import ParseContext, default_context, parse
from .symcore.zero import Evaluator, ZeroVerdict, combine, is_zero_many, sample_point, settings

t, x, y = sym("t"), sym("x"), sym("y")

Operator = Tuple[sp.Expr, sp.Expr, sp.Expr]


def algebra(name: str) -> Dict[str, VectorField]:
    """Shipped point algebras: ``g0``, ``j`` (rotations) and ``spatial``."""
    chi = ParamFn("chi", (t,))()
    if name == "g0":
        return g0_generators()
    if name == "j":
        return {"Dt": project(Dt()), "J": project(J(1)), "Jt": project(J(t)), "Z": project(Z(chi))}
    if name == "spatial":
        return {"Dt": project(Dt()), "Z": project(Z(chi))}
    raise KeyError("unknown algebra %r" % name)


ALGEBRAS = ("g0", "j", "spatial")


def apply_operator(op: Operator, e, spec: Optional[JetSpec] = None):
    spec = spec or vorticity_spec()
    return normalize(sum(h * spec.total_derivative(e, i, canonical=False) for i, h in enumerate(op) if h != 0))


def vorticity_macros(spec: Optional[JetSpec] = None) -> Dict[str, sp.Expr]:
    """Named building blocks used by the shipped invariant catalogs."""
    spec = spec or vorticity_spec()
    P = lambda n: sym(n)
    psi_x, psi_y = P("psi_x"), P("psi_y")
    zeta = P("psi_xx") + P("psi_yy")
    theta = P("psi_xx") - P("psi_yy")
    eta = 2 * P("psi_xy")
    V = (sp.Integer(1), -psi_y, psi_x)
    m = {
        "zeta": zeta,
        "theta": theta,
        "eta": eta,
        "sigma3": P("psi_xxx") - 3 * P("psi_xyy"),
        "varsigma": 3 * P("psi_xxy") - P("psi_yyy"),
        "r": sp.sqrt(x ** 2 + y ** 2),
    }
    m["Vzeta"] = apply_operator(V, zeta, spec)
    m["Vtheta"] = apply_operator(V, theta, spec)
    m["Veta"] = apply_operator(V, eta, spec)
    return m


def catalog_context(spec: Optional[JetSpec] = None) -> ParseContext:
    spec = spec or vorticity_spec()
    return ParseContext(spec=spec, expand_aliases=True, macros=vorticity_macros(spec))


# ---------------------------------------------------------------- checks


def is_differential_invariant(
    I, gens: Dict[str, VectorField], r: Optional[int] = None, spec: Optional[JetSpec] = None
) -> Dict[str, ZeroVerdict]:
    """Per-generator verdict of ``Q_(r) I = 0``."""
    spec = spec or vorticity_spec()
    if r is not None and spec.order_of(I) > r:
        raise OrderOverflow("invariant has order above %d" % r)
    names = list(gens)
    exprs = [ProlongedField(point_part(gens[n], spec), spec).apply(I) for n in names]
    return dict(zip(names, is_zero_many(exprs)))


def truncated_operator_field(op: Operator, r: int, spec: JetSpec) -> Dict[sp.Symbol, sp.Expr]:
    """Coefficients of ``h^nu D_nu`` on the base and on coordinates of order < r."""
    coeffs = {b: op[i] for i, b in enumerate(spec.base)}
    for s in spec.coords(r - 1)[spec.p:]:
        coeffs[s] = sum(h * spec.shift(s, i) for i, h in enumerate(op) if h != 0)
    return coeffs


def is_invariant_differentiation(
    op: Operator, gens: Dict[str, VectorField], r: int = 4, spec: Optional[JetSpec] = None
) -> Dict[str, ZeroVerdict]:
    """Per-generator verdict that ``[d, Q_(r)]`` vanishes on the base and below order r."""
    spec = spec or vorticity_spec()
    op = tuple(sp.sympify(h) for h in op)
    if max(spec.order_of(h) for h in op) > r - 1:
        raise OrderOverflow("operator coefficients must have order below %d" % r)
    dcoef = truncated_operator_field(op, r, spec)
    dfield = VectorField(dcoef, canonical=False)
    out = {}
    for name, q in gens.items():
        pf = ProlongedField(point_part(q, spec), spec)
        exprs = []
        for c, dc in dcoef.items():
            qc = pf.coefficient(c)
            exprs.append(dfield.apply(qc, canonical=False) - pf.apply(dc, canonical=False))
        out[name] = combine(is_zero_many(exprs))
    return out


# ---------------------------------------------------------------- independence


def _has_kernels(e) -> bool:
    e = sp.sympify(e)
    if e.atoms(sp.exp, sp.log, sp.sin, sp.cos, sp.atan, sp.Function):
        return True
    return any(not p.exp.is_Integer for p in e.atoms(sp.Pow))


def functional_independence(
    exprs: Sequence, spec: Optional[JetSpec] = None, samples: int = 10, seed: Optional[int] = None
) -> int:
    """Rank of the Jacobian with respect to base and jet coordinates.

    Rational expressions are ranked exactly over the rationals; otherwise the
    Jacobian is evaluated at high precision and ranked by a singular-value gap.
    The maximum over the samples is returned.
    """
    spec = spec or vorticity_spec()
    exprs = [sp.sympify(e) for e in exprs]
    seed = settings().seed if seed is None else seed
    variables = sorted(set().union(*[e.free_symbols for e in exprs]) if exprs else set(), key=lambda s: s.name)
    if not exprs or not variables:
        return 0
    jac = [[sp.diff(e, v) for v in variables] for e in exprs]
    exact = not any(_has_kernels(e) for e in exprs)
    best = 0
    if exact:
        for k in range(samples):
            for attempt in range(32):
                pt = sample_point(variables, seed, k, attempt)
                pt = {s: sp.Rational(v.numerator, v.denominator) for s, v in pt.items()}
                try:
                    M = sp.Matrix([[j.xreplace(pt) for j in row] for row in jac])
                except ZeroDivisionError:
                    continue
                if any(not v.is_Rational for v in M):
                    continue
                best = max(best, M.rank())
                break
        return best
    ev = Evaluator(settings().prec_bits, seed)
    ctx = ev.ctx
    flat = [j for row in jac for j in row]
    for k in range(samples):
        for attempt in range(32):
            pt = sample_point(variables, seed, k, attempt)
            cpt = {s: ctx.mpf(v.numerator) / v.denominator for s, v in pt.items()}
            try:
                vals = ev.evaluate_many(flat, cpt)
            except Exception:
                continue
            n = len(variables)
            M = ctx.matrix([[vals[i * n + j] for j in range(n)] for i in range(len(exprs))])
            sv = ctx.svd_r(M, compute_uv=False)
            svs = sorted([abs(s) for s in sv], reverse=True)
            if not svs or svs[0] == 0:
                best = max(best, 0)
                break
            tol = svs[0] * ctx.mpf(2) ** (-ctx.prec // 2)
            best = max(best, sum(1 for s in svs if s > tol))
            break
    return best


# ---------------------------------------------------------------- catalogs


@dataclass
class CatalogEntry:
    name: str
    source: str
    expr: object
    expected: str = "invariant"
    literal: object = None
    literal_source: str = ""


@dataclass
class InvariantCatalog:
    name: str
    algebra: str
    order: int
    invariants: List[CatalogEntry] = field(default_factory=list)
    operators: List[CatalogEntry] = field(default_factory=list)
    rank: Optional[int] = None
    notes: str = ""

    def generators(self) -> Dict[str, VectorField]:
        return algebra(self.algebra)


def _load_yaml(name: str):
    with resources.files("invparam.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return yaml.safe_load(fh)


def _operator(op, ctx):
    coeffs = tuple(parse(str(op.get(v, "0")), ctx) for v in ("t", "x", "y"))
    src = "; ".join("%s: %s" % (v, op.get(v, "0")) for v in ("t", "x", "y"))
    return src, coeffs


def load_catalogs(spec: Optional[JetSpec] = None) -> Dict[str, InvariantCatalog]:
    spec = spec or vorticity_spec()
    ctx = catalog_context(spec)
    data = _load_yaml("invariants.yaml")
    out = {}
    for c in data["catalogs"]:
        cat = InvariantCatalog(c["name"], c["algebra"], int(c.get("order", 3)), rank=c.get("rank"), notes=c.get("notes", ""))
        for inv in c.get("invariants", []):
            entry = CatalogEntry(inv["name"], inv["expr"], parse(inv["expr"], ctx), inv.get("expected", "invariant"))
            if "literal" in inv:
                entry.literal_source = inv["literal"]
                entry.literal = parse(inv["literal"], ctx)
            cat.invariants.append(entry)
        for op in c.get("operators", []):
            src, coeffs = _operator(op, ctx)
            entry = CatalogEntry(op["name"], src, coeffs, op.get("expected", "invariant"))
            if "literal" in op:
                entry.literal_source, entry.literal = _operator(op["literal"], ctx)
            cat.operators.append(entry)
        out[cat.name] = cat
    return out
