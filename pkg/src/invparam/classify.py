"""Parameterization schemes, their claimed symmetry extensions and subalgebra lists."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import sympy as sp

from .algebras import EQUIV_KEYS, K, G, decompose, element_context, parse_element, project
from .equiv import ClassMember
from .invariants import _load_yaml
from .jet import vorticity_manifold, vorticity_spec
from .liealg import VectorField, check_symmetry
from .symcore.expr import StructuralError, normalize, sym
from .symcore.paramfn import ParamFn
from .symcore.parse import ParseContext, parse
from .symcore.zero import ZeroVerdict, combine, is_zero, is_zero_many

t, x, y, psi = sym("t"), sym("x"), sym("y"), sym("psi")
zx, zy, f1s, f2s = sym("zeta_x"), sym("zeta_y"), sym("f1"), sym("f2")

KERNEL = {
    "uniform": ["X(gamma1(t))", "Y(gamma2(t))", "Z(chi(t))"],
    "general": ["Z(chi(t))"],
}


def _shared_macros() -> Dict[str, sp.Expr]:
    return {
        "R": sp.sqrt(zx ** 2 + zy ** 2),
        "Phi": sp.atan(zy / zx),
        "r": sp.sqrt(x ** 2 + y ** 2),
        "varphi": sp.atan(y / x),
    }


def scheme_context(constants: Sequence[str] = ()) -> ParseContext:
    ctx = ParseContext(spec=vorticity_spec(), expand_aliases=False, macros=_shared_macros())
    ctx.declare(*constants)
    return ctx


@dataclass
class ParameterizationScheme:
    """A row of a classification table.

    ``I1``/``I2`` are opaque functions of the declared arguments, or constants
    when there are none.  ``extension`` holds equivalence-algebra elements;
    their projections are the claimed point symmetries.
    """

    label: str
    table: str
    extension: List[str]
    class_tag: str
    args: List[str]
    f1_src: str
    f2_src: str
    constants: List[str] = field(default_factory=list)
    let: Dict[str, str] = field(default_factory=dict)
    conditions: str = ""
    literal: Dict[str, str] = field(default_factory=dict)
    note: str = ""

    def context(self, literal: bool = False) -> ParseContext:
        ctx = scheme_context(self.constants)
        let = dict(self.let)
        if literal:
            let.update(self.literal.get("let", {}))
        for name, src in let.items():
            ctx.macros[name] = parse(src, ctx)
        args = [parse(a, ctx) for a in self.args]
        if args:
            I1, I2 = ParamFn("I1", args)(), ParamFn("I2", args)()
        else:
            ctx.declare("I1", "I2")
            I1, I2 = sym("I1"), sym("I2")
        q = zx ** 2 + zy ** 2
        ctx.macros.update(I1=I1, I2=I2, P1=(zx * I1 - zy * I2) / q, P2=(zy * I1 + zx * I2) / q)
        return ctx

    def fluxes(self, literal: bool = False) -> Tuple[sp.Expr, sp.Expr]:
        ctx = self.context(literal)
        s1 = self.literal.get("f1", self.f1_src) if literal else self.f1_src
        s2 = self.literal.get("f2", self.f2_src) if literal else self.f2_src
        f = (parse(s1, ctx), parse(s2, ctx))
        if self.class_tag == "uniform" and any(e.has(x) or e.has(y) for e in f):
            raise StructuralError("%s: space-independent scheme depends on x or y" % self.label)
        return f

    def member(self, literal: bool = False, perturb: bool = False) -> ClassMember:
        a, b = self.fluxes(literal)
        if perturb:
            a = a + zx * perturbation_function(self.class_tag)
        return ClassMember("f", (a, b), self.class_tag == "uniform")

    def elements(self) -> List[VectorField]:
        ctx = element_context()
        ctx.declare(*self.constants)
        return [parse_element(s, ctx) for s in self.extension]

    def generators(self) -> Dict[str, VectorField]:
        return {s: project(q) for s, q in zip(self.extension, self.elements())}

    def kernel(self) -> Dict[str, VectorField]:
        ctx = element_context()
        return {s: project(parse_element(s, ctx)) for s in KERNEL[self.class_tag]}


def perturbation_function(class_tag: str):
    """Fresh opaque function whose argument list is not invariant under any extension."""
    args = (t, zx, zy) if class_tag == "uniform" else (t, x, y, zx, zy)
    return ParamFn("W", args)()


@dataclass
class GeneratorVerdict:
    generator: str
    role: str
    verdict: ZeroVerdict


@dataclass
class TableReport:
    label: str
    entries: List[GeneratorVerdict]
    variant: str = "stated"

    @property
    def verdict(self) -> ZeroVerdict:
        return combine([e.verdict for e in self.entries])

    @property
    def passed(self) -> bool:
        return self.verdict.passes

    def failures(self) -> List[str]:
        return [e.generator for e in self.entries if not e.verdict.passes]


def verify_table_entry(
    scheme: ParameterizationScheme, literal: bool = False, perturb: bool = False, kernel: bool = True, workers: int = 1
) -> TableReport:
    """Symmetry check of every claimed generator (and the kernel) on the scheme's equation.

    With ``perturb=True`` the flux ``f1`` gets an extra ``zeta_x W`` with
    opaque ``W``; the report is then expected to contain failures.
    """
    m = vorticity_manifold(scheme.member(literal, perturb).H_expr)
    jobs = [(n, "extension", q) for n, q in scheme.generators().items()]
    if kernel and not perturb:
        jobs += [(n, "kernel", q) for n, q in scheme.kernel().items()]

    def run(job):
        n, role, q = job
        return GeneratorVerdict(n, role, check_symmetry(q, m))

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            entries = list(ex.map(run, jobs))
    else:
        entries = [run(j) for j in jobs]
    variant = "perturbed" if perturb else ("literal" if literal else "stated")
    return TableReport(scheme.label, entries, variant)


def invariant_surface_residual(Q: VectorField, scheme: ParameterizationScheme) -> Tuple[sp.Expr, sp.Expr]:
    """``xi^mu f^i_mu + theta^j f^i_{zeta_j} - phi^i`` with the scheme's fluxes substituted."""
    extra = [k for k in Q.keys() if k not in EQUIV_KEYS]
    if extra:
        raise StructuralError("operator has components outside the equivalence space: %s" % extra)
    fl = scheme.fluxes()
    base = (t,) if scheme.class_tag == "uniform" else (t, x, y)
    if scheme.class_tag == "uniform" and any(sp.diff(Q[c], v) != 0 for c in (zx, zy, f1s, f2s) for v in (x, y)):
        raise StructuralError("operator mixes x, y into a space-independent class")
    sub = {f1s: fl[0], f2s: fl[1]}
    out = []
    for f in fl:
        lhs = sum(Q[v] * sp.diff(f, v) for v in base) + Q[zx] * sp.diff(f, zx) + Q[zy] * sp.diff(f, zy)
        rhs = (Q[f1s] if f is fl[0] else Q[f2s])
        out.append(normalize(lhs - sp.sympify(rhs).xreplace(sub)))
    return tuple(out)


# ---------------------------------------------------------------- the <J, J^t> condition

JJT_BASIS = ("D1", "Dt", "D2", "J1", "Jt")


def jjt_coordinates(q: VectorField) -> List[sp.Expr]:
    """Coordinates of the projection of ``q`` in ``D1, Dt, D2, J1, Jt``."""
    dec = decompose(q)
    if not dec.matched:
        raise StructuralError("element outside the equivalence span")
    beta = sp.expand(dec.beta)
    u, v = beta.subs(t, 0), sp.diff(beta, t)
    point = [dec.gamma1, dec.gamma2, dec.sigma, sp.expand(beta - u - v * t)]
    if any(sp.diff(c, s) != 0 for c in (dec.c0, dec.c1, dec.c2, u, v) for s in (t, x, y)) or any(e != 0 for e in point):
        raise StructuralError("element outside span(D1, Dt, D2, J1, Jt) modulo gauge")
    return [dec.c1, dec.c0, dec.c2, u, v]


def jjt_intersection(basis: Sequence[VectorField]) -> int:
    """``dim(span(basis) ∩ <J1, Jt>)`` after projection to point fields."""
    M = sp.Matrix([jjt_coordinates(q) for q in basis])
    W = sp.Matrix([[0, 0, 0, 1, 0], [0, 0, 0, 0, 1]])
    return M.rank() + 2 - M.col_join(W).rank()


def jjt_condition(basis: Sequence[VectorField]) -> Tuple[bool, int]:
    d = jjt_intersection(basis)
    return d in (0, 2), d


# ---------------------------------------------------------------- catalogs


def _scheme(row: dict, table: str) -> ParameterizationScheme:
    return ParameterizationScheme(
        label=row["id"],
        table=table,
        extension=list(row["extension"]),
        class_tag=str(row["class"]),
        args=list(row.get("args", [])),
        f1_src=str(row["f1"]),
        f2_src=str(row["f2"]),
        constants=list(row.get("constants", [])),
        let=dict(row.get("let", {})),
        conditions=row.get("conditions", ""),
        literal=dict(row.get("literal", {})),
        note=row.get("note", ""),
    )


def load_tables() -> Dict[str, List[ParameterizationScheme]]:
    data = _load_yaml("tables.yaml")
    return {k: [_scheme(r, k) for r in v["rows"]] for k, v in data["tables"].items()}


def trivial_scheme() -> ParameterizationScheme:
    return _scheme(_load_yaml("tables.yaml")["trivial"], "trivial")


@dataclass
class SubalgebraRecord:
    """Basis of a subalgebra of the equivalence algebra with its side conditions."""

    label: str
    provenance: str
    basis: List[str]
    constants: List[str] = field(default_factory=list)
    functions: Dict[str, str] = field(default_factory=dict)
    conditions: str = ""
    cases: List[Dict[str, str]] = field(default_factory=lambda: [{}])
    note: str = ""

    def elements(self, case: Optional[Dict[str, str]] = None) -> List[VectorField]:
        ctx = element_context()
        ctx.declare(*self.constants)
        for name, src in self.functions.items():
            ctx.macros[name] = parse(src, ctx)
        out = [parse_element(s, ctx) for s in self.basis]
        if case:
            sub = {sym(k): parse(v, ctx) for k, v in case.items()}
            out = [q.subs(sub) for q in out]
        return out


def load_subalgebras() -> List[SubalgebraRecord]:
    data = _load_yaml("subalgebras.yaml")
    out = []
    for lst in data["lists"]:
        for r in lst["records"]:
            out.append(
                SubalgebraRecord(
                    label=r["label"],
                    provenance=lst["name"],
                    basis=list(r["basis"]),
                    constants=list(r.get("constants", [])),
                    functions=dict(r.get("functions", {})),
                    conditions=r.get("conditions", ""),
                    cases=[dict(c) for c in r.get("cases", [{}])],
                    note=r.get("note", ""),
                )
            )
    return out


def catalog() -> Dict[str, object]:
    """Everything shipped: the four tables, the trivial scheme and the subalgebra lists."""
    return {"tables": load_tables(), "trivial": trivial_scheme(), "subalgebras": load_subalgebras()}


# ---------------------------------------------------------------- closure of subalgebra records


def _field_vector(q: VectorField, keys) -> List[sp.Expr]:
    return [q[k] for k in keys]


def closure_check(rec: SubalgebraRecord, seed: int = 0, draws: int = 2) -> ZeroVerdict:
    """Every commutator of basis elements lies in the span of the basis.

    Symbolic constants are replaced by random rationals for each case; the
    span coefficients are found from sampled linear equations and the
    residual is then zero-tested.
    """
    rng = random.Random("%d|%s" % (seed, rec.label))
    verdicts = []
    for case in rec.cases:
        for _ in range(draws):
            vals = {sym(c): sp.Rational(rng.randint(1, 7), rng.randint(1, 4)) for c in rec.constants if c not in case}
            elems = [q.subs(vals) for q in rec.elements(case)]
            for i in range(len(elems)):
                for j in range(i + 1, len(elems)):
                    verdicts.append(_in_span(_commutator(elems[i], elems[j]), elems, rng))
    return combine(verdicts) if verdicts else ZeroVerdict("Zero")


def _commutator(a, b):
    from .liealg import commutator

    return commutator(a, b)


def _in_span(q: VectorField, elems: Sequence[VectorField], rng: random.Random) -> ZeroVerdict:
    keys = sorted(set(q.keys()).union(*[e.keys() for e in elems]), key=str)
    cs = sp.symbols("c0:%d" % len(elems))
    resid = [q[k] - sum(c * e[k] for c, e in zip(cs, elems)) for k in keys]
    if not resid:
        return ZeroVerdict("Zero")
    free = sorted(set().union(*[sp.sympify(r).free_symbols for r in resid]) - set(cs), key=str)
    eqs = []
    for _ in range(3):
        pt = {s: sp.Rational(rng.randint(1, 9), rng.randint(1, 5)) for s in free}
        eqs += [sp.sympify(r).xreplace(pt) for r in resid]
    eqs = [sp.nsimplify(e) if e.has(sp.Float) else e for e in eqs]
    sol = sp.linsolve(eqs, cs)
    if not sol:
        return ZeroVerdict("NonZero", (), "commutator leaves the span")
    vals = dict(zip(cs, next(iter(sol))))
    vals = {c: v.subs({cc: 0 for cc in cs}) for c, v in vals.items()}
    return combine(is_zero_many([r.subs(vals) for r in resid]))


def gauge_projection() -> Dict[str, ZeroVerdict]:
    """Gauge operators have vanishing point parts."""
    delta = ParamFn("delta", (t,))()
    rho = ParamFn("rho", (t, x, y))()
    out = {}
    for name, q in (("K(delta)", K(delta)), ("G(rho)", G(rho))):
        p = project(q)
        out[name] = combine(list(p.zero_verdicts().values())) if p.keys() else ZeroVerdict("Zero")
    return out
