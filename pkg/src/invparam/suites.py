"""Verification suites behind the command-line front end.

Every suite returns a :class:`SuiteReport` whose cases are sorted by label,
so the output does not depend on the order in which work was scheduled.
"""

from __future__ import annotations

import configparser
import random
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import sympy as sp

from .algebras import g0_generators, verify_table5
from .jet import SolutionManifold, StructuralError, vorticity_manifold, vorticity_spec
from .liealg import VectorField, check_symmetry
from .report import CaseResult, SuiteReport
from .symcore.expr import normalize, sym
from .symcore.paramfn import ParamFn
from .symcore.parse import ParseContext, ParseError, default_context, parse
from .symcore.zero import ZeroVerdict, combine, is_zero, settings

t, x, y = sym("t"), sym("x"), sym("y")

NUMERIC_TOL = 1e-30


class CheckFileError(ValueError):
    """Malformed check file or generator specification."""


def _timed(fn: Callable, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def _map(fn, jobs, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def _residual_verdict(residuals: Sequence[float], exact: bool = False) -> ZeroVerdict:
    worst = max(residuals) if residuals else 0.0
    if worst == 0.0 and exact:
        return ZeroVerdict("Zero", tuple(residuals))
    if worst < NUMERIC_TOL:
        return ZeroVerdict("UnknownSymbolic", tuple(residuals), "max residual %.3g" % worst)
    return ZeroVerdict("NonZero", tuple(residuals), "max residual %.3g" % worst)


# ---------------------------------------------------------------- commutators


def commutators(printed: bool = False, workers: int = 1) -> SuiteReport:
    """Every cell of the commutator table, or only the printed variants of corrected cells."""
    (checks, literal), secs = _timed(verify_table5, workers)
    rep = SuiteReport("commutators-printed" if printed else "commutators")
    chosen = literal if printed else checks
    each = secs / max(len(checks), 1)
    for c in chosen:
        detail = "" if c.verdict.passes else "expected %s, computed %s" % (c.expected, c.computed)
        rep.add(CaseResult.from_verdict("[%s,%s]" % (c.row, c.col), c.computed, c.verdict, each, detail))
    return rep.sorted()


# ---------------------------------------------------------------- g0


def g0_suite(order: int = 3, workers: int = 1) -> SuiteReport:
    """Symmetry of the vorticity equation under the eight opaque generators."""
    m = vorticity_manifold()
    gens = g0_generators()

    def run(name):
        v, secs = _timed(check_symmetry, gens[name], m, order)
        return CaseResult.from_verdict("g0", name, v, secs)

    rep = SuiteReport("g0")
    rep.add(*_map(run, sorted(gens), workers))
    return rep.sorted()


# ---------------------------------------------------------------- invariants


def invariants_suite(catalogs: Optional[Iterable[str]] = None, printed: bool = False, r: int = 4) -> SuiteReport:
    """Invariants, invariant differentiations and the rank of every shipped catalog."""
    from .invariants import functional_independence, is_differential_invariant, is_invariant_differentiation, load_catalogs

    cats = load_catalogs()
    names = list(catalogs) if catalogs else sorted(cats)
    for n in names:
        if n not in cats:
            raise KeyError("unknown catalog %r (choose from %s)" % (n, ", ".join(sorted(cats))))
    rep = SuiteReport("invariants-printed" if printed else "invariants")
    for n in names:
        cat = cats[n]
        gens = cat.generators()
        for kind, entries in (("invariant", cat.invariants), ("operator", cat.operators)):
            for e in entries:
                if printed and e.literal is None:
                    continue
                target = e.literal if printed else e.expr
                if kind == "invariant":
                    res, secs = _timed(is_differential_invariant, target, gens)
                else:
                    res, secs = _timed(is_invariant_differentiation, target, gens, r)
                rep.add(*_entry_cases(e.name, e.expected, res, secs))
        if cat.rank is not None and not printed:
            exprs = [e.expr for e in cat.invariants if e.expected == "invariant"]
            rank, secs = _timed(functional_independence, exprs)
            rep.add(CaseResult.from_bool(
                "%s.rank" % n, "jacobian", rank == cat.rank, secs, "rank %d, expected %d" % (rank, cat.rank)
            ))
    return rep.sorted()


def _entry_cases(name: str, expected: str, res: Dict[str, ZeroVerdict], secs: float) -> List[CaseResult]:
    each = secs / max(len(res), 1)
    if expected == "invariant":
        return [CaseResult.from_verdict(name, g, v, each) for g, v in res.items()]
    # negative control: at least one generator must reject the entry
    rejected = sorted(g for g, v in res.items() if v.is_nonzero)
    detail = "rejected by %s" % ", ".join(rejected) if rejected else "accepted by every generator"
    return [CaseResult.from_bool(name, "noninvariant", bool(rejected), secs, detail)]


# ---------------------------------------------------------------- adjoint


def adjoint_suite(printed: bool = False, N: int = 6, workers: int = 1) -> SuiteReport:
    from .equiv import check_adjoint_entry, load_adjoint_catalog

    def run(entry):
        chk, secs = _timed(check_adjoint_entry, entry, N, printed)
        detail = chk.error
        k = chk.first_failure()
        if not detail and k is not None:
            detail = "first mismatch at eps^%d" % k
        form = entry.printed if printed else entry.expected
        return CaseResult.from_verdict(entry.name, form, chk.verdict, secs, detail)

    rep = SuiteReport("adjoint-printed" if printed else "adjoint")
    rep.add(*_map(run, load_adjoint_catalog(), workers))
    return rep.sorted()


# ---------------------------------------------------------------- equivalence

EQUIVALENCE_PARTS = ("fixed-points", "gauge", "pushforward", "constraints", "dual-route", "vorticity")


def _sample_uniform_flux(rng: random.Random):
    from .algebras import zx, zy
    from .equiv import _rat

    pool = [t, zx, zy]
    out = []
    for _ in range(2):
        f = sp.Integer(0)
        for _ in range(rng.randint(1, 4)):
            mono = _rat(rng, nonzero=True)
            for _ in range(rng.randint(0, 3)):
                mono *= rng.choice(pool)
            f += mono
        out.append(f)
    return out


def _sample_gauge(rng: random.Random):
    from .equiv import HARMONIC_BASIS, _poly_t, _rat

    chi = _poly_t(rng)
    mons = [sp.Integer(1), x, y, x ** 2, x * y, y ** 2, x ** 3, x ** 2 * y, y ** 3]
    rho = sum(_poly_t(rng, 1) * m for m in mons if rng.random() < 0.5) + _rat(rng, nonzero=True) * x * y ** 2
    return chi, rho


def equivalence_suite(
    parts: Optional[Iterable[str]] = None,
    seed: int = 0,
    transformations: int = 20,
    points: int = 5,
    gauge_samples: int = 50,
    divergence_samples: int = 50,
) -> SuiteReport:
    """Fixed points, gauge invariance, pushforward consistency and class characterizations."""
    from . import equiv as E

    parts = list(parts) if parts else list(EQUIVALENCE_PARTS)
    for p in parts:
        if p not in EQUIVALENCE_PARTS:
            raise KeyError("unknown part %r (choose from %s)" % (p, ", ".join(EQUIVALENCE_PARTS)))
    rep = SuiteReport("equivalence")
    spec = vorticity_spec()
    zeta, zxx = sym("zeta"), sym("zeta_xx")
    zx, zy = sym("zeta_x"), sym("zeta_y")

    if "fixed-points" in parts:
        Hm = E.ClassMember.H(zxx * x + t * zeta ** 2 + zy)
        Fm = E.ClassMember.F(sym("psi_x") * zy + x * zeta + sym("zeta_xy"))
        f1, f2 = zx * x * t + zy ** 2, t * y * zx
        ident = E.G2Transformation()
        t0 = time.perf_counter()
        v1 = is_zero(E.apply_G1(E.G1Transformation.identity(), Fm).exprs[0] - Fm.exprs[0])
        v2 = is_zero(E.apply_G2(ident, Hm).exprs[0] - Hm.exprs[0])
        g = E.apply_G6_f(ident, f1, f2)
        v6 = combine([is_zero(g[0] - f1), is_zero(g[1] - f2)])
        each = (time.perf_counter() - t0) / 3
        rep.add(
            CaseResult.from_verdict("fixed-points", "apply_G1", v1, each),
            CaseResult.from_verdict("fixed-points", "apply_G2", v2, each),
            CaseResult.from_verdict("fixed-points", "apply_G6_f", v6, each),
        )

    if "gauge" in parts:
        rng = random.Random("%d|gauge" % seed)
        for k in range(gauge_samples):
            tr = E.sample_G2(rng, 1 if k % 2 == 0 else -1, "G6")
            chi, rho = _sample_gauge(rng)
            f1, f2 = _sample_uniform_flux(rng)
            v, secs = _timed(lambda: is_zero(E.gauge_divergence(tr, chi, rho, f1, f2)))
            rep.add(CaseResult.from_verdict("gauge/%02d" % k, "divergence", v, secs))

    if "pushforward" in parts:
        rng = random.Random("%d|pushforward" % seed)
        for k in range(transformations):
            eps = 1 if k < (transformations + 1) // 2 else -1
            tr = E.sample_G2(rng, eps)
            member = E.sample_polynomial_H(rng)
            res, secs = _timed(E.consistency_residuals, tr, member, points, seed + k)
            rep.add(CaseResult.from_verdict("pushforward/%02d" % k, "eps=%+d" % eps, _residual_verdict(res), secs))

    if "constraints" in parts:
        rng = random.Random("%d|divergence" % seed)
        for k in range(divergence_samples):
            f1, f2 = _sample_uniform_flux(rng)
            res, secs = _timed(E.class_constraints, E.ClassMember.f(f1, f2, space_independent=True))
            each = secs / len(res)
            for key, v in res.items():
                rep.add(CaseResult.from_verdict("constraints/%02d" % k, key, v, each))

    if "dual-route" in parts:
        a, b, lam = sym("a"), sym("b"), sym("lam")
        beta, sig = ParamFn("beta", (t,))(), ParamFn("sigma", (t,))()
        g1, g2 = ParamFn("gamma1", (t,))(), ParamFn("gamma2", (t,))()
        dl = ParamFn("delta", (t, x, y), harmonic=(1, 2))()
        f1, f2 = zx * x * t + zy ** 2, t * y * zx
        for eps in (1, -1):
            tr = E.G2Transformation(eps, a * t + b, lam, beta, g1, g2, sig, dl, validate=False)

            def route():
                n1, n2 = E.apply_G6_f(tr, f1, f2)
                lhs = E.new_divergence(tr.to_G1(), n1, n2)
                return is_zero(spec.expand_aliases(lhs - E.apply_G2(tr, E.ClassMember.f(f1, f2)).exprs[0]))

            v, secs = _timed(route)
            rep.add(CaseResult.from_verdict("dual-route", "eps=%+d" % eps, v, secs))

    if "vorticity" in parts:
        rng = random.Random("%d|vorticity" % seed)
        for k, eps in enumerate((1, -1)):
            tr = E.sample_G2(rng, eps)
            pf = E.Pushforward(tr.to_G1(), spec)
            zt = pf.expr((0, 2, 0)) + pf.expr((0, 0, 2))
            v, secs = _timed(lambda: is_zero(spec.expand_aliases(E.transformed_vorticity(tr)) - zt))
            rep.add(CaseResult.from_verdict("vorticity/%d" % k, "eps=%+d" % eps, v, secs))
            gx, gy = E.transformed_vorticity_gradient(tr)
            ex = spec.expand_aliases(gx) - (pf.expr((0, 3, 0)) + pf.expr((0, 1, 2)))
            ey = spec.expand_aliases(gy) - (pf.expr((0, 2, 1)) + pf.expr((0, 0, 3)))
            v, secs = _timed(lambda: combine([is_zero(ex), is_zero(ey)]))
            rep.add(CaseResult.from_verdict("vorticity/%d" % k, "gradient", v, secs))
    return rep.sorted()


# ---------------------------------------------------------------- tables


def tables_suite(
    tables: Optional[Iterable[str]] = None,
    printed: bool = False,
    perturb: bool = True,
    workers: int = 1,
) -> SuiteReport:
    """Claimed extensions and kernels of every row, perturbation controls and the JJ^t test."""
    from .classify import jjt_condition, load_tables, trivial_scheme, verify_table_entry

    tabs = load_tables()
    keys = [str(k) for k in tables] if tables else sorted(tabs)
    for k in keys:
        if k not in tabs:
            raise KeyError("unknown table %r" % k)
    schemes = [s for k in keys for s in tabs[k]]
    if not tables and not printed:
        schemes.insert(0, trivial_scheme())
    rep = SuiteReport("tables-printed" if printed else "tables")

    def run(scheme):
        out = []
        if printed:
            if not scheme.literal:
                return out
            r, secs = _timed(verify_table_entry, scheme, True)
        else:
            r, secs = _timed(verify_table_entry, scheme)
        each = secs / max(len(r.entries), 1)
        for e in r.entries:
            out.append(CaseResult.from_verdict(scheme.label, "%s:%s" % (e.role, e.generator), e.verdict, each))
        if printed:
            return out
        if perturb:
            p, secs = _timed(verify_table_entry, scheme, False, True)
            fails = p.failures()
            detail = "rejected by %s" % ", ".join(fails) if fails else "perturbation not detected"
            out.append(CaseResult.from_bool(scheme.label, "perturbed", bool(fails), secs, detail))
        if scheme.table in ("1", "2", "3"):
            (ok, dim), secs = _timed(jjt_condition, scheme.elements())
            out.append(CaseResult.from_bool(scheme.label, "jjt", ok, secs, "intersection dimension %d" % dim))
        return out

    for cases in _map(run, schemes, workers):
        rep.add(*cases)
    return rep.sorted()


# ---------------------------------------------------------------- user checks


def parse_generator(src: str, ctx: Optional[ParseContext] = None, label: str = "") -> VectorField:
    """``"x: -t*y; y: t*x; psi: (x^2+y^2)/2"`` as a point vector field."""
    ctx = ctx or default_context(allow_unknown=True)
    allowed = {n: sym(n) for n in ("t", "x", "y", "psi")}
    coeffs = {}
    for part in src.replace("\n", ";").split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, val = part.partition(":")
        key = key.strip()
        if not sep or not val.strip():
            raise CheckFileError("expected 'coordinate: expression', got %r" % part)
        if key not in allowed:
            raise CheckFileError("unknown coordinate %r (use t, x, y, psi)" % key)
        if allowed[key] in coeffs:
            raise CheckFileError("coordinate %r given twice" % key)
        try:
            coeffs[allowed[key]] = parse(val.strip(), ctx)
        except ParseError as exc:
            raise CheckFileError("in %s: %s" % (key, exc)) from None
    if not coeffs:
        raise CheckFileError("empty generator")
    return VectorField(coeffs, label or src)


def equation_manifold(left: str, principal: str, ctx: Optional[ParseContext] = None) -> SolutionManifold:
    """Solve ``left = 0`` for the principal coordinate (``left`` must be linear in it)."""
    ctx = ctx or default_context(allow_unknown=True)
    spec = ctx.spec
    try:
        lhs = parse(left, ctx)
        p = parse(principal, ctx)
    except ParseError as exc:
        raise CheckFileError(str(exc)) from None
    info = spec.info(p) if isinstance(p, sp.Symbol) else None
    if info is None or info[0] != "coord":
        raise CheckFileError("principal %r is not a jet coordinate" % principal)
    lhs = sp.expand(lhs)
    coef = sp.diff(lhs, p)
    if coef == 0 or p in coef.free_symbols:
        raise CheckFileError("equation is not linear in %s" % principal)
    rest = sp.expand(lhs - coef * p)
    try:
        return SolutionManifold(spec, p, normalize(-rest / coef))
    except (StructuralError, ValueError) as exc:
        raise CheckFileError(str(exc)) from None


def read_check_file(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(delimiters=("=",), interpolation=None, allow_no_value=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise CheckFileError(str(exc).splitlines()[0]) from None
    unknown = set(cp.sections()) - {"equation", "generators", "invariants", "algebra"}
    if unknown:
        raise CheckFileError("unknown section(s): %s" % ", ".join(sorted(unknown)))
    return cp


def _algebra_names(cp: configparser.ConfigParser) -> List[str]:
    if not cp.has_section("algebra"):
        return []
    names = []
    for k, v in cp.items("algebra"):
        src = v if k in ("names", "name", "use") else " ".join([k, v or ""])
        names.extend(n for n in src.replace(",", " ").split() if n)
    return names


def check_suite(text: Optional[str] = None, generators: Sequence[str] = (), r: Optional[int] = None) -> SuiteReport:
    """Run the checks declared in a check file plus any extra generators."""
    from .invariants import ALGEBRAS, algebra, is_differential_invariant

    cp = read_check_file(text or "")
    ctx = default_context(allow_unknown=True)
    gens: Dict[str, VectorField] = {}
    if cp.has_section("generators"):
        for name, src in cp.items("generators"):
            gens[name] = parse_generator(src or "", ctx, name)
    for k, src in enumerate(generators):
        gens["arg%d" % (k + 1) if len(generators) > 1 else "arg"] = parse_generator(src, ctx)
    for name in _algebra_names(cp):
        if name not in ALGEBRAS:
            raise CheckFileError("unknown algebra %r (choose from %s)" % (name, ", ".join(ALGEBRAS)))
        for g, q in algebra(name).items():
            gens["%s.%s" % (name, g)] = q

    rep = SuiteReport("check")
    if cp.has_section("equation"):
        sec = cp["equation"]
        left = sec.get("left") or sec.get("lhs")
        principal = sec.get("principal")
        if not left or not principal:
            raise CheckFileError("[equation] needs 'left' and 'principal'")
        m = equation_manifold(left, principal, ctx)
        if not gens:
            raise CheckFileError("an equation needs generators or an algebra to check")
        for name, q in gens.items():
            v, secs = _timed(check_symmetry, q, m, r)
            rep.add(CaseResult.from_verdict("symmetry", name, v, secs))
    if cp.has_section("invariants"):
        if not gens:
            raise CheckFileError("invariants need generators or an algebra")
        for name, src in cp.items("invariants"):
            try:
                I = parse(src or "", ctx)
            except ParseError as exc:
                raise CheckFileError("invariant %s: %s" % (name, exc)) from None
            res, secs = _timed(is_differential_invariant, I, gens)
            each = secs / max(len(res), 1)
            rep.add(*[CaseResult.from_verdict("invariant/%s" % name, g, v, each) for g, v in res.items()])
    if not rep.cases:
        raise CheckFileError("nothing to check: give an [equation] or [invariants] section")
    return rep.sorted()
