"""Acceptance criteria 1-8.

Each test prints one ``criterion N: PASS|FAIL`` line (collected in the
terminal summary) and asserts the criterion at its stated tolerance and time
limit.  Catalog criteria run against the printed forms; where a printed form
is wrong the test fails and says which.
"""

import random
import time

import pytest
import sympy as sp

import conftest
from invparam import algebras as A
from invparam import equiv as E
from invparam import suites
from invparam.classify import gauge_projection, jjt_condition, load_tables, trivial_scheme, verify_table_entry
from invparam.invariants import functional_independence, is_differential_invariant, is_invariant_differentiation, load_catalogs
from invparam.jet import euler_operator, vorticity_manifold, vorticity_spec, zeta_spec
from invparam.liealg import check_symmetry, commutator, prolong
from invparam.symcore.expr import diff, normalize, sym
from invparam.symcore.paramfn import ParamFn
from invparam.symcore.zero import is_zero

t, x, y = sym("t"), sym("x"), sym("y")


def _report(n, ok, seconds, limit, detail):
    within = limit is None or seconds < limit
    status = "PASS" if ok and within else "FAIL"
    budget = "" if limit is None else " (limit %ds)" % limit
    line = "criterion %d: %s  %s  [%.1fs%s]" % (n, status, detail, seconds, budget)
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok and within, line


def test_criterion_1_commutator_table():
    t0 = time.perf_counter()
    checks, literal = A.verify_table5()
    printed = {(c.row, c.col): c for c in checks}
    printed.update({(c.row, c.col): c for c in literal})
    bad = sorted("[%s,%s]" % k for k, c in printed.items() if not c.verdict.is_zero)
    secs = time.perf_counter() - t0
    detail = "%d/%d printed cells symbolic-zero" % (len(printed) - len(bad), len(printed))
    if bad:
        detail += "; printed cells off: %s" % ", ".join(bad)
    ok, line = _report(1, len(printed) == 100 and not bad, secs, 30, detail)
    assert ok, line


def test_criterion_2_g0_symmetries():
    t0 = time.perf_counter()
    m = vorticity_manifold()
    verdicts = {n: check_symmetry(q, m, 3) for n, q in A.g0_generators().items()}
    secs = time.perf_counter() - t0
    good = [n for n, v in verdicts.items() if v.is_zero]
    ok, line = _report(2, len(verdicts) == 8 and len(good) == 8, secs, 10,
                       "%d/8 generators symbolic-zero at order 3" % len(good))
    assert ok, line


def test_criterion_3_invariant_bases():
    t0 = time.perf_counter()
    cats = load_catalogs()
    b0, j = cats["B0"], cats["j"]
    failures, numeric = [], []

    def record(label, res):
        for g, v in res.items():
            if not v.passes:
                failures.append("%s/%s" % (label, g))
            elif not v.is_zero:
                numeric.append("%s/%s" % (label, g))

    for e in b0.invariants:
        record(e.name, is_differential_invariant(e.literal if e.literal is not None else e.expr, b0.generators(), 4))
    for e in b0.operators:
        record(e.name, is_invariant_differentiation(e.literal if e.literal is not None else e.expr, b0.generators(), 4))
    for e in j.operators:
        if e.expected == "invariant":
            record(e.name, is_invariant_differentiation(e.expr, j.generators(), 4))
    j_inv = [e for e in j.invariants if e.expected == "invariant"]
    for e in j_inv:
        record(e.name, is_differential_invariant(e.expr, j.generators(), 4))
    rank_b0 = functional_independence([e.literal if e.literal is not None else e.expr for e in b0.invariants])
    rank_j = functional_independence([e.expr for e in j_inv])
    secs = time.perf_counter() - t0
    counts_ok = len(b0.invariants) == 6 and len(b0.operators) == 3 and len(j_inv) == 4
    ok = counts_ok and not failures and rank_b0 == 6 and rank_j == 4
    detail = "printed catalog: %d failing (entry/generator), %d numeric-zero, rank B0=%d, rank j=%d" % (
        len(failures), len(numeric), rank_b0, rank_j)
    if failures:
        detail += "; failing: %s" % ", ".join(sorted({f.split("/")[0] for f in failures}))
    ok, line = _report(3, ok, secs, 300, detail)
    assert ok, line


def test_criterion_4_adjoint_actions():
    t0 = time.perf_counter()
    entries = E.load_adjoint_catalog()
    results = [E.check_adjoint_entry(e, 6, printed=True) for e in entries]
    secs = time.perf_counter() - t0
    bad = [c.name for c in results if not c.exact]
    detail = "%d/%d printed closed forms exact through order 6" % (len(results) - len(bad), len(results))
    if bad:
        detail += "; off: %s" % ", ".join(bad)
    ok, line = _report(4, not bad, secs, 120, detail)
    assert ok, line


def test_criterion_5_equivalence_transformations():
    t0 = time.perf_counter()
    rep = suites.equivalence_suite(["fixed-points", "gauge", "pushforward", "constraints"], seed=0)
    secs = time.perf_counter() - t0
    groups = {}
    for c in rep.cases:
        groups.setdefault(c.case.split("/")[0], []).append(c)
    expected = {"fixed-points": 3, "gauge": 50, "pushforward": 20, "constraints": 250}
    sizes_ok = all(len(groups.get(k, [])) == n for k, n in expected.items())
    bad = [c for c in rep.cases if c.verdict in ("nonzero", "error")]
    detail = "%d cases (%s), %d symbolic-zero, %d numeric-zero below 1e-30, %d failing" % (
        len(rep.cases), ", ".join("%s %d" % (k, len(groups.get(k, []))) for k in expected),
        rep.count("symbolic-zero"), rep.count("numeric-zero"), len(bad))
    ok, line = _report(5, sizes_ok and not bad, secs, 300, detail)
    assert ok, line


def test_criterion_6_tables():
    t0 = time.perf_counter()
    tables = load_tables()
    failing, unperturbed, jjt_bad, numeric = [], [], [], 0
    for k in ("1", "2", "3", "4"):
        for s in tables[k]:
            # table "1" rows are stored in their symmetric reading; other literal variants run as stored
            printed = bool(s.literal) and k != "1"
            rep = verify_table_entry(s, literal=printed)
            if not rep.passed:
                failing.append("%s(%s)" % (s.label, ", ".join(rep.failures())))
            numeric += sum(1 for e in rep.entries if e.verdict.passes and not e.verdict.is_zero)
            if not verify_table_entry(s, perturb=True).failures():
                unperturbed.append(s.label)
            if k != "4":
                ok_j, dim = jjt_condition(s.elements())
                if not ok_j:
                    jjt_bad.append("%s(dim %d)" % (s.label, dim))
    triv = verify_table_entry(trivial_scheme())
    triv_ext = [e for e in triv.entries if e.role == "extension" and e.verdict.passes]
    secs = time.perf_counter() - t0
    ok = not failing and not unperturbed and not jjt_bad and len(triv_ext) == 5
    detail = "%d rows, %d failing, perturbation missed %d, JJt violations %d, trivial scheme admits %d/5, %d numeric-zero" % (
        sum(len(v) for v in tables.values()), len(failing), len(unperturbed), len(jjt_bad), len(triv_ext), numeric)
    if failing:
        detail += "; failing: %s" % "; ".join(failing)
    ok, line = _report(6, ok, secs, 600, detail)
    assert ok, line


def test_criterion_7_kernel():
    t0 = time.perf_counter()
    args = (t, sym("zeta_x"), sym("zeta_y"))
    member = E.ClassMember.f(ParamFn("F1", args)(), ParamFn("F2", args)(), space_independent=True)
    m = vorticity_manifold(member.H_expr)
    g1, g2, chi = (ParamFn(n, (t,))() for n in ("gamma1", "gamma2", "chi"))
    kernel = {"X": A.X(g1), "Y": A.Y(g2), "Z": A.Z(chi)}
    verdicts = {n: check_symmetry(A.project(q), m) for n, q in kernel.items()}
    gauge = gauge_projection()
    secs = time.perf_counter() - t0
    ok = all(v.passes for v in verdicts.values()) and all(v.is_zero for v in gauge.values())
    detail = "kernel %s; gauge projections %s" % (
        ", ".join("%s %s" % (n, v.label) for n, v in verdicts.items()),
        ", ".join("%s %s" % (n, v.label) for n, v in gauge.items()))
    ok, line = _report(7, ok, secs, None, detail)
    assert ok, line


# ---------------------------------------------------------------- criterion 8


def _rand_expr(rng, depth=3):
    atoms = [t, x, y, ParamFn("beta", (t,))(), ParamFn("delta", (t, x, y), harmonic=(1, 2))(), sp.Integer(rng.randint(-3, 3))]
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(atoms)
    k = rng.randrange(5)
    a = _rand_expr(rng, depth - 1)
    if k == 0:
        return rng.choice([sp.sin, sp.cos, sp.exp])(a)
    if k == 1:
        return a ** rng.randint(1, 3)
    b = _rand_expr(rng, depth - 1)
    return a + b if k == 2 else (a * b if k == 3 else a - b)


def _rand_jet_poly(rng, names):
    pool = [sym(n) for n in names] + [t, x, y]
    return sum(sp.Rational(rng.randint(-5, 5), rng.randint(1, 3)) * sp.Mul(*rng.choices(pool, k=rng.randint(1, 3)))
               for _ in range(rng.randint(1, 4)))


def _g1_instance(name, k):
    f = lambda n, a=(t,), **kw: ParamFn("%s%d" % (n, k), a, **kw)()
    return {
        "D1": A.D1, "D2": A.D2, "Dt": A.Dt,
        "J": lambda: A.J(f("b")), "X": lambda: A.X(f("g")), "Y": lambda: A.Y(f("h")),
        "R": lambda: A.R(f("s")), "Z": lambda: A.Z(f("c")),
        "H": lambda: A.H(f("d", (t, x, y), harmonic=(1, 2))), "G": lambda: A.G(f("r", (t, x, y))),
    }[name]()


def test_criterion_8_property_suites():
    rng = random.Random(8)
    spec, zs = vorticity_spec(), zeta_spec()
    psi_jet = ("psi", "psi_x", "psi_y", "psi_t", "psi_xx", "psi_xy", "psi_yy")
    zeta_jet = ("zeta", "zeta_x", "zeta_y", "zeta_xx", "zeta_xy", "zeta_yy")
    fails = {}

    def tally(name, ok):
        fails.setdefault(name, 0)
        fails[name] += 0 if ok else 1

    t0 = time.perf_counter()
    for _ in range(50):
        e = _rand_expr(rng)
        n = normalize(e)
        tally("normalize idempotence", normalize(n) == n)
        a, b = rng.sample([t, x, y], 2)
        tally("mixed partials", normalize(diff(diff(e, a), b) - diff(diff(e, b), a)) == 0)
    for _ in range(50):
        P, Q = _rand_jet_poly(rng, psi_jet), _rand_jet_poly(rng, psi_jet)
        v = rng.choice("txy")
        D = lambda e: spec.total_derivative(e, v)
        tally("Leibniz", sp.expand(D(P * Q) - D(P) * Q - P * D(Q)) == 0)
        i, j = rng.sample("txy", 2)
        Dij = spec.total_derivative(spec.total_derivative(P, i), j)
        Dji = spec.total_derivative(spec.total_derivative(P, j), i)
        tally("D_i D_j commutation", sp.expand(Dij - Dji) == 0)
    g0 = A.g0_generators()
    names0 = sorted(g0)
    for _ in range(20):
        a = g0[rng.choice(names0)].scale(rng.randint(1, 4)) + g0[rng.choice(names0)]
        b = g0[rng.choice(names0)].scale(sp.Rational(-1, rng.randint(1, 3))) + g0[rng.choice(names0)]
        lhs = prolong(commutator(a, b), 2)
        rhs = commutator(prolong(a, 2), prolong(b, 2))
        tally("prolongation homomorphism (20 g0 pairs)", A.fields_equal(lhs, rhs).is_zero)
    names1 = sorted(A.g1_generators())
    for _ in range(20):
        a, b, c = (_g1_instance(rng.choice(names1), k) for k in range(3))
        jac = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
        tally("Jacobi (20 g1 triples)", A.fields_equal(jac, jac.scale(0)).is_zero)
    for _ in range(50):
        f1, f2 = _rand_jet_poly(rng, zeta_jet), _rand_jet_poly(rng, zeta_jet)
        H = zs.total_derivative(f1, "x") + zs.total_derivative(f2, "y")
        tally("Euler of divergence", is_zero(euler_operator(H, zs)).is_zero)
    secs = time.perf_counter() - t0
    total = sum(fails.values())
    detail = "%d failures (%s)" % (total, ", ".join("%s %d" % kv for kv in fails.items()))
    ok, line = _report(8, total == 0, secs, None, detail)
    assert ok, line
