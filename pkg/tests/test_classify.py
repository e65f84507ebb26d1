import pytest

from invparam.algebras import D2, Dt, J, K, Z
from invparam.classify import (
    ParameterizationScheme,
    catalog,
    closure_check,
    gauge_projection,
    invariant_surface_residual,
    jjt_condition,
    jjt_intersection,
    load_subalgebras,
    load_tables,
    trivial_scheme,
    verify_table_entry,
)
from invparam.symcore.expr import StructuralError, sym
from invparam.symcore.paramfn import ParamFn
from invparam.symcore.zero import is_zero

t, x, y = sym("t"), sym("x"), sym("y")


@pytest.fixture(scope="module")
def tables():
    return load_tables()


def _row(tables, label):
    return next(s for rows in tables.values() for s in rows if s.label == label)


class TestCatalog:
    def test_row_counts(self, tables):
        assert {k: len(v) for k, v in tables.items()} == {"1": 5, "2": 8, "3": 5, "4": 5}

    def test_optimal_list(self):
        recs = [r for r in load_subalgebras() if r.provenance == "optimal"]
        assert [r.label for r in recs] == ["A1", "A2", "A3", "A4", "A5", "A6"]

    def test_side_condition_verbatim(self):
        rec = next(r for r in load_subalgebras() if r.label == "2.4")
        assert "compatible if and only if delta2(t) = t*delta1(t)" in rec.conditions

    def test_everything_has_provenance(self):
        cat = catalog()
        assert all(r.provenance for r in cat["subalgebras"])
        assert cat["trivial"].label == "trivial"

    def test_space_independent_tag_enforced(self):
        s = ParameterizationScheme("bad", "x", [], "uniform", [], "x*zeta_x", "0")
        with pytest.raises(StructuralError):
            s.fluxes()


class TestVerifyRows:
    @pytest.mark.parametrize("label", ["T3.4", "T2.8"])
    def test_row_passes(self, tables, label):
        rep = verify_table_entry(_row(tables, label))
        assert rep.passed, rep.failures()
        assert {e.role for e in rep.entries} == {"extension", "kernel"}

    def test_trivial_scheme_admits_five_generators(self):
        rep = verify_table_entry(trivial_scheme())
        ext = [e for e in rep.entries if e.role == "extension"]
        assert len(ext) == 5 and all(e.verdict.is_zero for e in ext)

    def test_perturbation_is_rejected(self, tables):
        rep = verify_table_entry(_row(tables, "T3.4"), perturb=True)
        assert rep.variant == "perturbed" and rep.failures()

    def test_table4_kernel_is_Z_only(self, tables):
        s = _row(tables, "T4.5")
        assert list(s.kernel()) == ["Z(chi(t))"]

    def test_literal_table1_reading_fails(self, tables):
        rep = verify_table_entry(_row(tables, "T1.2"), literal=True)
        assert rep.failures() == ["Dt + c*D2 + chat*Jt"]


class TestJJt:
    def test_combined_generator(self):
        assert jjt_condition([D2() + J(t)]) == (True, 0)

    def test_rotation_alone(self):
        assert jjt_condition([J(1)]) == (False, 1)

    def test_full_pair(self):
        assert jjt_condition([D2(), J(1), J(t)]) == (True, 2)

    def test_outside_span(self):
        with pytest.raises(StructuralError):
            jjt_intersection([J(t ** 2)])

    def test_all_table_extensions(self, tables):
        for k in ("1", "2", "3"):
            for s in tables[k]:
                ok, dim = jjt_condition(s.elements())
                assert ok, (s.label, dim)


class TestInvariantSurface:
    def test_gauge_operator_incompatible(self, tables):
        kappa = ParamFn("kappa", (t,))()
        res = invariant_surface_residual(K(kappa), _row(tables, "T3.5"))
        assert any(is_zero(r).is_nonzero for r in res)

    def test_time_translation(self, tables):
        assert invariant_surface_residual(Dt(), _row(tables, "T3.5")) == (0, 0)

    def test_Z_direction(self, tables):
        chi = ParamFn("chi", (t,))()
        assert invariant_surface_residual(Z(chi), _row(tables, "T2.8")) == (0, 0)

    def test_rejects_non_equivalence_components(self, tables):
        from invparam.liealg import VectorField

        with pytest.raises(StructuralError):
            invariant_surface_residual(VectorField({sym("psi_x"): 1}), _row(tables, "T3.5"))


def test_gauge_operators_project_to_zero():
    assert all(v.is_zero for v in gauge_projection().values())


def test_closure_of_all_records():
    bad = [r.label for r in load_subalgebras() if not closure_check(r).passes]
    assert bad == []


def test_closure_detects_non_subalgebra():
    from invparam.classify import SubalgebraRecord

    rec = SubalgebraRecord("bogus", "test", ["D1", "X(gamma1(t))"])
    assert closure_check(rec).is_nonzero
