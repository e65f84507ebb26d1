from math import comb

import pytest
import sympy as sp

from invparam.jet import (
    JetSpec,
    OrderOverflow,
    SolutionManifold,
    euler_operator,
    max_order,
    multi_indices,
    on_manifold,
    poisson_bracket,
    set_max_order,
    total_derivative,
    vorticity_manifold,
    vorticity_spec,
    zeta_spec,
)
from invparam.symcore.expr import StructuralError, normalize, sym

from oracles import U, X, Y, poisson, to_jet

t, x, y = sym("t"), sym("x"), sym("y")
P = sym


class TestJetSpec:
    @pytest.mark.parametrize("p,q,r", [(3, 1, 0), (3, 1, 3), (2, 1, 4), (1, 2, 2)])
    def test_coordinate_count(self, p, q, r):
        s = JetSpec("txy"[:p], ["u", "v"][:q], r)
        assert len(s.coords(r)) == p + q * comb(p + r, r)
        assert s.coord_count(r) == p + q * comb(p + r, r)

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            JetSpec((), ("psi",), 2)

    def test_graded_order(self):
        idx = multi_indices(3, 2)
        assert idx[0] == (0, 0, 0)
        assert [sum(a) for a in idx] == sorted(sum(a) for a in idx)

    def test_names(self):
        s = vorticity_spec()
        assert s.coord(0, (1, 0, 2)) == P("psi_tyy")
        assert s.parse_name("psi_xyx")[2] == (0, 2, 1)

    def test_order_cap(self):
        s = vorticity_spec(2)
        with pytest.raises(OrderOverflow):
            s.total_derivative(P("psi_xx"), 1)

    def test_global_cap(self):
        old = max_order()
        try:
            set_max_order(4)
            assert vorticity_spec().order == 4
        finally:
            set_max_order(old)
        assert vorticity_spec().order == old


class TestTotalDerivative:
    def test_basic(self):
        assert total_derivative(P("psi"), "x") == P("psi_x")

    def test_leibniz(self):
        e = total_derivative(P("psi_x") * P("psi_y"), "t")
        assert e == P("psi_tx") * P("psi_y") + P("psi_x") * P("psi_ty")

    def test_alias(self):
        zeta = P("psi_xx") + P("psi_yy")
        assert total_derivative(zeta, "x") == P("psi_xxx") + P("psi_xyy")

    def test_explicit_dependence(self):
        assert total_derivative(t * x * P("psi"), "t") == x * P("psi") + t * x * P("psi_t")


class TestPoisson:
    def test_self(self):
        assert poisson_bracket(P("psi"), P("psi")) == 0

    def test_coordinates(self):
        assert poisson_bracket(x, y) == 1

    def test_psi_zeta_against_oracle(self):
        zeta = P("psi_xx") + P("psi_yy")
        ref = poisson(P("psi"), zeta)
        assert sp.expand(poisson_bracket(P("psi"), zeta) - ref) == 0
        hand = P("psi_x") * (P("psi_xxy") + P("psi_yyy")) - P("psi_y") * (P("psi_xxx") + P("psi_xyy"))
        assert sp.expand(ref - hand) == 0


class TestManifold:
    def test_solved_form(self):
        m = vorticity_manifold()
        s = m.spec
        got = s.expand_aliases(on_manifold(P("psi_tyy"), m))
        ref = -P("psi_txx") - P("psi_x") * (P("psi_xxy") + P("psi_yyy")) + P("psi_y") * (P("psi_xxx") + P("psi_xyy"))
        assert sp.expand(got - ref) == 0

    def test_parametric_untouched(self):
        assert on_manifold(P("psi_xx"), vorticity_manifold()) == P("psi_xx")

    def test_derivative_orders_agree(self):
        m = vorticity_manifold()
        s = m.spec
        a = m.on_manifold(s.total_derivative(P("psi_tyy"), 1))
        b = m.on_manifold(s.total_derivative(m.rhs, 1))
        assert normalize(s.expand_aliases(a - b)) == 0

    def test_idempotent(self):
        m = vorticity_manifold(sym("zeta_x") * t)
        e = P("psi_tyyy") * P("psi_x") + P("psi_ttyy")
        once = m.on_manifold(e)
        assert normalize(m.on_manifold(once) - once) == 0

    def test_consequence_cap(self):
        m = vorticity_manifold(spec=vorticity_spec(4))
        with pytest.raises(OrderOverflow):
            m.consequence((0, 3, 0))

    def test_rhs_with_principal_rejected(self):
        s = vorticity_spec()
        with pytest.raises(StructuralError):
            SolutionManifold(s, P("psi_tyy"), P("psi_ttyy"))

    def test_non_coordinate_principal(self):
        with pytest.raises(ValueError):
            SolutionManifold(vorticity_spec(), x, 0)


class TestEuler:
    def test_linear(self):
        assert euler_operator(sym("zeta"), zeta_spec()) == 1

    def test_square_gradient(self):
        assert euler_operator(sym("zeta_x") ** 2, zeta_spec()) == -2 * sym("zeta_xx")

    def test_divergence(self):
        zs = zeta_spec()
        g1 = t * sym("zeta_x") ** 2 + x * sym("zeta_y")
        g2 = y * sym("zeta_x") * sym("zeta_y") + t
        H = zs.total_derivative(g1, "x") + zs.total_derivative(g2, "y")
        assert euler_operator(H, zs) == 0

    def test_disallowed_dependency(self):
        with pytest.raises(StructuralError):
            euler_operator(P("psi_x"), zeta_spec())
