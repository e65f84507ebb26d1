import random

import pytest
import sympy as sp

from invparam import equiv as E
from invparam.jet import multi_indices, vorticity_spec, zeta_spec
from invparam.symcore.expr import sym
from invparam.symcore.paramfn import ParamFn
from invparam.symcore.zero import is_zero

t, x, y, psi = sym("t"), sym("x"), sym("y"), sym("psi")
zeta, zx, zy = sym("zeta"), sym("zeta_x"), sym("zeta_y")
zxx, zxy, zyy = sym("zeta_xx"), sym("zeta_xy"), sym("zeta_yy")
SPEC = vorticity_spec()


def _zero(e):
    return is_zero(SPEC.expand_aliases(sp.sympify(e))).is_zero


class TestFixedPoints:
    def test_G1_identity(self):
        F = E.ClassMember.F(sym("psi_x") * zy + x * zeta + zxy)
        assert _zero(E.apply_G1(E.G1Transformation.identity(), F).exprs[0] - F.exprs[0])

    def test_G1_time_shift_of_psi(self):
        chi = ParamFn("chi", (t,))()
        F = E.ClassMember.F(t * zeta ** 2 + zxx)
        tr = E.G1Transformation(t, x, y, 1, chi)
        assert _zero(E.apply_G1(tr, F).exprs[0] - F.exprs[0])

    def test_G2_identity(self):
        H = E.ClassMember.H(zxx * x + t * zeta ** 2 + zy)
        assert _zero(E.apply_G2(E.G2Transformation(), H).exprs[0] - H.exprs[0])

    def test_G6_identity(self):
        f1, f2 = zx * x * t + zy ** 2, t * y * zx
        g = E.apply_G6_f(E.G2Transformation(), f1, f2)
        assert _zero(g[0] - f1) and _zero(g[1] - f2)


class TestG2:
    def test_harmonic_delta_on_zero(self):
        dl = ParamFn("delta", (t, x, y), harmonic=(1, 2))()
        tr = E.G2Transformation(delta=dl)
        Ht = E.apply_G2(tr, E.ClassMember.H(0)).exprs[0]
        assert _zero(Ht - (-sp.diff(dl, y) * zx + sp.diff(dl, x) * zy))

    def test_constant_rotation_keeps_vorticity(self):
        tr = E.G2Transformation(beta=sym("b0"))
        assert _zero(E.transformed_vorticity(tr) - zeta)

    @pytest.mark.parametrize("eps", [1, -1])
    def test_vorticity_against_pushforward(self, eps):
        tr = E.sample_G2(random.Random(eps + 5), eps)
        pf = E.Pushforward(tr.to_G1())
        new = pf.expr((0, 2, 0)) + pf.expr((0, 0, 2))
        assert _zero(E.transformed_vorticity(tr) - new)

    def test_single_beta_t_variant_disagrees(self):
        tr = E.G2Transformation(beta=t ** 2)
        pf = E.Pushforward(tr.to_G1())
        new = pf.expr((0, 2, 0)) + pf.expr((0, 0, 2))
        assert not _zero(E.transformed_vorticity(tr, literal=True) - new)

    @pytest.mark.parametrize("eps", [1, -1])
    def test_pushforward_consistency(self, eps):
        rng = random.Random(40 + eps)
        tr = E.sample_G2(rng, eps)
        member = E.sample_polynomial_H(rng)
        res = E.consistency_residuals(tr, member, samples=3, seed=1)
        assert max(res) < 1e-30

    def test_wrong_element_is_detected(self):
        rng = random.Random(3)
        tr = E.sample_G2(rng, 1)
        member = E.sample_polynomial_H(rng)
        bogus = E.apply_G2(tr, member).exprs[0] + zx
        res = E.consistency_residuals(tr, member, samples=2, seed=1, transformed=bogus)
        assert max(res) > 1e-6


class TestValidation:
    def test_non_conformal(self):
        with pytest.raises(E.TransformationError):
            E.G1Transformation(t, 2 * x, y, 1, 0)

    def test_degenerate(self):
        with pytest.raises(E.TransformationError):
            E.G1Transformation(t, x, y, 0, 0)

    def test_space_dependent_time(self):
        with pytest.raises(E.TransformationError):
            E.G1Transformation(t + x, x, y, 1, 0)

    def test_eps(self):
        with pytest.raises(E.TransformationError):
            E.G2Transformation(eps=2)

    def test_nonharmonic_delta(self):
        with pytest.raises(E.TransformationError):
            E.G2Transformation(delta=x ** 2)

    def test_constant_tau(self):
        with pytest.raises(E.TransformationError):
            E.G2Transformation(tau=sp.Integer(1))

    def test_subgroups(self):
        tr = E.G2Transformation(tau=t ** 3 + t, lam=2, delta=x + t * y)
        assert tr.in_subgroup("G2") and tr.in_subgroup("G4")
        assert not tr.in_subgroup("G3") and not tr.in_subgroup("G6")
        quad = E.G2Transformation(delta=x * y)
        assert quad.in_subgroup("G6") and not quad.in_subgroup("G4") and not quad.in_subgroup("G7")

    def test_from_mapping(self):
        tr = E.G2Transformation.from_mapping({"tau": "2*t", "beta": "t", "eps": "-1"}, "G7")
        assert tr.eps == -1 and tr.tau == 2 * t
        with pytest.raises(E.TransformationError):
            E.G2Transformation.from_mapping({"tau": "t**2 + t"}, "G3")
        with pytest.raises(E.TransformationError):
            E.G2Transformation.from_mapping({"omega": "t"})

    def test_G6_required_for_flux(self):
        with pytest.raises(E.TransformationError):
            E.apply_G6_f(E.G2Transformation(tau=t ** 3 + t), zx, zy)

    def test_member_dependencies(self):
        with pytest.raises(E.TransformationError):
            E.ClassMember.f(sym("psi_x"), 0)
        with pytest.raises(E.TransformationError):
            E.ClassMember.f(x * zx, 0, space_independent=True)
        with pytest.raises(ValueError):
            E.ClassMember("H", (zx, zy))


class TestFlux:
    def test_gauge_potential(self):
        rho = ParamFn("rho", (t, x, y))()
        g = E.apply_G6_f(E.G2Transformation(), 0, 0, rho=rho)
        assert _zero(g[0] + sp.diff(rho, y)) and _zero(g[1] - sp.diff(rho, x))
        assert _zero(E.new_divergence(E.G1Transformation.identity(), *g))

    def test_reflection(self):
        f1, f2 = zx ** 2 * t, zy * zx
        g = E.apply_G6_f(E.G2Transformation(eps=-1), f1, f2)
        assert _zero(g[0] + f1) and _zero(g[1] - f2)

    @pytest.mark.parametrize("seed", range(4))
    def test_gauge_terms_are_trivial(self, seed):
        rng = random.Random(seed)
        tr = E.sample_G2(rng, 1 if seed % 2 else -1, "G6")
        chi = E._poly_t(rng)
        rho = sum(E._rat(rng) * m for m in (x * y, x ** 2 * t, y ** 3, sp.Integer(1)))
        assert _zero(E.gauge_divergence(tr, chi, rho, zx * zy, t * zy ** 2))

    @pytest.mark.parametrize("eps", [1, -1])
    def test_two_routes_agree(self, eps):
        a, b, lam = sym("a"), sym("b"), sym("lam")
        beta, sig = ParamFn("beta", (t,))(), ParamFn("sigma", (t,))()
        g1, g2 = ParamFn("gamma1", (t,))(), ParamFn("gamma2", (t,))()
        dl = ParamFn("delta", (t, x, y), harmonic=(1, 2))()
        f1, f2 = zx * x * t + zy ** 2, t * y * zx
        tr = E.G2Transformation(eps, a * t + b, lam, beta, g1, g2, sig, dl, validate=False)
        n1, n2 = E.apply_G6_f(tr, f1, f2)
        route1 = E.new_divergence(tr.to_G1(), n1, n2)
        route2 = E.apply_G2(tr, E.ClassMember.f(f1, f2)).exprs[0]
        assert _zero(route1 - route2)


def _poly_psi(rng):
    terms = [t ** a * x ** b * y ** c for a in range(3) for b in range(4) for c in range(4) if a + b + c <= 4]
    return sum(sp.Rational(rng.randint(-9, 9), rng.randint(1, 4)) * m for m in terms)


def _jet_point(u, point, r):
    vals = {t: point[0], x: point[1], y: point[2]}
    base = dict(zip((t, x, y), point))
    for al in multi_indices(3, r):
        d = u
        for v, k in zip((t, x, y), al):
            d = sp.diff(d, v, k) if k else d
        vals[SPEC.coord(0, al)] = d.subs(base)
    return vals


class TestJetsPushforward:
    def test_identity(self):
        u = _poly_psi(random.Random(1))
        pt = _jet_point(u, (sp.Rational(1, 2), 1, -2), 3)
        out = E.jets_pushforward(E.G1Transformation.identity(), pt, 3)
        assert all(out[k] == pt[k] for k in out)

    def test_scaling_keeps_second_derivatives(self):
        tr = E.G1Transformation(t, 2 * x, 2 * y, 4, 0)
        u = _poly_psi(random.Random(2))
        pt = _jet_point(u, (1, sp.Rational(1, 3), 2), 2)
        out = E.jets_pushforward(tr, pt, 2)
        assert out[sym("psi_xx")] == pt[sym("psi_xx")]
        assert out[sym("psi_yy")] == pt[sym("psi_yy")]

    def test_rational_rotation_against_chain_rule(self):
        c, s = sp.Rational(3, 5), sp.Rational(4, 5)
        tr = E.G1Transformation(t, c * x - s * y, s * x + c * y, 1, 0)
        self._against_composition(tr, lambda T, X, Y: (T, c * X + s * Y, -s * X + c * Y), 1, 0, exact=True)

    def test_irrational_rotation_against_chain_rule(self):
        c, s = sp.cos(1), sp.sin(1)
        tr = E.G1Transformation(t, c * x - s * y, s * x + c * y, 1, 0)
        self._against_composition(tr, lambda T, X, Y: (T, c * X + s * Y, -s * X + c * Y), 1, 0, exact=False)

    def test_moving_frame_against_chain_rule(self):
        tr = E.G1Transformation(2 * t + 1, x + t ** 2, y - t, 3, x * y * t)
        inv = lambda T, X, Y: ((T - 1) / 2, X - ((T - 1) / 2) ** 2, Y + (T - 1) / 2)
        self._against_composition(tr, inv, 3, x * y * t, exact=True)

    def _against_composition(self, tr, inverse, ups, phi, exact):
        # psi~(T, X, Y) = ups * u(inverse(T, X, Y)) + phi(inverse(T, X, Y))
        u = _poly_psi(random.Random(7))
        T, X, Y = sp.symbols("T X Y")
        old = inverse(T, X, Y)
        rep = dict(zip((t, x, y), old))
        new = ups * u.xreplace(rep) + sp.sympify(phi).xreplace(rep)
        p = (sp.Rational(3, 2), sp.Rational(-1, 3), sp.Rational(5, 4))
        r = 3
        out = E.jets_pushforward(tr, _jet_point(u, p, r), r)
        image = {T: tr.T.subs(dict(zip((t, x, y), p))), X: tr.Z1.subs(dict(zip((t, x, y), p))),
                 Y: tr.Z2.subs(dict(zip((t, x, y), p)))}
        for al in multi_indices(3, r):
            d = new
            for v, k in zip((T, X, Y), al):
                d = sp.diff(d, v, k) if k else d
            ref = d.subs(image)
            got = out[SPEC.coord(0, al)]
            if exact:
                assert sp.simplify(ref - got) == 0, al
            else:
                assert abs(sp.N(ref, 60) - sp.Float(str(got), 60)) < 1e-30, al


class TestClassConstraints:
    def test_space_independent_flux(self):
        m = E.ClassMember.f(t * zx ** 3 + zy, zx * zy ** 2, space_independent=True)
        res = E.class_constraints(m)
        assert all(v.is_zero for v in res.values())

    def test_linear_zeta(self):
        res = E.class_constraints(E.ClassMember.H(zeta))
        assert res["euler"].is_nonzero and res["H_zeta"].is_nonzero
        assert zeta_spec().euler_operator(zeta) == 1

    def test_square_gradient(self):
        assert E.class_constraints(E.ClassMember.H(zx ** 2))["euler"].is_nonzero
        assert zeta_spec().euler_operator(zx ** 2) == -2 * zxx

    def test_explicit_space(self):
        res = E.class_constraints(E.ClassMember.H(x * zxx))
        assert res["H_x"].is_nonzero and res["homogeneous"].is_zero


class TestG1Formula:
    def test_rotation_consistency(self):
        c, s = sp.Rational(3, 5), sp.Rational(4, 5)
        tr = E.G1Transformation(t, c * x - s * y, s * x + c * y, 1, 0)
        res = E.consistency_residuals(tr, E.ClassMember.F(zxx + zyy), samples=3, seed=2)
        assert max(res) == 0

    def test_moving_frame_consistency(self):
        tr = E.G1Transformation(2 * t + 1, x + t ** 2, y - t, 3, x * y * t)
        F = E.ClassMember.F(sym("psi_x") * zy - sym("psi_y") * zx + t * zeta)
        res = E.consistency_residuals(tr, F, samples=3, seed=3)
        assert max(res) == 0
