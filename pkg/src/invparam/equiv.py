"""Equivalence transformations of generalized vorticity equations.

Class members are kept in old coordinates: ``apply_G1`` and friends return
the transformed arbitrary element as a function of the *old* jet, which is
how the transformation formulas are stated.  :class:`Pushforward` computes
the new jet from the old one, so a transformed equation can be checked
pointwise on solutions of the original one without inverting anything.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sympy as sp

from .algebras import decompose, decompositions_equal, element_context, fields_equal, parse_element
from .jet import JetSpec, SolutionManifold, delta as unit, mi_sub, multi_indices, vorticity_manifold, vorticity_spec, zeta_spec
from .liealg import VectorField, commutator
from .symcore.expr import StructuralError, normalize, sym
from .symcore.zero import DomainFailure, Evaluator, ZeroVerdict, combine, is_zero, is_zero_many, settings

t, x, y = sym("t"), sym("x"), sym("y")
psi = sym("psi")
R2 = x ** 2 + y ** 2


class TransformationError(ValueError):
    """Transformation parameters violate the group's defining conditions."""


class TemplateEscape(StructuralError):
    """An iterated commutator left the span of the algebra templates."""


def _z(name: str):
    return sym(name)


ZETA = {n: _z(n) for n in ("zeta", "zeta_x", "zeta_y", "zeta_xx", "zeta_xy", "zeta_yy")}
PSI1 = (sym("psi_x"), sym("psi_y"))


# ---------------------------------------------------------------- class members

_ALLOWED = {
    "F": {"psi", "psi_x", "psi_y", "zeta", "zeta_x", "zeta_y", "zeta_xx", "zeta_xy", "zeta_yy"},
    "H": {"zeta", "zeta_x", "zeta_y", "zeta_xx", "zeta_xy", "zeta_yy"},
    "f": {"zeta_x", "zeta_y"},
}


@dataclass(frozen=True)
class ClassMember:
    """An arbitrary element of one of the vorticity classes.

    ``kind`` is ``"F"`` (``zeta_t = F``), ``"H"`` (``zeta_t + {psi, zeta} = H``)
    or ``"f"`` (``H = D_i f^i``).  ``space_independent`` restricts an f-pair to
    ``f(t, zeta_x, zeta_y)``.  Dependencies are checked on construction.
    """

    kind: str
    exprs: Tuple[sp.Expr, ...]
    space_independent: bool = False

    def __post_init__(self):
        if self.kind not in _ALLOWED:
            raise ValueError("unknown member kind %r" % self.kind)
        want = 2 if self.kind == "f" else 1
        if len(self.exprs) != want:
            raise ValueError("%s-form member needs %d expression(s)" % (self.kind, want))
        spec = vorticity_spec()
        allowed = _ALLOWED[self.kind]
        for e in self.exprs:
            bad = sorted(s.name for s in spec.jet_symbols(e) if s.name not in allowed)
            if bad:
                raise TransformationError("%s-form member may not depend on %s" % (self.kind, ", ".join(bad)))
            if self.space_independent and (e.has(x) or e.has(y)):
                raise TransformationError("space-independent member depends on x or y")

    @classmethod
    def F(cls, e) -> "ClassMember":
        return cls("F", (sp.sympify(e),))

    @classmethod
    def H(cls, e) -> "ClassMember":
        return cls("H", (sp.sympify(e),))

    @classmethod
    def f(cls, f1, f2, space_independent: bool = False) -> "ClassMember":
        return cls("f", (sp.sympify(f1), sp.sympify(f2)), space_independent)

    @property
    def H_expr(self):
        spec = vorticity_spec()
        if self.kind == "H":
            return self.exprs[0]
        if self.kind == "f":
            return normalize(spec.total_derivative(self.exprs[0], "x", False) + spec.total_derivative(self.exprs[1], "y", False))
        raise TransformationError("an F-form member has no H representation in general")

    @property
    def F_expr(self):
        if self.kind == "F":
            return self.exprs[0]
        psi_x, psi_y = PSI1
        return normalize(self.H_expr - psi_x * ZETA["zeta_y"] + psi_y * ZETA["zeta_x"])

    def manifold(self, spec: Optional[JetSpec] = None) -> SolutionManifold:
        """Solution manifold of the member, solved for ``psi_tyy``."""
        spec = spec or vorticity_spec()
        if self.kind == "F":
            rhs = -spec.coord(0, (1, 2, 0)) + self.exprs[0]
            return SolutionManifold(spec, spec.coord(0, (1, 0, 2)), rhs)
        return vorticity_manifold(self.H_expr, spec)


# ---------------------------------------------------------------- G1

_DIFF = (t, x, y)


@dataclass
class G1Transformation:
    """``t~ = T(t)``, ``x~ = Z1``, ``y~ = Z2``, ``psi~ = Upsilon(t) psi + Phi``."""

    T: sp.Expr
    Z1: sp.Expr
    Z2: sp.Expr
    Upsilon: sp.Expr
    Phi: sp.Expr
    validate: bool = True

    def __post_init__(self):
        self.T, self.Z1, self.Z2, self.Upsilon, self.Phi = (
            sp.sympify(v) for v in (self.T, self.Z1, self.Z2, self.Upsilon, self.Phi)
        )
        if self.validate:
            self.check()

    @property
    def L(self):
        return sp.diff(self.Z1, x) ** 2 + sp.diff(self.Z1, y) ** 2

    def conditions(self) -> Dict[str, ZeroVerdict]:
        Z1, Z2 = self.Z1, self.Z2
        orth = sp.diff(Z1, x) * sp.diff(Z2, x) + sp.diff(Z1, y) * sp.diff(Z2, y)
        conf = self.L - sp.diff(Z2, x) ** 2 - sp.diff(Z2, y) ** 2
        tonly = [sp.diff(self.T, s) for s in (x, y)] + [sp.diff(self.Upsilon, s) for s in (x, y)]
        v = is_zero_many([orth, conf] + tonly + [sp.diff(self.T, t) * self.Upsilon * self.L])
        return {
            "orthogonal": v[0],
            "conformal": v[1],
            "time-only": combine(v[2:6]),
            "nondegenerate": v[6],
        }

    def check(self):
        c = self.conditions()
        for k in ("orthogonal", "conformal", "time-only"):
            if not c[k].passes:
                raise TransformationError("G1 condition %r fails" % k)
        if not c["nondegenerate"].is_nonzero:
            raise TransformationError("T_t * Upsilon * L must not vanish")

    @classmethod
    def identity(cls) -> "G1Transformation":
        return cls(t, x, y, 1, 0)


def apply_G1(tr: G1Transformation, member: ClassMember) -> ClassMember:
    """Transformed ``F`` as a function of the old variables."""
    F = member.F_expr
    L = tr.L
    U = tr.Upsilon / L
    P = (sp.diff(tr.Phi, x, 2) + sp.diff(tr.Phi, y, 2)) / L
    zeta = ZETA["zeta"]
    zj = (ZETA["zeta_x"], ZETA["zeta_y"])
    Zi = (tr.Z1, tr.Z2)
    drift = sp.Integer(0)
    for j, sj in enumerate((x, y)):
        w = sum(sp.diff(Z, t) * sp.diff(Z, sj) for Z in Zi)
        drift += w / L * (U * zj[j] + sp.diff(U, sj) * zeta + sp.diff(P, sj))
    Ft = (U * F + sp.diff(U, t) * zeta + sp.diff(P, t) - drift) / sp.diff(tr.T, t)
    return ClassMember("F", (normalize(Ft),))


def transformed_vorticity_G1(tr: G1Transformation):
    """``zeta~ = (Upsilon zeta + Phi_ii) / L`` in old variables."""
    return normalize((tr.Upsilon * ZETA["zeta"] + sp.diff(tr.Phi, x, 2) + sp.diff(tr.Phi, y, 2)) / tr.L)


# ---------------------------------------------------------------- G2 and its subgroups

SUBGROUPS = ("G2", "G3", "G4", "G5", "G6", "G7")


@dataclass
class G2Transformation:
    """Parameters of the equivalence group of the ``H``-class.

    ``eps`` is the reflection sign; ``delta`` must be harmonic in ``(x, y)``.
    """

    eps: int = 1
    tau: sp.Expr = t
    lam: sp.Expr = sp.Integer(1)
    beta: sp.Expr = sp.Integer(0)
    gamma1: sp.Expr = sp.Integer(0)
    gamma2: sp.Expr = sp.Integer(0)
    sigma: sp.Expr = sp.Integer(0)
    delta: sp.Expr = sp.Integer(0)
    validate: bool = True

    FIELDS = ("tau", "lam", "beta", "gamma1", "gamma2", "sigma", "delta")

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise TransformationError("eps must be +1 or -1")
        for n in self.FIELDS:
            setattr(self, n, sp.sympify(getattr(self, n)))
        if self.validate:
            self.check()

    def check(self):
        tonly = [sp.diff(getattr(self, n), s) for n in ("tau", "lam", "beta", "gamma1", "gamma2", "sigma") for s in (x, y)]
        v = is_zero_many(tonly + [sp.diff(self.delta, x, 2) + sp.diff(self.delta, y, 2), sp.diff(self.tau, t), self.lam])
        if not combine(v[: len(tonly)]).passes:
            raise TransformationError("tau, lambda, beta, gamma, sigma must depend on t only")
        if not v[-3].passes:
            raise TransformationError("delta must solve the Laplace equation")
        if not v[-2].is_nonzero:
            raise TransformationError("tau_t must not vanish")
        if not v[-1].is_nonzero:
            raise TransformationError("lambda must not vanish")

    @classmethod
    def from_mapping(cls, data: Mapping[str, str], subgroup: str = "G2", ctx=None) -> "G2Transformation":
        """Build from named expression strings and check subgroup membership."""
        from .symcore.parse import default_context, parse

        ctx = ctx or default_context(allow_unknown=True)
        ctx.functions.setdefault("delta", (1, 2))
        kw = {k: parse(str(v), ctx) for k, v in data.items() if k != "eps"}
        unknown = set(kw) - set(cls.FIELDS)
        if unknown:
            raise TransformationError("unknown transformation field(s): %s" % ", ".join(sorted(unknown)))
        tr = cls(eps=int(data.get("eps", 1)), **kw)
        bad = [k for k, v in tr.subgroup_conditions(subgroup).items() if not v.passes]
        if bad:
            raise TransformationError("not in %s: %s fails" % (subgroup, ", ".join(bad)))
        return tr

    # helpers -----------------------------------------------------------

    @property
    def c(self):
        return sp.cos(self.beta)

    @property
    def s(self):
        return sp.sin(self.beta)

    def _tt(self, e, n=1):
        return sp.diff(e, t, n)

    def subgroup_conditions(self, name: str) -> Dict[str, ZeroVerdict]:
        """Per-condition verdicts for membership in ``G2`` .. ``G7``."""
        d = self.delta
        conds = {
            "tau_tt": sp.diff(self.tau, t, 2),
            "lambda_t": sp.diff(self.lam, t),
            "sigma": self.sigma,
            "beta_tt": sp.diff(self.beta, t, 2),
            "delta_xx": sp.diff(d, x, 2),
            "delta_xy": sp.diff(d, x, y),
            "delta_yy": sp.diff(d, y, 2),
            "delta_x": sp.diff(d, x),
            "delta_y": sp.diff(d, y),
        }
        need = {
            "G2": [],
            "G3": ["tau_tt"],
            "G4": ["lambda_t", "sigma", "delta_xx", "delta_xy", "delta_yy"],
            "G5": ["tau_tt", "lambda_t", "sigma", "delta_xx", "delta_xy", "delta_yy"],
            "G6": ["tau_tt", "lambda_t"],
            "G7": ["tau_tt", "lambda_t", "beta_tt", "sigma", "delta_x", "delta_y"],
        }[name]
        return dict(zip(need, is_zero_many([conds[k] for k in need])))

    def in_subgroup(self, name: str) -> bool:
        return all(v.passes for v in self.subgroup_conditions(name).values())

    def to_G1(self) -> G1Transformation:
        e, lam, c, s = self.eps, self.lam, self.c, self.s
        taut = self._tt(self.tau)
        Z1 = lam * (x * c - y * s) + self.gamma1
        Z2 = e * (lam * (x * s + y * c) + self.gamma2)
        Ups = e * lam ** 2 / taut
        Phi = (
            e * lam / taut * (lam / 2 * self._tt(self.beta) * R2 - self._tt(self.gamma1) * (x * s + y * c) + self._tt(self.gamma2) * (x * c - y * s))
            + self.delta
            + self.sigma / 2 * R2
        )
        return G1Transformation(self.tau, Z1, Z2, Ups, Phi, validate=False)


def apply_G2(tr: G2Transformation, member: ClassMember) -> ClassMember:
    """Transformed ``H`` as a function of the old variables, as displayed."""
    Hh = member.H_expr
    e, lam = tr.eps, tr.lam
    taut = sp.diff(tr.tau, t)
    tautt = sp.diff(tr.tau, t, 2)
    zeta, zx, zy = ZETA["zeta"], ZETA["zeta_x"], ZETA["zeta_y"]
    d = tr.delta
    Ht = (
        sp.Integer(e) / taut ** 2 * (
            Hh - tautt / taut * zeta - sp.diff(lam, t) / lam * (x * zx + y * zy)
            + 2 * sp.diff(tr.beta, t, 2) - 2 * tautt / taut * sp.diff(tr.beta, t)
        )
        - (sp.diff(d, y) + tr.sigma * y) / (taut * lam ** 2) * zx
        + (sp.diff(d, x) + tr.sigma * x) / (taut * lam ** 2) * zy
        + 2 / taut * sp.diff(tr.sigma / lam ** 2, t)
    )
    return ClassMember("H", (normalize(Ht),))


def transformed_vorticity(tr: G2Transformation, literal: bool = False):
    """Transformed vorticity in old variables.

    ``literal=True`` gives the variant with a single ``beta_t``; the default
    carries ``2 beta_t``, which is what ``(Upsilon zeta + Phi_ii) / L`` yields.
    """
    k = 1 if literal else 2
    taut = sp.diff(tr.tau, t)
    return normalize(sp.Integer(tr.eps) / taut * (ZETA["zeta"] + k * sp.diff(tr.beta, t)) + 2 * tr.sigma / tr.lam ** 2)


def transformed_vorticity_gradient(tr: G2Transformation) -> Tuple[sp.Expr, sp.Expr]:
    """``zeta~_i = eps Z^i_j zeta_j / (tau_t lambda^2)``."""
    g1 = tr.to_G1()
    taut = sp.diff(tr.tau, t)
    zj = (ZETA["zeta_x"], ZETA["zeta_y"])
    out = []
    for Z in (g1.Z1, g1.Z2):
        out.append(normalize(tr.eps * sum(sp.diff(Z, s) * zj[k] for k, s in enumerate((x, y))) / (taut * tr.lam ** 2)))
    return tuple(out)


def apply_G6_f(tr: G2Transformation, f1, f2, chi=0, rho=0, check: bool = True) -> Tuple[sp.Expr, sp.Expr]:
    """Transformed flux pair ``(f1~, f2~)`` in old variables, gauge terms included."""
    if check:
        bad = [k for k, v in tr.subgroup_conditions("G6").items() if not v.passes]
        if bad:
            raise TransformationError("apply_G6_f needs tau_tt = 0 and lambda_t = 0 (%s fails)" % ", ".join(bad))
    f1, f2, chi, rho = (sp.sympify(v) for v in (f1, f2, chi, rho))
    e, lam, c, s = tr.eps, tr.lam, tr.c, tr.s
    taut = sp.diff(tr.tau, t)
    zx, zy = ZETA["zeta_x"], ZETA["zeta_y"]
    gauge = tr.delta / (taut * lam) + tr.sigma / (2 * taut * lam) * R2 - e * chi / lam ** 2
    drive = e * lam ** 2 * sp.diff(tr.beta, t, 2) + taut * sp.diff(tr.sigma, t)
    rx, ry = sp.diff(rho, x), sp.diff(rho, y)
    g1 = (
        e * lam * (f1 * c - f2 * s) / taut ** 2
        + gauge * (zx * s + zy * c)
        + drive * (x * c - y * s) / (taut ** 2 * lam)
        - e * (rx * s + ry * c) / lam ** 2
    )
    g2 = (
        lam * (f1 * s + f2 * c) / taut ** 2
        - e * gauge * (zx * c - zy * s)
        + e * drive * (x * s + y * c) / (taut ** 2 * lam)
        + (rx * c - ry * s) / lam ** 2
    )
    return normalize(g1), normalize(g2)


def new_divergence(tr: G1Transformation, g1, g2, spec: Optional[JetSpec] = None):
    """``D~_x g1 + D~_y g2`` for functions of the old jet."""
    spec = spec or vorticity_spec()
    Dx = lambda e: spec.total_derivative(e, 1, canonical=False)
    Dy = lambda e: spec.total_derivative(e, 2, canonical=False)
    a, b = sp.diff(tr.Z1, x), sp.diff(tr.Z2, x)
    cc, d = sp.diff(tr.Z1, y), sp.diff(tr.Z2, y)
    det = a * d - b * cc
    out = (d * Dx(g1) - b * Dy(g1) - cc * Dx(g2) + a * Dy(g2)) / det
    return out


def gauge_divergence(tr: G2Transformation, chi, rho, f1=0, f2=0):
    """New divergence of the part of ``(f1~, f2~)`` contributed by ``chi`` and ``rho``."""
    a = apply_G6_f(tr, f1, f2, chi, rho)
    b = apply_G6_f(tr, f1, f2, 0, 0)
    return normalize(new_divergence(tr.to_G1(), a[0] - b[0], a[1] - b[1]))


# ---------------------------------------------------------------- pushforward

class Pushforward:
    """New jet coordinates as functions of the old jet.

    With ``M[i][nu] = D_i Z^nu`` the new total derivatives are
    ``D~ = M^{-1} D``.  Since ``T`` depends on ``t`` only the inverse is
    ``D~_t = (D_t - Z^j_t D~_j) / T_t`` and a 2x2 inverse in space.
    """

    def __init__(self, tr: G1Transformation, spec: Optional[JetSpec] = None):
        self.tr = tr
        self.spec = spec or vorticity_spec()
        Z1, Z2 = tr.Z1, tr.Z2
        self.a, self.b = sp.diff(Z1, x), sp.diff(Z2, x)
        self.c, self.d = sp.diff(Z1, y), sp.diff(Z2, y)
        self.det = self.a * self.d - self.b * self.c
        self.Tt = sp.diff(tr.T, t)
        self.Zt = (sp.diff(Z1, t), sp.diff(Z2, t))
        self._cache: Dict[Tuple[int, ...], sp.Expr] = {(0, 0, 0): tr.Upsilon * psi + tr.Phi}

    def _D(self, e, i):
        return self.spec.total_derivative(e, i, canonical=False)

    def new_derivative(self, e, nu: int):
        if nu == 1:
            return (self.d * self._D(e, 1) - self.b * self._D(e, 2)) / self.det
        if nu == 2:
            return (-self.c * self._D(e, 1) + self.a * self._D(e, 2)) / self.det
        out = self._D(e, 0)
        for j in (1, 2):
            if self.Zt[j - 1] != 0:
                out -= self.Zt[j - 1] * self.new_derivative(e, j)
        return out / self.Tt

    def expr(self, alpha) -> sp.Expr:
        alpha = tuple(alpha)
        v = self._cache.get(alpha)
        if v is not None:
            return v
        nu = next(k for k, n in enumerate(alpha) if n > 0)
        prev = self.expr(mi_sub(alpha, unit(3, nu)))
        v = self.new_derivative(prev, nu)
        self._cache[alpha] = v
        return v

    def exprs(self, r: int) -> Dict[sp.Symbol, sp.Expr]:
        out = {t: self.tr.T, x: self.tr.Z1, y: self.tr.Z2}
        for al in multi_indices(3, r):
            out[self.spec.coord(0, al)] = self.expr(al)
        return out


def _has_kernels(e) -> bool:
    e = sp.sympify(e)
    if e.atoms(sp.sin, sp.cos, sp.exp, sp.log, sp.atan, sp.Function):
        return True
    return any(not p.exp.is_Integer for p in e.atoms(sp.Pow))


class _PointEvaluator:
    """Exact rational evaluation when possible, otherwise mpmath."""

    def __init__(self, exact: bool, prec: Optional[int] = None, seed: int = 0):
        self.exact = exact
        self.ev = None if exact else Evaluator(prec or settings().prec_bits + 64, seed)

    def convert(self, point: Mapping) -> Dict:
        if self.exact:
            return {s: sp.Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else sp.sympify(v) for s, v in point.items()}
        ctx = self.ev.ctx
        out = {}
        for s, v in point.items():
            if isinstance(v, Fraction):
                out[s] = ctx.mpf(v.numerator) / v.denominator
            elif isinstance(v, sp.Rational):
                out[s] = ctx.mpf(int(v.p)) / int(v.q)
            else:
                out[s] = v
        return out

    def __call__(self, exprs: Sequence, point: Mapping) -> List:
        if self.exact:
            vals = []
            for e in exprs:
                v = sp.sympify(e).xreplace(point)
                if not v.is_Rational:
                    v = sp.nsimplify(sp.together(v))
                    if not v.is_Rational:
                        raise DomainFailure("non-rational value in exact evaluation")
                vals.append(v)
            return vals
        return self.ev.evaluate_many([sp.sympify(e) for e in exprs], point)


def jets_pushforward(tr: G1Transformation, point: Mapping, r: int, exact: Optional[bool] = None) -> Dict[sp.Symbol, object]:
    """Values of the new jet (``t, x, y`` and ``psi_alpha``, ``|alpha| <= r``).

    ``point`` maps old base symbols and jet coordinates to rationals; it must
    contain every coordinate the transformed derivatives need.
    """
    pf = Pushforward(tr)
    exprs = pf.exprs(r)
    if exact is None:
        exact = not any(_has_kernels(e) for e in (tr.T, tr.Z1, tr.Z2, tr.Upsilon, tr.Phi))
    ev = _PointEvaluator(exact)
    keys = list(exprs)
    try:
        vals = ev([exprs[k] for k in keys], ev.convert(point))
    except ZeroDivisionError as exc:
        raise DomainFailure("singular Jacobian at sample point") from exc
    return dict(zip(keys, vals))


class ManifoldSampler:
    """Random rational points of a solution manifold.

    Parametric coordinates are drawn lazily; principal ones are computed from
    the differential consequences of the solved equation.
    """

    def __init__(self, m: SolutionManifold, rng: random.Random):
        self.m = m
        self.spec = m.spec
        self.rng = rng
        self.values: Dict[sp.Symbol, sp.Rational] = {}
        tv = Fraction(rng.randint(3, 30), rng.randint(2, 8))
        self.values[t] = sp.Rational(tv.numerator, tv.denominator)
        for s in (x, y):
            self.values[s] = self._draw()

    def _draw(self):
        q = self.rng.randint(1, 9)
        return sp.Rational(self.rng.randint(-2 * q, 2 * q), q)

    def value(self, s):
        v = self.values.get(s)
        if v is not None:
            return v
        off = self.m.principal_offset(s)
        if off is None:
            v = self._draw()
        else:
            e = self.spec.expand_aliases(self.m.consequence(off))
            v = self.evaluate(e)
        self.values[s] = v
        return v

    def evaluate(self, e):
        e = self.spec.expand_aliases(sp.sympify(e))
        syms = [s for s in e.free_symbols]
        rep = {s: self.value(s) for s in syms if s in (t, x, y) or self.spec.info(s) is not None}
        return sp.sympify(e).xreplace(rep)

    def require(self, exprs) -> Dict[sp.Symbol, sp.Rational]:
        for e in exprs:
            e = self.spec.expand_aliases(sp.sympify(e))
            for s in e.free_symbols:
                if s in (t, x, y) or self.spec.info(s) is not None:
                    self.value(s)
        return dict(self.values)


def _new_lhs(kind: str, spec: JetSpec):
    """Left side of the transformed equation in (new) psi coordinates."""
    P = lambda n: sym(n)
    zeta_t = P("psi_txx") + P("psi_tyy")
    if kind == "F":
        return zeta_t
    zx = P("psi_xxx") + P("psi_xyy")
    zy = P("psi_xxy") + P("psi_yyy")
    return zeta_t + P("psi_x") * zy - P("psi_y") * zx


def consistency_residuals(
    tr, member: ClassMember, samples: int = 5, seed: int = 0, transformed: Optional[sp.Expr] = None
) -> List[float]:
    """Residuals of the transformed equation at random points of the old manifold.

    ``tr`` is a G1 or G2 transformation.  The new left side is evaluated on
    the pushed-forward jet and the transformed arbitrary element on the old
    jet; for solutions of the old equation they must agree.
    """
    if isinstance(tr, G2Transformation):
        g1 = tr.to_G1()
        kind = "H"
        rhs = apply_G2(tr, member).exprs[0] if transformed is None else transformed
    else:
        g1 = tr
        kind = "F"
        rhs = apply_G1(tr, member).exprs[0] if transformed is None else transformed
    spec = vorticity_spec()
    m = member.manifold(spec) if kind == "F" or member.kind != "F" else None
    if m is None:
        raise TransformationError("an H-class check needs an H- or f-form member")
    pf = Pushforward(g1, spec)
    lhs = _new_lhs(kind, spec)
    need = sorted(spec.jet_symbols(lhs), key=lambda s: s.name)
    new_exprs = [pf.expr(spec.info(s)[2]) for s in need]
    rhs_old = spec.expand_aliases(rhs)
    exact = not any(_has_kernels(e) for e in (g1.T, g1.Z1, g1.Z2, g1.Upsilon, g1.Phi, rhs_old))
    ev = _PointEvaluator(exact, seed=seed)
    rng = random.Random("%d|pushforward" % seed)
    out = []
    for _ in range(samples):
        for attempt in range(settings().max_retries):
            smp = ManifoldSampler(m, rng)
            try:
                point = smp.require(new_exprs + [rhs_old])
                vals = ev(new_exprs + [rhs_old], ev.convert(point))
            except (ZeroDivisionError, DomainFailure):
                continue
            newpt = dict(zip(need, vals[:-1]))
            lhs_val = ev([lhs], newpt)[0]
            out.append(abs(float(lhs_val - vals[-1])) if exact else float(abs(lhs_val - vals[-1])))
            break
        else:
            raise DomainFailure("no regular sample point found")
    return out


# ---------------------------------------------------------------- class constraints

def class_constraints(member: ClassMember) -> Dict[str, ZeroVerdict]:
    """Verdicts for ``H_zeta``, ``H_x``, ``H_y``, ``E H`` and ``zeta_ij H_zeta_ij - H``."""
    H = member.H_expr
    zs = zeta_spec()
    hom = sum(ZETA[n] * sp.diff(H, ZETA[n]) for n in ("zeta_xx", "zeta_xy", "zeta_yy")) - H
    exprs = {
        "H_zeta": sp.diff(H, ZETA["zeta"]),
        "H_x": sp.diff(H, x),
        "H_y": sp.diff(H, y),
        "euler": zs.euler_operator(H),
        "homogeneous": hom,
    }
    return dict(zip(exprs, is_zero_many(list(exprs.values()))))


# ---------------------------------------------------------------- adjoint actions

EPS = sym("eps")


def adjoint(X: VectorField, Y: VectorField, N: int = 6, check_span: bool = True) -> List[VectorField]:
    """Coefficients of ``eps^k`` in ``Ad(e^{eps X}) Y``, ``k = 0..N``.

    ``c_k = (-1)^k / k! ad_X^k Y``.  Each iterated commutator is required to
    decompose into the equivalence templates.
    """
    out = []
    cur = Y
    for k in range(N + 1):
        if check_span and k:
            dec = decompose(cur)
            if not dec.matched:
                raise TemplateEscape("ad^%d left the template span" % k)
        out.append(cur.scale(sp.Rational((-1) ** k, factorial(k))))
        cur = commutator(X, cur)
    return out


def taylor_coefficients(q: VectorField, N: int = 6, var=EPS) -> List[VectorField]:
    """``(1/k!) d^k/d eps^k`` at ``eps = 0`` of every coefficient of ``q``."""
    out = []
    cur = dict(q.coeffs)
    for k in range(N + 1):
        out.append(VectorField({c: sp.sympify(v).subs(var, 0) / factorial(k) for c, v in cur.items()}))
        cur = {c: sp.diff(v, var) for c, v in cur.items()}
    return out


@dataclass
class AdjointCheck:
    name: str
    orders: List[ZeroVerdict]
    template: List[ZeroVerdict]
    error: str = ""

    @property
    def verdict(self) -> ZeroVerdict:
        if self.error:
            return ZeroVerdict("NonZero", (), self.error)
        return combine(self.orders + self.template)

    @property
    def exact(self) -> bool:
        return not self.error and all(v.is_zero for v in self.orders + self.template)

    def first_failure(self) -> Optional[int]:
        for k, (a, b) in enumerate(zip(self.orders, self.template)):
            if not (a.passes and b.passes):
                return k
        return None


def verify_adjoint(name: str, X: VectorField, Y: VectorField, closed: VectorField, N: int = 6) -> AdjointCheck:
    """Compare the Lie series with the Taylor expansion of a closed form.

    Both the coefficient fields and their template decompositions are compared
    at every order.
    """
    try:
        series = adjoint(X, Y, N)
    except TemplateEscape as exc:
        return AdjointCheck(name, [], [], str(exc))
    taylor = taylor_coefficients(closed, N)
    orders = [fields_equal(a, b) for a, b in zip(series, taylor)]
    template = [decompositions_equal(decompose(a), decompose(b)) for a, b in zip(series, taylor)]
    return AdjointCheck(name, orders, template)


def adjoint_context():
    ctx = element_context()
    ctx.declare("eps")
    return ctx


@dataclass
class AdjointEntry:
    name: str
    source: str
    X: str
    Y: str
    printed: str
    corrected: str = ""

    @property
    def expected(self) -> str:
        return self.corrected or self.printed


def load_adjoint_catalog() -> List[AdjointEntry]:
    from .invariants import _load_yaml

    data = _load_yaml("adjoint.yaml")
    return [
        AdjointEntry(e["name"], e.get("source", ""), e["X"], e["Y"], e["printed"], e.get("corrected", ""))
        for e in data["actions"]
    ]


def check_adjoint_entry(entry: AdjointEntry, N: int = 6, printed: bool = False) -> AdjointCheck:
    ctx = adjoint_context()
    X, Y = parse_element(entry.X, ctx), parse_element(entry.Y, ctx)
    closed = parse_element(entry.printed if printed else entry.expected, ctx)
    return verify_adjoint(entry.name, X, Y, closed, N)


def verify_adjoint_catalog(N: int = 6, printed: bool = False, workers: int = 1) -> List[AdjointCheck]:
    entries = load_adjoint_catalog()
    run = lambda e: check_adjoint_entry(e, N, printed)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(run, entries))
    return [run(e) for e in entries]


# ---------------------------------------------------------------- sampling

HARMONIC_BASIS = (sp.Integer(1), x, y, x ** 2 - y ** 2, x * y, x ** 3 - 3 * x * y ** 2)


def _rat(rng: random.Random, lo=-3, hi=3, nonzero=False):
    while True:
        q = rng.randint(1, 4)
        v = sp.Rational(rng.randint(lo * q, hi * q), q)
        if v != 0 or not nonzero:
            return v


def _poly_t(rng, deg=2, nonzero=False, **kw):
    while True:
        p = sum(_rat(rng, **kw) * t ** k for k in range(deg + 1))
        if p != 0 or not nonzero:
            return p


def sample_G2(rng: random.Random, eps: int = 1, subgroup: str = "G2", rational: bool = False) -> G2Transformation:
    """Random transformation with polynomial parameters of degree <= 2.

    ``rational=True`` keeps ``beta = 0`` so every component is rational.
    """
    g = subgroup
    while True:
        tau = _poly_t(rng, 1 if g in ("G3", "G5", "G6", "G7") else 2)
        if sp.diff(tau, t) == 0:
            continue
        if g in ("G4", "G5", "G6", "G7"):
            lam = _rat(rng, 1, 3, nonzero=True)
        else:
            lam = _rat(rng, 1, 3, nonzero=True) + _rat(rng, 0, 1) * t
        beta = 0 if rational else (_poly_t(rng, 1) if g == "G7" else _poly_t(rng))
        sigma = 0 if g in ("G4", "G5", "G7") else _poly_t(rng)
        if g == "G7":
            delta = _rat(rng) + _rat(rng) * t
        elif g in ("G4", "G5"):
            delta = sum(_poly_t(rng, 1) * h for h in HARMONIC_BASIS[:3])
        else:
            delta = sum(_poly_t(rng, 1) * h for h in HARMONIC_BASIS if rng.random() < 0.6)
        tr = G2Transformation(eps, tau, lam, beta, _poly_t(rng), _poly_t(rng), sigma, delta, validate=False)
        taut = sp.diff(tau, t)
        if taut.is_number and taut == 0:
            continue
        return tr


def sample_polynomial_H(rng: random.Random, terms: int = 4) -> ClassMember:
    """Random polynomial ``H(t, x, y, zeta, zeta_i, zeta_ij)``."""
    pool = [t, x, y] + list(ZETA.values())
    H = sp.Integer(0)
    for _ in range(terms):
        mono = _rat(rng, nonzero=True)
        for _ in range(rng.randint(1, 3)):
            mono *= rng.choice(pool)
        H += mono
    return ClassMember.H(H)
