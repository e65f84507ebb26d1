"""Zero testing: symbolic first, then high-precision random evaluation.

The symbolic stage tries the canonical form and, for expressions of
moderate size, an algebraic reduction of the numerator in which algebraic
powers, exponentials and trigonometric kernels are replaced by generators
subject to their defining relations.  Every rewrite is an identity, so a
symbolic Zero is sound.

The numeric stage samples every free symbol at random rationals and models
each parameter function by a short random sum of exponentials, which keeps
derivatives of different orders mutually consistent.  Harmonic parameter
functions use complex exponentials along the harmonic slot pair.
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import sympy as sp

from .expr import StructuralError, normalize
from .paramfn import ParamFnBase

ZERO_TOL = 1e-30
NONZERO_TOL = 1e-10


class DomainFailure(ArithmeticError):
    """Evaluation hit a pole or left the real domain."""


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of a zero test.

    ``kind`` is one of ``"Zero"``, ``"NonZero"`` or ``"UnknownSymbolic"``.
    UnknownSymbolic means the expression vanished numerically at every sample
    but was not reduced to zero symbolically.
    """

    kind: str
    evidence: Tuple[float, ...] = ()
    note: str = ""

    @property
    def is_zero(self) -> bool:
        return self.kind == "Zero"

    @property
    def is_nonzero(self) -> bool:
        return self.kind == "NonZero"

    @property
    def numerically_zero(self) -> bool:
        return self.kind == "UnknownSymbolic"

    @property
    def passes(self) -> bool:
        return self.kind in ("Zero", "UnknownSymbolic")

    @property
    def label(self) -> str:
        return {
            "Zero": "symbolic-zero",
            "UnknownSymbolic": "numeric-zero",
            "NonZero": "nonzero",
        }[self.kind]


ZERO = ZeroVerdict("Zero")


def combine(verdicts: Sequence[ZeroVerdict]) -> ZeroVerdict:
    """Conjunction of verdicts: NonZero dominates, then UnknownSymbolic."""
    nz = [v for v in verdicts if v.kind == "NonZero"]
    if nz:
        return nz[0]
    unk = [v for v in verdicts if v.kind == "UnknownSymbolic"]
    if unk:
        ev = tuple(max(vals) for vals in zip(*[u.evidence for u in unk])) if unk[0].evidence else ()
        return ZeroVerdict("UnknownSymbolic", ev, "numerically zero")
    return ZERO


@dataclass
class ZeroSettings:
    samples: int = 8
    prec_bits: int = 128
    max_retries: int = 32
    seed: int = 0
    symbolic_ops_cap: int = 4000


_settings = ZeroSettings()
_settings_lock = threading.Lock()


def settings() -> ZeroSettings:
    return _settings


def configure(**kw) -> ZeroSettings:
    with _settings_lock:
        for k, v in kw.items():
            if v is None:
                continue
            if not hasattr(_settings, k):
                raise KeyError(k)
            setattr(_settings, k, v)
    return _settings


# ---------------------------------------------------------------- symbolic


def _numerator(e):
    return sp.fraction(sp.together(e))[0]


def _gen_replace(e):
    """Replace kernels by generators; returns (expr, relations)."""
    relations = {}  # generator -> (degree, base)
    trig = {}

    exps = {}
    for a in e.atoms(sp.exp):
        c, rest = a.args[0].as_coeff_Mul()
        exps.setdefault(rest, []).append((a, sp.Rational(c)))
    rep = {}
    for rest, items in exps.items():
        d = 1
        for _, c in items:
            d = sp.ilcm(d, c.q)
        g = sp.Dummy("E")
        for a, c in items:
            rep[a] = g ** int(c * d)
    pows = {}
    for a in e.atoms(sp.Pow):
        if a.exp.is_Rational and not a.exp.is_Integer:
            base = sp.expand(a.base)
            pows.setdefault(base, []).append(a)
    for base, items in pows.items():
        d = 1
        for a in items:
            d = sp.ilcm(d, a.exp.q)
        g = sp.Dummy("S")
        relations[g] = (int(d), base)
        for a in items:
            rep[a] = g ** int(a.exp * d)
    for a in e.atoms(sp.sin, sp.cos):
        u = a.args[0]
        if u not in trig:
            trig[u] = (sp.Dummy("s"), sp.Dummy("c"))
        s, c = trig[u]
        rep[a] = s if isinstance(a, sp.sin) else c
    if rep:
        e = e.xreplace(rep)
    for u, (s, c) in trig.items():
        relations[s] = (2, 1 - c ** 2)
    return e, relations


def _reduce(e, relations, rounds=8):
    for _ in range(rounds):
        e = sp.expand(e)
        if e == 0:
            return e
        changed = False
        terms = []
        for term in sp.Add.make_args(e):
            pd = term.as_powers_dict()
            new = term
            for g, (d, base) in relations.items():
                k = pd.get(g, 0)
                if k and (k >= d or k < 0):
                    q, r = divmod(int(k), d)
                    new = new / g ** k * g ** r * base ** q
                    changed = True
            terms.append(new)
        e = sp.Add(*terms)
        if not changed:
            return sp.expand(e)
        e = _numerator(e)
    return sp.expand(e)


def symbolic_zero(e, ops_cap: Optional[int] = None) -> bool:
    """Sound but incomplete symbolic decision."""
    e = normalize(e)
    if e == 0:
        return True
    cap = _settings.symbolic_ops_cap if ops_cap is None else ops_cap
    if sp.count_ops(e) > cap:
        return False
    try:
        num = _numerator(e)
        num = sp.expand(num)
        if num == 0:
            return True
        g, rel = _gen_replace(num)
        g = _numerator(g)
        return _reduce(g, rel) == 0
    except (RecursionError, sp.PolynomialError, TypeError, ValueError):
        return False


# ---------------------------------------------------------------- numeric


class FunctionModel:
    """Random exponential-sum model of one parameter function."""

    def __init__(self, name: str, nargs: int, harmonic, seed: int, terms: int = 3):
        rng = random.Random("%d|fn|%s|%d" % (seed, name, nargs))
        self.harmonic = harmonic
        self.terms = []
        for _ in range(terms):
            c = rng.uniform(-1.0, 1.0)
            phase = rng.uniform(0, 2 * math.pi)
            w = [rng.uniform(-0.8, 0.8) for _ in range(nargs)]
            self.terms.append((c, phase, w))

    def value(self, ctx, index, args):
        total = ctx.mpf(0)
        if self.harmonic is None:
            for c, _, w in self.terms:
                coef = ctx.mpf(c)
                expo = ctx.mpf(0)
                for k, (wk, z) in enumerate(zip(w, args)):
                    wk = ctx.mpf(wk)
                    if index[k]:
                        coef *= wk ** index[k]
                    expo += wk * z
                total += coef * ctx.exp(expo)
            return total
        hi, hj = self.harmonic
        for c, phase, w in self.terms:
            ws = [ctx.mpc(wk) for wk in w]
            ws[hj] = ctx.mpc(0, 1) * ws[hi]
            coef = ctx.mpc(c) * ctx.expj(ctx.mpf(phase))
            expo = ctx.mpc(0)
            for k, z in enumerate(args):
                if index[k]:
                    coef *= ws[k] ** index[k]
                expo += ws[k] * z
            total += (coef * ctx.exp(expo)).real
        return total


def _rational_sample(rng: random.Random, lo: float, hi: float, nonzero=True) -> Fraction:
    while True:
        q = rng.randint(1, 12)
        p = rng.randint(int(math.ceil(lo * q)), int(math.floor(hi * q)))
        f = Fraction(p, q)
        if not nonzero or f != 0:
            return f


class Evaluator:
    """Evaluate sympy trees in an isolated mpmath context."""

    def __init__(self, prec_bits: int, seed: int):
        self.ctx = mpmath.MPContext()
        self.ctx.prec = prec_bits
        self.seed = seed
        self.models: Dict[Tuple, FunctionModel] = {}

    def model(self, f: ParamFnBase) -> FunctionModel:
        key = (f.pf_name, len(f.args), f.pf_harmonic)
        m = self.models.get(key)
        if m is None:
            m = FunctionModel(f.pf_name, len(f.args), f.pf_harmonic, self.seed)
            self.models[key] = m
        return m

    def evaluate_many(self, exprs, point):
        memo = {}
        return [self._ev(e, point, memo) for e in exprs]

    def _ev(self, e, point, memo):
        r = memo.get(e)
        if r is not None:
            return r
        r = self._ev_node(e, point, memo)
        memo[e] = r
        return r

    def _ev_node(self, e, point, memo):
        ctx = self.ctx
        if e.is_Symbol:
            try:
                return point[e]
            except KeyError:
                raise StructuralError("no sample value for %s" % e)
        if e.is_Integer:
            return ctx.mpf(int(e))
        if e.is_Rational:
            return ctx.mpf(int(e.p)) / int(e.q)
        if e.is_Float:
            return ctx.mpf(str(e))
        if e is sp.pi:
            return +ctx.pi
        if e is sp.E:
            return +ctx.e
        if e.is_Add:
            s = ctx.mpf(0)
            for a in e.args:
                s += self._ev(a, point, memo)
            return s
        if e.is_Mul:
            p = ctx.mpf(1)
            for a in e.args:
                p *= self._ev(a, point, memo)
            return p
        if e.is_Pow:
            b = self._ev(e.base, point, memo)
            if e.exp.is_Integer:
                n = int(e.exp)
                if n < 0:
                    if b == 0:
                        raise DomainFailure("pole")
                    return 1 / b ** (-n)
                return b ** n
            ex = self._ev(e.exp, point, memo)
            if b < 0:
                raise DomainFailure("negative base")
            if b == 0:
                raise DomainFailure("zero base")
            return ctx.power(b, ex)
        if isinstance(e, ParamFnBase):
            args = [self._ev(a, point, memo) for a in e.args]
            return self.model(e).value(ctx, e.pf_index, args)
        if isinstance(e, sp.exp):
            return ctx.exp(self._ev(e.args[0], point, memo))
        if isinstance(e, sp.log):
            a = self._ev(e.args[0], point, memo)
            if a <= 0:
                raise DomainFailure("log domain")
            return ctx.log(a)
        if isinstance(e, sp.sin):
            return ctx.sin(self._ev(e.args[0], point, memo))
        if isinstance(e, sp.cos):
            return ctx.cos(self._ev(e.args[0], point, memo))
        if isinstance(e, sp.tan):
            return ctx.tan(self._ev(e.args[0], point, memo))
        if isinstance(e, sp.atan):
            return ctx.atan(self._ev(e.args[0], point, memo))
        if isinstance(e, sp.Abs):
            return abs(self._ev(e.args[0], point, memo))
        if isinstance(e, sp.sign):
            return ctx.mpf(ctx.sign(self._ev(e.args[0], point, memo)))
        raise StructuralError("cannot evaluate node %s" % type(e).__name__)


def sample_point(symbols, seed: int, index: int, attempt: int, ranges=None) -> Dict:
    point = {}
    for s in sorted(symbols, key=lambda s: s.name):
        rng = random.Random("%d|pt|%s|%d|%d" % (seed, s.name, index, attempt))
        lo, hi = (ranges or {}).get(s.name, (None, None))
        if lo is None:
            lo, hi = (0.25, 2.5) if s.is_positive else (-2.0, 2.0)
        point[s] = _rational_sample(rng, lo, hi)
    return point


def numeric_residuals(
    exprs: Sequence,
    samples: Optional[int] = None,
    prec_bits: Optional[int] = None,
    seed: Optional[int] = None,
    max_retries: Optional[int] = None,
    ranges=None,
    point_filter=None,
) -> List[List[float]]:
    """Residual magnitudes ``[sample][expr]`` at random rational points."""
    st = _settings
    samples = st.samples if samples is None else samples
    prec_bits = st.prec_bits if prec_bits is None else prec_bits
    seed = st.seed if seed is None else seed
    max_retries = st.max_retries if max_retries is None else max_retries
    exprs = [sp.sympify(e) for e in exprs]
    symbols = set()
    for e in exprs:
        symbols |= e.free_symbols
    ev = Evaluator(prec_bits, seed)
    out = []
    for i in range(samples):
        for attempt in range(max_retries + 1):
            pt = sample_point(symbols, seed, i, attempt, ranges)
            if point_filter is not None and not point_filter(pt):
                continue
            ctxpt = {s: ev.ctx.mpf(v.numerator) / v.denominator for s, v in pt.items()}
            try:
                vals = ev.evaluate_many(exprs, ctxpt)
            except (DomainFailure, ZeroDivisionError, ValueError):
                continue
            out.append([abs(v) for v in vals])
            break
        else:
            raise StructuralError("every sample hit a pole after %d retries" % max_retries)
    return out


def _numeric_verdicts(exprs, **kw) -> List[ZeroVerdict]:
    st = _settings
    prec = kw.pop("prec_bits", None) or st.prec_bits
    res = numeric_residuals(exprs, prec_bits=prec, **kw)
    verdicts = []
    for j in range(len(exprs)):
        col = [float(r[j]) for r in res]
        if any(v > NONZERO_TOL for v in col):
            verdicts.append(ZeroVerdict("NonZero", tuple(col)))
        elif all(v < ZERO_TOL for v in col):
            verdicts.append(ZeroVerdict("UnknownSymbolic", tuple(col), "numerically zero"))
        else:
            verdicts.append(None)
    gray = [j for j, v in enumerate(verdicts) if v is None]
    for factor in (2, 4):
        if not gray:
            break
        res = numeric_residuals([exprs[j] for j in gray], prec_bits=prec * factor, **kw)
        still = []
        for k, j in enumerate(gray):
            col = [float(r[k]) for r in res]
            if any(v > NONZERO_TOL for v in col):
                verdicts[j] = ZeroVerdict("NonZero", tuple(col))
            elif all(v < ZERO_TOL for v in col):
                verdicts[j] = ZeroVerdict("UnknownSymbolic", tuple(col), "numerically zero")
            elif factor == 4:
                verdicts[j] = ZeroVerdict("NonZero", tuple(col), "persistent small residual")
            else:
                still.append(j)
        gray = still
    return verdicts


def is_zero(e, symbolic: bool = True, **kw) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically."""
    return is_zero_many([e], symbolic=symbolic, **kw)[0]


def is_zero_many(exprs: Sequence, symbolic: bool = True, **kw) -> List[ZeroVerdict]:
    """Zero-test several expressions, sharing numeric sample points."""
    exprs = [sp.sympify(e) for e in exprs]
    verdicts: List[Optional[ZeroVerdict]] = [None] * len(exprs)
    pending = []
    for j, e in enumerate(exprs):
        if e == 0 or (symbolic and symbolic_zero(e)):
            verdicts[j] = ZERO
        else:
            pending.append(j)
    if pending:
        nv = _numeric_verdicts([exprs[j] for j in pending], **kw)
        for j, v in zip(pending, nv):
            verdicts[j] = v
    return verdicts
