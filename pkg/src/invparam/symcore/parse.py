"""Recursive-descent parser and printer for the expression grammar.

Grammar::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := atom (("^" | "**") unary)?
    atom    := NUMBER | "(" expr ")" | call | IDENT
    call    := IDENT "'"* ("[" INT ("," INT)* "]")? "(" expr ("," expr)* ")"

Identifiers resolve, in order, against macros, jet coordinates and aliases,
base symbols, declared constants.  ``name(args)`` with an unknown ``name``
declares a parameter function; primes count t-derivatives and ``[i,j,..]``
gives a full derivative multi-index.  ``name_xy(t, x, y)`` is shorthand for
the corresponding derivative when every argument is a distinct base symbol.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy as sp

from .expr import StructuralError, normalize, sym
from .paramfn import ParamFnBase, apply_paramfn

KERNELS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "ln": sp.log,
    "log": sp.log,
    "atan": sp.atan,
    "arctan": sp.atan,
    "sqrt": sp.sqrt,
    "abs": sp.Abs,
}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__("%s at line %d, column %d" % (msg, line, col))
        self.line = line
        self.col = col


@dataclass
class ParseContext:
    """Name resolution for the parser.

    ``spec`` is a jet spec (or None); ``expand_aliases`` decides whether alias
    coordinates such as ``zeta_x`` are replaced by their definitions.
    """

    spec: object = None
    expand_aliases: bool = True
    base: Tuple[str, ...] = ("t", "x", "y")
    constants: set = field(default_factory=set)
    macros: Dict[str, sp.Expr] = field(default_factory=dict)
    functions: Dict[str, Optional[Tuple[int, int]]] = field(default_factory=dict)
    families: Dict[str, Callable] = field(default_factory=dict)
    allow_unknown: bool = False
    canonical: bool = True

    def declare(self, *names: str) -> "ParseContext":
        self.constants.update(names)
        return self


def default_context(**kw) -> ParseContext:
    from ..jet import vorticity_spec

    kw.setdefault("spec", vorticity_spec())
    return ParseContext(**kw)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<id>[A-Za-z][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^(),'\[\]]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> List[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    n = len(src)
    while pos < n:
        while pos < n and src[pos] in " \t\r\n":
            if src[pos] == "\n":
                line += 1
                line_start = pos + 1
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError("unexpected character %r" % src[pos], line, pos - line_start + 1)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), line, start - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, src: str, ctx: ParseContext):
        self.toks = _tokenize(src)
        self.i = 0
        self.ctx = ctx

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: Optional[str] = None) -> _Tok:
        tok = self.toks[self.i]
        if text is not None and tok.text != text:
            self.fail("expected %r" % text, tok)
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def parse(self):
        e = self.expr()
        if self.peek().kind != "end":
            self.fail("unexpected token %r" % self.peek().text)
        return e

    def expr(self):
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            r = self.term()
            e = e + r if op == "+" else e - r
        return e

    def term(self):
        e = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            r = self.unary()
            e = e * r if op == "*" else e / r
        return e

    def unary(self):
        if self.peek().text == "-":
            self.take()
            return -self.unary()
        if self.peek().text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        e = self.atom()
        if self.peek().text in ("^", "**"):
            self.take()
            return e ** self.unary()
        return e

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return sp.Rational(tok.text)
        if tok.text == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok.kind == "id":
            return self.identifier()
        self.fail("unexpected token %r" % (tok.text or "end of input"))

    def _args(self):
        self.take("(")
        args = [self.expr()]
        while self.peek().text == ",":
            self.take()
            args.append(self.expr())
        self.take(")")
        return args

    def identifier(self):
        tok = self.take()
        name = tok.text
        primes = 0
        while self.peek().text == "'":
            self.take()
            primes += 1
        index = None
        if self.peek().text == "[":
            self.take()
            index = [int(self.take().text)]
            while self.peek().text == ",":
                self.take()
                index.append(int(self.take().text))
            self.take("]")
        if self.peek().text == "(":
            return self.call(tok, name, primes, index)
        if primes or index is not None:
            self.fail("derivative marks need an argument list", tok)
        return self.resolve(tok, name)

    def call(self, tok, name, primes, index):
        ctx = self.ctx
        if name in ctx.families:
            args = self._args()
            return ctx.families[name](*args)
        if name in KERNELS and not primes and index is None:
            args = self._args()
            if len(args) != 1:
                self.fail("%s takes one argument" % name, tok)
            return KERNELS[name](args[0])
        args = self._args()
        base = [sym(n) for n in ctx.base]
        fname, sub = name, None
        if "_" in name and index is None and not primes:
            head, _, letters = name.partition("_")
            if head and letters and all(a in base for a in args) and len(set(args)) == len(args):
                names = [a.name for a in args]
                if all(ch in names for ch in letters):
                    fname = head
                    sub = [letters.count(n) for n in names]
        if index is None:
            index = sub if sub is not None else [0] * len(args)
            if primes:
                tpos = [k for k, a in enumerate(args) if a == sym("t")]
                k = tpos[0] if tpos else 0
                index[k] += primes
        elif primes:
            self.fail("use either primes or an index", tok)
        if len(index) != len(args):
            self.fail("derivative index length does not match arguments", tok)
        harmonic = ctx.functions.get(fname)
        if fname not in ctx.functions:
            ctx.functions[fname] = None
        return apply_paramfn(fname, args, index, harmonic)

    def resolve(self, tok, name):
        ctx = self.ctx
        if name in ctx.macros:
            return ctx.macros[name]
        spec = ctx.spec
        if spec is not None:
            info = spec.parse_name(name)
            if info is not None:
                kind, key, alpha = info
                if kind == "coord":
                    return spec.coord(key, alpha)
                if ctx.expand_aliases:
                    return spec.alias_value(key, alpha)
                return spec.alias_coord(key, alpha)
        if name in ctx.base or name in ctx.constants:
            return sym(name)
        if name == "pi":
            return sp.pi
        if ctx.allow_unknown:
            ctx.constants.add(name)
            return sym(name)
        self.fail("unknown identifier %r" % name, tok)


def parse(src: str, ctx: Optional[ParseContext] = None):
    """Parse an expression string; the result is normalized by default."""
    ctx = ctx or default_context()
    e = _Parser(src, ctx).parse()
    return normalize(e) if ctx.canonical else e


# ---------------------------------------------------------------- printing

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _num(r: sp.Rational) -> str:
    return str(r.p) if r.q == 1 else "%d/%d" % (r.p, r.q)


def _p(e) -> Tuple[str, int]:
    if e.is_Rational:
        if e.q == 1 and e >= 0:
            return str(e.p), _PREC_ATOM
        return "(%s)" % _num(e), _PREC_ATOM
    if e.is_Symbol:
        return e.name, _PREC_ATOM
    if e is sp.pi:
        return "pi", _PREC_ATOM
    if e.is_Add:
        parts = []
        for k, a in enumerate(sp.Add.make_args(e)):
            s, _ = _p(a)
            if k and s.startswith("-"):
                parts.append(" - " + s[1:])
            elif k:
                parts.append(" + " + s)
            else:
                parts.append(s)
        return "".join(parts), _PREC_ADD
    if e.is_Mul:
        c, rest = e.as_coeff_Mul()
        factors = sp.Mul.make_args(rest)
        strs = []
        for f in factors:
            s, pr = _p(f)
            strs.append(s if pr > _PREC_MUL else "(%s)" % s)
        body = "*".join(strs)
        if c == 1:
            return body, _PREC_MUL
        if c == -1:
            return "-" + body, _PREC_MUL
        if c.is_Rational and c.q == 1:
            s = str(c.p)
            return s + "*" + body, _PREC_MUL
        return "(%s)*%s" % (_num(c), body), _PREC_MUL
    if e.is_Pow:
        b, pb = _p(e.base)
        if pb <= _PREC_POW:
            b = "(%s)" % b
        x, px = _p(e.exp)
        if px < _PREC_ATOM:
            x = "(%s)" % x
        return "%s^%s" % (b, x), _PREC_POW
    if isinstance(e, ParamFnBase):
        args = ", ".join(_p(a)[0] for a in e.args)
        if any(e.pf_index):
            return "%s[%s](%s)" % (e.pf_name, ",".join(map(str, e.pf_index)), args), _PREC_ATOM
        return "%s(%s)" % (e.pf_name, args), _PREC_ATOM
    for name, cls in (("sin", sp.sin), ("cos", sp.cos), ("exp", sp.exp), ("ln", sp.log), ("atan", sp.atan)):
        if isinstance(e, cls):
            return "%s(%s)" % (name, _p(e.args[0])[0]), _PREC_ATOM
    raise StructuralError("cannot print %s" % type(e).__name__)


def to_string(e) -> str:
    """Print an expression in the input grammar."""
    return _p(sp.sympify(e))[0]


print_expr = to_string
