"""Scalar symbolic expressions: parse, render, evaluate, differentiate.

Expressions are immutable trees. Equality of two expressions is never
decided structurally by the rest of the package; callers compare values at
sample bindings instead.

Grammar accepted by :func:`parse_expr`::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := ('-' | '+') unary | power
    power    := atom ('^' exponent)?
    exponent := ['-'|'+'] NUMBER | '(' ['-'] NUMBER ['/' NUMBER] ')' , '^' chains fold right
    atom     := NUMBER | IDENT | IDENT '(' args ')' | '(' expr ')'

Functions: exp, ln, sqrt, sin, cos, tanh, and ``integral(f, s, lo, hi)``
which denotes a definite integral evaluated by adaptive quadrature.
"""

from __future__ import annotations

import math
import numbers
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping

from .errors import DomainError, ExprSyntaxError, UnboundVariable, UnknownFunction

FUNCTIONS = ("exp", "ln", "sqrt", "sin", "cos", "tanh")

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    # arithmetic sugar for building expressions in Python
    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Neg(as_expr(other))))

    def __rsub__(self, other):
        return Add((as_expr(other), Neg(self)))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        return Pow(self, _as_fraction(exponent))

    def __str__(self):
        return render(self)

    def __call__(self, bindings=None, **kw):
        env = dict(bindings or {})
        env.update(kw)
        return evaluate(self, env)


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError("constants must be finite")


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr

    def __post_init__(self):
        if self.fn not in FUNCTIONS:
            raise ValueError(f"unknown function {self.fn!r}")


@dataclass(frozen=True)
class Integral(Expr):
    """Definite integral of ``integrand`` over ``var`` from ``lower`` to ``upper``."""

    integrand: Expr
    var: str
    lower: Expr
    upper: Expr


ZERO = Const(0.0)
ONE = Const(1.0)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, (float, numbers.Real)) and not isinstance(x, bool):
        return Fraction(repr(float(x)))
    if isinstance(x, Const):
        return Fraction(repr(float(x.value)))
    raise TypeError(f"exponent must be rational, got {x!r}")


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return Const(x)
    if isinstance(x, Fraction):
        return Const(float(x))
    if isinstance(x, str):
        return parse_expr(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def var(name: str) -> Var:
    return Var(name)


def const(value: float) -> Const:
    return Const(value)


def exp(e) -> Expr:
    return Call("exp", as_expr(e))


def ln(e) -> Expr:
    return Call("ln", as_expr(e))


def sqrt(e) -> Expr:
    return Call("sqrt", as_expr(e))


def sin(e) -> Expr:
    return Call("sin", as_expr(e))


def cos(e) -> Expr:
    return Call("cos", as_expr(e))


def tanh(e) -> Expr:
    return Call("tanh", as_expr(e))


def integral(integrand, var_name: str, lower, upper) -> Expr:
    return Integral(as_expr(integrand), var_name, as_expr(lower), as_expr(upper))


def add(*terms) -> Expr:
    terms = tuple(as_expr(t) for t in terms)
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(terms)


def mul(*factors) -> Expr:
    factors = tuple(as_expr(f) for f in factors)
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Mul(factors)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []  # (kind, value, char_offset)
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ExprSyntaxError(self._byte(pos), f"unexpected character {text[pos]!r}")
            kind = m.lastgroup
            if kind != "ws":
                self.tokens.append((kind, m.group(), pos))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def _byte(self, char_offset):
        return len(self.text[:char_offset].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(self._byte(tok[2]), message)

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] == "num":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {value!r}, found {found}")
        return self.advance()

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self):
        left = self.unary()
        chain = None
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            right = self.unary()
            if op == "*":
                if chain is not None and left is chain:
                    chain = Mul(chain.factors + (right,))
                else:
                    chain = Mul((left, right))
                left = chain
            else:
                left = Div(left, right)
                chain = None
        return left

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return Pow(base, self.exponent())
        return base

    def _number(self):
        tok = self.peek()
        if tok[0] != "num":
            raise self.error("exponent must be a rational literal")
        self.advance()
        return Fraction(tok[1])

    def exponent(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "(":
            self.advance()
            sign = 1
            if self.peek()[1] in ("-", "+") and self.peek()[0] == "op":
                sign = -1 if self.advance()[1] == "-" else 1
            value = self._number()
            if self.peek()[0] == "op" and self.peek()[1] == "/":
                self.advance()
                den = self._number()
                if den == 0:
                    raise self.error("zero denominator in exponent")
                value = value / den
            self.expect(")")
            value = sign * value
        else:
            sign = 1
            if tok[0] == "op" and tok[1] in "-+":
                sign = -1 if self.advance()[1] == "-" else 1
            value = sign * self._number()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            at = self.advance()
            outer = self.exponent()
            if outer.denominator != 1:
                raise self.error("folded exponent is not rational", at)
            if value == 0 and outer < 0:
                raise self.error("zero raised to a negative power in exponent", at)
            value = value ** int(outer)
        return value

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.advance()
            return Const(float(tok[1]))
        if tok[0] == "ident":
            self.advance()
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                return self.call(tok)
            return Var(tok[1])
        if tok[0] == "op" and tok[1] == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok[0] == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {tok[1]!r}")

    def call(self, name_tok):
        name = name_tok[1]
        if name == "integral":
            self.advance()
            integrand = self.expr()
            self.expect(",")
            v = self.peek()
            if v[0] != "ident":
                raise self.error("expected integration variable")
            self.advance()
            self.expect(",")
            lower = self.expr()
            self.expect(",")
            upper = self.expr()
            self.expect(")")
            return Integral(integrand, v[1], lower, upper)
        if name not in FUNCTIONS:
            raise UnknownFunction(self._byte(name_tok[2]), name)
        self.advance()
        arg = self.expr()
        self.expect(")")
        return Call(name, arg)


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` carrying the byte offset of the first
    offending token, or :class:`UnknownFunction`.
    """
    return _Parser(text).parse()


# -------------------------------------------------------------- rendering

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e):
    if isinstance(e, Add):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_UNARY
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _PREC_UNARY
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(e, need):
    s = render(e)
    return f"({s})" if _prec(e) < need else s


def _render_exponent(p: Fraction) -> str:
    if p.denominator == 1 and p >= 0:
        return str(p.numerator)
    if p.denominator == 1:
        return f"({p.numerator})"
    return f"({p.numerator}/{p.denominator})"


def render(e: Expr) -> str:
    """Text form that :func:`parse_expr` reads back to an equal-valued tree."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        parts = []
        for k, t in enumerate(e.terms):
            if k > 0 and isinstance(t, Neg):
                parts.append(" - " + _wrap(t.arg, _PREC_MUL))
            else:
                s = _wrap(t, _PREC_ADD + 1) if k > 0 else _wrap(t, _PREC_ADD)
                if k > 0 and s.startswith("-"):
                    s = f"({s})"
                parts.append((" + " if k > 0 else "") + s)
        return "".join(parts)
    if isinstance(e, Mul):
        out = []
        for k, f in enumerate(e.factors):
            if k == 0:
                out.append(_wrap(f, _PREC_MUL))
            else:
                # a Div after the first factor must keep its grouping
                need = _PREC_MUL + 1 if isinstance(f, (Div, Mul)) else _PREC_UNARY
                out.append(_wrap(f, need))
        return " * ".join(out)
    if isinstance(e, Div):
        return f"{_wrap(e.num, _PREC_MUL)} / {_wrap(e.den, _PREC_UNARY)}"
    if isinstance(e, Neg):
        inner = e.arg
        if isinstance(inner, Neg) or (isinstance(inner, Const) and _prec(inner) == _PREC_UNARY):
            return f"-({render(inner)})"
        return "-" + _wrap(inner, _PREC_POW)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_ATOM)}^{_render_exponent(e.exponent)}"
    if isinstance(e, Call):
        return f"{e.fn}({render(e.arg)})"
    if isinstance(e, Integral):
        return (
            f"integral({render(e.integrand)}, {e.var}, "
            f"{render(e.lower)}, {render(e.upper)})"
        )
    raise TypeError(type(e).__name__)


# ------------------------------------------------------------- evaluation


def _power(node, x, p: Fraction):
    if p.denominator == 1:
        n = p.numerator
        if x == 0.0 and n < 0:
            raise DomainError(node, x)
        try:
            return x**n
        except OverflowError:
            raise DomainError(node, x) from None
    if x < 0.0:
        if p.denominator % 2 == 0:
            raise DomainError(node, x)
        mag = (-x) ** float(p)
        return -mag if p.numerator % 2 else mag
    if x == 0.0 and p < 0:
        raise DomainError(node, x)
    try:
        return x ** float(p)
    except OverflowError:
        raise DomainError(node, x) from None


def _call(node, x):
    fn = node.fn
    if fn == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise DomainError(node, x) from None
    if fn == "ln":
        if x <= 0.0:
            raise DomainError(node, x)
        return math.log(x)
    if fn == "sqrt":
        if x < 0.0:
            raise DomainError(node, x)
        return math.sqrt(x)
    if fn == "sin":
        return math.sin(x)
    if fn == "cos":
        return math.cos(x)
    return math.tanh(x)


def _quad(node, env):
    from scipy.integrate import IntegrationWarning, quad

    lo = _eval(node.lower, env)
    hi = _eval(node.upper, env)
    if lo == hi:
        return 0.0
    inner = dict(env)

    def f(s):
        inner[node.var] = s
        return _eval(node.integrand, inner)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, _ = quad(f, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    return value


def _eval(e, env):
    t = type(e)
    if t is Const:
        return e.value
    if t is Var:
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if t is Add:
        acc = _eval(e.terms[0], env)
        for term in e.terms[1:]:
            acc = acc + _eval(term, env)
        return acc
    if t is Mul:
        acc = _eval(e.factors[0], env)
        for f in e.factors[1:]:
            acc = acc * _eval(f, env)
        return acc
    if t is Div:
        num = _eval(e.num, env)
        den = _eval(e.den, env)
        if den == 0.0:
            raise DomainError(e, den)
        return num / den
    if t is Neg:
        return -_eval(e.arg, env)
    if t is Pow:
        return _power(e, _eval(e.base, env), e.exponent)
    if t is Call:
        return _call(e, _eval(e.arg, env))
    if t is Integral:
        return _quad(e, env)
    raise TypeError(t.__name__)


def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """IEEE double value of ``e``; extra bindings are ignored."""
    return float(_eval(e, bindings))


# ---------------------------------------------------------- free variables


@lru_cache(maxsize=None)
def free_vars(e: Expr) -> frozenset:
    t = type(e)
    if t is Const:
        return frozenset()
    if t is Var:
        return frozenset((e.name,))
    if t is Add:
        return frozenset().union(*(free_vars(x) for x in e.terms))
    if t is Mul:
        return frozenset().union(*(free_vars(x) for x in e.factors))
    if t is Div:
        return free_vars(e.num) | free_vars(e.den)
    if t in (Neg, Call):
        return free_vars(e.arg)
    if t is Pow:
        return free_vars(e.base)
    if t is Integral:
        return (free_vars(e.integrand) - {e.var}) | free_vars(e.lower) | free_vars(e.upper)
    raise TypeError(t.__name__)


def _all_names(e: Expr) -> set:
    names = set(free_vars(e))
    if isinstance(e, Integral):
        names.add(e.var)
    for child in _children(e):
        names |= _all_names(child)
    return names


def _children(e):
    t = type(e)
    if t is Add:
        return e.terms
    if t is Mul:
        return e.factors
    if t is Div:
        return (e.num, e.den)
    if t in (Neg, Call):
        return (e.arg,)
    if t is Pow:
        return (e.base,)
    if t is Integral:
        return (e.integrand, e.lower, e.upper)
    return ()


# ------------------------------------------------------------ substitution


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace free variables by expressions (capture-avoiding)."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    return _subst(e, mapping)


def _subst(e, mapping):
    t = type(e)
    if t is Const:
        return e
    if t is Var:
        return mapping.get(e.name, e)
    if not (free_vars(e) & mapping.keys()):
        return e
    if t is Add:
        return Add(tuple(_subst(x, mapping) for x in e.terms))
    if t is Mul:
        return Mul(tuple(_subst(x, mapping) for x in e.factors))
    if t is Div:
        return Div(_subst(e.num, mapping), _subst(e.den, mapping))
    if t is Neg:
        return Neg(_subst(e.arg, mapping))
    if t is Call:
        return Call(e.fn, _subst(e.arg, mapping))
    if t is Pow:
        return Pow(_subst(e.base, mapping), e.exponent)
    if t is Integral:
        inner = {k: v for k, v in mapping.items() if k != e.var}
        bound, integrand = e.var, e.integrand
        incoming = set().union(*(free_vars(v) for v in inner.values())) if inner else set()
        if bound in incoming:
            taken = incoming | _all_names(e) | set(inner)
            k = 1
            while f"{bound}_{k}" in taken:
                k += 1
            fresh = f"{bound}_{k}"
            integrand = _subst(integrand, {bound: Var(fresh)})
            bound = fresh
        return Integral(
            _subst(integrand, inner), bound, _subst(e.lower, mapping), _subst(e.upper, mapping)
        )
    raise TypeError(t.__name__)


# ---------------------------------------------------------- differentiation


def diff(e: Expr, v: str) -> Expr:
    """Partial derivative of ``e`` with respect to variable ``v``."""
    return simplify(_diff(e, v))


@lru_cache(maxsize=65536)
def _diff(e, v):
    if v not in free_vars(e):
        return ZERO
    t = type(e)
    if t is Var:
        return ONE
    if t is Add:
        return Add(tuple(_diff(x, v) for x in e.terms))
    if t is Mul:
        terms = []
        for k, f in enumerate(e.factors):
            df = _diff(f, v)
            if df == ZERO:
                continue
            terms.append(Mul(e.factors[:k] + (df,) + e.factors[k + 1 :]))
        return Add(tuple(terms)) if terms else ZERO
    if t is Div:
        u, w = e.num, e.den
        du, dw = _diff(u, v), _diff(w, v)
        return Add((Div(du, w), Neg(Div(Mul((u, dw)), Pow(w, Fraction(2))))))
    if t is Neg:
        return Neg(_diff(e.arg, v))
    if t is Pow:
        p = e.exponent
        inner = ONE if p == 1 else Pow(e.base, p - 1)
        return Mul((Const(float(p)), inner, _diff(e.base, v)))
    if t is Call:
        u = e.arg
        du = _diff(u, v)
        if e.fn == "exp":
            outer = e
        elif e.fn == "ln":
            return Div(du, u)
        elif e.fn == "sqrt":
            return Div(du, Mul((Const(2.0), e)))
        elif e.fn == "sin":
            outer = Call("cos", u)
        elif e.fn == "cos":
            outer = Neg(Call("sin", u))
        else:
            outer = Add((ONE, Neg(Pow(e, Fraction(2)))))
        return Mul((outer, du))
    if t is Integral:
        terms = []
        if v in free_vars(e.upper):
            terms.append(Mul((_subst(e.integrand, {e.var: e.upper}), _diff(e.upper, v))))
        if v in free_vars(e.lower):
            terms.append(Neg(Mul((_subst(e.integrand, {e.var: e.lower}), _diff(e.lower, v)))))
        if v != e.var and v in free_vars(e.integrand):
            terms.append(Integral(_diff(e.integrand, v), e.var, e.lower, e.upper))
        return Add(tuple(terms)) if terms else ZERO
    raise TypeError(t.__name__)


# ------------------------------------------------------------ simplification


def _try_fold(e):
    try:
        return Const(_eval(e, {}))
    except (DomainError, ValueError, OverflowError):
        return e


def simplify(e: Expr) -> Expr:
    """Constant folding, 0/1 identities and flattening.

    Best effort only; the result evaluates like the input wherever the
    input is defined.
    """
    return _simp(e)


@lru_cache(maxsize=65536)
def _simp(e):
    t = type(e)
    if t in (Const, Var):
        return e
    if t is Add:
        flat = []
        for x in e.terms:
            x = _simp(x)
            if isinstance(x, Add):
                flat.extend(x.terms)
            else:
                flat.append(x)
        c = 0.0
        rest = []
        for x in flat:
            if isinstance(x, Const):
                c += x.value
            else:
                rest.append(x)
        if c != 0.0:
            rest.append(Const(c))
        if not rest:
            return ZERO
        return rest[0] if len(rest) == 1 else Add(tuple(rest))
    if t is Mul:
        flat = []
        for x in e.factors:
            x = _simp(x)
            if isinstance(x, Mul):
                flat.extend(x.factors)
            else:
                flat.append(x)
        c = 1.0
        rest = []
        negate = False
        for x in flat:
            if isinstance(x, Const):
                c *= x.value
            elif isinstance(x, Neg):
                negate = not negate
                rest.append(x.arg)
            else:
                rest.append(x)
        if negate:
            c = -c
        if c == 0.0:
            return ZERO
        if not rest:
            return Const(c)
        body = rest[0] if len(rest) == 1 else Mul(tuple(rest))
        if c == 1.0:
            return body
        if c == -1.0:
            return Neg(body)
        return Mul((Const(c),) + tuple(rest))
    if t is Div:
        num, den = _simp(e.num), _simp(e.den)
        if den == ONE:
            return num
        if num == ZERO and not (isinstance(den, Const) and den.value == 0.0):
            return ZERO
        if isinstance(num, Const) and isinstance(den, Const):
            return _try_fold(Div(num, den))
        return Div(num, den)
    if t is Neg:
        a = _simp(e.arg)
        if isinstance(a, Neg):
            return a.arg
        if isinstance(a, Const):
            return Const(-a.value)
        return Neg(a)
    if t is Pow:
        b = _simp(e.base)
        if e.exponent == 0:
            return ONE
        if e.exponent == 1:
            return b
        if isinstance(b, Const):
            return _try_fold(Pow(b, e.exponent))
        # only integer powers nest safely for negative bases
        if isinstance(b, Pow) and b.exponent.denominator == 1 and e.exponent.denominator == 1:
            return Pow(b.base, b.exponent * e.exponent)
        return Pow(b, e.exponent)
    if t is Call:
        a = _simp(e.arg)
        node = Call(e.fn, a)
        if isinstance(a, Const):
            return _try_fold(node)
        return node
    if t is Integral:
        lo, hi = _simp(e.lower), _simp(e.upper)
        f = _simp(e.integrand)
        if lo == hi or f == ZERO:
            return ZERO
        return Integral(f, e.var, lo, hi)
    raise TypeError(t.__name__)
