"""Closed-form scalar expressions over chart coordinates.

Grammar (whitespace-insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom (("^" | "**") unary)?          # right-associative
    atom    := number | name | func "(" expr ")" | "(" expr ")"
    func    := sin | cos | exp | log | sqrt

Numbers may use decimal or scientific notation. ``pi`` is a constant
unless declared as a coordinate. Negated literals are folded into
constants at parse time, so ``-2`` parses to ``Const(-2.0)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import DomainError, ExprSyntaxError, UnknownSymbolError
from .jets import Jet

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")
_CONSTANTS = {"pi": math.pi}

# precedence used by the printer
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


class Expression:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __str__(self):
        return to_string(self)

    # programmatic construction, used by scene generators
    def __add__(self, other):
        return Binary("+", self, _as_expr(other))

    def __radd__(self, other):
        return Binary("+", _as_expr(other), self)

    def __sub__(self, other):
        return Binary("-", self, _as_expr(other))

    def __rsub__(self, other):
        return Binary("-", _as_expr(other), self)

    def __mul__(self, other):
        return Binary("*", self, _as_expr(other))

    def __rmul__(self, other):
        return Binary("*", _as_expr(other), self)

    def __truediv__(self, other):
        return Binary("/", self, _as_expr(other))

    def __rtruediv__(self, other):
        return Binary("/", _as_expr(other), self)

    def __pow__(self, other):
        return Binary("^", self, _as_expr(other))

    def __neg__(self):
        return Unary("neg", self)


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: float

    def __neg__(self):
        return Const(-self.value)


@dataclass(frozen=True, eq=True)
class Sym(Expression):
    name: str
    index: int


@dataclass(frozen=True, eq=True)
class Unary(Expression):
    op: str  # "neg" or a name in FUNCTIONS
    arg: Expression


@dataclass(frozen=True, eq=True)
class Binary(Expression):
    op: str  # one of + - * / ^
    left: Expression
    right: Expression


def _as_expr(x):
    if isinstance(x, Expression):
        return x
    return Const(float(x))


def func(name, arg):
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return Unary(name, _as_expr(arg))


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


class _Parser:
    def __init__(self, text, coordinates):
        self.text = text
        self.coords = {name: i for i, name in enumerate(coordinates)}
        self.tokens = self._tokenize()
        self.i = 0

    def _tokenize(self):
        toks = []
        pos = 0
        text = self.text
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
            kind = m.lastgroup
            start = m.start(kind)
            val = m.group(kind)
            if kind == "op" and val == "**":
                val = "^"
            toks.append((kind, val, start))
            pos = m.end()
        toks.append(("end", "", len(text)))
        return toks

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        kind, v, pos = self.peek()
        if v != val or kind != "op":
            what = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {val!r} but found {what}", self.text, pos)
        self.take()

    def parse(self):
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", self.text, pos)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            left = Binary(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            left = Binary(op, left, self.unary())
        return left

    def unary(self):
        kind, v, _ = self.peek()
        if kind == "op" and v in "+-":
            self.take()
            arg = self.unary()
            if v == "+":
                return arg
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Unary("neg", arg)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, v, pos = self.take()
        if kind == "num":
            return Const(float(v))
        if kind == "name":
            if v in FUNCTIONS and v not in self.coords:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(v, arg)
            if v in self.coords:
                return Sym(v, self.coords[v])
            if v in _CONSTANTS:
                return Const(_CONSTANTS[v])
            raise UnknownSymbolError(v, self.text, pos)
        if kind == "op" and v == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(v)
        raise ExprSyntaxError(f"unexpected {what}", self.text, pos)


def parse_expression(text, coordinates):
    """Parse ``text`` into an :class:`Expression` over the named coordinates."""
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", str(text), 0)
    return _Parser(text, list(coordinates)).parse()


# -- printing ---------------------------------------------------------------

def _fmt_const(v):
    if v == int(v) and abs(v) < 1e15:
        s = str(int(v))
    else:
        s = repr(float(v))
    return f"({s})" if v < 0 else s


def _prec(e):
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC["neg"]
    return 5


def to_string(e):
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_string(e.arg)
            return "-" + (inner if _prec(e.arg) >= _PREC["neg"] else f"({inner})")
        return f"{e.op}({to_string(e.arg)})"
    p = _PREC[e.op]
    ls, rs = to_string(e.left), to_string(e.right)
    if e.op == "^":
        if _prec(e.left) <= p:
            ls = f"({ls})"
        if _prec(e.right) < _PREC["neg"]:
            rs = f"({rs})"
        return f"{ls}^{rs}"
    if _prec(e.left) < p:
        ls = f"({ls})"
    if _prec(e.right) <= p:
        rs = f"({rs})"
    return f"{ls} {e.op} {rs}"


def free_symbols(e):
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, Unary):
        return free_symbols(e.arg)
    if isinstance(e, Binary):
        return free_symbols(e.left) | free_symbols(e.right)
    return set()


# -- evaluation -------------------------------------------------------------

def evaluate(e, coords):
    """Evaluate ``e`` on a list of scalar coordinate jets."""
    if isinstance(e, Const):
        c = coords[0]
        return Jet.constant(e.value, c.nvars, c.order)
    if isinstance(e, Sym):
        return coords[e.index]
    if isinstance(e, Unary):
        a = evaluate(e.arg, coords)
        try:
            if e.op == "neg":
                return -a
            return getattr(jets, e.op)(a)
        except DomainError as exc:
            raise DomainError(f"{exc} in '{to_string(e)}'") from None
    if isinstance(e, Binary):
        a = evaluate(e.left, coords)
        if e.op == "^":
            return _eval_pow(e, a, coords)
        b = evaluate(e.right, coords)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b.value == 0:
            raise DomainError(f"division by zero in '{to_string(e)}'")
        return a * jets.reciprocal(b)
    raise TypeError(f"not an expression node: {e!r}")


def _eval_pow(e, base, coords):
    try:
        if isinstance(e.right, Const):
            return jets.power(base, e.right.value)
        expo = evaluate(e.right, coords)
        if base.value <= 0:
            raise DomainError("non-constant power of a non-positive base")
        return jets.exp(expo * jets.log(base))
    except DomainError as exc:
        msg = str(exc).split(" in '")[0]
        raise DomainError(f"{msg} in '{to_string(e)}'") from None


def eval_jet3(e, point, order=3):
    """Value and derivatives up to ``order`` of ``e`` at ``point``.

    The returned jet exposes ``value``, ``grad``, ``hess`` and ``third``.
    """
    point = np.asarray(point, dtype=float)
    x = Jet.variables(point, order)
    coords = [x[i] for i in range(point.shape[0])]
    return evaluate(e, coords)


def eval_value(e, point):
    return float(eval_jet3(e, point, order=0).value)
