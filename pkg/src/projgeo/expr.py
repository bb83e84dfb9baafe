"""Closed-form chart expressions and truncated Taylor (jet) evaluation.

Grammar (coordinates are x1..xn):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' ['-'] NUMBER)?
    atom   := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := sin | cos | exp | ln | sqrt

The exponent of '^' must be a numeric literal; integer exponents are evaluated
by repeated multiplication, non-integer exponents require a positive base.
Unary minus binds looser than '^', so "-x1^2" is -(x1^2).

Evaluation produces jets: value and partial derivatives up to order 3, exact to
rounding (no finite differences).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Pow", "Call",
    "Jet3", "parse", "to_text", "eval_jet", "jet_partial",
    "ParseError", "UnknownVariable", "UnknownFunction", "DomainError",
]

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")


class ParseError(ValueError):
    """Malformed expression text. `offset` is a 1-based position in the input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownVariable(ParseError):
    """Identifier is not x1..xn for the declared chart dimension."""


class UnknownFunction(ParseError):
    """Identifier used as a function is not one of sin, cos, exp, ln, sqrt."""


class DomainError(ArithmeticError):
    """Evaluation left the domain: ln/sqrt of a non-positive value, division by
    zero, or a non-integer power of a non-positive base."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, so Var(1) is x1


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float  # literal only, enforced by the parser


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}",
                             len(text) - len(stripped) + 1)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.tokens = _tokenize(text)
        self.n = n
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", offset)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {value!r}", offset)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                left = BinOp(value, left, self.term())
            else:
                return left

    def term(self) -> Expr:
        left = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                left = BinOp(value, left, self.factor())
            else:
                return left

    def factor(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return Pow(base, self.exponent_literal())
        return base

    def exponent_literal(self) -> float:
        sign = 1.0
        kind, value, offset = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            sign = -1.0
            kind, value, offset = self.peek()
        if kind != "num":
            raise ParseError("exponent must be a numeric literal", offset)
        self.advance()
        return sign * float(value)

    def atom(self) -> Expr:
        kind, value, offset = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "ident":
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            m = re.fullmatch(r"x(\d+)", value)
            if m is not None:
                index = int(m.group(1))
                if not 1 <= index <= self.n:
                    raise UnknownVariable(
                        f"variable {value} outside x1..x{self.n}", offset)
                return Var(index)
            next_kind, next_value, _ = self.peek()
            if next_kind == "op" and next_value == "(":
                raise UnknownFunction(f"unknown function {value!r}", offset)
            raise UnknownVariable(f"unknown variable {value!r}", offset)
        raise ParseError(f"unexpected token {value!r}" if value else "unexpected end of input",
                         offset)


def parse(text: str, n: int) -> Expr:
    """Parse `text` over chart variables x1..xn into an immutable AST."""
    if n < 1:
        raise ValueError("chart dimension must be at least 1")
    return _Parser(text, n).parse()


def _format_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def to_text(e: Expr) -> str:
    """Render an AST back to source text (fully parenthesized, reparses to the same tree)."""
    if isinstance(e, Num):
        return _format_number(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Pow):
        exp = e.exponent
        exp_text = _format_number(exp) if exp >= 0 else f"-{_format_number(-exp)}"
        return f"({to_text(e.base)}^{exp_text})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    raise TypeError(f"not an Expr node: {e!r}")


@dataclass
class Jet3:
    """Taylor data at a point: value and symmetric partials up to `order` (1..3).

    Slots beyond `order` are zero-filled; `order` flags which are meaningful.
    """

    order: int
    value: float
    d1: np.ndarray
    d2: np.ndarray = field(default=None)  # type: ignore[assignment]
    d3: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        n = self.n
        if self.d2 is None:
            self.d2 = np.zeros((n, n))
        if self.d3 is None:
            self.d3 = np.zeros((n, n, n))

    @property
    def n(self) -> int:
        return self.d1.shape[0]

    @classmethod
    def constant(cls, value: float, n: int, order: int = 3) -> "Jet3":
        return cls(order, float(value), np.zeros(n))

    @classmethod
    def variable(cls, index: int, p, order: int = 3) -> "Jet3":
        """Jet of the coordinate function x_index (1-based) at point p."""
        p = np.asarray(p, dtype=float)
        d1 = np.zeros(p.shape[0])
        d1[index - 1] = 1.0
        return cls(order, float(p[index - 1]), d1)

    def __neg__(self) -> "Jet3":
        return Jet3(self.order, -self.value, -self.d1, -self.d2, -self.d3)

    def __add__(self, other: "Jet3") -> "Jet3":
        return Jet3(self.order, self.value + other.value, self.d1 + other.d1,
                    self.d2 + other.d2, self.d3 + other.d3)

    def __sub__(self, other: "Jet3") -> "Jet3":
        return Jet3(self.order, self.value - other.value, self.d1 - other.d1,
                    self.d2 - other.d2, self.d3 - other.d3)

    def __mul__(self, other: "Jet3") -> "Jet3":
        order = self.order
        v = self.value * other.value
        d1 = self.d1 * other.value + self.value * other.d1
        out = Jet3(order, v, d1)
        if order >= 2:
            cross = np.outer(self.d1, other.d1)
            out.d2 = (self.d2 * other.value + cross + cross.T
                      + self.value * other.d2)
        if order >= 3:
            out.d3 = (self.d3 * other.value + self.value * other.d3
                      + _sym_21(self.d2, other.d1) + _sym_21(other.d2, self.d1))
        return out

    def __truediv__(self, other: "Jet3") -> "Jet3":
        if other.value == 0.0:
            raise DomainError("division by zero")
        v = other.value
        return self * _compose(other, (1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4))


def _sym_21(a2: np.ndarray, b1: np.ndarray) -> np.ndarray:
    """Symmetrized product of a symmetric 2-slot array with a 1-slot array."""
    t = a2[:, :, None] * b1[None, None, :]
    return t + t.transpose(0, 2, 1) + t.transpose(2, 0, 1)


def _compose(f: Jet3, h: tuple[float, float, float, float]) -> Jet3:
    """Chain rule: jet of h(f) from h's derivatives (h0..h3) at f.value."""
    h0, h1, h2, h3 = h
    out = Jet3(f.order, h0, h1 * f.d1)
    if f.order >= 2:
        out.d2 = h2 * np.outer(f.d1, f.d1) + h1 * f.d2
    if f.order >= 3:
        out.d3 = (h3 * f.d1[:, None, None] * f.d1[None, :, None] * f.d1[None, None, :]
                  + h2 * _sym_21(f.d2, f.d1) + h1 * f.d3)
    return out


def _int_pow(f: Jet3, k: int) -> Jet3:
    # repeated multiplication keeps integer powers exact at zeros of the base
    if k == 0:
        return Jet3.constant(1.0, f.n, f.order)
    if k < 0:
        return Jet3.constant(1.0, f.n, f.order) / _int_pow(f, -k)
    out = f
    for _ in range(k - 1):
        out = out * f
    return out


def _call_jet(func: str, f: Jet3) -> Jet3:
    v = f.value
    if func == "sin":
        s, c = math.sin(v), math.cos(v)
        return _compose(f, (s, c, -s, -c))
    if func == "cos":
        s, c = math.sin(v), math.cos(v)
        return _compose(f, (c, -s, -c, s))
    if func == "exp":
        e = math.exp(v)
        return _compose(f, (e, e, e, e))
    if func == "ln":
        if v <= 0.0:
            raise DomainError(f"ln of non-positive value {v}")
        return _compose(f, (math.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3))
    if func == "sqrt":
        if v <= 0.0:
            raise DomainError(f"sqrt of non-positive value {v}")
        s = math.sqrt(v)
        return _compose(f, (s, 0.5 / s, -0.25 / s**3, 0.375 / s**5))
    raise ValueError(f"no such function {func!r}")


def eval_jet(e: Expr, p, order: int = 3) -> Jet3:
    """Evaluate `e` at point `p`, carrying exact partials up to `order` (1..3)."""
    if order not in (1, 2, 3):
        raise ValueError(f"jet order must be 1, 2 or 3, got {order}")
    p = np.asarray(p, dtype=float)
    return _eval(e, p, order)


def _eval(e: Expr, p: np.ndarray, order: int) -> Jet3:
    if isinstance(e, Num):
        return Jet3.constant(e.value, p.shape[0], order)
    if isinstance(e, Var):
        if e.index > p.shape[0]:
            raise ValueError(f"variable x{e.index} outside chart of dimension {p.shape[0]}")
        return Jet3.variable(e.index, p, order)
    if isinstance(e, Neg):
        return -_eval(e.arg, p, order)
    if isinstance(e, BinOp):
        left = _eval(e.left, p, order)
        right = _eval(e.right, p, order)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        return left / right
    if isinstance(e, Pow):
        base = _eval(e.base, p, order)
        if float(e.exponent).is_integer():
            return _int_pow(base, int(e.exponent))
        if base.value <= 0.0:
            raise DomainError(
                f"non-integer power of non-positive base {base.value}")
        a, v = e.exponent, base.value
        return _compose(base, (v**a, a * v**(a - 1), a * (a - 1) * v**(a - 2),
                               a * (a - 1) * (a - 2) * v**(a - 3)))
    if isinstance(e, Call):
        return _call_jet(e.func, _eval(e.arg, p, order))
    raise TypeError(f"not an Expr node: {e!r}")


def jet_partial(j: Jet3, i: int) -> Jet3:
    """Jet of the i-th partial derivative (0-based direction), one order lower."""
    if j.order < 2:
        raise ValueError("need at least an order-2 jet to shift")
    return Jet3(j.order - 1, float(j.d1[i]), j.d2[i].copy(), j.d3[i].copy())
