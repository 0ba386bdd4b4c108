"""Expression mini-language for analytic curves and charts.

Grammar: floating-point numbers, named variables, binary ``+ - * / ^``,
unary minus, the functions ``sin cos exp log sqrt``, and parentheses.
Precedence is ``^`` (right-associative), then unary minus, then ``* /``,
then ``+ -``, all binary operators left-associative except ``^``.

Expressions are immutable trees. They differentiate symbolically, print back
to parseable source (parse -> print -> parse is the identity on trees), and
compile to small stack programs executed by the numeric backend.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from ._prog import (OP_ADD, OP_CONST, OP_COS, OP_DIV, OP_EXP, OP_LOG, OP_MUL,
                    OP_NEG, OP_POW, OP_POWC, OP_POWI, OP_SIN, OP_SQRT, OP_SUB,
                    OP_VAR, Program)
from .errors import EqgeoError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")

_FN_OPS = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "log": OP_LOG,
           "sqrt": OP_SQRT}
_BIN_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}


class ExprError(EqgeoError):
    """Parse or name failure, with the byte offset of the offending token."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# --------------------------------------------------------------------------
# Syntax tree


class Expr:
    """Base node; concrete nodes are Num, Var, Neg, Bin, Call."""

    __slots__ = ()

    def diff(self, name: str) -> "Expr":
        return diff(self, name)

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


# --------------------------------------------------------------------------
# Smart constructors with conservative constant folding. They never
# reassociate; the goal is compact derivative trees, not CAS simplification.


def num(v) -> Num:
    return Num(float(v))


_ZERO = Num(0.0)
_ONE = Num(1.0)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return num(a.value + b.value)
    if a == _ZERO:
        return b
    if b == _ZERO:
        return a
    return Bin("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return num(a.value - b.value)
    if b == _ZERO:
        return a
    if a == _ZERO:
        return neg(b)
    return Bin("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return num(a.value * b.value)
    if a == _ZERO or b == _ZERO:
        return _ZERO
    if a == _ONE:
        return b
    if b == _ONE:
        return a
    return Bin("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if b == _ONE:
        return a
    if a == _ZERO and b != _ZERO:
        return _ZERO
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return num(a.value / b.value)
    return Bin("/", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def powe(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num):
        if b.value == 0.0:
            return _ONE
        if b.value == 1.0:
            return a
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            v = a.value ** b.value
        except (OverflowError, ValueError):
            v = None
        if v is not None and math.isfinite(v):
            return num(v)
    return Bin("^", a, b)


def call(fn: str, a: Expr) -> Expr:
    if fn not in FUNCTIONS:
        raise ValueError(f"unknown function {fn!r}")
    if isinstance(a, Num):
        try:
            v = getattr(math, fn)(a.value)
            return num(v)
        except (ValueError, OverflowError):
            pass  # leave the domain error to evaluation time
    return Call(fn, a)


# --------------------------------------------------------------------------
# Tokenizer / recursive-descent parser

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ExprError(f"expected {op!r}", pos)
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprError("syntax error", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in ("+", "-"):
                self.take()
                rhs = self.term()
                e = Bin(text, e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in ("*", "/"):
                self.take()
                rhs = self.factor()
                e = Bin(text, e, rhs)
            else:
                return e

    def factor(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            inner = self.factor()
            # fold a negated literal into the literal so that the printer's
            # output for negative constants round-trips to an identical tree
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Neg(inner)
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            exponent = self.factor()  # right-assoc; exponent may carry unary -
            return Bin("^", base, exponent)
        return base

    def primary(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text in self.variables:
                return Var(text)
            raise ExprError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprError("syntax error", pos)


def parse(text: str, variables=("t",)) -> Expr:
    """Parse ``text`` over the given variable names into an expression tree."""
    return _Parser(text, variables).parse()


# --------------------------------------------------------------------------
# Printer. Parenthesization is strict enough that parse(to_string(e)) == e.

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 6


def _prec(e: Expr) -> int:
    if isinstance(e, Num):
        # a negative literal (including -0.0) prints with a leading '-',
        # so it binds like a unary minus
        return _PREC_NEG if repr(e.value).startswith("-") else _PREC_ATOM
    if isinstance(e, Var) or isinstance(e, Call):
        return _PREC_ATOM
    if isinstance(e, Neg):
        return _PREC_NEG
    return {"+": _PREC_ADD, "-": _PREC_ADD,
            "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[e.op]


def _wrap(s: str, need: bool) -> str:
    return f"({s})" if need else s


def to_string(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(to_string(e.arg), _prec(e.arg) < _PREC_NEG)
    if e.op == "^":
        left = _wrap(to_string(e.left), _prec(e.left) < _PREC_ATOM)
        right = _wrap(to_string(e.right), _prec(e.right) < _PREC_NEG)
        return f"{left}^{right}"
    p = _prec(e)
    left = _wrap(to_string(e.left), _prec(e.left) < p)
    right = _wrap(to_string(e.right), _prec(e.right) <= p)
    return f"{left} {e.op} {right}"


# --------------------------------------------------------------------------
# Symbolic differentiation


def diff(e: Expr, name: str) -> Expr:
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.name == name else _ZERO
    if isinstance(e, Neg):
        return neg(diff(e.arg, name))
    if isinstance(e, Call):
        da = diff(e.arg, name)
        a = e.arg
        if e.fn == "sin":
            return mul(call("cos", a), da)
        if e.fn == "cos":
            return neg(mul(call("sin", a), da))
        if e.fn == "exp":
            return mul(Call("exp", a), da)
        if e.fn == "log":
            return div(da, a)
        if e.fn == "sqrt":
            return div(da, mul(num(2.0), Call("sqrt", a)))
        raise ValueError(f"unknown function {e.fn!r}")
    da = diff(e.left, name)
    db = diff(e.right, name)
    a, b = e.left, e.right
    if e.op == "+":
        return add(da, db)
    if e.op == "-":
        return sub(da, db)
    if e.op == "*":
        return add(mul(da, b), mul(a, db))
    if e.op == "/":
        return div(sub(mul(da, b), mul(a, db)), mul(b, b))
    if e.op == "^":
        if isinstance(b, Num):
            return mul(mul(b, powe(a, num(b.value - 1.0))), da)
        # d(a^b) = a^b * (b' log a + b a'/a); requires a > 0, as does a^b
        return mul(powe(a, b), add(mul(db, call("log", a)),
                                   div(mul(b, da), a)))
    raise ValueError(f"unknown operator {e.op!r}")


# --------------------------------------------------------------------------
# Compilation to backend programs


def compile_expr(e: Expr, variables) -> Program:
    variables = tuple(variables)
    code = []
    consts = []
    const_index = {}

    def cidx(v: float) -> int:
        key = np.float64(v).tobytes()
        if key not in const_index:
            const_index[key] = len(consts)
            consts.append(float(v))
        return const_index[key]

    depth = 0
    max_depth = 0

    def push(op, arg, d):
        nonlocal depth, max_depth
        code.append((op, arg))
        depth += d
        max_depth = max(max_depth, depth)

    def emit(node):
        if isinstance(node, Num):
            push(OP_CONST, cidx(node.value), +1)
        elif isinstance(node, Var):
            try:
                push(OP_VAR, variables.index(node.name), +1)
            except ValueError:
                raise ExprError(f"unknown identifier {node.name!r}", 0) from None
        elif isinstance(node, Neg):
            emit(node.arg)
            push(OP_NEG, 0, 0)
        elif isinstance(node, Call):
            emit(node.arg)
            push(_FN_OPS[node.fn], 0, 0)
        elif isinstance(node, Bin):
            if node.op == "^":
                emit(node.left)
                if isinstance(node.right, Num):
                    c = node.right.value
                    if c == int(c) and abs(c) <= 64:
                        push(OP_POWI, int(c), 0)
                    else:
                        push(OP_POWC, cidx(c), 0)
                else:
                    emit(node.right)
                    push(OP_POW, 0, -1)
            else:
                emit(node.left)
                emit(node.right)
                push(_BIN_OPS[node.op], 0, -1)
        else:
            raise TypeError(f"not an expression node: {node!r}")

    emit(e)
    return Program(code=np.asarray(code, dtype=np.int32).reshape(-1, 2),
                   consts=np.asarray(consts, dtype=np.float64),
                   nvars=len(variables), nstack=max_depth)


@lru_cache(maxsize=4096)
def _cached_program(e: Expr, variables) -> Program:
    return compile_expr(e, variables)


# --------------------------------------------------------------------------
# Curve-facing wrapper


class CurveExpression:
    """A parsed scalar expression of one variable ``t`` with symbolic
    first and second derivatives.

    ``value``, ``jet`` and ``grid`` evaluate through the numeric backend;
    ``derivative`` returns the symbolically differentiated expression as a
    new CurveExpression.
    """

    __slots__ = ("source", "tree", "_d1", "_d2")

    def __init__(self, source: str, tree: Expr | None = None):
        self.source = source
        self.tree = parse(source) if tree is None else tree
        self._d1 = None
        self._d2 = None

    @classmethod
    def from_tree(cls, tree: Expr) -> "CurveExpression":
        return cls(to_string(tree), tree)

    @property
    def program(self) -> Program:
        return _cached_program(self.tree, ("t",))

    def derivative(self) -> "CurveExpression":
        return CurveExpression.from_tree(diff(self.tree, "t"))

    def _deriv_programs(self):
        if self._d1 is None:
            d1 = diff(self.tree, "t")
            d2 = diff(d1, "t")
            self._d1 = _cached_program(d1, ("t",))
            self._d2 = _cached_program(d2, ("t",))
        return self._d1, self._d2

    def __call__(self, t: float) -> float:
        return _backend.eval0(self.program, np.array([t], dtype=np.float64))

    def jet(self, t: float):
        """Value and first two derivatives at ``t`` via the symbolic trees."""
        d1, d2 = self._deriv_programs()
        x = np.array([t], dtype=np.float64)
        return (_backend.eval0(self.program, x),
                _backend.eval0(d1, x),
                _backend.eval0(d2, x))

    def jet_dual(self, t: float):
        """Value and first two derivatives via second-order dual numbers."""
        v, g, h = _backend.eval2(self.program, np.array([t], dtype=np.float64))
        return v, float(g[0]), float(h[0, 0])

    def grid(self, ts: np.ndarray):
        """Vectorized (value, d1, d2) on a grid of parameter values."""
        d1, d2 = self._deriv_programs()
        ts = np.ascontiguousarray(ts, dtype=np.float64)
        return (_backend.eval_grid(self.program, ts),
                _backend.eval_grid(d1, ts),
                _backend.eval_grid(d2, ts))

    def __repr__(self):
        return f"CurveExpression({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, CurveExpression) and self.tree == other.tree

    def __hash__(self):
        return hash(self.tree)


def parse_curve_expr(text: str) -> CurveExpression:
    """Parse a one-variable curve expression (variable name ``t``)."""
    return CurveExpression(text)


def constant_expr(v: float) -> CurveExpression:
    return CurveExpression.from_tree(num(v))
