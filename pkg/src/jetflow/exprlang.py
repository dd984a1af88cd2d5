"""Scalar expression language over the jet variables ``t, x1..xn, y1..yn``.

Grammar (precedence high to low)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right-associative
    primary := NUMBER | 'pi' | VARIABLE | FUNC '(' expr ')' | '(' expr ')'

There is no implicit multiplication: ``2x1`` is a syntax error.
"""

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import ad
from .errors import DimensionError, DomainError, ExpressionSyntaxError

FUNCTION_NAMES = tuple(ad.FUNCTIONS)


@dataclass(frozen=True)
class Const:
    value: float
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    kind: str  # "t", "x" or "y"
    index: int  # 1-based for x/y, 0 for t
    pos: int = field(default=0, compare=False)

    @property
    def name(self):
        return "t" if self.kind == "t" else f"{self.kind}{self.index}"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    pos: int = field(default=0, compare=False)


Node = Union[Const, Var, BinOp, Neg, Call]

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

_VAR = re.compile(r"([xy])(\d+)$")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, n):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.advance()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self):
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary(), pos)
        return self.power()

    def power(self):
        node = self.primary()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            node = BinOp("^", node, self.unary(), pos)
        return node

    def primary(self):
        kind, text, pos = self.advance()
        if kind == "num":
            value = float(text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"number {text} is not finite", pos)
            return Const(value, pos)
        if kind == "ident":
            if text in ad.FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg, pos)
            if text == "pi":
                return Const(math.pi, pos)
            if text == "t":
                return Var("t", 0, pos)
            m = _VAR.match(text)
            if m:
                index = int(m.group(2))
                if index < 1:
                    raise ExpressionSyntaxError(f"variable {text} has index below 1", pos)
                if index > self.n:
                    raise DimensionError(f"variable {text} exceeds dimension n={self.n}", pos)
                return Var(m.group(1), index, pos)
            raise ExpressionSyntaxError(f"unknown name {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"expected an operand, found {found}", pos)


def parse(text, n):
    """Parse ``text`` into an AST over ``t``, ``x1..xn``, ``y1..yn``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DimensionError(f"dimension must be a positive integer, got {n!r}")
    return _Parser(text, int(n)).parse()


def to_text(node):
    """Print an AST; ``parse(to_text(a), n) == a`` for every parsed AST."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


def variables(node):
    """Set of variable names occurring in the AST."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, (Neg, Call)):
        return variables(node.operand if isinstance(node, Neg) else node.arg)
    return variables(node.left) | variables(node.right)


def _integer_exponent(node):
    if isinstance(node, Const) and float(node.value).is_integer():
        return int(node.value)
    if isinstance(node, Neg) and isinstance(node.operand, Const):
        k = _integer_exponent(node.operand)
        return None if k is None else -k
    return None


def _guard(fn, pos):
    def wrapped(t, x, y):
        try:
            return fn(t, x, y)
        except DomainError as exc:
            if exc.position is None:
                exc.position = pos
            raise
    return wrapped


def compile_ast(node):
    """Turn an AST into a callable ``f(t, x, y)`` over generic numbers."""
    if isinstance(node, Const):
        c = float(node.value)
        return lambda t, x, y: c
    if isinstance(node, Var):
        k = node.index - 1
        if node.kind == "t":
            return lambda t, x, y: t
        if node.kind == "x":
            return lambda t, x, y: x[k]
        return lambda t, x, y: y[k]
    if isinstance(node, Neg):
        f = compile_ast(node.operand)
        return lambda t, x, y: -f(t, x, y)
    if isinstance(node, Call):
        f = compile_ast(node.arg)
        g = ad.FUNCTIONS[node.func]
        return _guard(lambda t, x, y: g(f(t, x, y)), node.pos)
    a = compile_ast(node.left)
    if node.op == "^":
        k = _integer_exponent(node.right)
        if k is not None:
            return _guard(lambda t, x, y: ad.ipow(a(t, x, y), k), node.pos)
        b = compile_ast(node.right)

        def power(t, x, y):
            e = b(t, x, y)
            # a constant sub-expression with an integer value still gets the exact path
            if isinstance(e, float) and e.is_integer() and abs(e) <= 1024:
                return ad.ipow(a(t, x, y), int(e))
            return ad.rpow(a(t, x, y), e)
        return _guard(power, node.pos)
    b = compile_ast(node.right)
    if node.op == "+":
        return lambda t, x, y: a(t, x, y) + b(t, x, y)
    if node.op == "-":
        return lambda t, x, y: a(t, x, y) - b(t, x, y)
    if node.op == "*":
        return lambda t, x, y: a(t, x, y) * b(t, x, y)

    def div(t, x, y):
        num = a(t, x, y)
        den = b(t, x, y)
        if ad.real(den) == 0.0:
            raise DomainError("division by zero")
        return num * ad.reciprocal(den)
    return _guard(div, node.pos)


class Expression:
    """A parsed, compiled expression bound to a dimension ``n``.

    Calling it evaluates ``f(t, x, y)`` on floats or on ``ad`` numbers.
    """

    def __init__(self, text, n):
        self.text = text
        self.n = int(n)
        self.ast = parse(text, n)
        self.variables = variables(self.ast)
        self._fn = compile_ast(self.ast)

    def __repr__(self):
        return f"Expression({self.text!r}, n={self.n})"

    def __call__(self, t, x=(), y=()):
        return self._fn(t, x, y)

    def depends_only_on(self, kinds):
        """True when every variable is of a kind in ``kinds`` (e.g. ``"tx"``)."""
        return all(v[0] in kinds for v in self.variables)


def _seed_mask(names, n, seeds):
    seeds = list(seeds)
    allowed = set(names)
    for s in seeds:
        if s not in allowed:
            raise DimensionError(f"seed {s!r} is not a variable of dimension {n}")
    if len(set(seeds)) != len(seeds):
        raise ValueError("duplicate seed")
    return seeds


def eval2(ast, p, seeds):
    """Value, gradient and Hessian of ``ast`` at jet point ``p`` over ``seeds``.

    ``seeds`` lists variable names (``"t"``, ``"x2"``, ``"y1"``, ...); the
    returned :class:`~jetflow.ad.Taylor2` orders its gradient accordingly.
    """
    n = len(p.x)
    names = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]
    seeds = _seed_mask(names, n, seeds)
    fn = ast._fn if isinstance(ast, Expression) else compile_ast(ast)
    values = dict(zip(names, [p.t, *p.x, *p.y]))
    size = len(seeds)
    env = {name: float(v) for name, v in values.items()}
    for k, s in enumerate(seeds):
        env[s] = ad.Taylor2.variable(values[s], k, size)
    t = env["t"]
    x = [env[f"x{i + 1}"] for i in range(n)]
    y = [env[f"y{i + 1}"] for i in range(n)]
    return ad.promote(fn(t, x, y), size)
