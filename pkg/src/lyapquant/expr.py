"""Scalar expression trees: parsing, symbolic differentiation, evaluation.

Grammar (whitespace ignored)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' exponent)?
    exponent := '-' exponent | primary ('^' exponent)?
    primary  := number | ident | func '(' expr ')' | '(' expr ')'
    func     := 'sin' | 'cos' | 'exp' | 'sqrt'

``^`` binds tighter than unary minus (``-x^2`` is ``-(x^2)``) and is
right-associative.  The exponent must not mention any variable; it is folded
to a single constant at parse time.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ExprSyntaxError, NonFinite, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
UNARY = ("neg",) + FUNCTIONS
BINARY = ("add", "sub", "mul", "div", "pow")

MAX_DEPTH = 40
# compiled lambdas nest parentheses per tree level; derivatives roughly triple depth
MAX_TREE_DEPTH = 48


@dataclass(frozen=True)
class Expr:
    """Immutable expression node.

    ``kind`` is ``"const"`` (``value`` holds the float), ``"var"`` (``value``
    holds the variable index), one of :data:`UNARY` or one of :data:`BINARY`.
    For ``"pow"`` the second child is always a ``"const"`` node.
    """

    kind: str
    value: float | int | None = None
    children: tuple["Expr", ...] = ()

    def __str__(self):
        return _unparse(self)

    def depth(self) -> int:
        best = 0
        stack = [(self, 1)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in node.children)
        return best

    def variables(self) -> set[int]:
        found = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if node.kind == "var":
                found.add(node.value)
            stack.extend(node.children)
        return found

    def compile(self, nvars: int | None = None):
        """Return a numpy-vectorized callable ``fn(x0, x1, ...)``."""
        if nvars is None:
            nvars = max(self.variables(), default=-1) + 1
        args = ", ".join(f"x{i}" for i in range(nvars))
        consts: list[float] = []
        src = f"lambda {args}: {_source(self, consts)}"
        env = {
            "_sin": np.sin, "_cos": np.cos, "_exp": np.exp, "_sqrt": np.sqrt,
            "_pow": np.power,
        }
        env.update({f"_c{i}": np.float64(c) for i, c in enumerate(consts)})
        return eval(compile(src, "<expr>", "eval"), env)


def const(value) -> Expr:
    return Expr("const", float(value))


def var(index: int) -> Expr:
    return Expr("var", int(index))


def _u(kind, a):
    return Expr(kind, None, (a,))


def _b(kind, a, b):
    return Expr(kind, None, (a, b))


ZERO = const(0.0)
ONE = const(1.0)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = {name: k for k, name in enumerate(variables)}
        self.depth = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def _advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _is(self, text):
        kind, value, _ = self.tok
        return kind == "op" and value == text

    def _expect(self, text):
        kind, value, pos = self.tok
        if kind != "op" or value != text:
            found = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(pos, f"expected {text!r}, found {found}")
        self.i += 1

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExprSyntaxError(self.tok[2], "expression nested too deeply")

    def parse(self):
        node = self.expr()
        kind, value, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(pos, f"unexpected {value!r}")
        if node.depth() > MAX_TREE_DEPTH:
            raise ExprSyntaxError(0, f"expression tree deeper than {MAX_TREE_DEPTH}")
        return node

    def expr(self):
        self._enter()
        node = self.term()
        while self._is("+") or self._is("-"):
            op = self._advance()[1]
            node = _b("add" if op == "+" else "sub", node, self.term())
        self.depth -= 1
        return node

    def term(self):
        node = self.unary()
        while self._is("*") or self._is("/"):
            op = self._advance()[1]
            node = _b("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self):
        if self._is("-"):
            self._enter()
            self._advance()
            node = _u("neg", self.unary())
            self.depth -= 1
            return node
        return self.power()

    def power(self):
        base = self.primary()
        if self._is("^"):
            self._advance()
            base = _b("pow", base, self.exponent())
        return base

    def exponent(self):
        self._enter()
        start = self.tok[2]
        if self._is("-"):
            self._advance()
            node = _u("neg", self.exponent())
        else:
            node = self.primary()
            if self._is("^"):
                self._advance()
                node = _b("pow", node, self.exponent())
        self.depth -= 1
        if node.variables():
            raise ExprSyntaxError(start, "exponent must be constant")
        with np.errstate(all="ignore"):
            value = float(node.compile(0)())
        if not math.isfinite(value):
            raise ExprSyntaxError(start, "exponent is not finite")
        return const(value)

    def primary(self):
        kind, value, pos = self.tok
        if kind == "num":
            self._advance()
            return const(float(value))
        if kind == "ident":
            self._advance()
            if value in FUNCTIONS and value not in self.names:
                if not self._is("("):
                    raise ExprSyntaxError(self.tok[2], f"expected '(' after {value}")
                self._advance()
                arg = self.expr()
                self._expect(")")
                return _u(value, arg)
            if value not in self.names:
                raise UnknownIdentifier(value, pos)
            return var(self.names[value])
        if kind == "op" and value == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(pos, f"unexpected {found}")


def parse_expression(text: str, variables: Sequence[str]) -> Expr:
    """Parse infix ``text`` over the named ``variables`` (index = position).

    Raises :class:`ExprSyntaxError` with a character offset for malformed
    input and :class:`UnknownIdentifier` for names that are neither variables
    nor one of ``sin, cos, exp, sqrt``.
    """
    variables = list(variables)
    if not variables:
        raise ValueError("at least one variable name is required")
    if len(set(variables)) != len(variables):
        raise ValueError(f"duplicate variable names in {variables}")
    for name in variables:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name in FUNCTIONS:
            raise ValueError(f"invalid variable name {name!r}")
    return _Parser(text, variables).parse()


# -- differentiation ---------------------------------------------------------

def differentiate(e: Expr, k: int) -> Expr:
    """Exact symbolic partial derivative of ``e`` with respect to variable ``k``.

    The result is not simplified.
    """
    kind = e.kind
    if kind == "const":
        return ZERO
    if kind == "var":
        return ONE if e.value == k else ZERO
    if kind in UNARY:
        (u,) = e.children
        du = differentiate(u, k)
        if kind == "neg":
            return _u("neg", du)
        if kind == "sin":
            return _b("mul", _u("cos", u), du)
        if kind == "cos":
            return _u("neg", _b("mul", _u("sin", u), du))
        if kind == "exp":
            return _b("mul", e, du)
        if kind == "sqrt":
            return _b("div", du, _b("mul", const(2.0), e))
    u, v = e.children
    du = differentiate(u, k)
    if kind == "pow":
        c = v.value
        return _b("mul", _b("mul", const(c), _b("pow", u, const(c - 1.0))), du)
    dv = differentiate(v, k)
    if kind == "add":
        return _b("add", du, dv)
    if kind == "sub":
        return _b("sub", du, dv)
    if kind == "mul":
        return _b("add", _b("mul", du, v), _b("mul", u, dv))
    if kind == "div":
        num = _b("sub", _b("mul", du, v), _b("mul", u, dv))
        return _b("div", num, _b("pow", v, const(2.0)))
    raise ValueError(f"unknown node kind {kind!r}")


# -- evaluation --------------------------------------------------------------

_INFIX = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _source(e, consts):
    kind = e.kind
    if kind == "const":
        consts.append(e.value)
        return f"_c{len(consts) - 1}"
    if kind == "var":
        return f"x{e.value}"
    if kind == "neg":
        return f"(-{_source(e.children[0], consts)})"
    if kind in FUNCTIONS:
        return f"_{kind}({_source(e.children[0], consts)})"
    a, b = (_source(c, consts) for c in e.children)
    if kind == "pow":
        return f"_pow({a}, {b})"
    return f"({a} {_INFIX[kind]} {b})"


def evaluate_array(e: Expr, coords) -> np.ndarray:
    """Vectorized evaluation; ``coords`` is a sequence of equally shaped arrays.

    Non-finite results are returned as-is (no error).
    """
    coords = [np.asarray(c, dtype=float) for c in coords]
    fn = e.compile(len(coords))
    with np.errstate(all="ignore"):
        out = fn(*coords)
    return np.broadcast_to(out, np.broadcast(*coords).shape if coords else ()).astype(float)


def evaluate(e: Expr, point) -> float:
    """Evaluate at one point in IEEE double precision.

    Raises :class:`NonFinite` on NaN/Inf (division by zero, sqrt of a
    negative number, overflow).
    """
    point = np.asarray(point, dtype=float).ravel()
    needed = max(e.variables(), default=-1) + 1
    if len(point) < needed:
        raise ValueError(f"point has {len(point)} coordinates, expression uses {needed}")
    fn = e.compile(len(point))
    with np.errstate(all="ignore"):
        value = float(fn(*point))
    if not math.isfinite(value):
        raise NonFinite(point)
    return value


def _unparse(e):
    kind = e.kind
    if kind == "const":
        v = e.value
        text = repr(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(v)
        # a bare negative literal would bind looser than a following ^
        return f"({text})" if v < 0 else text
    if kind == "var":
        return f"x{e.value}"
    if kind == "neg":
        return f"(-{_unparse(e.children[0])})"
    if kind in FUNCTIONS:
        return f"{kind}({_unparse(e.children[0])})"
    a, b = (_unparse(c) for c in e.children)
    op = "^" if kind == "pow" else _INFIX[kind]
    return f"({a} {op} {b})"
