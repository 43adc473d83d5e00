"""Scalar expression mini-language for time-dependent matrix entries.

Grammar (whitespace insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | 'pi' | 'i' | 't'
             | fn '(' expr ')'            # fn in sin cos exp sqrt abs ln
             | ('max' | 'min') '(' expr ',' expr ')'
             | '(' expr ')'

Precedence: ``^`` binds above ``*``/``/`` which bind above ``+``/``-``;
unary minus binds tighter than binary ``-`` but looser than ``^``
(so ``-t^2`` is ``-(t^2)`` and ``-t - 1`` is ``(-t) - 1``).

Evaluation is over the complex numbers; ``i`` is the imaginary unit and
``abs`` is the complex modulus.  ``max``/``min`` require (numerically) real
arguments.  Trees are immutable and hashable; evaluation is a pure function
of (tree, t).
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Callable, Union

__all__ = [
    "Expr", "Num", "Const", "Var", "Unary", "Binary", "MinMax",
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError", "EvalError",
    "NonSmoothExprError",
    "parse_scalar_expr", "to_source", "evaluate", "compile_expr",
    "differentiate",
]


class ExprError(Exception):
    """Base class for expression-language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, pos: int):
        super().__init__(f"unknown identifier {name!r}", pos)
        self.name = name


class EvalError(ExprError):
    """Evaluation failed: division by zero, log of zero, overflow, non-finite result."""


class NonSmoothExprError(ExprError):
    """Symbolic differentiation requested through abs/max/min."""


# ----------------------------------------------------------------- AST nodes

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str  # 'pi' or 'i'


@dataclass(frozen=True)
class Var:
    """The time variable ``t``."""


@dataclass(frozen=True)
class Unary:
    op: str  # neg sin cos exp sqrt abs ln
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class MinMax:
    fn: str  # max or min
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[Num, Const, Var, Unary, Binary, MinMax]

_FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs", "ln")
_CONSTANTS = ("pi", "i")


# ----------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)
    | (?P<IDENT>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<OP>[-+*/^(),])
    | (?P<WS>\s+)
    """,
    re.VERBOSE,
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "WS":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("EOF", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.peek()
        if val != text:
            raise ExprSyntaxError(f"expected {text!r}, found {val or 'end of input'!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "EOF":
            raise ExprSyntaxError(f"unexpected trailing input {val!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "NUMBER":
            self.advance()
            return Num(float(val))
        if val == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "IDENT":
            self.advance()
            if val == "t":
                return Var()
            if val in _CONSTANTS:
                return Const(val)
            if val in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(val, arg)
            if val in ("max", "min"):
                self.expect("(")
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(")")
                return MinMax(val, a, b)
            raise UnknownIdentifierError(val, pos)
        raise ExprSyntaxError(f"expected an expression, found {val or 'end of input'!r}", pos)


def parse_scalar_expr(src: str) -> Expr:
    """Parse ``src`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with character position) on malformed
    input and :class:`UnknownIdentifierError` for identifiers outside the
    language.
    """
    if not isinstance(src, str) or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(src).parse()


# ------------------------------------------------------------------- printer

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 25, 30, 100


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL,
                "/": _PREC_MUL, "^": _PREC_POW}[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC_NEG
    return _PREC_ATOM


def to_source(e: Expr) -> str:
    """Render a tree to source that parses back to an equal tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_source(e.arg)
            if _prec(e.arg) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op}({to_source(e.arg)})"
    if isinstance(e, MinMax):
        return f"{e.fn}({to_source(e.lhs)}, {to_source(e.rhs)})"
    if isinstance(e, Binary):
        lp, rp = _prec(e.lhs), _prec(e.rhs)
        p = _prec(e)
        left = to_source(e.lhs)
        right = to_source(e.rhs)
        if e.op == "^":
            # right-associative; parenthesize any structured operand
            if lp <= p:
                left = f"({left})"
            if rp < p:
                right = f"({right})"
        else:
            if lp < p:
                left = f"({left})"
            # - and / are left-associative: protect equal-precedence right side
            if rp < p or (rp == p and e.op in ("-", "/")):
                right = f"({right})"
        return f"{left} {e.op} {right}" if e.op in ("+", "-") else f"{left}{e.op}{right}"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------- evaluation

def _real_pair(a: complex, b: complex):
    scale = max(1.0, abs(a), abs(b))
    if abs(a.imag) > 1e-12 * scale or abs(b.imag) > 1e-12 * scale:
        raise ValueError("max/min of non-real values")
    return a.real, b.real


def _fmax(a, b):
    x, y = _real_pair(complex(a), complex(b))
    return complex(x if x >= y else y)


def _fmin(a, b):
    x, y = _real_pair(complex(a), complex(b))
    return complex(x if x <= y else y)


_EVAL_NS = {
    "__builtins__": {},
    "_sin": cmath.sin, "_cos": cmath.cos, "_exp": cmath.exp,
    "_sqrt": cmath.sqrt, "_abs": abs, "_ln": cmath.log,
    "_max": _fmax, "_min": _fmin,
    "_pi": math.pi, "_i": 1j,
}


def _render_py(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return "_pi" if e.name == "pi" else "_i"
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-({_render_py(e.arg)}))"
        return f"_{e.op}({_render_py(e.arg)})"
    if isinstance(e, MinMax):
        return f"_{e.fn}({_render_py(e.lhs)}, {_render_py(e.rhs)})"
    if isinstance(e, Binary):
        l, r = _render_py(e.lhs), _render_py(e.rhs)
        if e.op == "^":
            return f"(({l})**({r}))"
        return f"(({l}){e.op}({r}))"
    raise TypeError(f"not an expression node: {e!r}")


def compile_expr(e: Expr) -> Callable[[float], complex]:
    """Compile a tree to a fast ``t -> complex`` callable.

    The compiled path and :func:`evaluate` share the same function table, so
    they agree bit-for-bit on well-defined inputs.
    """
    fn = eval(compile(f"lambda t: {_render_py(e)}", "<expr>", "eval"), dict(_EVAL_NS))

    def call(t: float) -> complex:
        try:
            v = complex(fn(t))
        except (ArithmeticError, ValueError) as exc:
            raise EvalError(f"evaluation failed at t={t!r}: {exc}") from exc
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise EvalError(f"non-finite value at t={t!r}")
        return v

    return call


def evaluate(e: Expr, t: float) -> complex:
    """Reference tree-walking evaluation (same semantics as the compiled path)."""
    try:
        v = _eval(e, t)
    except (ArithmeticError, ValueError) as exc:
        raise EvalError(f"evaluation failed at t={t!r}: {exc}") from exc
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise EvalError(f"non-finite value at t={t!r}")
    return v


def _eval(e: Expr, t: float) -> complex:
    if isinstance(e, Num):
        return complex(e.value)
    if isinstance(e, Const):
        return complex(math.pi) if e.name == "pi" else 1j
    if isinstance(e, Var):
        return complex(t)
    if isinstance(e, Unary):
        v = _eval(e.arg, t)
        if e.op == "neg":
            return -v
        return complex(_EVAL_NS[f"_{e.op}"](v))
    if isinstance(e, MinMax):
        return _EVAL_NS[f"_{e.fn}"](_eval(e.lhs, t), _eval(e.rhs, t))
    if isinstance(e, Binary):
        a = _eval(e.lhs, t)
        b = _eval(e.rhs, t)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        return a ** b
    raise TypeError(f"not an expression node: {e!r}")


# ----------------------------------------------------------- differentiation

def _add(a: Expr, b: Expr) -> Expr:
    if a == Num(0.0):
        return b
    if b == Num(0.0):
        return a
    return Binary("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if b == Num(0.0):
        return a
    if a == Num(0.0):
        return Unary("neg", b)
    return Binary("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if a == Num(0.0) or b == Num(0.0):
        return Num(0.0)
    if a == Num(1.0):
        return b
    if b == Num(1.0):
        return a
    return Binary("*", a, b)


def differentiate(e: Expr) -> Expr:
    """Symbolic d/dt.  Raises :class:`NonSmoothExprError` on abs/max/min
    nodes; those must go through the central-difference path."""
    if isinstance(e, (Num, Const)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0)
    if isinstance(e, MinMax):
        raise NonSmoothExprError(f"{e.fn} is not smooth; use the numeric derivative")
    if isinstance(e, Unary):
        if e.op == "abs":
            raise NonSmoothExprError("abs is not smooth; use the numeric derivative")
        d = differentiate(e.arg)
        if e.op == "neg":
            return Unary("neg", d)
        if e.op == "sin":
            return _mul(Unary("cos", e.arg), d)
        if e.op == "cos":
            return Unary("neg", _mul(Unary("sin", e.arg), d))
        if e.op == "exp":
            return _mul(Unary("exp", e.arg), d)
        if e.op == "sqrt":
            return Binary("/", d, _mul(Num(2.0), Unary("sqrt", e.arg)))
        return Binary("/", d, e.arg)
    if isinstance(e, Binary):
        if e.op in ("+", "-"):
            da, db = differentiate(e.lhs), differentiate(e.rhs)
            return _add(da, db) if e.op == "+" else _sub(da, db)
        if e.op == "*":
            return _add(_mul(differentiate(e.lhs), e.rhs),
                        _mul(e.lhs, differentiate(e.rhs)))
        if e.op == "/":
            num = _sub(_mul(differentiate(e.lhs), e.rhs),
                       _mul(e.lhs, differentiate(e.rhs)))
            return Binary("/", num, Binary("^", e.rhs, Num(2.0)))
        # power rule; general case via f^g = exp(g ln f)
        f, g = e.lhs, e.rhs
        if isinstance(g, Num):
            return _mul(_mul(g, Binary("^", f, Num(g.value - 1.0))), differentiate(f))
        inner = _add(_mul(differentiate(g), Unary("ln", f)),
                     _mul(g, Binary("/", differentiate(f), f)))
        return _mul(e, inner)
    raise TypeError(f"not an expression node: {e!r}")
