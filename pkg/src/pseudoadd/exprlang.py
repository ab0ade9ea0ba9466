"""A small arithmetic expression language in one real variable.

Grammar (lowest to highest binding)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | NAME | NAME '(' args ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-2^2`` is ``-(2^2)``; the exponent is
itself a ``unary``, which makes ``^`` right-associative and lets ``2^-1`` parse.
There is no implicit multiplication.

Parsed expressions are immutable and compiled once into a chain of closures,
so evaluation is pure and safe to share between threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

from .errors import EvalDomainError, ExprSyntaxError, UnknownIdentifierError

__all__ = [
    "Num", "Var", "Const", "Neg", "BinOp", "Call", "Node",
    "Expr", "parse", "evaluate", "to_source",
    "CONSTANTS", "FUNCTIONS",
]

CONSTANTS = {"pi": math.pi, "e": math.e, "ln2": math.log(2.0)}
FUNCTIONS = {"ln": 1, "log2": 1, "exp": 1, "abs": 1, "pow": 2}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Node", ...]


Node = Union[Num, Var, Const, Neg, BinOp, Call]


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, "operand or operator", text)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


def _describe(tok: _Tok) -> str:
    return "end of input" if tok.kind == "end" else repr(tok.text)


class _Parser:
    def __init__(self, text: str, var: str):
        self.text = text
        self.var = var
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, expected: str, tok: _Tok | None = None) -> ExprSyntaxError:
        tok = tok or self.tok
        return ExprSyntaxError(f"unexpected {_describe(tok)}", tok.pos, expected, self.text)

    def expect_op(self, text: str) -> None:
        if self.tok.kind == "op" and self.tok.text == text:
            self.advance()
        else:
            raise self.error(f"'{text}'")

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error("operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError("numeric literal out of range", tok.pos, "finite number", self.text)
            return Num(value)
        if tok.kind == "name":
            self.advance()
            return self.name(tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise self.error("operand")

    def name(self, tok: _Tok) -> Node:
        nxt = self.tok
        called = nxt.kind == "op" and nxt.text == "("
        if tok.text in FUNCTIONS:
            if not called:
                raise self.error(f"'(' after function {tok.text}")
            self.advance()
            args = [self.expr()]
            while self.tok.kind == "op" and self.tok.text == ",":
                self.advance()
                args.append(self.expr())
            self.expect_op(")")
            arity = FUNCTIONS[tok.text]
            if len(args) != arity:
                raise ExprSyntaxError(
                    f"{tok.text} takes {arity} argument(s), got {len(args)}",
                    tok.pos, f"{arity} argument(s)", self.text,
                )
            return Call(tok.text, tuple(args))
        if called:
            raise UnknownIdentifierError(tok.text, tok.pos)
        if tok.text == self.var:
            return Var(tok.text)
        if tok.text in CONSTANTS:
            return Const(tok.text)
        raise UnknownIdentifierError(tok.text, tok.pos)


# ------------------------------------------------------------ pretty-printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _ATOM


def _wrap(node: Node, needs: bool) -> str:
    s = to_source(node)
    return f"({s})" if needs else s


def to_source(node: Node) -> str:
    """Render ``node`` as text that re-parses to an identical tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _prec(node.operand) < _PREC["neg"])
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_source(a) for a in node.args)})"
    p = _PREC[node.op]
    if node.op == "^":
        # base is a primary; exponent is a unary
        left = _wrap(node.left, _prec(node.left) < _ATOM)
        right = _wrap(node.right, _prec(node.right) < _PREC["neg"])
        return f"{left}^{right}"
    left = _wrap(node.left, _prec(node.left) < p)
    right = _wrap(node.right, _prec(node.right) <= p)
    return f"{left} {node.op} {right}"


# ------------------------------------------------------------------ compiler

_Fn = Callable[[float], float]


def _compile(node: Node, var: str) -> _Fn:
    def fail(reason: str, x: float):
        raise EvalDomainError(reason, to_source(node), var, x)

    if isinstance(node, Num):
        v = node.value
        return lambda x: v
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Const):
        c = CONSTANTS[node.name]
        return lambda x: c
    if isinstance(node, Neg):
        f = _compile(node.operand, var)
        return lambda x: -f(x)
    if isinstance(node, Call):
        fs = [_compile(a, var) for a in node.args]
        if node.func == "pow":
            f, g = fs

            def call(x):
                return _pow(f(x), g(x), fail, x)
            return call
        f = fs[0]
        if node.func in ("ln", "log2"):
            log = math.log if node.func == "ln" else math.log2

            def call(x):
                a = f(x)
                if not a > 0.0:
                    fail(f"{node.func} of non-positive argument {a!r}", x)
                return log(a)
            return call
        if node.func == "exp":
            def call(x):
                try:
                    return math.exp(f(x))
                except OverflowError:
                    return math.inf
            return call
        return lambda x: abs(f(x))

    f = _compile(node.left, var)
    g = _compile(node.right, var)
    op = node.op
    if op == "+":
        def binop(x):
            return _checked(f(x) + g(x), fail, x)
    elif op == "-":
        def binop(x):
            return _checked(f(x) - g(x), fail, x)
    elif op == "*":
        def binop(x):
            return _checked(f(x) * g(x), fail, x)
    elif op == "/":
        def binop(x):
            num, den = f(x), g(x)
            if den == 0.0:
                fail("division by zero", x)
            return _checked(num / den, fail, x)
    else:
        def binop(x):
            return _pow(f(x), g(x), fail, x)
    return binop


def _checked(value: float, fail, x: float) -> float:
    if value != value:
        fail("result is not a number", x)
    return value


def _pow(a: float, b: float, fail, x: float) -> float:
    if a != a or b != b:
        fail("power of a non-number", x)
    if a == 0.0:
        if b < 0.0:
            fail("zero raised to a negative power", x)
        return 1.0 if b == 0.0 else 0.0
    if a < 0.0 and not (math.isfinite(b) and b == math.floor(b)):
        fail(f"negative base {a!r} with non-integer exponent {b!r}", x)
    try:
        return _checked(math.pow(a, b), fail, x)
    except OverflowError:
        odd = a < 0.0 and math.fmod(b, 2.0) != 0.0
        return -math.inf if odd else math.inf


# ---------------------------------------------------------------- public API

@dataclass(frozen=True)
class Expr:
    """A parsed expression in a single free variable.

    Calling an ``Expr`` evaluates it; domain violations raise
    :class:`~pseudoadd.errors.EvalDomainError` instead of returning NaN.
    """

    root: Node
    source: str
    var: str = "q"
    _fn: _Fn = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_fn", _compile(self.root, self.var))

    def __call__(self, x: float) -> float:
        return self._fn(float(x))

    def __str__(self) -> str:
        return to_source(self.root)


def parse(text: str, var: str = "q") -> Expr:
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, "operand", text or "")
    return Expr(_Parser(text, var).parse(), text, var)


def evaluate(expr: Expr, x: float) -> float:
    return expr(x)
