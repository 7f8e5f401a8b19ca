"""A small expression language for right-hand sides ``f(t, x)``.

Grammar (whitespace is insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | 't' | 'x' | FUNC '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so
``-2^2 == -4`` and ``2^3^2 == 512``. Functions: log, exp, sqrt, abs, sin, cos.

Evaluation is vectorised over numpy arrays. Domain violations and
non-finite intermediate results raise :class:`EvalError` pointing at the
offending node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

VARIABLES = frozenset({"t", "x"})

FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
}

_BINARY_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}

# recursion guards: parser frames per nesting level, and evaluation depth
MAX_NESTING = 64
MAX_TREE_DEPTH = 400

_OPERAND = frozenset({"number", "identifier", "(", "-"})


class ParseError(ValueError):
    """Syntax error with the byte offset into the source and the expected tokens."""

    def __init__(self, message: str, offset: int, expected=frozenset()) -> None:
        self.message = message
        self.offset = offset
        self.expected = frozenset(expected)
        text = f"{message} at byte {offset}"
        if self.expected:
            text += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(text)


class UnknownIdentifierError(ParseError):
    pass


class EvalError(ValueError):
    """Evaluation failure, located at the byte offset of the offending node."""

    def __init__(self, message: str, node: Node) -> None:
        self.message = message
        self.node = node
        self.offset = node.offset
        super().__init__(f"{message} at byte {node.offset}")


# {{{ AST


@dataclass(frozen=True)
class Node:
    def eval(self, t, x):
        return evaluate(self, t, x)


@dataclass(frozen=True)
class Number(Node):
    value: float
    offset: int = field(default=0, compare=False)
    depth: int = field(default=1, compare=False, repr=False)


@dataclass(frozen=True)
class Variable(Node):
    name: str
    offset: int = field(default=0, compare=False)
    depth: int = field(default=1, compare=False, repr=False)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    offset: int = field(default=0, compare=False)
    depth: int = field(default=1, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node
    offset: int = field(default=0, compare=False)
    depth: int = field(default=1, compare=False, repr=False)


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node
    offset: int = field(default=0, compare=False)
    depth: int = field(default=1, compare=False, repr=False)


# }}}


# {{{ lexer


@dataclass(frozen=True)
class _Token:
    kind: str  # number, identifier, operator, end
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    data = source.encode("utf-8")
    tokens = []
    i, n = 0, len(data)
    while i < n:
        c = chr(data[i])
        if c in " \t\r\n":
            i += 1
        elif c.isdigit() or (c == "." and i + 1 < n and chr(data[i + 1]).isdigit()):
            start = i
            while i < n and chr(data[i]).isdigit():
                i += 1
            if i < n and data[i] == ord("."):
                i += 1
                while i < n and chr(data[i]).isdigit():
                    i += 1
            if i < n and chr(data[i]) in "eE":
                j = i + 1
                if j < n and chr(data[j]) in "+-":
                    j += 1
                if j < n and chr(data[j]).isdigit():
                    i = j
                    while i < n and chr(data[i]).isdigit():
                        i += 1
            text = data[start:i].decode("ascii")
            if not math.isfinite(float(text)):
                raise ParseError(f"numeric literal {text!r} out of range", start)
            tokens.append(_Token("number", text, start))
        elif c.isascii() and (c.isalpha() or c == "_"):
            start = i
            while i < n and data[i] < 128 and (chr(data[i]).isalnum() or data[i] == ord("_")):
                i += 1
            tokens.append(_Token("identifier", data[start:i].decode("ascii"), start))
        elif c in "+-*/^()":
            tokens.append(_Token("operator", c, i))
            i += 1
        else:
            raise ParseError("unexpected character", i, _OPERAND | {"operator"})
    tokens.append(_Token("end", "", n))
    return tokens


# }}}


# {{{ parser


class _Parser:
    def __init__(self, source: str) -> None:
        self.tokens = _tokenize(source)
        self.pos = 0
        self.nesting = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def is_op(self, text: str) -> bool:
        return self.tok.kind == "operator" and self.tok.text == text

    def enter(self) -> None:
        self.nesting += 1
        if self.nesting > MAX_NESTING:
            raise ParseError(f"expression nested deeper than {MAX_NESTING}", self.tok.offset)

    def node(self, cls, *args, offset: int, children=()):
        depth = 1 + max((c.depth for c in children), default=0)
        if depth > MAX_TREE_DEPTH:
            raise ParseError(f"expression tree deeper than {MAX_TREE_DEPTH}", offset)
        return cls(*args, offset=offset, depth=depth)

    def parse(self) -> Node:
        e = self.expr(1)
        if self.tok.kind != "end":
            expected = {"operator", "end of input"}
            if self.is_op(")"):
                raise ParseError("unbalanced ')'", self.tok.offset, expected)
            raise ParseError(f"unexpected {self.describe()}", self.tok.offset, expected)
        return e

    def describe(self) -> str:
        tok = self.tok
        if tok.kind == "end":
            return "end of input"
        return f"{tok.kind} {tok.text!r}"

    def expr(self, min_prec: int) -> Node:
        left = self.unary()
        while (
            self.tok.kind == "operator"
            and self.tok.text in _BINARY_PRECEDENCE
            and _BINARY_PRECEDENCE[self.tok.text] >= min_prec
        ):
            op = self.advance()
            right = self.expr(_BINARY_PRECEDENCE[op.text] + 1)
            left = self.node(BinOp, op.text, left, right, offset=op.offset,
                             children=(left, right))
        return left

    def unary(self) -> Node:
        if self.is_op("-"):
            op = self.advance()
            self.enter()
            operand = self.unary()
            self.nesting -= 1
            return self.node(Neg, operand, offset=op.offset, children=(operand,))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if not self.is_op("^"):
            return base
        op = self.advance()
        self.enter()
        exponent = self.unary()
        self.nesting -= 1
        return self.node(BinOp, "^", base, exponent, offset=op.offset,
                         children=(base, exponent))

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return self.node(Number, float(tok.text), offset=tok.offset)

        if tok.kind == "identifier":
            self.advance()
            if tok.text in VARIABLES:
                return self.node(Variable, tok.text, offset=tok.offset)
            if tok.text in FUNCTIONS:
                if not self.is_op("("):
                    raise ParseError(
                        f"function {tok.text!r} needs an argument", self.tok.offset, {"("}
                    )
                self.advance()
                arg = self.parenthesized()
                return self.node(Call, tok.text, arg, offset=tok.offset, children=(arg,))
            raise UnknownIdentifierError(
                f"unknown identifier {tok.text!r}",
                tok.offset,
                VARIABLES | FUNCTIONS.keys(),
            )

        if self.is_op("("):
            self.advance()
            return self.parenthesized()

        raise ParseError(f"unexpected {self.describe()}", tok.offset, _OPERAND)

    def parenthesized(self) -> Node:
        self.enter()
        e = self.expr(1)
        self.nesting -= 1
        if not self.is_op(")"):
            raise ParseError(
                f"unexpected {self.describe()}", self.tok.offset, {"operator", ")"}
            )
        self.advance()
        return e


def parse(source: str) -> Node:
    """Parse *source* into an immutable AST; raises :class:`ParseError`."""
    if not isinstance(source, str):
        raise TypeError(f"expression source must be a string: got {type(source).__name__}")
    if not source.strip():
        raise ParseError("empty expression", 0, _OPERAND)
    return _Parser(source).parse()


# }}}


# {{{ evaluation


def _check(value, node: Node, what: str):
    if not np.all(np.isfinite(value)):
        raise EvalError(f"{what} is not finite", node)
    return value


def _eval(node: Node, t, x):
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Variable):
        return t if node.name == "t" else x
    if isinstance(node, Neg):
        return -_eval(node.operand, t, x)

    if isinstance(node, Call):
        arg = _eval(node.arg, t, x)
        if node.func == "log" and np.any(np.asarray(arg) <= 0.0):
            raise EvalError("log of a non-positive value", node)
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0.0):
            raise EvalError("sqrt of a negative value", node)
        return _check(FUNCTIONS[node.func](arg), node, f"{node.func}(...)")

    if isinstance(node, BinOp):
        a = _eval(node.left, t, x)
        b = _eval(node.right, t, x)
        if node.op == "+":
            return _check(a + b, node, "sum")
        if node.op == "-":
            return _check(a - b, node, "difference")
        if node.op == "*":
            return _check(a * b, node, "product")
        if node.op == "/":
            if np.any(np.asarray(b) == 0.0):
                raise EvalError("division by zero", node)
            return _check(a / b, node, "quotient")
        # float power: negative bases with fractional exponents give nan
        return _check(np.power(np.asarray(a, dtype=np.float64), b), node, "power")

    raise TypeError(f"not an expression node: {node!r}")


def evaluate(e: Node, t, x):
    """Evaluate *e* at ``(t, x)``; scalars or broadcastable numpy arrays."""
    t_arr = np.asarray(t, dtype=np.float64)
    x_arr = np.asarray(x, dtype=np.float64)
    with np.errstate(all="ignore"):
        result = _eval(e, t_arr, x_arr)
    result = np.broadcast_to(np.asarray(result, dtype=np.float64),
                             np.broadcast_shapes(t_arr.shape, x_arr.shape))
    if result.ndim == 0:
        return float(result)
    return np.array(result)


def compile_rhs(source: str) -> Callable:
    """Parse *source* and return ``f(t, x)`` evaluating it."""
    e = parse(source)

    def f(t, x):
        return evaluate(e, t, x)

    f.expr = e
    f.source = source
    return f


# }}}


def to_source(e: Node) -> str:
    """Fully parenthesised source text that parses back to an equal tree."""
    if isinstance(e, Number):
        return repr(e.value)
    if isinstance(e, Variable):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    raise TypeError(f"not an expression node: {e!r}")


def is_constant(e: Node) -> bool:
    """True if *e* references neither ``t`` nor ``x``."""
    if isinstance(e, Variable):
        return False
    if isinstance(e, Neg):
        return is_constant(e.operand)
    if isinstance(e, Call):
        return is_constant(e.arg)
    if isinstance(e, BinOp):
        return is_constant(e.left) and is_constant(e.right)
    return True
