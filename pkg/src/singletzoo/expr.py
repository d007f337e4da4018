"""A small arithmetic expression language for user-supplied G functions.

Grammar (whitespace insignificant, ``#`` comments to end of line):

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"

so ``^`` binds tighter than unary minus (-2^2 is -(2^2) = -4) and is
right-associative (2^3^2 = 512).  Variables are the precomputed dot
products ``ab``, ``ua``, ``ub``, ``va``, ``vb`` and four scalar hidden
variables ``l1`` .. ``l4`` in [-1, 1]; functions are sgn, abs, sqrt,
arccos (one argument) and min, max (two arguments), with sgn(0) = +1.

Evaluation is elementwise over numpy arrays so one parsed expression
can be applied to a whole batch of hidden states at once.  Domain
violations (sqrt of a negative, arccos outside [-1, 1], division by
anything smaller than 1e-300, zero to a negative power, negative base
to a fractional power) raise DomainError rather than producing inf or
nan silently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import sgn

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "UnboundVariableError",
    "DomainError",
    "Lit",
    "Var",
    "Unary",
    "BinOp",
    "Call",
    "KNOWN_VARIABLES",
    "FUNCTIONS",
    "parse",
    "eval_expr",
    "to_source",
    "variables_of",
]

KNOWN_VARIABLES = ("ab", "ua", "ub", "va", "vb", "l1", "l2", "l3", "l4")

# function name -> arity
FUNCTIONS = {"sgn": 1, "abs": 1, "sqrt": 1, "arccos": 1, "min": 2, "max": 2}


class ExprError(Exception):
    """Base class for expression language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset, expected=()):
        self.offset = int(offset)
        self.expected = tuple(sorted(expected))
        tail = f" (expected {' or '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {self.offset}{tail}")


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name, offset):
        self.name = name
        known = ", ".join(KNOWN_VARIABLES + tuple(FUNCTIONS))
        super().__init__(f"unknown identifier {name!r} (known: {known})", offset)


class UnboundVariableError(ExprError):
    pass


class DomainError(ExprError):
    pass


# ----------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Lit:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


Node = (Lit, Var, Unary, BinOp, Call)


# ----------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>      [ \t\r\n]+ | \#[^\n]* )
  | (?P<number>  (?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)? )
  | (?P<ident>   [a-z][a-z0-9]* )
  | (?P<op>      [-+*/^(),] )
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str   # "number" | "ident" | one of "+-*/^()," | "end"
    text: str
    offset: int


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos,
                                  expected=("number", "identifier", "operator"))
        if m.lastgroup == "number":
            tokens.append(_Token("number", m.group(), pos))
        elif m.lastgroup == "ident":
            tokens.append(_Token("ident", m.group(), pos))
        elif m.lastgroup == "op":
            tokens.append(_Token(m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


# ----------------------------------------------------------------------
# parser (recursive descent following the module grammar)

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        self.i += 1
        return tok

    def expect(self, kind):
        if self.cur.kind != kind:
            raise ExprSyntaxError(f"unexpected {self._describe(self.cur)}",
                                  self.cur.offset, expected=(f"'{kind}'",))
        return self.advance()

    @staticmethod
    def _describe(tok):
        return "end of input" if tok.kind == "end" else f"{tok.text!r}"

    def parse_expr(self):
        node = self.parse_term()
        while self.cur.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.cur.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.cur.kind == "-":
            self.advance()
            return Unary("-", self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        node = self.parse_atom()
        if self.cur.kind == "^":
            self.advance()
            node = BinOp("^", node, self.parse_unary())
        return node

    def parse_atom(self):
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            value = float(tok.text)
            if not np.isfinite(value):
                raise ExprSyntaxError(f"number literal {tok.text} overflows",
                                      tok.offset)
            return Lit(value)
        if tok.kind == "ident":
            self.advance()
            if self.cur.kind == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownIdentifierError(tok.text, tok.offset)
                self.advance()
                args = [self.parse_expr()]
                while self.cur.kind == ",":
                    self.advance()
                    args.append(self.parse_expr())
                self.expect(")")
                want = FUNCTIONS[tok.text]
                if len(args) != want:
                    raise ExprSyntaxError(
                        f"{tok.text} takes {want} argument(s), got {len(args)}",
                        tok.offset)
                return Call(tok.text, tuple(args))
            if tok.text not in KNOWN_VARIABLES:
                raise UnknownIdentifierError(tok.text, tok.offset)
            return Var(tok.text)
        if tok.kind == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected {self._describe(tok)}", tok.offset,
                              expected=("number", "identifier", "'('", "'-'"))


def parse(source):
    """Parse ``source`` into an immutable AST; errors carry byte offsets."""
    p = _Parser(_tokenize(source))
    node = p.parse_expr()
    if p.cur.kind != "end":
        raise ExprSyntaxError(f"unexpected {p._describe(p.cur)} after expression",
                              p.cur.offset, expected=("end of input",))
    return node


def variables_of(node) -> set:
    """Free variables referenced by an AST."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Unary):
        return variables_of(node.arg)
    if isinstance(node, BinOp):
        return variables_of(node.left) | variables_of(node.right)
    if isinstance(node, Call):
        out = set()
        for arg in node.args:
            out |= variables_of(arg)
        return out
    return set()


# ----------------------------------------------------------------------
# evaluation

_DIV_FLOOR = 1e-300


def _as_float(x):
    return np.asarray(x, dtype=float)


def _pow(x, y):
    x, y = np.broadcast_arrays(_as_float(x), _as_float(y))
    if np.any((x < 0) & (y != np.floor(y))):
        raise DomainError("negative base raised to a non-integer power")
    if np.any((x == 0) & (y < 0)):
        raise DomainError("zero raised to a negative power")
    out = np.power(np.abs(x), y)
    neg = (x < 0) & (np.floor(y) % 2 == 1)
    out = np.where(neg, -out, out)
    return out


def _sqrt(x):
    x = _as_float(x)
    if np.any(x < 0):
        raise DomainError("sqrt of a negative value")
    return np.sqrt(x)


def _arccos(x):
    x = _as_float(x)
    if np.any((x < -1.0) | (x > 1.0)):
        raise DomainError("arccos argument outside [-1, 1]")
    return np.arccos(x)


def _div(num, den):
    den = _as_float(den)
    if np.any(np.abs(den) < _DIV_FLOOR):
        raise DomainError(f"division by a value smaller than {_DIV_FLOOR}")
    return num / den


_CALL_IMPL = {
    "sgn": lambda x: sgn(_as_float(x)),
    "abs": lambda x: np.abs(_as_float(x)),
    "sqrt": _sqrt,
    "arccos": _arccos,
    "min": lambda x, y: np.minimum(_as_float(x), _as_float(y)),
    "max": lambda x, y: np.maximum(_as_float(x), _as_float(y)),
}


def eval_expr(node, bindings):
    """Evaluate an AST under ``bindings`` (scalars or same-length arrays).

    Returns a numpy scalar or array; elementwise over array bindings.
    """
    if isinstance(node, Lit):
        return np.float64(node.value)
    if isinstance(node, Var):
        try:
            return _as_float(bindings[node.name])
        except KeyError:
            raise UnboundVariableError(f"variable {node.name!r} is unbound") from None
    if isinstance(node, Unary):
        return -eval_expr(node.arg, bindings)
    if isinstance(node, BinOp):
        lhs = eval_expr(node.left, bindings)
        rhs = eval_expr(node.right, bindings)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        if node.op == "/":
            return _div(lhs, rhs)
        return _pow(lhs, rhs)
    if isinstance(node, Call):
        return _CALL_IMPL[node.fn](*(eval_expr(arg, bindings) for arg in node.args))
    raise TypeError(f"not an expression node: {node!r}")


# ----------------------------------------------------------------------
# canonical printing

_LEVEL_SUM, _LEVEL_PROD, _LEVEL_UNARY, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(node) -> int:
    if isinstance(node, BinOp):
        if node.op in ("+", "-"):
            return _LEVEL_SUM
        if node.op in ("*", "/"):
            return _LEVEL_PROD
        return _LEVEL_POW
    if isinstance(node, Unary):
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def _print(node, min_level) -> str:
    lvl = _level(node)
    if isinstance(node, Lit):
        s = repr(float(node.value))
        s = s[:-2] if s.endswith(".0") else s
    elif isinstance(node, Var):
        s = node.name
    elif isinstance(node, Unary):
        s = "-" + _print(node.arg, _LEVEL_UNARY)
    elif isinstance(node, Call):
        s = node.fn + "(" + ", ".join(_print(a, _LEVEL_SUM) for a in node.args) + ")"
    else:
        if node.op in ("+", "-"):
            s = f"{_print(node.left, _LEVEL_SUM)} {node.op} {_print(node.right, _LEVEL_PROD)}"
        elif node.op in ("*", "/"):
            s = f"{_print(node.left, _LEVEL_PROD)}{node.op}{_print(node.right, _LEVEL_UNARY)}"
        else:
            # power: the grammar only allows an atom on the left
            s = f"{_print(node.left, _LEVEL_ATOM)}^{_print(node.right, _LEVEL_UNARY)}"
    if lvl < min_level:
        return "(" + s + ")"
    return s


def to_source(node) -> str:
    """Canonical text form; parse(to_source(parse(s))) == parse(s)."""
    return _print(node, _LEVEL_SUM)
