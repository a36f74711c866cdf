"""Polynomial expressions in ``r1 = |z1|^2`` and ``r2 = |z2|^2``.

Grammar (whitespace-insensitive, left-associative)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := '-' factor | atom ('^' uint)*
    atom   := number | 'r1' | 'r2' | '(' expr ')'

Numbers are decimal literals (optionally with an exponent) and are read as
exact rationals, so ``0.1`` is ``1/10``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import re
from typing import List, Tuple, Union

from ..kernels.poly import Poly2

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|(?P<var>r1|r2)|(?P<op>[-+*^()]))")


class ProfileSyntaxError(ValueError):
    """Malformed or non-polynomial expression; ``position`` is a 0-based offset."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}\n  {text}\n  {' ' * position}^")


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
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
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Var, Neg, BinOp, Pow]


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ProfileSyntaxError(f"unexpected character {text[bad]!r}", text, bad)
        kind = m.lastgroup
        start = m.start(kind)
        val = m.group(kind)
        if kind == "var" and m.end() < len(text) and (text[m.end()].isalnum() or text[m.end()] == "_"):
            raise ProfileSyntaxError("unknown identifier", text, start)
        out.append((kind, val, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str):
        kind, val, pos = self.peek()
        what = "end of input" if kind == "end" else repr(val)
        raise ProfileSyntaxError(f"{message}, found {what}", self.text, pos)

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        node = self.atom()
        while self.peek()[:2] == ("op", "^"):
            self.take()
            kind, val, pos = self.peek()
            if kind != "num" or not val.isdigit():
                self.fail("exponent must be a nonnegative integer")
            self.take()
            node = Pow(node, int(val))
        return node

    def atom(self) -> Node:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return Num(Fraction(val))
        if kind == "var":
            self.take()
            return Var(val)
        if (kind, val) == ("op", "("):
            self.take()
            node = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'")
            self.take()
            return node
        self.fail("expected a number, r1, r2 or '('")

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return node


def parse_profile(text: str) -> Node:
    """Parse an expression into its syntax tree."""
    return _Parser(text).parse()


def to_poly(node: Node) -> Poly2:
    """Expand a syntax tree into an exact polynomial."""
    if isinstance(node, Num):
        return Poly2({(0, 0): node.value})
    if isinstance(node, Var):
        return Poly2({(1, 0) if node.name == "r1" else (0, 1): 1})
    if isinstance(node, Neg):
        return -to_poly(node.operand)
    if isinstance(node, Pow):
        return to_poly(node.base) ** node.exponent
    a, b = to_poly(node.left), to_poly(node.right)
    return {"+": a + b, "-": a - b, "*": a * b}[node.op]


def parse_polynomial(text: str) -> Poly2:
    return to_poly(parse_profile(text))


def evaluate(node: Node, r1, r2):
    """Evaluate the tree directly (exact on Fractions)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return r1 if node.name == "r1" else r2
    if isinstance(node, Neg):
        return -evaluate(node.operand, r1, r2)
    if isinstance(node, Pow):
        return evaluate(node.base, r1, r2) ** node.exponent
    a, b = evaluate(node.left, r1, r2), evaluate(node.right, r1, r2)
    return {"+": a + b, "-": a - b, "*": a * b}[node.op]


def _fmt_number(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    # parsed literals have denominators 2^a 5^b, so an exact decimal exists
    k = 0
    while (10**k) % x.denominator:
        k += 1
        if k > 4 * x.denominator.bit_length() + 4:
            raise ValueError(f"{x} has no finite decimal form")
    digits = str(abs(x.numerator) * (10**k // x.denominator)).rjust(k + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


_PREC = {"+": 1, "-": 1, "*": 2}


def to_text(node: Node) -> str:
    """Pretty-print with the fewest parentheses that reparse to the same tree."""
    if isinstance(node, Num):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = node.operand
        s = to_text(inner)
        return f"-({s})" if isinstance(inner, BinOp) else f"-{s}"
    if isinstance(node, Pow):
        s = to_text(node.base)
        if isinstance(node.base, (BinOp, Neg)):
            s = f"({s})"
        return f"{s}^{node.exponent}"
    p = _PREC[node.op]
    left = to_text(node.left)
    if isinstance(node.left, BinOp) and _PREC[node.left.op] < p:
        left = f"({left})"
    right = to_text(node.right)
    if isinstance(node.right, BinOp) and _PREC[node.right.op] <= p:
        right = f"({right})"
    sep = "*" if node.op == "*" else f" {node.op} "
    return f"{left}{sep}{right}"
