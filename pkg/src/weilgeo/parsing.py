"""Parsers for the user-facing spec-string syntax and the small algebra
expression grammar.

Spec strings (EBNF):

    spec    := "D" | "D_" INT | "D_" INT "(" INT ")" | "D(" INT ")"
             | "(D_" INT ")^" INT | "Dinf(" INT "," INT ")"

Expressions are sums and products of integer literals and generator
names, with parentheses:

    expr    := term { "+" term }
    term    := factor { "*" factor }
    factor  := INT | NAME | "(" expr ")"

No division (the rings have non-invertible elements) and no
transcendental functions.  Generator names are "x" for one generator,
else "x1".."xn".  Integer literals become exact coefficients.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .weil import (
    DInfTrunc,
    Dk,
    DkOfN,
    DOfN,
    InfinitesimalSpec,
    PowerDk,
    WeilElement,
    default_names,
    generator,
)

SPEC_SYNTAX_HELP = (
    'spec strings: "D" (one square-zero generator), "D_k" (x^(k+1)=0), '
    '"D(n)" (n generators, all pairwise products zero), "D_k(n)" (any '
    'product of k+1 coordinates zero), "(D_k)^n" (n independent copies '
    'of D_k), "Dinf(n,K)" (working truncation at order K)'
)


class SpecStringError(ValueError):
    pass


@dataclass(frozen=True)
class ExprError(ValueError):
    message: str
    column: int  # 1-based character position

    def __str__(self) -> str:
        return f"{self.message} at column {self.column}"


_SPEC_PATTERNS = (
    (re.compile(r"D\Z"), lambda m: Dk(1)),
    (re.compile(r"D_(\d+)\Z"), lambda m: Dk(int(m.group(1)))),
    (re.compile(r"D_(\d+)\((\d+)\)\Z"),
     lambda m: DkOfN(int(m.group(1)), int(m.group(2)))),
    (re.compile(r"D\((\d+)\)\Z"), lambda m: DOfN(int(m.group(1)))),
    (re.compile(r"\(D_(\d+)\)\^(\d+)\Z"),
     lambda m: PowerDk(int(m.group(1)), int(m.group(2)))),
    (re.compile(r"Dinf\((\d+),(\d+)\)\Z"),
     lambda m: DInfTrunc(int(m.group(1)), int(m.group(2)))),
)


def parse_spec_string(text: str) -> InfinitesimalSpec:
    compact = text.strip().replace(" ", "")
    for pattern, build in _SPEC_PATTERNS:
        m = pattern.match(compact)
        if m:
            try:
                return build(m)
            except ValueError as err:
                raise SpecStringError(f"invalid spec {text!r}: {err}") from err
    raise SpecStringError(f"cannot parse spec {text!r}; {SPEC_SYNTAX_HELP}")


@dataclass(frozen=True)
class _Token:
    kind: str   # INT | NAME | OP | END
    text: str
    column: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z]\w*)|([+*()]))")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            column = pos + (len(text[pos:]) - len(stripped)) + 1
            raise ExprError(f"unexpected character {stripped[0]!r}", column)
        if m.group(1):
            tokens.append(_Token("INT", m.group(1), m.start(1) + 1))
        elif m.group(2):
            tokens.append(_Token("NAME", m.group(2), m.start(2) + 1))
        else:
            tokens.append(_Token("OP", m.group(3), m.start(3) + 1))
        pos = m.end()
    tokens.append(_Token("END", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, spec: InfinitesimalSpec):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.spec = spec
        self.names = {name: i + 1
                      for i, name in enumerate(default_names(spec.generators))}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> WeilElement:
        value = self.expr()
        tok = self.peek()
        if tok.kind != "END":
            raise ExprError(f"unexpected {tok.text!r}", tok.column)
        return value

    def expr(self) -> WeilElement:
        value = self.term()
        while self.peek().kind == "OP" and self.peek().text == "+":
            self.advance()
            value = value + self.term()
        return value

    def term(self) -> WeilElement:
        value = self.factor()
        while self.peek().kind == "OP" and self.peek().text == "*":
            self.advance()
            value = value * self.factor()
        return value

    def factor(self) -> WeilElement:
        tok = self.advance()
        if tok.kind == "INT":
            return WeilElement.constant(self.spec, Fraction(int(tok.text)))
        if tok.kind == "NAME":
            index = self.names.get(tok.text)
            if index is None:
                raise ExprError(
                    f"unknown generator {tok.text!r} "
                    f"(have {', '.join(self.names)})", tok.column)
            return generator(self.spec, index)
        if tok.kind == "OP" and tok.text == "(":
            value = self.expr()
            closing = self.advance()
            if closing.kind != "OP" or closing.text != ")":
                raise ExprError("expected ')'", closing.column)
            return value
        what = "end of input" if tok.kind == "END" else repr(tok.text)
        raise ExprError(f"expected a value, found {what}", tok.column)


def parse_expression(text: str, spec: InfinitesimalSpec) -> WeilElement:
    """Parse and evaluate an expression over the spec's generators with
    exact integer coefficients.  Raises :class:`ExprError` with a 1-based
    column on malformed input."""
    return _Parser(text, spec).parse()
