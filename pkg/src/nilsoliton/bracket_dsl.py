"""Text format for brackets (``.lie`` files).

Grammar::

    file  := "dim" INT ";" stmt*
    stmt  := "[" basis "," basis "]" "=" sum ";"
    sum   := term (("+" | "-") term)*
    term  := (coeff "*")? basis | coeff
    coeff := RATIONAL | FLOAT | IDENT
    basis := "e" INT

A leading ``-`` is accepted on the first term of a sum. ``#`` starts a line
comment. Rational literals (``3``, ``1/3``) stay exact, floats stay floats
and identifiers are looked up in the bindings supplied to :func:`parse`.

Example::

    dim 9;
    [e5,e4] = e7;       # normalized to (4,5,7) -> -1
    [e3,e6] = t*e7;
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .algebra_core import Bracket


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<rational>\d+/\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\[\],=;*+\-])
    """,
    re.VERBOSE,
)

_BASIS_RE = re.compile(r"e(\d+)$")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and _BASIS_RE.match(value):
                kind = "basis"
            tokens.append(_Token(kind, value, line, pos - line_start + 1))
        for offset, ch in enumerate(value):
            if ch == "\n":
                line += 1
                line_start = pos + offset + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, bindings: Mapping[str, object]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.bindings = bindings

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.kind != "eof" else "end of input"
            raise self.error(f"expected {want}, got {got}")
        self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == text

    def basis(self, dim: int) -> int:
        tok = self.expect("basis")
        idx = int(tok.text[1:])
        if not 1 <= idx <= dim:
            raise self.error(f"basis index {idx} out of range 1..{dim}", tok)
        return idx

    def coeff(self):
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Fraction(int(tok.text))
        if tok.kind == "rational":
            self.pos += 1
            num, den = tok.text.split("/")
            if int(den) == 0:
                raise self.error("zero denominator", tok)
            return Fraction(int(num), int(den))
        if tok.kind == "float":
            self.pos += 1
            return float(tok.text)
        if tok.kind == "ident":
            self.pos += 1
            if tok.text not in self.bindings:
                raise self.error(f"unbound parameter {tok.text!r}", tok)
            return _coerce(self.bindings[tok.text])
        raise self.error(f"expected coefficient or basis vector, got {tok.text!r}")

    def term(self, dim: int):
        """Returns (coefficient, k or None, token)."""
        start = self.tok
        if start.kind == "basis":
            return Fraction(1), self.basis(dim), start
        c = self.coeff()
        if self.at_punct("*"):
            self.pos += 1
            return c, self.basis(dim), start
        return c, None, start

    def parse(self) -> Bracket:
        self.expect("ident", "dim")
        tok = self.expect("int")
        dim = int(tok.text)
        if dim < 1:
            raise self.error("dimension must be positive", tok)
        self.expect("punct", ";")
        terms: list[tuple[tuple[int, int, int], object]] = []
        pairs: set[tuple[int, int]] = set()
        while self.tok.kind != "eof":
            open_tok = self.expect("punct", "[")
            i = self.basis(dim)
            self.expect("punct", ",")
            j = self.basis(dim)
            self.expect("punct", "]")
            if i == j:
                raise self.error(f"[e{i},e{j}] must vanish by skew-symmetry", open_tok)
            key = (min(i, j), max(i, j))
            if key in pairs:
                raise self.error(f"duplicate bracket [e{key[0]},e{key[1]}]", open_tok)
            pairs.add(key)
            self.expect("punct", "=")
            sign = 1
            if self.at_punct("-"):
                self.pos += 1
                sign = -1
            seen_k: set[int] = set()
            while True:
                c, k, start = self.term(dim)
                if k is None:
                    if c != 0:
                        raise self.error("term must name a basis vector", start)
                else:
                    if k in seen_k:
                        raise self.error(f"duplicate term e{k} in [e{i},e{j}]", start)
                    seen_k.add(k)
                    terms.append(((i, j, k), sign * c))
                if self.at_punct("+"):
                    sign = 1
                elif self.at_punct("-"):
                    sign = -1
                else:
                    break
                self.pos += 1
            self.expect("punct", ";")
        return Bracket(dim, terms)


def _coerce(value):
    if isinstance(value, (Fraction, float)):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return float(value)


def parse(text: str, bindings: Mapping[str, object] | None = None) -> Bracket:
    """Parse bracket text; raises :class:`ParseError` with a line/column."""
    return _Parser(text, bindings or {}).parse()


def parse_value(text: str):
    """Parse a parameter value as written on a command line ("2", "1/3", "1.5")."""
    text = text.strip()
    if re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        return Fraction(text)
    return float(text)


def format_coef(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return repr(float(c))


def render(mu: Bracket) -> str:
    """Canonical text: statements sorted by (i, j), terms by k."""
    lines = [f"dim {mu.dim};"]
    grouped: dict[tuple[int, int], list[tuple[int, object]]] = {}
    for (i, j, k), c in sorted(mu.items()):
        grouped.setdefault((i, j), []).append((k, c))
    for (i, j), entries in grouped.items():
        parts = []
        for n, (k, c) in enumerate(entries):
            negative = c < 0
            mag = -c if negative else c
            body = f"e{k}" if isinstance(mag, Fraction) and mag == 1 else f"{format_coef(mag)}*e{k}"
            if n == 0:
                parts.append(("-" if negative else "") + body)
            else:
                parts.append(("- " if negative else "+ ") + body)
        lines.append(f"[e{i},e{j}] = {' '.join(parts)};")
    return "\n".join(lines)
