"""Tokenizer and operator-precedence reader for the clause syntax."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .terms import INFIX_OPS, NIL, PREFIX_OPS, Str, Struct, Term, Var, make_list


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, token: str = ""):
        self.message = message
        self.line = line
        self.col = col
        self.token = token
        where = f"line {line}, column {col}"
        if token:
            where += f", near {token!r}"
        super().__init__(f"{message} ({where})")


@dataclass(frozen=True)
class Token:
    kind: str  # atom, var, int, str, punct, end, eof
    value: str
    line: int
    col: int
    layout_before: bool

    @property
    def text(self) -> str:
        return self.value


_SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")
_SOLO = set("!;")
_PUNCT = set("()[]{},|")


def tokenize(text: str) -> Iterator[Token]:
    i, n = 0, len(text)
    line, col = 1, 1
    layout = True
    prev: Optional[Token] = None

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while True:
        # layout and comments
        while i < n:
            ch = text[i]
            if ch.isspace():
                advance(1)
                layout = True
            elif ch == "%":
                j = text.find("\n", i)
                advance((n if j < 0 else j) - i)
                layout = True
            elif text.startswith("/*", i):
                j = text.find("*/", i + 2)
                if j < 0:
                    raise ParseError("unterminated block comment", line, col)
                advance(j + 2 - i)
                layout = True
            else:
                break
        if i >= n:
            yield Token("eof", "", line, col, layout)
            return
        start_line, start_col = line, col
        ch = text[i]
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit() and _number_allowed(prev)):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tok = Token("int", text[i:j], start_line, start_col, layout)
            advance(j - i)
        elif ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (word[0].isupper() or word[0] == "_") else "atom"
            tok = Token(kind, word, start_line, start_col, layout)
            advance(j - i)
        elif ch == "'":
            value, j = _read_quoted(text, i, "'", start_line, start_col)
            tok = Token("qatom", value, start_line, start_col, layout)
            advance(j - i)
        elif ch == '"':
            value, j = _read_quoted(text, i, '"', start_line, start_col)
            tok = Token("str", value, start_line, start_col, layout)
            advance(j - i)
        elif ch == "." and (i + 1 >= n or text[i + 1].isspace() or text[i + 1] == "%"):
            tok = Token("end", ".", start_line, start_col, layout)
            advance(1)
        elif ch in _PUNCT:
            tok = Token("punct", ch, start_line, start_col, layout)
            advance(1)
        elif ch in _SOLO:
            tok = Token("atom", ch, start_line, start_col, layout)
            advance(1)
        elif ch in _SYMBOL_CHARS:
            j = i + 1
            while j < n and text[j] in _SYMBOL_CHARS:
                j += 1
            # a trailing '.' followed by layout ends the clause
            if j - i > 1 and text[j - 1] == "." and (j >= n or text[j].isspace() or text[j] == "%"):
                j -= 1
            tok = Token("atom", text[i:j], start_line, start_col, layout)
            advance(j - i)
        else:
            raise ParseError("unexpected character", start_line, start_col, ch)
        layout = False
        prev = tok
        yield tok


def _number_allowed(prev: Optional[Token]) -> bool:
    """A '-' directly before digits is a sign unless it follows a complete term."""
    if prev is None:
        return True
    if prev.kind in ("int", "var", "str", "qatom"):
        return False
    if prev.kind == "punct":
        return prev.value in "([{,|"
    if prev.kind == "atom":
        return prev.value in INFIX_OPS or prev.value in PREFIX_OPS
    return True


def _read_quoted(text: str, i: int, q: str, line: int, col: int) -> tuple[str, int]:
    j = i + 1
    out = []
    while j < len(text):
        ch = text[j]
        if ch == "\\" and j + 1 < len(text):
            nxt = text[j + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            j += 2
        elif ch == q:
            if j + 1 < len(text) and text[j + 1] == q:
                out.append(q)
                j += 2
            else:
                return "".join(out), j + 1
        else:
            out.append(ch)
            j += 1
    raise ParseError("unterminated quoted item", line, col)


@dataclass(frozen=True)
class ReadClause:
    term: Term
    line: int
    col: int


class Reader:
    """Reads terms from a token stream. Anonymous ``_`` becomes ``_<n>``."""

    def __init__(self, text: str, anon_counter: Optional[itertools.count] = None):
        self.tokens = list(tokenize(text))
        self.pos = 0
        self.anon = anon_counter or itertools.count(1)

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col, tok.value or tok.kind)

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value or kind
            raise self.error(f"expected {want!r}", tok)
        return tok

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"

    # clause-level reading
    def read_clause(self) -> ReadClause:
        tok = self.peek()
        term = self.parse(1200)
        end = self.peek()
        if end.kind != "end":
            raise self.error("operator expected or missing '.'", end)
        self.next()
        return ReadClause(term, tok.line, tok.col)

    def read_all(self) -> list[ReadClause]:
        out = []
        while not self.at_eof():
            out.append(self.read_clause())
        return out

    # term parsing
    def parse(self, max_prec: int) -> Term:
        left, left_prec = self.parse_primary(max_prec)
        return self.parse_infix(left, left_prec, max_prec)

    def parse_infix(self, left: Term, left_prec: int, max_prec: int) -> Term:
        while True:
            tok = self.peek()
            name = None
            if tok.kind == "atom" and tok.value in INFIX_OPS:
                name = tok.value
            elif tok.kind == "punct" and tok.value == ",":
                name = ","
            elif tok.kind == "punct" and tok.value == "|" and max_prec >= 1100:
                name = ";"
            if name is None:
                return left
            prec, typ = INFIX_OPS[name]
            if prec > max_prec:
                return left
            la = prec if typ == "yfx" else prec - 1
            ra = prec if typ == "xfy" else prec - 1
            if left_prec > la:
                return left
            self.next()
            right = self.parse(ra)
            left = Struct(name, (left, right))
            left_prec = prec

    def _starts_term(self, tok: Token) -> bool:
        if tok.kind in ("var", "int", "str", "qatom"):
            return True
        if tok.kind == "atom":
            return tok.value not in INFIX_OPS or tok.value in PREFIX_OPS
        if tok.kind == "punct":
            return tok.value in "([{"
        return False

    def parse_primary(self, max_prec: int) -> tuple[Term, int]:
        tok = self.next()
        if tok.kind == "int":
            return Struct(int(tok.value)), 0
        if tok.kind == "str":
            return Str(tok.value), 0
        if tok.kind == "var":
            var = self._var(tok.value)
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.value == "(" and not nxt.layout_before:
                self.next()
                args = self.parse_args()
                return Struct("$apply", (var, *args)), 0
            return var, 0
        if tok.kind == "punct":
            if tok.value == "(":
                inner = self.parse(1200)
                self.expect("punct", ")")
                return inner, 0
            if tok.value == "[":
                if self.peek().kind == "punct" and self.peek().value == "]":
                    self.next()
                    return self._maybe_compound("[]")
                items = [self.parse(999)]
                while self.peek().kind == "punct" and self.peek().value == ",":
                    self.next()
                    items.append(self.parse(999))
                tail: Term = NIL
                if self.peek().kind == "punct" and self.peek().value == "|":
                    self.next()
                    tail = self.parse(999)
                self.expect("punct", "]")
                return make_list(items, tail), 0
            if tok.value == "{":
                if self.peek().kind == "punct" and self.peek().value == "}":
                    self.next()
                    return self._maybe_compound("{}")
                inner = self.parse(1200)
                self.expect("punct", "}")
                return Struct("{}", (inner,)), 0
            raise self.error("unexpected token", tok)
        if tok.kind in ("atom", "qatom"):
            name = tok.value
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.value == "(" and not nxt.layout_before:
                self.next()
                return Struct(name, tuple(self.parse_args())), 0
            if tok.kind == "atom" and name in PREFIX_OPS and self._starts_term(nxt):
                if not (nxt.kind == "atom" and nxt.value in INFIX_OPS and nxt.value not in PREFIX_OPS):
                    prec, typ = PREFIX_OPS[name]
                    if prec > max_prec:
                        prec = 999
                    arg_max = prec if typ == "fy" else prec - 1
                    arg = self.parse(arg_max)
                    if name == "-" and isinstance(arg, Struct) and isinstance(arg.functor, int):
                        return Struct(-arg.functor), 0
                    return Struct(name, (arg,)), prec
            prec = 0
            if tok.kind == "atom" and (name in INFIX_OPS or name in PREFIX_OPS):
                prec = min(max(INFIX_OPS.get(name, (0,))[0], PREFIX_OPS.get(name, (0,))[0]), max_prec)
            return Struct(name), prec
        if tok.kind == "end":
            raise self.error("unexpected end of clause", tok)
        if tok.kind == "eof":
            raise self.error("unexpected end of input", tok)
        raise self.error("unexpected token", tok)

    def _maybe_compound(self, name: str) -> tuple[Term, int]:
        nxt = self.peek()
        if nxt.kind == "punct" and nxt.value == "(" and not nxt.layout_before:
            self.next()
            return Struct(name, tuple(self.parse_args())), 0
        return Struct(name), 0

    def parse_args(self) -> list[Term]:
        args = [self.parse(999)]
        while self.peek().kind == "punct" and self.peek().value == ",":
            self.next()
            args.append(self.parse(999))
        self.expect("punct", ")")
        return args

    def _var(self, name: str) -> Var:
        if name == "_":
            return Var(f"_{next(self.anon)}")
        return Var(name)


def parse_term(text: str) -> Term:
    """Parse a single term; a trailing '.' is optional."""
    src = text.strip()
    if not src.endswith("."):
        src += " ."
    reader = Reader(src)
    clause = reader.read_clause()
    if not reader.at_eof():
        raise reader.error("trailing input after term")
    return clause.term


def read_terms(text: str) -> list[ReadClause]:
    return Reader(text).read_all()
