"""Text front end: tokenizer and recursive-descent parser for formula files.

Grammar (whitespace-insensitive, '#' starts a comment)::

    file    := [ "sig" "{" item* "}" ] formula
    item    := "unary" NAME+ ";" | "rel" NAME "/" INT ";"
             | "trans" NAME ";" | "equiv" NAME ";" | "order" NAME ";"
    formula := NAME "(" var ("," var)* ")" | var "=" var
             | formula "&" formula | formula "|" formula | "!" formula
             | "E" var+ "." formula | "A" var+ "." formula | "(" formula ")"

'!' binds tightest, then '&', then '|'; quantifier bodies extend as far
right as possible. "A xs. !f" is read as !E xs. f.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import EQUIV, ORDER, PLAIN, And, Atom, Eq, Exists, Formula, Not, Or, Signature, TransPair


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg, self.line, self.col = msg, line, col


_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r\n]+|\#[^\n]*)
      | (?P<name>@?[A-Za-z_][A-Za-z0-9_]*~?)
      | (?P<int>[0-9]+)
      | (?P<arrow>->)
      | (?P<punct>[{}(),;/=&|!.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, line, line_start = 0, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            out.append(Token(kind, tok, line, i - line_start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = i + tok.rfind("\n") + 1
        i = m.end()
    out.append(Token("eof", "", line, i - line_start + 1))
    return out


class Parser:
    def __init__(self, text: str, sig: Signature | None = None, allow_reserved: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig
        self.allow_reserved = allow_reserved

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("punct", "name", "arrow"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return tok

    def name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "name":
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        if tok.text.startswith("@") and not self.allow_reserved:
            self.error(f"names starting with '@' are reserved: {tok.text}")
        self.i += 1
        return tok

    def var(self) -> str:
        tok = self.name("variable")
        if tok.text.endswith("~"):
            self.error(f"bad variable name {tok.text!r}", tok)
        return tok.text

    # -- signature
    def signature(self) -> Signature:
        self.expect("sig")
        self.expect("{")
        unary: list[str] = []
        rels: list[tuple[str, int]] = []
        trans: list[TransPair] = []
        while not self.accept("}"):
            kw = self.name("declaration keyword")
            if kw.text == "unary":
                first = True
                while self.tok.kind == "name":
                    unary.append(self.plain_name())
                    first = False
                if first:
                    self.error("'unary' needs at least one name")
            elif kw.text == "rel":
                n = self.plain_name()
                self.expect("/")
                if self.tok.kind != "int":
                    self.error("expected arity")
                rels.append((n, int(self.tok.text)))
                self.i += 1
            elif kw.text in ("trans", "equiv", "order"):
                flag = {"trans": PLAIN, "equiv": EQUIV, "order": ORDER}[kw.text]
                trans.append(TransPair(self.plain_name(), flag))
            else:
                self.error(f"unknown declaration {kw.text!r}", kw)
            self.expect(";")
        try:
            return Signature(tuple(unary), tuple(rels), tuple(trans))
        except ValueError as e:
            self.error(str(e))

    def plain_name(self) -> str:
        tok = self.name("symbol name")
        if tok.text.endswith("~"):
            self.error(f"'~' names are reserved for inverses: {tok.text}", tok)
        return tok.text

    # -- formulas
    def formula(self) -> Formula:
        start = self.tok
        parts = [self.conjunction()]
        while self.accept("|"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts), pos=(start.line, start.col))

    def conjunction(self) -> Formula:
        start = self.tok
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts), pos=(start.line, start.col))

    def unary(self) -> Formula:
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.accept("!"):
            return Not(self.unary(), pos=pos)
        if tok.kind == "name" and tok.text in ("E", "A") and self.peek().text != "(":
            self.i += 1
            vs = [self.var()]
            while not self.accept("."):
                vs.append(self.var())
            body = self.formula()
            if tok.text == "E":
                return Exists(tuple(vs), body, pos=pos)
            inner = body.body if isinstance(body, Not) else Not(body, pos=pos)
            return Not(Exists(tuple(vs), inner, pos=pos), pos=pos)
        return self.primary()

    def primary(self) -> Formula:
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if tok.kind != "name":
            self.error(f"expected formula, found {tok.text or 'end of input'!r}")
        if self.peek().text == "(":
            name = self.name("symbol").text
            self.expect("(")
            args = [self.var()]
            while self.accept(","):
                args.append(self.var())
            self.expect(")")
            self.check_atom(name, len(args), tok)
            return Atom(name, tuple(args), pos=pos)
        left = self.var()
        self.expect("=")
        return Eq(left, self.var(), pos=pos)

    def check_atom(self, name: str, n: int, tok: Token):
        if self.sig is None:
            return
        a = self.sig.arity(name)
        if a is None:
            self.error(f"unknown symbol {name!r}", tok)
        if a != n:
            self.error(f"arity mismatch for {name}: expected {a}, got {n}", tok)


def parse_signature(text: str, allow_reserved: bool = False) -> Signature:
    p = Parser(text, allow_reserved=allow_reserved)
    sig = p.signature()
    if p.tok.kind != "eof":
        p.error("trailing input after signature")
    return sig


def parse_formula(text: str, signature: Signature | None = None, allow_reserved: bool = False):
    """Parse a formula file (or a bare formula under `signature`) into (Signature, Formula)."""
    p = Parser(text, signature, allow_reserved)
    if p.tok.text == "sig" and p.peek().text == "{":
        p.sig = p.signature()
    if p.sig is None:
        p.error("no signature given")
    f = p.formula()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after formula")
    return p.sig, f
