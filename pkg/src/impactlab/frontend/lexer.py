from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import Span
from .model import LEX_ERROR, Diagnostic

KEYWORDS = {
    "class", "interface", "extends", "implements", "static", "test",
    "int", "bool", "void", "if", "else", "while", "return", "true", "false",
    "this", "new", "assert", "abs", "reflect_call",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[A-Za-z_][A-Za-z0-9_]*")
  | (?P<op>&&|\|\||==|!=|<=|>=|[-+*/%<>!=(){};,.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "kw" | "string" | "op" | "eof"
    text: str
    span: Span


class LexError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def tokenize(text: str, path: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = Span(path, line, pos - line_start + 1)
        if m is None:
            raise LexError(Diagnostic(span, "error", LEX_ERROR, f"unexpected character {text[pos]!r}"))
        kind = m.lastgroup
        lexeme = m.group()
        if kind in ("ws", "comment"):
            newlines = lexeme.count("\n")
            if newlines:
                line += newlines
                line_start = pos + lexeme.rindex("\n") + 1
        elif kind == "ident" and lexeme in KEYWORDS:
            tokens.append(Token("kw", lexeme, span))
        else:
            tokens.append(Token(kind, lexeme, span))
        pos = m.end()
    tokens.append(Token("eof", "", Span(path, line, pos - line_start + 1)))
    return tokens
