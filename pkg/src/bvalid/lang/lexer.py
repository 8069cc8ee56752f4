"""Tokenizer for the ASCII B notation used in declarations, definitions and rules."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError, Loc

KEYWORDS = frozenset({
    # predicate / expression keywords
    "or", "not", "mod", "TRUE", "FALSE",
    "card", "min", "max", "dom", "ran", "size", "first", "last", "prj1", "prj2",
    # rule files
    "RULE", "COUNTEREXAMPLE", "ANY", "WHERE", "EXPECTED", "END", "DEFINITION",
    # declaration files
    "DATA", "SOURCE", "COLUMN", "seq", "INT", "BOOL", "STRING",
})

# longest first so that matching the first hit is maximal munch
OPERATORS = sorted([
    "<<|", "|>>", "<=>", "/<:", "|->",
    "<+", "<|", "|>", "<:", "/:", "/=", "<=", ">=", "=>", "..", "\\/", "/\\", "==",
    "+", "-", "*", "/", "<", ">", "=", ":", "&", "~", ";", "%", "!", "#", "|",
], key=len, reverse=True)

PUNCTUATION = frozenset("()[]{},.")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str   # keyword | identifier | qualified-identifier | integer-literal | string-literal | operator | punctuation | eof
    text: str
    line: int
    column: int
    file: str | None = None

    @property
    def loc(self) -> Loc:
        return Loc(self.line, self.column, self.file)


def _ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(source: str, filename: str | None = None) -> list[Token]:
    """Return the full token stream of ``source``, terminated by an ``eof`` token.

    Whitespace and ``//`` comments are dropped. A string literal's token text
    is its decoded content (``\\"`` and ``\\\\`` are the only escapes).
    ``filename`` is recorded in every token location.
    """
    tokens: list[Token] = []
    i, n = 0, len(source)
    line, line_start = 1, 0
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if c in " \t\r\f﻿":
            i += 1
            continue
        col = i - line_start + 1
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        if _ident_start(c):
            j = i + 1
            while j < n and _ident_char(source[j]):
                j += 1
            kind = "identifier"
            # File!Column: the bang must be glued to identifiers on both sides
            if j + 1 < n and source[j] == "!" and _ident_start(source[j + 1]):
                j += 2
                while j < n and _ident_char(source[j]):
                    j += 1
                kind = "qualified-identifier"
            text = source[i:j]
            if kind == "identifier" and text in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, text, line, col, filename))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and source[j].isdigit():
                j += 1
            if j < n and _ident_start(source[j]):
                raise LexError(f"malformed number {source[i:j + 1]!r}", Loc(line, col, filename))
            tokens.append(Token("integer-literal", source[i:j], line, col, filename))
            i = j
            continue
        if c == '"':
            j = i + 1
            chars = []
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError("unterminated string literal", Loc(line, col, filename))
                ch = source[j]
                if ch == '"':
                    break
                if ch == "\\" and j + 1 < n and source[j + 1] in '"\\':
                    chars.append(source[j + 1])
                    j += 2
                    continue
                chars.append(ch)
                j += 1
            tokens.append(Token("string-literal", "".join(chars), line, col, filename))
            i = j + 1
            continue
        if c in PUNCTUATION and not source.startswith("..", i):
            tokens.append(Token("punctuation", c, line, col, filename))
            i += 1
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("operator", op, line, col, filename))
                i += len(op)
                break
        else:
            raise LexError(f"illegal character {c!r}", Loc(line, col, filename))
    tokens.append(Token("eof", "", line, i - line_start + 1, filename))
    return tokens
