from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = frozenset(
    """MATCH WHERE RETURN ORDER BY ASC ASCENDING DESC DESCENDING LIMIT AND OR NOT
    CONTAINS STARTS ENDS WITH IN IS NULL TRUE FALSE AS DISTINCT CASE WHEN THEN ELSE END""".split()
)

_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACKET",
    "]": "RBRACKET",
    "{": "LBRACE",
    "}": "RBRACE",
    ":": "COLON",
    ",": "COMMA",
    ".": "DOT",
    "-": "DASH",
    "*": "STAR",
    "=": "EQ",
    "<": "LT",
    ">": "GT",
}
_TWO_CHAR = {"<=": "LE", ">=": "GE", "<>": "NE", "!=": "NE"}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")
_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f"}


class LexError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Token:
    kind: str  # KEYWORD, IDENT, STRING, INT, FLOAT, EOF or a punctuation name
    value: object
    offset: int  # byte offset into the UTF-8 encoded query
    text: str | None = None  # original spelling of keywords

    def __repr__(self) -> str:
        return f"{self.kind}({self.value!r})@{self.offset}"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)

    def boff(pos: int) -> int:
        return len(text[:pos].encode("utf-8"))

    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text.startswith("//", i):
            nl = text.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        start = i
        if c in "'\"":
            i, value = _read_string(text, i, boff)
            tokens.append(Token("STRING", value, boff(start)))
            continue
        if c == "`":
            out = []
            i += 1
            while True:
                if i >= n:
                    raise LexError("unterminated quoted identifier", boff(start))
                if text[i] == "`":
                    if text.startswith("``", i):
                        out.append("`")
                        i += 2
                        continue
                    i += 1
                    break
                out.append(text[i])
                i += 1
            if not out:
                raise LexError("empty quoted identifier", boff(start))
            tokens.append(Token("IDENT", "".join(out), boff(start)))
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            i = m.end()
            if word.upper() in KEYWORDS:
                tokens.append(Token("KEYWORD", word.upper(), boff(start), word))
            else:
                tokens.append(Token("IDENT", word, boff(start)))
            continue
        m = _NUMBER.match(text, i)
        if m:
            i = m.end()
            if m.group(1) or m.group(2):
                tokens.append(Token("FLOAT", float(m.group()), boff(start)))
            else:
                tokens.append(Token("INT", int(m.group()), boff(start)))
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(_TWO_CHAR[two], two, boff(start)))
            i += 2
            continue
        if c in _PUNCT:
            tokens.append(Token(_PUNCT[c], c, boff(start)))
            i += 1
            continue
        raise LexError(f"illegal character {c!r}", boff(start))
    tokens.append(Token("EOF", None, boff(n)))
    return tokens


def _read_string(text: str, i: int, boff) -> tuple[int, str]:
    quote = text[i]
    start = i
    i += 1
    out = []
    while i < len(text):
        c = text[i]
        if c == quote:
            return i + 1, "".join(out)
        if c == "\\":
            if i + 1 >= len(text):
                break
            nxt = text[i + 1]
            if nxt in _ESCAPES:
                out.append(_ESCAPES[nxt])
                i += 2
                continue
            if nxt == "u" and re.fullmatch(r"[0-9A-Fa-f]{4}", text[i + 2 : i + 6]):
                out.append(chr(int(text[i + 2 : i + 6], 16)))
                i += 6
                continue
            raise LexError(f"bad escape \\{nxt}", boff(i))
        out.append(c)
        i += 1
    raise LexError("unterminated string literal", boff(start))
