"""Tokenizer for the query language. Tracks line/column per token."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import QuerySyntaxError

KEYWORDS = {
    "match", "optional", "where", "with", "unwind", "as", "return", "distinct",
    "order", "by", "skip", "limit", "asc", "ascending", "desc", "descending",
    "and", "or", "not", "true", "false", "null",
}

# Recognized openCypher keywords that are out of scope; the parser turns these
# into UnsupportedFeature instead of a generic syntax error.
UNSUPPORTED_KEYWORDS = {
    "create", "merge", "delete", "detach", "set", "remove", "foreach", "call",
    "case", "union", "exists", "starts", "ends", "contains", "in", "is", "xor",
}

PUNCT = ["<=", ">=", "<>", "..", "(", ")", "[", "]", "{", "}", ":", "|", ",",
         ".", "-", ">", "<", "=", "+", "*", "/"]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT KEYWORD INT FLOAT STRING PUNCT EOF
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def tokenize(text: str) -> list[Token]:
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def error(message):
        raise QuerySyntaxError(message, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and text[i:i + 2] == "//":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            lowered = word.lower()
            kind = "KEYWORD" if lowered in KEYWORDS or lowered in UNSUPPORTED_KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # "1.5" is a float but "1.." is INT followed by the range operator
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(Token("FLOAT", text[i:j], start_line, start_col))
            else:
                tokens.append(Token("INT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in ("'", '"'):
            quote = ch
            j = i + 1
            out = []
            while True:
                if j >= n:
                    error("unterminated string literal")
                c = text[j]
                if c == "\\":
                    if j + 1 >= n:
                        error("unterminated string escape")
                    esc = text[j + 1]
                    out.append({"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}.get(esc))
                    if out[-1] is None:
                        error(f"unknown string escape \\{esc}")
                    j += 2
                    continue
                if c == "\n":
                    error("unterminated string literal")
                if c == quote:
                    break
                out.append(c)
                j += 1
            tokens.append(Token("STRING", "".join(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        for punct in PUNCT:
            if text.startswith(punct, i):
                tokens.append(Token("PUNCT", punct, start_line, start_col))
                i += len(punct)
                col += len(punct)
                break
        else:
            error(f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", line, col))
    return tokens
