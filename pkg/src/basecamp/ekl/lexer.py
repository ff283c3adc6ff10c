"""Tokenizer for the kernel language.

Newlines are statement terminators only at bracket depth zero; inside
parentheses or square brackets a statement may continue across lines.
Comments run from '#' to end of line.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SourceError, Span


class EklSyntaxError(SourceError):
    """Lex or parse failure; carries the expected-token set when known."""

    def __init__(self, message: str, span: Span, expected: frozenset[str] = frozenset()):
        if expected:
            message = f"{message} (expected one of: {', '.join(sorted(expected))})"
        super().__init__(message, span)
        self.expected = expected


KEYWORDS = frozenset({
    "const", "index", "tensor", "scalar", "parallel", "select", "of",
    "int", "f64", "fixed", "float",
})

# Longest first so '<=' wins over '<'.
_SYMBOLS = ("<=", ">=", "==", "!=", "<", ">", "=", "+", "-", "*",
            "[", "]", "(", ")", ",", ";", ":")


@dataclass(frozen=True)
class Token:
    kind: str   # 'name' | 'intlit' | 'floatlit' | 'newline' | 'eof' | keyword | symbol
    text: str
    span: Span


def _is_name_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    depth = 0
    i, n = 0, len(source)

    def emit(kind: str, text: str, ln: int, cl: int) -> None:
        toks.append(Token(kind, text, Span(ln, cl)))

    while i < n:
        c = source[i]
        if c == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c == "\n":
            if depth == 0 and toks and toks[-1].kind not in ("newline",):
                emit("newline", "\\n", line, col)
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if _is_name_start(c):
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            emit(word if word in KEYWORDS else "name", word, line, col)
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            isfloat = False
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                isfloat = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    isfloat = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            emit("floatlit" if isfloat else "intlit", text, line, col)
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                if sym in "[(":
                    depth += 1
                elif sym in "])":
                    depth = max(0, depth - 1)
                emit(sym, sym, line, col)
                i += len(sym)
                col += len(sym)
                break
        else:
            raise EklSyntaxError(f"unexpected character {c!r}", Span(line, col))
    if toks and toks[-1].kind != "newline":
        emit("newline", "\\n", line, col)
    emit("eof", "", line, col)
    return toks
