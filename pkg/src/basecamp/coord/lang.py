"""Parser for the coordination language.

The accepted shape is a single function:

    fn match_one(gv: GpsVector, mapcell: MapCell) -> RoadSpeedVector {
        #[kernel(offloaded = true, multiplicity = [1, 1],
            path = "projection.cpp")]
        let cv: CandiVector = projection(gv, mapcell);
        let (a, b): (CandiVector, CandiVector) = clone(cv);
        ...
        interpolate(rsvbb)
    }

Types are opaque tags; the parser records their text and never
interprets them.  A `#[kernel(...)]` attribute decorates the following
`let` and is restricted to a fixed key set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import SourceError, Span


class CoordSyntaxError(SourceError):
    pass


# attribute keys and their value kinds
_ATTR_KEYS = {
    "offloaded": "bool",
    "multiplicity": "intlist",
    "path": "string",
    "macs": "int",
    "bytes_in": "int",
    "bytes_out": "int",
}


@dataclass(frozen=True)
class KernelAttr:
    """Offload annotation, recorded verbatim and forwarded downstream."""

    offloaded: bool = False
    multiplicity: tuple[int, ...] = ()
    path: str = ""
    macs: Optional[int] = None
    bytes_in: Optional[int] = None
    bytes_out: Optional[int] = None
    span: Span = field(compare=False, repr=False, default=Span(0, 0))

    def to_json(self) -> dict:
        out: dict = {
            "offloaded": self.offloaded,
            "multiplicity": list(self.multiplicity),
            "path": self.path,
        }
        for k in ("macs", "bytes_in", "bytes_out"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out


@dataclass(frozen=True)
class Call:
    callee: str
    args: tuple[str, ...]
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class NameRef:
    name: str
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class LetBinding:
    names: tuple[str, ...]  # one name, or two for a clone destructuring
    type_text: str
    call: Call
    attr: Optional[KernelAttr] = None
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class CoordFunction:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, type)
    result_type: str
    bindings: tuple[LetBinding, ...]
    result: Union[Call, NameRef]


# -- lexing ----------------------------------------------------------------

_SYMBOLS = ("->", "#", "[", "]", "(", ")", "{", "}", ",", ";", ":", "=")
_KEYWORDS = {"fn", "let", "true", "false"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: Span


def _lex(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        if c == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise CoordSyntaxError("unterminated string literal", span)
                j += 1
            if j >= n:
                raise CoordSyntaxError("unterminated string literal", span)
            text = source[i + 1:j]
            toks.append(_Tok("string", text, span))
            col += j + 1 - i
            i = j + 1
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                toks.append(_Tok(sym, sym, span))
                i += len(sym)
                col += len(sym)
                break
        else:
            if c.isdigit():
                j = i
                while j < n and source[j].isdigit():
                    j += 1
                toks.append(_Tok("int", source[i:j], span))
                col += j - i
                i = j
            elif c.isalpha() or c == "_":
                j = i
                while j < n and (source[j].isalnum() or source[j] == "_"):
                    j += 1
                text = source[i:j]
                kind = text if text in _KEYWORDS else "name"
                toks.append(_Tok(kind, text, span))
                col += j - i
                i = j
            else:
                raise CoordSyntaxError(f"unexpected character {c!r}", span)
    toks.append(_Tok("eof", "", Span(line, col)))
    return toks


# -- parsing ---------------------------------------------------------------


class _P:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, *kinds: str) -> _Tok:
        t = self.peek()
        if t.kind not in kinds:
            what = "end of input" if t.kind == "eof" else f"'{t.text}'"
            want = " or ".join(kinds)
            raise CoordSyntaxError(f"unexpected {what}, expected {want}", t.span)
        return self.next()

    def type_text(self) -> str:
        """A type is a name or a parenthesised tuple of types."""
        if self.peek().kind == "(":
            self.next()
            parts = [self.type_text()]
            while self.peek().kind == ",":
                self.next()
                parts.append(self.type_text())
            self.expect(")")
            return "(" + ", ".join(parts) + ")"
        return self.expect("name").text

    def attribute(self) -> KernelAttr:
        hash_tok = self.expect("#")
        self.expect("[")
        tag = self.expect("name")
        if tag.text != "kernel":
            raise CoordSyntaxError(
                f"unknown attribute '{tag.text}'", tag.span)
        self.expect("(")
        seen: dict[str, object] = {}
        while True:
            key_tok = self.expect("name")
            key = key_tok.text
            if key not in _ATTR_KEYS:
                raise CoordSyntaxError(
                    f"unknown attribute key '{key}'", key_tok.span)
            if key in seen:
                raise CoordSyntaxError(
                    f"duplicate attribute key '{key}'", key_tok.span)
            self.expect("=")
            kind = _ATTR_KEYS[key]
            if kind == "bool":
                v = self.expect("true", "false").kind == "true"
            elif kind == "int":
                v = int(self.expect("int").text)
            elif kind == "string":
                v = self.expect("string").text
            else:
                self.expect("[")
                ints = [int(self.expect("int").text)]
                while self.peek().kind == ",":
                    self.next()
                    ints.append(int(self.expect("int").text))
                self.expect("]")
                v = tuple(ints)
            seen[key] = v
            if self.peek().kind == ",":
                self.next()
                continue
            break
        self.expect(")")
        self.expect("]")
        return KernelAttr(span=hash_tok.span, **seen)  # type: ignore[arg-type]

    def call(self) -> Call:
        callee = self.expect("name")
        self.expect("(")
        args: list[str] = []
        if self.peek().kind != ")":
            args.append(self.expect("name").text)
            while self.peek().kind == ",":
                self.next()
                args.append(self.expect("name").text)
        self.expect(")")
        return Call(callee.text, tuple(args), span=callee.span)

    def binding(self, attr: Optional[KernelAttr]) -> LetBinding:
        let_tok = self.expect("let")
        if self.peek().kind == "(":
            self.next()
            a = self.expect("name").text
            self.expect(",")
            b = self.expect("name").text
            self.expect(")")
            names: tuple[str, ...] = (a, b)
        else:
            names = (self.expect("name").text,)
        self.expect(":")
        ty = self.type_text()
        self.expect("=")
        call = self.call()
        self.expect(";")
        return LetBinding(names, ty, call, attr, span=let_tok.span)

    def function(self) -> CoordFunction:
        self.expect("fn")
        name = self.expect("name").text
        self.expect("(")
        params: list[tuple[str, str]] = []
        if self.peek().kind != ")":
            while True:
                p = self.expect("name").text
                self.expect(":")
                params.append((p, self.type_text()))
                if self.peek().kind == ",":
                    self.next()
                    continue
                break
        self.expect(")")
        self.expect("->")
        result_type = self.type_text()
        self.expect("{")
        bindings: list[LetBinding] = []
        while True:
            t = self.peek()
            if t.kind == "#":
                attr = self.attribute()
                bindings.append(self.binding(attr))
                continue
            if t.kind == "let":
                bindings.append(self.binding(None))
                continue
            break
        # result: a call or a bare name, then the closing brace
        head = self.expect("name")
        if self.peek().kind == "(":
            self.pos -= 1
            result: Union[Call, NameRef] = self.call()
        else:
            result = NameRef(head.text, span=head.span)
        self.expect("}")
        self.expect("eof")
        return CoordFunction(name, tuple(params), result_type,
                             tuple(bindings), result)


def parse_coord(source: str) -> CoordFunction:
    return _P(_lex(source)).function()
