"""AST for the kernel language, plus the canonical pretty printer.

Nodes are frozen dataclasses; source spans are excluded from equality so
that parse(pretty_print(parse(s))) compares structurally equal to
parse(s).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import Span

Expr = Union["Num", "Ref", "Access", "BinOp", "Select", "Construct"]


@dataclass(frozen=True)
class Num:
    value: Union[int, float]
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class Ref:
    """Bare name: an index, a scalar input, or (illegally) a tensor."""

    name: str
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class Access:
    name: str
    subs: tuple[Expr, ...]
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: Expr
    right: Expr
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class Compare:
    op: str  # one of <= < >= > = !=
    left: Expr
    right: Expr
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class Select:
    cond: Compare
    then: Expr
    other: Expr
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class Construct:
    """In-place construction [e1, ..., en]: fresh trailing axis of extent n."""

    elements: tuple[Expr, ...]
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class ConstDecl:
    name: str
    value: int
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class IndexDecl:
    name: str
    extent: Union[int, str]  # literal or const name
    parallel: bool
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class TensorDecl:
    name: str
    dims: tuple[Union[int, str], ...]
    elem: Optional[str]  # format spec text, "int", or None for the default
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class ScalarDecl:
    name: str
    elem: Optional[str]
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


Decl = Union[ConstDecl, IndexDecl, TensorDecl, ScalarDecl]


@dataclass(frozen=True)
class Assign:
    """`name = expr` or `name[i, j] = expr`; indices=None when omitted."""

    name: str
    indices: Optional[tuple[str, ...]]
    rhs: Expr
    span: Span = field(compare=False, repr=False, default=Span(0, 0))


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]
    stmts: tuple[Assign, ...]


# -- pretty printing -------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def _fmt_expr(e: Expr, parent: int = 0, right_child: bool = False) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Access):
        inner = ", ".join(_fmt_expr(s) for s in e.subs)
        return f"{e.name}[{inner}]"
    if isinstance(e, Select):
        c = e.cond
        cond = f"{_fmt_expr(c.left)} {c.op} {_fmt_expr(c.right)}"
        return f"select({cond}, {_fmt_expr(e.then)}, {_fmt_expr(e.other)})"
    if isinstance(e, Construct):
        return "[" + ", ".join(_fmt_expr(x) for x in e.elements) + "]"
    assert isinstance(e, BinOp)
    prec = _PREC[e.op]
    text = (f"{_fmt_expr(e.left, prec, False)} {e.op} "
            f"{_fmt_expr(e.right, prec, True)}")
    # Parenthesize when precedence drops, or on the right of an equal level
    # so that left-associative structure survives a round trip.
    if prec < parent or (prec == parent and right_child):
        return f"({text})"
    return text


def _fmt_decl(d: Decl) -> str:
    if isinstance(d, ConstDecl):
        return f"const {d.name} = {d.value};"
    if isinstance(d, IndexDecl):
        kw = "parallel index" if d.parallel else "index"
        return f"{kw} {d.name} : {d.extent};"
    if isinstance(d, TensorDecl):
        dims = ", ".join(str(x) for x in d.dims)
        of = f" of {d.elem}" if d.elem is not None else ""
        return f"tensor {d.name} : [{dims}]{of};"
    assert isinstance(d, ScalarDecl)
    of = f" : {d.elem}" if d.elem is not None else ""
    return f"scalar {d.name}{of};"


def pretty_print(p: Program) -> str:
    """Canonical text form; parsing it back yields an equal AST."""
    lines = [_fmt_decl(d) for d in p.decls]
    if p.decls and p.stmts:
        lines.append("")
    for s in p.stmts:
        if s.indices is None:
            lhs = s.name
        else:
            lhs = f"{s.name}[" + ", ".join(s.indices) + "]"
        lines.append(f"{lhs} = {_fmt_expr(s.rhs)}")
    return "\n".join(lines) + "\n"
