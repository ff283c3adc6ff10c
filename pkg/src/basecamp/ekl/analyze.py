"""Type and shape analysis for parsed kernels.

The statement discipline is Einstein-style with an explicit twist: indices
named in an explicit left-hand index list are free, every other index on
the right-hand side is a reduce (summation) index. A statement may omit
its index list only when every index on the right-hand side was declared
`parallel`; the free list is then those indices in declaration order. This
keeps orderings canonical without whole-program inference.

Subscripts are restricted to an index, an index plus a non-negative
constant shift, or an access into an integer tensor (a gather). In-place
constructions `[e1, ..., en]` are legal only as an entire statement
right-hand side and append a fresh trailing axis of extent n; their
element expressions may use scalars, arithmetic and gathers freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..errors import SourceError, Span
from ..numerics import F64, FormatError, NumericFormat, parse_format
from .ast import (
    Access, Assign, BinOp, Compare, ConstDecl, Construct, Expr, IndexDecl,
    Num, Program, Ref, ScalarDecl, Select, TensorDecl,
)


class EklTypeError(SourceError):
    """Semantic diagnostic (undeclared name, shape clash, bad subscript...)."""


@dataclass(frozen=True)
class Symbol:
    name: str
    role: str                 # input | intermediate | output | index-domain | constant
    shape: tuple[int, ...] = ()
    fmt: Optional[NumericFormat] = None   # None for integer element type
    integer: bool = False
    parallel: bool = False
    extent: int = 0           # index-domain extent / constant value


@dataclass(frozen=True)
class TypedStmt:
    assign: Assign
    output: str
    free: tuple[tuple[str, int], ...]
    reduce: tuple[tuple[str, int], ...]
    shape: tuple[int, ...]
    integer: bool
    construct_len: Optional[int]   # n when the RHS is an in-place construction


@dataclass
class TypedProgram:
    symbols: dict[str, Symbol]
    statements: tuple[TypedStmt, ...]
    default_format: NumericFormat

    def outputs(self) -> list[Symbol]:
        return [s for s in self.symbols.values() if s.role == "output"]

    def inputs(self) -> list[Symbol]:
        return [s for s in self.symbols.values() if s.role == "input"]


# -- subscript classification ---------------------------------------------


def classify_subscript(e: Expr, symbols: dict[str, Symbol]):
    """Return ('gather', Access) or ('index', name, offset >= 0)."""
    if isinstance(e, Access):
        return ("gather", e)
    terms: list[tuple[int, Expr]] = []

    def walk(node: Expr, sign: int) -> None:
        if isinstance(node, BinOp) and node.op in ("+", "-"):
            walk(node.left, sign)
            walk(node.right, sign if node.op == "+" else -sign)
        else:
            terms.append((sign, node))

    walk(e, 1)
    index_name = None
    offset = 0
    for sign, node in terms:
        if isinstance(node, Num) and isinstance(node.value, int):
            offset += sign * node.value
        elif isinstance(node, Ref) and node.name in symbols \
                and symbols[node.name].role == "index-domain":
            if index_name is not None:
                raise EklTypeError(
                    "subscript combines more than one index", node.span)
            if sign < 0:
                raise EklTypeError("subscript negates an index", node.span)
            index_name = node.name
        else:
            raise EklTypeError(
                "subscript must be an index, an index plus a constant, or "
                "an integer tensor access", _span_of(node))
    if index_name is None:
        raise EklTypeError(
            "subscript has no index (constant subscripts are not supported)",
            _span_of(e))
    if offset < 0:
        raise EklTypeError(
            f"subscript shift is negative ({offset})", _span_of(e))
    return ("index", index_name, offset)


def _span_of(e: Expr) -> Span:
    return getattr(e, "span", Span(0, 0))


# -- the analyzer ----------------------------------------------------------


class _Analyzer:
    def __init__(self, program: Program, default_format: NumericFormat):
        self.program = program
        self.default_format = default_format
        self.symbols: dict[str, Symbol] = {}
        self.consumed: set[str] = set()
        self.assigned: set[str] = set()
        self.index_order: list[str] = []

    def run(self) -> TypedProgram:
        for d in self.program.decls:
            self.declare(d)
        stmts = tuple(self.statement(s) for s in self.program.stmts)
        if not stmts:
            raise EklTypeError("kernel has no statements", Span(1, 1))
        # Defined tensors never read downstream are the kernel outputs.
        final: dict[str, Symbol] = {}
        for name, sym in self.symbols.items():
            if sym.role == "intermediate" and name not in self.consumed:
                sym = Symbol(name, "output", sym.shape, sym.fmt, sym.integer)
            final[name] = sym
        return TypedProgram(final, stmts, self.default_format)

    # -- declarations ------------------------------------------------------

    def fresh_name(self, name: str, span: Span) -> None:
        if name.startswith("__"):
            raise EklTypeError(
                f"names starting with '__' are reserved: '{name}'", span)
        if name in self.symbols:
            raise EklTypeError(f"duplicate declaration of '{name}'", span)

    def resolve_extent(self, e: Union[int, str], span: Span) -> int:
        if isinstance(e, int):
            value = e
        else:
            sym = self.symbols.get(e)
            if sym is None or sym.role != "constant":
                raise EklTypeError(
                    f"'{e}' is not a declared extent constant", span)
            value = sym.extent
        if value < 1:
            raise EklTypeError(f"extent must be >= 1, got {value}", span)
        return value

    def resolve_elem(self, elem: Optional[str], span: Span):
        """Return (fmt or None, integer flag)."""
        if elem is None:
            return self.default_format, False
        if elem == "int":
            return None, True
        try:
            return parse_format(elem), False
        except FormatError as err:
            raise EklTypeError(str(err), span) from None

    def declare(self, d) -> None:
        self.fresh_name(d.name, d.span)
        if isinstance(d, ConstDecl):
            if d.value < 1:
                raise EklTypeError(
                    f"extent constant must be >= 1, got {d.value}", d.span)
            self.symbols[d.name] = Symbol(d.name, "constant", extent=d.value)
        elif isinstance(d, IndexDecl):
            ext = self.resolve_extent(d.extent, d.span)
            self.symbols[d.name] = Symbol(
                d.name, "index-domain", parallel=d.parallel, extent=ext)
            self.index_order.append(d.name)
        elif isinstance(d, TensorDecl):
            shape = tuple(self.resolve_extent(x, d.span) for x in d.dims)
            fmt, integer = self.resolve_elem(d.elem, d.span)
            self.symbols[d.name] = Symbol(
                d.name, "input", shape, fmt, integer)
        else:
            assert isinstance(d, ScalarDecl)
            fmt, integer = self.resolve_elem(d.elem, d.span)
            self.symbols[d.name] = Symbol(d.name, "input", (), fmt, integer)

    # -- expressions -------------------------------------------------------

    def expr(self, e: Expr) -> tuple[bool, set[str]]:
        """Type an expression; returns (is_integer, indices used)."""
        if isinstance(e, Num):
            return isinstance(e.value, int), set()
        if isinstance(e, Ref):
            sym = self.symbols.get(e.name)
            if sym is None:
                raise EklTypeError(f"undeclared name '{e.name}'", e.span)
            if sym.role == "index-domain":
                raise EklTypeError(
                    f"index '{e.name}' used as a value", e.span)
            if sym.role == "constant":
                return True, set()
            if sym.shape != ():
                raise EklTypeError(
                    f"tensor '{e.name}' used without subscripts", e.span)
            self.consumed.add(e.name)
            return sym.integer, set()
        if isinstance(e, Access):
            return self.access(e)
        if isinstance(e, BinOp):
            li, lu = self.expr(e.left)
            ri, ru = self.expr(e.right)
            return li and ri, lu | ru
        if isinstance(e, Select):
            ci, cu = self.expr(e.cond.left)
            di, du = self.expr(e.cond.right)
            ti, tu = self.expr(e.then)
            oi, ou = self.expr(e.other)
            return ti and oi, cu | du | tu | ou
        if isinstance(e, Construct):
            raise EklTypeError(
                "in-place construction is only legal as an entire statement "
                "right-hand side", e.span)
        raise AssertionError(f"unhandled expression {e!r}")

    def access(self, e: Access) -> tuple[bool, set[str]]:
        sym = self.symbols.get(e.name)
        if sym is None:
            raise EklTypeError(f"undeclared name '{e.name}'", e.span)
        if sym.role in ("index-domain", "constant"):
            raise EklTypeError(
                f"'{e.name}' is not a tensor", e.span)
        if len(e.subs) != len(sym.shape):
            raise EklTypeError(
                f"tensor '{e.name}' has rank {len(sym.shape)} but is "
                f"accessed with {len(e.subs)} subscripts", e.span)
        self.consumed.add(e.name)
        used: set[str] = set()
        for dim, (sub, extent) in enumerate(zip(e.subs, sym.shape)):
            kind, *info = classify_subscript(sub, self.symbols)
            if kind == "index":
                name, offset = info
                idx = self.symbols[name]
                if offset == 0 and idx.extent != extent:
                    raise EklTypeError(
                        f"index '{name}' (extent {idx.extent}) used on dim "
                        f"{dim} of '{e.name}' (extent {extent})", _span_of(sub))
                if offset > 0 and idx.extent + offset > extent:
                    raise EklTypeError(
                        f"shifted index '{name}+{offset}' can reach "
                        f"{idx.extent + offset - 1}, past dim {dim} of "
                        f"'{e.name}' (extent {extent})", _span_of(sub))
                used.add(name)
            else:
                gather: Access = info[0]
                gi, gu = self.access(gather)
                if not gi:
                    raise EklTypeError(
                        f"non-integer tensor '{gather.name}' used as a "
                        "subscript", gather.span)
                used |= gu
        return sym.integer, used

    # -- statements --------------------------------------------------------

    def free_list(self, assign: Assign, used: set[str]
                  ) -> tuple[tuple[str, int], ...]:
        if assign.indices is not None:
            seen = set()
            free = []
            for name in assign.indices:
                sym = self.symbols.get(name)
                if sym is None or sym.role != "index-domain":
                    raise EklTypeError(
                        f"left-hand index '{name}' is not a declared index",
                        assign.span)
                if name in seen:
                    raise EklTypeError(
                        f"left-hand index '{name}' repeated", assign.span)
                seen.add(name)
                free.append((name, sym.extent))
            return tuple(free)
        bad = sorted(n for n in used if not self.symbols[n].parallel)
        if bad:
            raise EklTypeError(
                f"statement omits its index list but uses non-parallel "
                f"indices: {', '.join(bad)} (write an explicit index list)",
                assign.span)
        return tuple((n, self.symbols[n].extent)
                     for n in self.index_order
                     if n in used and self.symbols[n].parallel)

    def statement(self, assign: Assign) -> TypedStmt:
        declared = self.symbols.get(assign.name)
        if declared is not None:
            # writing a declared tensor or scalar claims it as an output;
            # anything else (or a second write) is a redefinition
            if declared.role != "input" or assign.name in self.assigned:
                self.fresh_name(assign.name, assign.span)
        else:
            self.fresh_name(assign.name, assign.span)
        if isinstance(assign.rhs, Construct):
            elements = assign.rhs.elements
            integer = True
            used: set[str] = set()
            for el in elements:
                ei, eu = self.expr(el)
                integer = integer and ei
                used |= eu
            free = self.free_list(assign, used)
            if set(n for n, _ in free) != used:
                missing = sorted(used - set(n for n, _ in free))
                extra = sorted(set(n for n, _ in free) - used)
                parts = []
                if missing:
                    parts.append(f"missing {', '.join(missing)}")
                if extra:
                    parts.append(f"unused {', '.join(extra)}")
                raise EklTypeError(
                    "in-place construction index list must name exactly the "
                    f"indices of its elements ({'; '.join(parts)})",
                    assign.span)
            shape = tuple(ext for _, ext in free) + (len(elements),)
            stmt = TypedStmt(assign, assign.name, free, (), shape, integer,
                             len(elements))
        else:
            integer, used = self.expr(assign.rhs)
            free = self.free_list(assign, used)
            free_names = set(n for n, _ in free)
            reduce = tuple((n, self.symbols[n].extent)
                           for n in self.index_order
                           if n in used and n not in free_names)
            shape = tuple(ext for _, ext in free)
            stmt = TypedStmt(assign, assign.name, free, reduce, shape,
                             integer, None)
        if declared is not None:
            if declared.shape != stmt.shape:
                raise EklTypeError(
                    f"'{assign.name}' is declared with shape "
                    f"{list(declared.shape)} but the statement produces "
                    f"{list(stmt.shape)}", assign.span)
            if declared.integer and not stmt.integer:
                raise EklTypeError(
                    f"float expression assigned to int tensor "
                    f"'{assign.name}'", assign.span)
            self.symbols[assign.name] = Symbol(
                assign.name, "intermediate", declared.shape, declared.fmt,
                declared.integer)
            stmt = TypedStmt(assign, assign.name, stmt.free, stmt.reduce,
                             stmt.shape, declared.integer, stmt.construct_len)
        else:
            fmt = None if stmt.integer else self.default_format
            self.symbols[assign.name] = Symbol(
                assign.name, "intermediate", stmt.shape, fmt, stmt.integer)
        self.assigned.add(assign.name)
        return stmt


def analyze(program: Program, default_format: NumericFormat = F64
            ) -> TypedProgram:
    """Check a parsed kernel and derive shapes, roles and index sets."""
    return _Analyzer(program, default_format).run()
