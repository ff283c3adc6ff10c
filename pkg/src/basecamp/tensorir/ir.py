"""IR data model.

A kernel is an ordered list of single-assignment statements over a tensor
table. Each statement is either an einsum form (free indices, reduce
indices, one expression tree) or an in-place construction (free indices
whose last entry is the fresh trailing axis, one expression per element).

Subscript expressions are deliberately tiny: an index, an index plus a
non-negative constant, or a gather (a nested read of an integer tensor).
Every tensor carries a shape, an element format, and a role; stored
values are always fixed points of quantize(value, format).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import BasecampError
from ..numerics import F64, NumericFormat, quantize


class IrError(BasecampError):
    """Structural IR violation (unknown tensor, shape clash, bad role)."""


# -- index expressions -----------------------------------------------------


@dataclass(frozen=True)
class IxRef:
    index: str


@dataclass(frozen=True)
class IxShift:
    index: str
    offset: int  # > 0


@dataclass(frozen=True)
class IxGather:
    read: "ReadExpr"


IndexExpr = Union[IxRef, IxShift, IxGather]


# -- value expressions -----------------------------------------------------


@dataclass(frozen=True)
class ConstExpr:
    value: float


@dataclass(frozen=True)
class ReadExpr:
    tensor: str
    subs: tuple[IndexExpr, ...]


@dataclass(frozen=True)
class BinExpr:
    op: str  # + - *
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class SelectExpr:
    cmp: str  # <= < >= > = !=
    lhs: "Expr"
    rhs: "Expr"
    then: "Expr"
    other: "Expr"


Expr = Union[ConstExpr, ReadExpr, BinExpr, SelectExpr]


# -- tensors and statements ------------------------------------------------


@dataclass(frozen=True)
class TensorDef:
    name: str
    shape: tuple[int, ...]
    fmt: NumericFormat
    integer: bool
    role: str  # input | intermediate | output

    @property
    def size(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n


@dataclass(frozen=True)
class Statement:
    output: str
    free: tuple[tuple[str, int], ...]
    reduce: tuple[tuple[str, int], ...]
    expr: Optional[Expr] = None
    elements: Optional[tuple[Expr, ...]] = None  # in-place construction

    def __post_init__(self) -> None:
        if (self.expr is None) == (self.elements is None):
            raise IrError(
                f"statement '{self.output}' must have exactly one of "
                "expr/elements")


@dataclass
class KernelIR:
    name: str
    tensors: dict[str, TensorDef]
    statements: tuple[Statement, ...]

    def validate(self) -> None:
        defined = {n for n, t in self.tensors.items() if t.role == "input"}
        for st in self.statements:
            out = self.tensors.get(st.output)
            if out is None:
                raise IrError(f"statement writes unknown tensor '{st.output}'")
            if out.role == "input":
                raise IrError(f"statement writes input tensor '{st.output}'")
            if st.output in defined:
                raise IrError(f"tensor '{st.output}' assigned twice")
            shape = tuple(ext for _, ext in st.free)
            if st.elements is not None:
                if not st.free or st.free[-1][1] != len(st.elements):
                    raise IrError(
                        f"construction '{st.output}' trailing extent must "
                        "equal its element count")
            if shape != out.shape:
                raise IrError(
                    f"statement '{st.output}' iterates {shape} but the "
                    f"tensor is {out.shape}")
            for expr in ([st.expr] if st.expr is not None else st.elements):
                self._check_expr(expr, defined, st)
            defined.add(st.output)
        for n, t in self.tensors.items():
            if t.role != "input" and n not in defined:
                raise IrError(f"tensor '{n}' is never assigned")

    def _check_expr(self, e: Expr, defined: set[str], st: Statement) -> None:
        if isinstance(e, ConstExpr):
            return
        if isinstance(e, ReadExpr):
            t = self.tensors.get(e.tensor)
            if t is None:
                raise IrError(
                    f"statement '{st.output}' reads unknown tensor "
                    f"'{e.tensor}'")
            if e.tensor not in defined:
                raise IrError(
                    f"statement '{st.output}' reads '{e.tensor}' before "
                    "assignment")
            if len(e.subs) != len(t.shape):
                raise IrError(
                    f"read of '{e.tensor}' has {len(e.subs)} subscripts, "
                    f"rank is {len(t.shape)}")
            bound = dict(st.free) | dict(st.reduce)
            for sub in e.subs:
                if isinstance(sub, (IxRef, IxShift)):
                    if sub.index not in bound:
                        raise IrError(
                            f"statement '{st.output}' uses unbound index "
                            f"'{sub.index}'")
                else:
                    self._check_expr(sub.read, defined, st)
            return
        if isinstance(e, BinExpr):
            self._check_expr(e.left, defined, st)
            self._check_expr(e.right, defined, st)
            return
        assert isinstance(e, SelectExpr)
        for child in (e.lhs, e.rhs, e.then, e.other):
            self._check_expr(child, defined, st)

    # -- JSON --------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "tensors": [
                {"name": t.name, "shape": list(t.shape), "format": t.fmt.spec(),
                 "integer": t.integer, "role": t.role}
                for t in self.tensors.values()
            ],
            "statements": [_stmt_json(s) for s in self.statements],
        }


def _ix_json(s: IndexExpr) -> dict:
    if isinstance(s, IxRef):
        return {"kind": "index", "index": s.index}
    if isinstance(s, IxShift):
        return {"kind": "shift", "index": s.index, "offset": s.offset}
    return {"kind": "gather", "read": _expr_json(s.read)}


def _expr_json(e: Expr) -> dict:
    if isinstance(e, ConstExpr):
        return {"kind": "const", "value": e.value}
    if isinstance(e, ReadExpr):
        return {"kind": "read", "tensor": e.tensor,
                "subs": [_ix_json(s) for s in e.subs]}
    if isinstance(e, BinExpr):
        return {"kind": "binop", "op": e.op, "left": _expr_json(e.left),
                "right": _expr_json(e.right)}
    assert isinstance(e, SelectExpr)
    return {"kind": "select", "cmp": e.cmp, "lhs": _expr_json(e.lhs),
            "rhs": _expr_json(e.rhs), "then": _expr_json(e.then),
            "other": _expr_json(e.other)}


def _stmt_json(s: Statement) -> dict:
    out = {
        "output": s.output,
        "free": [[n, e] for n, e in s.free],
        "reduce": [[n, e] for n, e in s.reduce],
    }
    if s.expr is not None:
        out["expr"] = _expr_json(s.expr)
    else:
        out["elements"] = [_expr_json(e) for e in s.elements]
    return out


# -- dense tensors ---------------------------------------------------------


@dataclass
class DenseTensor:
    """Row-major value buffer; values are fixed points of its format."""

    shape: tuple[int, ...]
    data: list[float]
    fmt: NumericFormat = F64
    integer: bool = False

    def __post_init__(self) -> None:
        if len(self.data) != self.size:
            raise IrError(
                f"buffer has {len(self.data)} values for shape {self.shape}")

    @property
    def size(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n

    @property
    def strides(self) -> tuple[int, ...]:
        out = []
        acc = 1
        for s in reversed(self.shape):
            out.append(acc)
            acc *= s
        return tuple(reversed(out))

    def flat(self, coords: tuple[int, ...]) -> int:
        pos = 0
        for c, stride in zip(coords, self.strides):
            pos += c * stride
        return pos

    @staticmethod
    def zeros(shape: tuple[int, ...], fmt: NumericFormat = F64,
              integer: bool = False) -> "DenseTensor":
        n = 1
        for s in shape:
            n *= s
        return DenseTensor(shape, [0.0] * n, fmt, integer)

    @staticmethod
    def from_values(shape: tuple[int, ...], values: list, fmt: NumericFormat = F64,
                    integer: bool = False) -> "DenseTensor":
        """Build a tensor, projecting values onto the format's set."""
        if integer:
            data = []
            for v in values:
                f = float(v)
                if f != int(f):
                    raise IrError(f"integer tensor holds non-integer {v!r}")
                data.append(f)
        else:
            data = [quantize(float(v), fmt) for v in values]
        return DenseTensor(tuple(shape), data, fmt, integer)
