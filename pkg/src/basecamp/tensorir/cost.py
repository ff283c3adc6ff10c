"""Static operation and traffic counts for a kernel.

Counts are exact, not estimates: the interpreter's instrumented multiply
counters must agree with the numbers reported here statement for
statement.  Multiply-accumulate count is the iteration-space product
times the number of multiplies in the expression tree; byte traffic
charges every distinct tensor an access touches once at its full
storage size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..numerics import NumericFormat
from .ir import (
    BinExpr,
    ConstExpr,
    IxGather,
    KernelIR,
    ReadExpr,
    SelectExpr,
    Statement,
)


@dataclass(frozen=True)
class StmtCost:
    output: str
    macs: int
    bytes_read: int
    bytes_written: int


@dataclass(frozen=True)
class CostReport:
    statements: tuple[StmtCost, ...]
    total_macs: int
    total_bytes_read: int
    total_bytes_written: int

    def for_output(self, name: str) -> StmtCost:
        for sc in self.statements:
            if sc.output == name:
                return sc
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "statements": [
                {
                    "output": sc.output,
                    "macs": sc.macs,
                    "bytes_read": sc.bytes_read,
                    "bytes_written": sc.bytes_written,
                }
                for sc in self.statements
            ],
            "total_macs": self.total_macs,
            "total_bytes_read": self.total_bytes_read,
            "total_bytes_written": self.total_bytes_written,
        }


def _mul_count(e) -> int:
    if isinstance(e, ConstExpr):
        return 0
    if isinstance(e, ReadExpr):
        return sum(_mul_count(s.read) for s in e.subs if isinstance(s, IxGather))
    if isinstance(e, BinExpr):
        own = 1 if e.op == "*" else 0
        return own + _mul_count(e.left) + _mul_count(e.right)
    if isinstance(e, SelectExpr):
        # both branches are evaluated, so both are charged
        return (_mul_count(e.lhs) + _mul_count(e.rhs)
                + _mul_count(e.then) + _mul_count(e.other))
    raise TypeError(f"unknown expression node {type(e).__name__}")


def _read_tensors(e, acc: set[str]) -> None:
    if isinstance(e, ReadExpr):
        acc.add(e.tensor)
        for s in e.subs:
            if isinstance(s, IxGather):
                _read_tensors(s.read, acc)
        return
    if isinstance(e, BinExpr):
        _read_tensors(e.left, acc)
        _read_tensors(e.right, acc)
        return
    if isinstance(e, SelectExpr):
        for part in (e.lhs, e.rhs, e.then, e.other):
            _read_tensors(part, acc)
        return
    if isinstance(e, ConstExpr):
        return
    raise TypeError(f"unknown expression node {type(e).__name__}")


def _tensor_bytes(ir: KernelIR, name: str, fmt: NumericFormat) -> int:
    td = ir.tensors[name]
    width = (td.fmt or fmt).bit_width
    # element count times width over 8; odd widths pad up to whole bytes
    return -(-math.prod(td.shape) * width // 8)


def _stmt_cost(ir: KernelIR, st: Statement, fmt: NumericFormat) -> StmtCost:
    space = math.prod(ext for _, ext in st.free)
    for _, ext in st.reduce:
        space *= ext

    if st.elements is not None:
        # the trailing pick axis is part of free; each slot runs its own
        # element expression once per point of the remaining space
        prefix = math.prod(ext for _, ext in st.free[:-1])
        macs = prefix * sum(_mul_count(el) for el in st.elements)
        reads: set[str] = set()
        for el in st.elements:
            _read_tensors(el, reads)
    else:
        macs = space * _mul_count(st.expr)
        reads = set()
        _read_tensors(st.expr, reads)

    bytes_read = sum(_tensor_bytes(ir, n, fmt) for n in reads)
    bytes_written = _tensor_bytes(ir, st.output, fmt)
    return StmtCost(st.output, macs, bytes_read, bytes_written)


def cost(ir: KernelIR, fmt: NumericFormat | None = None) -> CostReport:
    """Count multiply-accumulates and byte traffic per statement.

    ``fmt`` sets the storage width for tensors that do not carry their
    own format; it defaults to 64-bit floating point.
    """
    from ..numerics import F64

    fmt = fmt or F64
    stmts = tuple(_stmt_cost(ir, st, fmt) for st in ir.statements)
    return CostReport(
        statements=stmts,
        total_macs=sum(s.macs for s in stmts),
        total_bytes_read=sum(s.bytes_read for s in stmts),
        total_bytes_written=sum(s.bytes_written for s in stmts),
    )
