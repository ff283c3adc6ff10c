"""Lowering from the frontend's TypedProgram to KernelIR.

One IR statement per source statement. Scalars become rank-0 tensors,
extent constants fold into literals, and in-place constructions become
materialized integer tensors with a synthesized trailing index named
__pick_<output>.
"""

from __future__ import annotations

from ..ekl.analyze import Symbol, TypedProgram, TypedStmt, classify_subscript
from ..ekl import ast
from ..numerics import F64, NumericFormat
from .ir import (
    BinExpr, ConstExpr, Expr, IxGather, IxRef, IxShift, KernelIR, ReadExpr,
    SelectExpr, Statement, TensorDef,
)


def _lower_expr(e: ast.Expr, symbols: dict[str, Symbol]) -> Expr:
    if isinstance(e, ast.Num):
        return ConstExpr(float(e.value))
    if isinstance(e, ast.Ref):
        sym = symbols[e.name]
        if sym.role == "constant":
            return ConstExpr(float(sym.extent))
        return ReadExpr(e.name, ())
    if isinstance(e, ast.Access):
        return _lower_access(e, symbols)
    if isinstance(e, ast.BinOp):
        return BinExpr(e.op, _lower_expr(e.left, symbols),
                       _lower_expr(e.right, symbols))
    assert isinstance(e, ast.Select)
    c = e.cond
    return SelectExpr(c.op, _lower_expr(c.left, symbols),
                      _lower_expr(c.right, symbols),
                      _lower_expr(e.then, symbols),
                      _lower_expr(e.other, symbols))


def _lower_access(e: ast.Access, symbols: dict[str, Symbol]) -> ReadExpr:
    subs = []
    for sub in e.subs:
        kind, *info = classify_subscript(sub, symbols)
        if kind == "index":
            name, offset = info
            subs.append(IxRef(name) if offset == 0 else IxShift(name, offset))
        else:
            subs.append(IxGather(_lower_access(info[0], symbols)))
    return ReadExpr(e.name, tuple(subs))


def _fmt_of(sym: Symbol, default: NumericFormat) -> NumericFormat:
    # Integer tensors are carried as exact doubles.
    return sym.fmt if sym.fmt is not None else F64


def lower(tp: TypedProgram, name: str = "kernel") -> KernelIR:
    """Lower a type-checked program; the result passes validate()."""
    tensors: dict[str, TensorDef] = {}
    for sym in tp.symbols.values():
        if sym.role in ("index-domain", "constant"):
            continue
        tensors[sym.name] = TensorDef(
            sym.name, sym.shape, _fmt_of(sym, tp.default_format),
            sym.integer, sym.role)

    statements = []
    for st in tp.statements:
        if st.construct_len is not None:
            free = st.free + ((f"__pick_{st.output}", st.construct_len),)
            elements = tuple(_lower_expr(el, tp.symbols)
                             for el in st.assign.rhs.elements)
            statements.append(Statement(st.output, free, (), None, elements))
        else:
            expr = _lower_expr(st.assign.rhs, tp.symbols)
            statements.append(Statement(st.output, st.free, st.reduce, expr))

    ir = KernelIR(name, tensors, tuple(statements))
    ir.validate()
    return ir
