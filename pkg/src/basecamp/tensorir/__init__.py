"""Typed tensor IR: lowering from the frontend, a bit-reproducible
reference interpreter (the oracle for every downstream stage), and the
static cost model."""

from .ir import (
    BinExpr, ConstExpr, DenseTensor, IrError, IxGather, IxRef, IxShift,
    KernelIR, ReadExpr, SelectExpr, Statement, TensorDef,
)
from .lower import lower
from .interp import EvalError, evaluate
from .cost import CostReport, StmtCost, cost

__all__ = [
    "BinExpr", "ConstExpr", "DenseTensor", "IrError", "IxGather", "IxRef",
    "IxShift", "KernelIR", "ReadExpr", "SelectExpr", "Statement",
    "TensorDef", "lower", "EvalError", "evaluate", "CostReport", "StmtCost",
    "cost",
]
