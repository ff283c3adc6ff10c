"""Reference interpreter.

Bit-reproducible by construction: free assignments are iterated row-major
in the statement's free-list order, reduce assignments in declaration
order, and accumulation happens in IEEE double. Two quantization modes:

  quantize-on-store   accumulate in double, project once per element
  quantize-each-op    project after every constant, add, subtract, multiply

Integer statements are never quantized (small exact integers in double).
select() evaluates both branches, so a gather range error inside an
unselected branch still surfaces.
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional

from ..errors import BasecampError
from ..numerics import quantize
from .ir import (
    BinExpr, ConstExpr, DenseTensor, Expr, IxGather, IxRef, IxShift,
    KernelIR, ReadExpr, SelectExpr, Statement,
)

MODES = ("quantize-on-store", "quantize-each-op")


class EvalError(BasecampError):
    """Runtime failure: missing/misshapen input or an out-of-range gather."""


def _compare(op: str, a: float, b: float) -> bool:
    if op == "<=":
        return a <= b
    if op == "<":
        return a < b
    if op == ">=":
        return a >= b
    if op == ">":
        return a > b
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    raise EvalError(f"unknown comparison '{op}'")


def _arith(op: str, a: float, b: float) -> float:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise EvalError(f"unknown operator '{op}'")


class _Runner:
    def __init__(self, ir: KernelIR, env: dict[str, DenseTensor],
                 counters: Optional[dict] = None):
        self.ir = ir
        self.env = env
        self.counters = counters

    def count(self, key: str) -> None:
        if self.counters is not None:
            self.counters[key] = self.counters.get(key, 0) + 1

    def resolve_sub(self, st: Statement, read: ReadExpr, dim: int,
                    sub, ix: dict[str, int]) -> int:
        if isinstance(sub, IxRef):
            return ix[sub.index]
        if isinstance(sub, IxShift):
            return ix[sub.index] + sub.offset
        assert isinstance(sub, IxGather)
        src = self.env[sub.read.tensor]
        coords = tuple(
            self.resolve_sub(st, sub.read, d, s, ix)
            for d, s in enumerate(sub.read.subs))
        flat = src.flat(coords)
        raw = src.data[flat]
        if raw != int(raw):
            raise EvalError(
                f"statement '{st.output}', operand '{read.tensor}': gather "
                f"subscript from '{sub.read.tensor}' flat position {flat} is "
                f"not an integer ({raw})")
        value = int(raw)
        extent = self.env[read.tensor].shape[dim]
        if not 0 <= value < extent:
            raise EvalError(
                f"statement '{st.output}', operand '{read.tensor}': gather "
                f"index {value} out of range for dim {dim} (extent {extent}); "
                f"read from '{sub.read.tensor}' flat position {flat}")
        return value

    def eval_expr(self, st: Statement, e: Expr, ix: dict[str, int],
                  q: Optional[Callable[[float], float]]) -> float:
        if isinstance(e, ConstExpr):
            return q(e.value) if q else e.value
        if isinstance(e, ReadExpr):
            t = self.env[e.tensor]
            coords = tuple(
                self.resolve_sub(st, e, d, s, ix)
                for d, s in enumerate(e.subs))
            return t.data[t.flat(coords)]
        if isinstance(e, BinExpr):
            a = self.eval_expr(st, e.left, ix, q)
            b = self.eval_expr(st, e.right, ix, q)
            if e.op == "*":
                self.count("mul")
            v = _arith(e.op, a, b)
            return q(v) if q else v
        assert isinstance(e, SelectExpr)
        lhs = self.eval_expr(st, e.lhs, ix, q)
        rhs = self.eval_expr(st, e.rhs, ix, q)
        then = self.eval_expr(st, e.then, ix, q)   # both branches evaluate
        other = self.eval_expr(st, e.other, ix, q)
        return then if _compare(e.cmp, lhs, rhs) else other

    def run_statement(self, st: Statement, mode: str) -> None:
        out_def = self.ir.tensors[st.output]
        out = DenseTensor.zeros(out_def.shape, out_def.fmt, out_def.integer)
        q = None
        if mode == "quantize-each-op" and not out_def.integer:
            fmt = out_def.fmt
            q = lambda v: quantize(v, fmt)  # noqa: E731

        free_names = [n for n, _ in st.free]
        free_ranges = [range(e) for _, e in st.free]
        reduce_names = [n for n, _ in st.reduce]
        reduce_ranges = [range(e) for _, e in st.reduce]

        for pos, coords in enumerate(itertools.product(*free_ranges)):
            ix = dict(zip(free_names, coords))
            if st.elements is not None:
                value = self.eval_expr(st, st.elements[coords[-1]], ix, q)
            elif not reduce_names:
                value = self.eval_expr(st, st.expr, ix, q)
            else:
                acc = 0.0
                for rcoords in itertools.product(*reduce_ranges):
                    ix.update(zip(reduce_names, rcoords))
                    term = self.eval_expr(st, st.expr, ix, q)
                    acc = acc + term
                    if q:
                        acc = q(acc)
                value = acc
            if out_def.integer:
                if value != int(value):
                    raise EvalError(
                        f"integer statement '{st.output}' produced "
                        f"non-integer {value}")
            elif mode == "quantize-on-store":
                value = quantize(value, out_def.fmt)
            out.data[pos] = value
        self.env[st.output] = out


def evaluate(ir: KernelIR, inputs: dict[str, DenseTensor],
             mode: str = "quantize-on-store",
             counters: Optional[dict] = None,
             keep_intermediates: bool = False) -> dict[str, DenseTensor]:
    """Run a kernel; returns the output-role tensors.

    Inputs must already respect their declared formats (DenseTensor
    .from_values does the projection).
    """
    if mode not in MODES:
        raise EvalError(f"unknown mode '{mode}' (choose from {MODES})")
    env: dict[str, DenseTensor] = {}
    for name, t in ir.tensors.items():
        if t.role != "input":
            continue
        given = inputs.get(name)
        if given is None:
            raise EvalError(f"missing input tensor '{name}'")
        if tuple(given.shape) != t.shape:
            raise EvalError(
                f"input '{name}' has shape {tuple(given.shape)}, expected "
                f"{t.shape}")
        if t.integer:
            for i, v in enumerate(given.data):
                if v != int(v):
                    raise EvalError(
                        f"integer input '{name}' holds non-integer {v} at "
                        f"flat position {i}")
        env[name] = given

    runner = _Runner(ir, env, counters)
    for st in ir.statements:
        runner.run_statement(st, mode)

    roles = ("output", "intermediate") if keep_intermediates else ("output",)
    return {n: env[n] for n, t in ir.tensors.items() if t.role in roles}
