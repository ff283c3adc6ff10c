"""Straight-line coordination language and its dataflow graph.

Programs are small Rust-flavoured functions: typed parameters, a block
of `let` bindings where every right-hand side is a single call, and a
result expression.  Values obey a move discipline: each name is
consumed exactly once, and duplication requires an explicit
`clone(x)` pair binding.  From an accepted function we build a
deterministic dataflow graph whose nodes are the calls and whose edges
follow name consumption, then execute it under any topological order
with identical results.
"""

from .lang import (
    Call,
    CoordFunction,
    CoordSyntaxError,
    KernelAttr,
    LetBinding,
    NameRef,
    parse_coord,
)
from .dfg import (
    DataflowGraph,
    DfgEdge,
    DfgNode,
    LinearityError,
    UnknownName,
    ValueConsumedTwice,
    ValueNeverConsumed,
    build_dfg,
    dfg_from_json,
)
from .executor import ExecutionError, execute_dfg, kernel_node
from . import demo

__all__ = [
    "Call",
    "CoordFunction",
    "CoordSyntaxError",
    "KernelAttr",
    "LetBinding",
    "NameRef",
    "parse_coord",
    "DataflowGraph",
    "DfgEdge",
    "DfgNode",
    "LinearityError",
    "UnknownName",
    "ValueConsumedTwice",
    "ValueNeverConsumed",
    "build_dfg",
    "dfg_from_json",
    "ExecutionError",
    "execute_dfg",
    "kernel_node",
    "demo",
]
