"""Graph execution under randomized topological orders."""

from __future__ import annotations

import copy
import random
from typing import Callable, Mapping, Optional

from ..errors import BasecampError
from .dfg import DataflowGraph, DfgNode


class ExecutionError(BasecampError):
    pass


def kernel_node(source: str, name: str = "kernel") -> Callable:
    """Wrap an EKL kernel as a node implementation.

    Positional payloads map onto the kernel's input tensors in
    declaration order; a single dict payload is taken as a name to
    tensor mapping.  A single-output kernel returns the bare tensor,
    otherwise a dict.
    """
    from ..ekl import analyze, parse_kernel
    from ..tensorir import DenseTensor, evaluate, lower

    tp = analyze(parse_kernel(source))
    ir = lower(tp, name=name)
    in_names = [t.name for t in ir.tensors.values() if t.role == "input"]

    def run(*args):
        if len(args) == 1 and isinstance(args[0], Mapping):
            inputs = dict(args[0])
        else:
            if len(args) != len(in_names):
                raise ExecutionError(
                    f"kernel '{name}' takes {len(in_names)} tensors "
                    f"({', '.join(in_names)}); got {len(args)}")
            inputs = {}
            for nm, a in zip(in_names, args):
                if not isinstance(a, DenseTensor):
                    raise ExecutionError(
                        f"payload type mismatch at kernel '{name}' input "
                        f"'{nm}': expected a tensor, got "
                        f"{type(a).__name__}")
                inputs[nm] = a
        outs = evaluate(ir, inputs, mode="quantize-on-store")
        if len(outs) == 1:
            return next(iter(outs.values()))
        return outs

    return run


def _identity(*args):
    return args[0] if len(args) == 1 else tuple(args)


def _resolve_impl(node: DfgNode, impls: Mapping[str, Callable],
                  kernel_sources: Optional[Mapping[str, str]]) -> Callable:
    if node.callee in impls:
        return impls[node.callee]
    if node.kind == "offloaded-kernel" and node.attr is not None:
        path = node.attr.path
        if path.endswith(".ekl"):
            if kernel_sources is None or path not in kernel_sources:
                raise ExecutionError(
                    f"no source provided for kernel path '{path}' "
                    f"(node '{node.callee}')")
            return kernel_node(kernel_sources[path], name=node.callee)
        # opaque external kernel: identity stand-in
        return _identity
    raise ExecutionError(f"missing implementation for '{node.callee}'")


def execute_dfg(g: DataflowGraph, impls: Mapping[str, Callable],
                inputs: Mapping[str, object], schedule_seed: int = 0,
                kernel_sources: Optional[Mapping[str, str]] = None):
    """Run the graph; the result is independent of ``schedule_seed``.

    The seed only picks which ready node fires next.  Every edge hands
    its consumer a private deep copy, so no execution order can observe
    another node's mutations.
    """
    for pname, _ in g.inputs:
        if pname not in inputs:
            raise ExecutionError(f"missing graph input '{pname}'")

    rng = random.Random(schedule_seed)
    funcs = {n.id: _resolve_impl(n, impls, kernel_sources) for n in g.nodes}

    # edge index -> value; node fires when all its argument slots hold one
    in_edges = {n.id: g.in_edges(n.id) for n in g.nodes}
    produced: dict[int, object] = {}
    slot_values: dict[int, dict[int, object]] = {n.id: {} for n in g.nodes}

    def feed(eidx: int, value) -> None:
        e = g.edges[eidx]
        nid, port = e.consumer
        slot_values[nid][port] = copy.deepcopy(value)

    for eidx, e in enumerate(g.edges):
        if e.producer[0] == "input":
            feed(eidx, inputs[e.producer[1]])

    done: set[int] = set()
    while len(done) < len(g.nodes):
        ready = sorted(
            n.id for n in g.nodes
            if n.id not in done
            and len(slot_values[n.id]) == len(in_edges[n.id]))
        if not ready:
            raise ExecutionError("deadlock: no node is ready (cycle?)")
        nid = ready[rng.randrange(len(ready))]
        args = [slot_values[nid][p] for p in sorted(slot_values[nid])]
        produced[nid] = funcs[nid](*args)
        done.add(nid)
        for eidx, e in enumerate(g.edges):
            if e.producer == (nid, 0):
                feed(eidx, produced[nid])

    if g.output[0] == "input":
        return copy.deepcopy(inputs[g.output[1]])
    return produced[g.output[0]]
