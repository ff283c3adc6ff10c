"""Dataflow graph construction from a parsed coordination function.

One node per call.  ``clone(x)`` is wiring, not a node: it splits one
produced value into two names, so both copies trace back to the same
producer port and the port grows one outgoing edge per copy.  Inputs
appear as named source ports, the function result as an output port
binding.  Building verifies the move discipline: every name is
consumed exactly once by a later argument position or by the result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import BasecampError, Span
from .lang import Call, CoordFunction, KernelAttr, NameRef


class LinearityError(BasecampError):
    pass


class ValueConsumedTwice(LinearityError):
    def __init__(self, name: str, first: Span, second: Span):
        self.name = name
        self.first = first
        self.second = second
        super().__init__(
            f"value '{name}' consumed twice: first at {first}, again at "
            f"{second} (duplicate with clone({name}) instead)")


class ValueNeverConsumed(LinearityError):
    def __init__(self, name: str, span: Span):
        self.name = name
        self.span = span
        super().__init__(
            f"value '{name}' (defined at {span}) is never consumed")


class UnknownName(LinearityError):
    def __init__(self, name: str, span: Span):
        self.name = name
        self.span = span
        super().__init__(f"unknown name '{name}' at {span}")


# A producer is an input port ("input", param_name) or a node output
# (node_id, 0).  Every node produces exactly one value on port 0.
Producer = Union[tuple[str, str], tuple[int, int]]


@dataclass(frozen=True)
class DfgNode:
    id: int
    callee: str
    kind: str  # "software" | "offloaded-kernel"
    attr: Optional[KernelAttr] = None

    def to_json(self) -> dict:
        out: dict = {"id": self.id, "callee": self.callee, "kind": self.kind}
        if self.attr is not None:
            out["attr"] = self.attr.to_json()
        return out


@dataclass(frozen=True)
class DfgEdge:
    producer: Producer
    consumer: tuple[int, int]  # (node id, argument position)
    type_tag: str

    def to_json(self) -> dict:
        src: dict
        if self.producer[0] == "input":
            src = {"input": self.producer[1]}
        else:
            src = {"node": self.producer[0], "port": self.producer[1]}
        return {
            "from": src,
            "to": {"node": self.consumer[0], "port": self.consumer[1]},
            "type": self.type_tag,
        }


@dataclass(frozen=True)
class DataflowGraph:
    function_name: str
    inputs: tuple[tuple[str, str], ...]  # (name, type)
    nodes: tuple[DfgNode, ...]
    edges: tuple[DfgEdge, ...]
    output: Producer
    output_type: str

    def node(self, nid: int) -> DfgNode:
        return self.nodes[nid]

    def in_edges(self, nid: int) -> list[DfgEdge]:
        es = [e for e in self.edges if e.consumer[0] == nid]
        es.sort(key=lambda e: e.consumer[1])
        return es

    def topological_order(self) -> list[int]:
        """A canonical topological order; raises on a cycle."""
        deps: dict[int, set[int]] = {n.id: set() for n in self.nodes}
        for e in self.edges:
            if e.producer[0] != "input":
                deps[e.consumer[0]].add(e.producer[0])  # type: ignore[arg-type]
        order: list[int] = []
        ready = sorted(n for n, d in deps.items() if not d)
        while ready:
            n = ready.pop(0)
            order.append(n)
            for m, d in deps.items():
                if n in d:
                    d.discard(n)
                    if not d and m not in order and m not in ready:
                        ready.append(m)
            ready.sort()
        if len(order) != len(self.nodes):
            raise LinearityError("graph has a cycle")
        return order

    def to_json(self) -> dict:
        out_src: dict
        if self.output[0] == "input":
            out_src = {"input": self.output[1]}
        else:
            out_src = {"node": self.output[0], "port": self.output[1]}
        return {
            "function": self.function_name,
            "inputs": [{"name": n, "type": t} for n, t in self.inputs],
            "nodes": [n.to_json() for n in self.nodes],
            "edges": [e.to_json() for e in self.edges],
            "output": {"from": out_src, "type": self.output_type},
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def build_dfg(f: CoordFunction) -> DataflowGraph:
    # name -> (producer, type text, defining span)
    env: dict[str, tuple[Producer, str, Span]] = {}
    consumed: dict[str, Span] = {}
    for pname, ptype in f.params:
        if pname in env:
            raise LinearityError(f"duplicate parameter '{pname}'")
        env[pname] = (("input", pname), ptype, Span(0, 0))

    nodes: list[DfgNode] = []
    edges: list[DfgEdge] = []

    def consume(name: str, at: Span) -> tuple[Producer, str]:
        if name not in env:
            raise UnknownName(name, at)
        if name in consumed:
            raise ValueConsumedTwice(name, consumed[name], at)
        consumed[name] = at
        producer, ty, _ = env[name]
        return producer, ty

    def add_call(call: Call, attr: Optional[KernelAttr]) -> int:
        nid = len(nodes)
        offloaded = attr is not None and attr.offloaded
        if offloaded and not (attr and attr.path):
            raise LinearityError(
                f"offloaded call '{call.callee}' has no implementation path")
        nodes.append(DfgNode(nid, call.callee,
                             "offloaded-kernel" if offloaded else "software",
                             attr))
        for pos, arg in enumerate(call.args):
            producer, ty = consume(arg, call.span)
            edges.append(DfgEdge(producer, (nid, pos), ty))
        return nid

    for b in f.bindings:
        if b.call.callee == "clone":
            if b.attr is not None:
                raise LinearityError(
                    "clone is wiring, not a kernel; attribute not allowed")
            if len(b.call.args) != 1 or len(b.names) != 2:
                raise LinearityError(
                    "clone takes one argument and binds a pair: "
                    "let (a, b): (T, T) = clone(x);")
            producer, ty = consume(b.call.args[0], b.call.span)
            for nm in b.names:
                if nm in env:
                    raise LinearityError(f"rebinding of name '{nm}'")
                env[nm] = (producer, ty, b.span)
            continue
        if len(b.names) != 1:
            raise LinearityError(
                f"call to '{b.call.callee}' binds one name; pair "
                "destructuring is reserved for clone")
        nid = add_call(b.call, b.attr)
        nm = b.names[0]
        if nm in env:
            raise LinearityError(f"rebinding of name '{nm}'")
        env[nm] = ((nid, 0), b.type_text, b.span)

    if isinstance(f.result, NameRef):
        out_producer, out_type = consume(f.result.name, f.result.span)
    else:
        nid = add_call(f.result, None)
        out_producer, out_type = (nid, 0), f.result_type

    dangling = sorted(set(env) - set(consumed))
    if dangling:
        name = dangling[0]
        raise ValueNeverConsumed(name, env[name][2])

    g = DataflowGraph(f.name, tuple(f.params), tuple(nodes), tuple(edges),
                      out_producer, out_type)
    g.topological_order()  # structural sanity: a DAG by construction
    return g


def _producer_from_json(d: dict) -> Producer:
    if "input" in d:
        return ("input", d["input"])
    return (int(d["node"]), int(d.get("port", 0)))


def dfg_from_json(doc: dict) -> DataflowGraph:
    nodes = []
    for nd in doc["nodes"]:
        attr = None
        if "attr" in nd:
            a = dict(nd["attr"])
            attr = KernelAttr(
                offloaded=bool(a.get("offloaded", False)),
                multiplicity=tuple(a.get("multiplicity", ())),
                path=a.get("path", ""),
                macs=a.get("macs"),
                bytes_in=a.get("bytes_in"),
                bytes_out=a.get("bytes_out"),
            )
        nodes.append(DfgNode(int(nd["id"]), nd["callee"], nd["kind"], attr))
    edges = tuple(
        DfgEdge(_producer_from_json(ed["from"]),
                (int(ed["to"]["node"]), int(ed["to"]["port"])),
                ed["type"])
        for ed in doc["edges"])
    return DataflowGraph(
        doc["function"],
        tuple((i["name"], i["type"]) for i in doc["inputs"]),
        tuple(nodes),
        edges,
        _producer_from_json(doc["output"]["from"]),
        doc["output"]["type"],
    )
