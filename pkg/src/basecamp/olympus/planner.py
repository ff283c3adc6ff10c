"""Exhaustive architecture search under resource budgets.

Every offloaded kernel gets a (replication, packing, buffering, tile)
tuple drawn from finite ranges; the joint assignment space is searched
outright.  Kernels are laid on a timeline as early as dependencies
allow, buffer lifetimes come from that timeline, and disjoint
lifetimes share storage.  The best plan minimizes the objective, and
exact ties fall through a fixed preference order: less memory after
sharing, then fewer replicas, then narrower packing, then smaller
tiles, then fewer double buffers.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional

from ..coord.dfg import DataflowGraph
from ..numerics import F64, NumericFormat, packed_lane_count
from .pipeline import StageTimes, pipeline_makespan, stage_times, tiles_for
from .planner_types import KernelConfig, NodeCost, PlanError
from .platform import PlatformSpec
from .sharing import BufferInterval, share_buffers

# fixed tile ladder: powers of two from 1Ki to 1Mi elements
TILE_LADDER = tuple(1024 << k for k in range(11))


@dataclass(frozen=True)
class ArchitecturePlan:
    platform: str
    objective: str
    configs: tuple[KernelConfig, ...]
    stage_times: Mapping[int, StageTimes]
    kernel_makespans: Mapping[int, float]
    onchip_bytes: int
    slots_used: int
    makespan_us: float

    def config_for(self, node_id: int) -> KernelConfig:
        for c in self.configs:
            if c.node_id == node_id:
                return c
        raise KeyError(node_id)

    def to_json(self) -> dict:
        return {
            "platform": self.platform,
            "objective": self.objective,
            "kernels": [
                {
                    "node": c.node_id,
                    "replication": c.replication,
                    "packing": c.packing,
                    "double_buffered": c.double_buffered,
                    "tile_elements": c.tile_elements,
                    "buffer_bytes": c.buffer_bytes,
                    "shared_with": c.shared_with,
                    "stages": {
                        "read": self.stage_times[c.node_id].read_us,
                        "execute": self.stage_times[c.node_id].execute_us,
                        "write": self.stage_times[c.node_id].write_us,
                        "n_tiles": self.stage_times[c.node_id].n_tiles,
                    },
                    "makespan": self.kernel_makespans[c.node_id],
                }
                for c in self.configs
            ],
            "onchip_bytes": self.onchip_bytes,
            "slots_used": self.slots_used,
            "makespan_us": self.makespan_us,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def kernel_node_cost(ir, fmt: NumericFormat = F64) -> NodeCost:
    """Totals for an EKL kernel: every input read once, outputs written."""
    from ..tensorir.cost import cost as ir_cost

    rep = ir_cost(ir, fmt)
    def width(td):
        return (td.fmt or fmt).bit_width
    bytes_in = sum(
        -(-td.size * width(td) // 8)
        for td in ir.tensors.values() if td.role == "input")
    bytes_out = sum(
        -(-td.size * width(td) // 8)
        for td in ir.tensors.values() if td.role == "output")
    return NodeCost(rep.total_macs, bytes_in, bytes_out)


def node_costs(g: DataflowGraph,
               kernel_sources: Optional[Mapping[str, str]] = None,
               fmt: NumericFormat = F64) -> dict[int, NodeCost]:
    """Cost table for every offloaded node of the graph.

    EKL-backed nodes are costed from their compiled form; opaque nodes
    must carry macs/bytes_in/bytes_out metadata on their attribute.
    """
    from ..ekl import analyze, parse_kernel
    from ..tensorir import lower

    out: dict[int, NodeCost] = {}
    for n in g.nodes:
        if n.kind != "offloaded-kernel":
            continue
        attr = n.attr
        assert attr is not None
        if attr.path.endswith(".ekl"):
            if kernel_sources is None or attr.path not in kernel_sources:
                raise PlanError(
                    f"no source for kernel path '{attr.path}' "
                    f"(node '{n.callee}')")
            ir = lower(analyze(parse_kernel(kernel_sources[attr.path])),
                       name=n.callee)
            out[n.id] = kernel_node_cost(ir, fmt)
        else:
            if attr.macs is None or attr.bytes_in is None or attr.bytes_out is None:
                raise PlanError(
                    f"opaque kernel '{n.callee}' ({attr.path}) ships no "
                    "macs/bytes_in/bytes_out metadata; the planner refuses "
                    "to guess")
            out[n.id] = NodeCost(attr.macs, attr.bytes_in, attr.bytes_out)
    return out


def _buffer_bytes(tile_elements: int, fmt: NumericFormat,
                  double_buffered: bool) -> int:
    per = -(-tile_elements * fmt.bit_width // 8)
    return per * (2 if double_buffered else 1)


def _candidates(node_id: int, cost: NodeCost, p: PlatformSpec,
                fmt: NumericFormat, r_floor: int):
    ch = p.channels[0]
    if fmt.bit_width > ch.width_bits:
        raise PlanError(
            f"element of {fmt.bit_width} bits is wider than the "
            f"{ch.width_bits}-bit memory channel")
    lanes = packed_lane_count(ch.width_bits, fmt)
    out = []
    for r in range(max(1, r_floor), p.compute_slots + 1):
        for pk in range(1, lanes + 1):
            for db in (True, False):
                for tile in TILE_LADDER:
                    cfg = KernelConfig(
                        node_id, r, pk, db, tile,
                        _buffer_bytes(tile, fmt, db))
                    st = stage_times(cost, cfg, p, fmt)
                    mk = pipeline_makespan(st, double_buffered=db)
                    out.append((cfg, st, mk))
    return out


def _offloaded_schedule(g: DataflowGraph, makespans: dict[int, float]
                        ) -> dict[int, tuple[float, float]]:
    """ASAP start/finish for offloaded nodes; software nodes take no time."""
    finish: dict[int, float] = {}
    window: dict[int, tuple[float, float]] = {}
    for nid in g.topological_order():
        start = 0.0
        for e in g.in_edges(nid):
            if e.producer[0] != "input":
                start = max(start, finish[e.producer[0]])
        dur = makespans.get(nid, 0.0)
        finish[nid] = start + dur
        if nid in makespans:
            window[nid] = (start, finish[nid])
    return window


def plan(g: DataflowGraph, costs: Mapping[int, NodeCost], p: PlatformSpec,
         objective: str = "latency",
         formats: Optional[Mapping[int, NumericFormat]] = None
         ) -> ArchitecturePlan:
    if objective not in ("latency", "throughput"):
        raise PlanError(f"unknown objective '{objective}'")
    offloaded = [n for n in g.nodes if n.kind == "offloaded-kernel"]
    if not offloaded:
        raise PlanError("graph has no offloaded kernels to plan")
    for n in offloaded:
        if n.id not in costs:
            raise PlanError(f"offloaded node '{n.callee}' has no cost report")
    fmts = {n.id: (formats or {}).get(n.id, F64) for n in offloaded}

    per_kernel = []
    for n in offloaded:
        r_floor = 1
        if n.attr is not None and n.attr.multiplicity:
            r_floor = max(n.attr.multiplicity)
        cands = _candidates(n.id, costs[n.id], p, fmts[n.id], r_floor)
        if not cands:
            raise PlanError(
                f"no feasible plan; binding constraint(s): compute_slots: "
                f"kernel '{n.callee}' asks for replication >= {r_floor}, "
                f"platform has {p.compute_slots} slots")
        per_kernel.append(cands)

    best = None
    best_key = None
    slot_floor = min(
        (min(c.replication for c, _, _ in cands) for cands in per_kernel),
        default=1)
    mem_floor = None
    for combo in itertools.product(*per_kernel):
        slots = sum(c.replication for c, _, _ in combo)
        if slots > p.compute_slots:
            continue
        makespans = {c.node_id: mk for c, _, mk in combo}
        window = _offloaded_schedule(g, makespans)
        entries = [
            BufferInterval(c.node_id, c.buffer_bytes, *window[c.node_id])
            for c, _, _ in combo
        ]
        assignment, onchip = share_buffers(entries)
        if mem_floor is None or onchip < mem_floor:
            mem_floor = onchip
        if onchip > p.onchip_memory:
            continue
        if objective == "latency":
            value = max(e for _, e in window.values())
        else:
            # steady-state pace: the slowest kernel bounds throughput
            value = max(makespans.values())
        key = (
            value,
            onchip,
            sum(c.replication for c, _, _ in combo),
            sum(c.packing for c, _, _ in combo),
            sum(c.tile_elements for c, _, _ in combo),
            sum(1 for c, _, _ in combo if c.double_buffered),
        )
        if best_key is None or key < best_key:
            best_key = key
            shared = tuple(
                KernelConfig(c.node_id, c.replication, c.packing,
                             c.double_buffered, c.tile_elements,
                             c.buffer_bytes, assignment[c.node_id])
                for c, _, _ in combo)
            best = ArchitecturePlan(
                platform=p.name,
                objective=objective,
                configs=shared,
                stage_times={c.node_id: st for c, st, _ in combo},
                kernel_makespans=makespans,
                onchip_bytes=onchip,
                slots_used=slots,
                makespan_us=max(e for _, e in window.values()),
            )
    if best is None:
        binding = []
        if len(offloaded) * slot_floor > p.compute_slots:
            binding.append(
                f"compute_slots: {len(offloaded)} kernels need at least "
                f"{len(offloaded) * slot_floor} slots, platform has "
                f"{p.compute_slots}")
        if mem_floor is not None and mem_floor > p.onchip_memory:
            binding.append(
                f"onchip_memory: smallest feasible buffering needs "
                f"{mem_floor} bytes, platform has {p.onchip_memory}")
        if not binding:
            binding.append("no candidate satisfied the budgets")
        raise PlanError("no feasible plan; binding constraint(s): "
                        + "; ".join(binding))
    return best
