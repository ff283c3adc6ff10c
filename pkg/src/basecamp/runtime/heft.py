"""List scheduling by upward rank with earliest-finish placement.

Tasks are ranked by mean execution time plus the mean cost of shipping
their outputs downstream, then placed one by one on the node that
finishes them soonest, honoring per-node core and VF capacity at every
instant.  Transfers are charged only when producer and consumer sit on
different nodes: bytes over the slower of the two interconnects plus
both latencies.

A task whose preferred resource kind has no candidate node falls back
to its other variant when it ships a duration for it; otherwise the
request is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cluster import ClusterError, ClusterSpec, NodeSpec, TaskGraph, TaskSpec


@dataclass(frozen=True)
class ScheduleEntry:
    task: str
    node: str
    variant: str  # "cpu" | "fpga"
    start_us: float
    finish_us: float


@dataclass(frozen=True)
class TransferEntry:
    producer: str
    consumer: str
    src: str
    dst: str
    start_us: float
    end_us: float
    bytes: int


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...]
    transfers: tuple[TransferEntry, ...]
    makespan_us: float

    def entry(self, tid: str) -> ScheduleEntry:
        for e in self.entries:
            if e.task == tid:
                return e
        raise KeyError(tid)


def transfer_time(nbytes: int, src: NodeSpec, dst: NodeSpec) -> float:
    if src.id == dst.id or nbytes == 0:
        return 0.0
    bw = min(src.bandwidth_mbps, dst.bandwidth_mbps)
    return nbytes / bw + src.latency_us + dst.latency_us


def _mean_transfer(nbytes: int, nodes: tuple[NodeSpec, ...]) -> float:
    if nbytes == 0 or len(nodes) < 2:
        return 0.0
    pairs = [(a, b) for a in nodes for b in nodes if a.id != b.id]
    return sum(transfer_time(nbytes, a, b) for a, b in pairs) / len(pairs)


def _candidates(t: TaskSpec, c: ClusterSpec, variant: str) -> list[NodeSpec]:
    if variant == "fpga":
        return [n for n in c.nodes if n.kind == "fpga"]
    return [n for n in c.nodes if n.cores >= t.cores_needed]


def _pick_variant(t: TaskSpec, c: ClusterSpec) -> str:
    preferred = t.variant
    if _candidates(t, c, preferred):
        return preferred
    other = "cpu" if preferred == "fpga" else "fpga"
    if other in t.durations and _candidates(t, c, other):
        return other
    raise ClusterError(
        f"task '{t.id}': no node can satisfy its {t.request!r} request")


def _mean_duration(t: TaskSpec, c: ClusterSpec) -> float:
    usable = [d for v, d in t.durations.items() if _candidates(t, c, v)]
    if not usable:
        usable = list(t.durations.values())
    return sum(usable) / len(usable)


def upward_ranks(g: TaskGraph, c: ClusterSpec) -> dict[str, float]:
    rank: dict[str, float] = {}
    for tid in reversed(g.topological_order()):
        t = g.task(tid)
        down = 0.0
        for consumer in g.consumers(tid):
            nbytes = sum(b for p, b in consumer.inputs if p == tid)
            down = max(down,
                       _mean_transfer(nbytes, c.nodes) + rank[consumer.id])
        rank[tid] = _mean_duration(t, c) + down
    return rank


class _Timeline:
    """Capacity bookings for one node resource pool."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.bookings: list[tuple[float, float, int]] = []

    def _fits(self, start: float, dur: float, amount: int) -> bool:
        end = start + dur
        points = {start}
        for s, e, _ in self.bookings:
            if s < end and start < e:
                points.add(max(s, start))
        for p in sorted(points):
            used = sum(a for s, e, a in self.bookings if s <= p < e)
            if used + amount > self.capacity:
                return False
        return True

    def earliest(self, ready: float, dur: float, amount: int) -> float:
        if amount > self.capacity:
            return float("inf")
        starts = [ready] + sorted(
            e for _, e, _ in self.bookings if e > ready)
        for s in starts:
            if self._fits(s, dur, amount):
                return s
        return float("inf")  # unreachable: after the last booking all is free

    def book(self, start: float, dur: float, amount: int) -> None:
        self.bookings.append((start, start + dur, amount))


def schedule(g: TaskGraph, c: ClusterSpec) -> Schedule:
    ranks = upward_ranks(g, c)
    order = sorted(g.topological_order(),
                   key=lambda tid: (-ranks[tid], tid))
    # rank order may place a consumer before its producer when ranks
    # tie oddly; enforce dependency order with a stable second pass
    placed: set[str] = set()
    final_order: list[str] = []
    pending = list(order)
    while pending:
        for i, tid in enumerate(pending):
            if all(p in placed for p, _ in g.task(tid).inputs):
                final_order.append(tid)
                placed.add(tid)
                pending.pop(i)
                break
        else:
            raise ClusterError("task graph has a cycle")

    cores = {n.id: _Timeline(n.cores) for n in c.nodes}
    vfs = {n.id: _Timeline(max(0, n.vf_count)) for n in c.nodes}
    where: dict[str, ScheduleEntry] = {}
    transfers: list[TransferEntry] = []

    for tid in final_order:
        t = g.task(tid)
        variant = _pick_variant(t, c)
        dur = t.durations[variant]
        best = None
        for node in sorted(_candidates(t, c, variant), key=lambda n: n.id):
            ready = 0.0
            for producer, nbytes in t.inputs:
                pe = where[producer]
                arr = pe.finish_us + transfer_time(
                    nbytes, c.node(pe.node), node)
                ready = max(ready, arr)
            if variant == "fpga":
                # needs a VF and one host core over the same window
                start = ready
                while True:
                    s1 = vfs[node.id].earliest(start, dur, 1)
                    s2 = cores[node.id].earliest(s1, dur, 1)
                    if s2 == s1:
                        start = s1
                        break
                    start = s2
            else:
                start = cores[node.id].earliest(ready, dur, t.cores_needed)
            eft = start + dur
            if best is None or (eft, node.id) < (best[0], best[1].id):
                best = (eft, node, start)
        assert best is not None
        eft, node, start = best
        if variant == "fpga":
            vfs[node.id].book(start, dur, 1)
            cores[node.id].book(start, dur, 1)
        else:
            cores[node.id].book(start, dur, t.cores_needed)
        where[tid] = ScheduleEntry(tid, node.id, variant, start, eft)
        for producer, nbytes in t.inputs:
            pe = where[producer]
            tt = transfer_time(nbytes, c.node(pe.node), node)
            if tt > 0:
                transfers.append(TransferEntry(
                    producer, tid, pe.node, node.id,
                    pe.finish_us, pe.finish_us + tt, nbytes))

    entries = tuple(sorted(where.values(),
                           key=lambda e: (e.start_us, e.task)))
    makespan = max((e.finish_us for e in entries), default=0.0)
    return Schedule(entries, tuple(transfers), makespan)
