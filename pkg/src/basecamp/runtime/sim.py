"""Deterministic event simulation of a scheduled task graph.

The failure-free path replays the schedule exactly, so the trace
makespan equals the scheduler's prediction to the last digit.  A
scripted node failure kills the tasks running or queued there, drops
every byte the node held, and cancels transfers touching it; whatever
is still needed is then placed again greedily on the survivors, with
completed outputs re-fetched from any live holder and recomputed from
lineage when no copy survives.

Event ordering at equal times is fixed (ends, then failure handling,
then starts), so a trace is a pure function of (graph, cluster,
schedule, seed) and can be compared byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from ..errors import BasecampError
from .cluster import ClusterSpec, TaskGraph
from .heft import (
    Schedule,
    ScheduleEntry,
    TransferEntry,
    _Timeline,
    _candidates,
    _pick_variant,
    transfer_time,
    upward_ranks,
)


class VFExhausted(BasecampError):
    pass


class NotAttached(BasecampError):
    pass


class VFRegistry:
    """Per-node virtual-function pools.

    A VF belongs to at most one VM at a time; one VM may hold many VFs
    on the same node.
    """

    def __init__(self, c: ClusterSpec):
        self._free = {n.id: n.vf_count for n in c.nodes}
        self._held: dict[tuple[str, str], int] = {}

    def free_count(self, node: str) -> int:
        return self._free[node]

    def held_by(self, node: str, vm: str) -> int:
        return self._held.get((node, vm), 0)

    def attach(self, node: str, vm: str) -> None:
        if self._free.get(node, 0) <= 0:
            raise VFExhausted(f"node '{node}' has no free VF for VM '{vm}'")
        self._free[node] -= 1
        self._held[(node, vm)] = self._held.get((node, vm), 0) + 1

    def detach(self, node: str, vm: str) -> None:
        if self._held.get((node, vm), 0) == 0:
            raise NotAttached(f"VM '{vm}' holds no VF on node '{node}'")
        self._held[(node, vm)] -= 1
        if self._held[(node, vm)] == 0:
            del self._held[(node, vm)]
        self._free[node] += 1

    def drop_node(self, node: str) -> None:
        self._free[node] = 0
        for key in [k for k in self._held if k[0] == node]:
            del self._held[key]


def vf_attach(reg: VFRegistry, node: str, vm: str) -> VFRegistry:
    reg.attach(node, vm)
    return reg


def vf_detach(reg: VFRegistry, node: str, vm: str) -> VFRegistry:
    reg.detach(node, vm)
    return reg


# fixed same-time ordering; lower runs first
_KIND_ORDER = {
    "transfer-end": 0,
    "task-end": 1,
    "vf-detach": 2,
    "node-fail": 3,
    "reschedule": 4,
    "vf-attach": 5,
    "task-start": 6,
    "transfer-start": 7,
}


@dataclass(frozen=True)
class SimEvent:
    time_us: float
    kind: str
    subject: tuple[tuple[str, object], ...]

    def to_json(self) -> dict:
        out = {"time": self.time_us, "kind": self.kind}
        out.update(dict(self.subject))
        return out


@dataclass(frozen=True)
class SimTrace:
    events: tuple[SimEvent, ...]
    makespan_us: float

    def to_jsonl(self) -> str:
        lines = [json.dumps(e.to_json(), sort_keys=True) for e in self.events]
        lines.append(json.dumps(
            {"kind": "makespan", "time": self.makespan_us}, sort_keys=True))
        return "\n".join(lines) + "\n"

    def of_kind(self, kind: str) -> list[SimEvent]:
        return [e for e in self.events if e.kind == kind]


def _ev(time: float, kind: str, **subject) -> SimEvent:
    return SimEvent(time, kind, tuple(sorted(subject.items())))


@dataclass
class _PlanState:
    entries: dict[str, ScheduleEntry]
    transfers: list[TransferEntry]


def simulate(g: TaskGraph, c: ClusterSpec, sched: Schedule,
             seed: int = 0) -> SimTrace:
    if not g.tasks:
        return SimTrace((), 0.0)

    alive = {n.id for n in c.nodes}
    avail: dict[str, set[str]] = {t.id: set() for t in g.tasks}
    completed: set[str] = set()
    events: list[SimEvent] = []
    plan = _PlanState({e.task: e for e in sched.entries},
                      list(sched.transfers))
    failures = sorted(c.failures)

    now = 0.0
    fi = 0
    while True:
        horizon = failures[fi][0] if fi < len(failures) else float("inf")
        # emit plan events up to and including the horizon; starts at
        # the horizon belong to the post-failure world and wait
        for e in sorted(plan.entries.values(),
                        key=lambda e: (e.start_us, e.task)):
            if now <= e.start_us < horizon and e.task not in completed:
                if e.variant == "fpga":
                    events.append(_ev(e.start_us, "vf-attach",
                                      node=e.node, vm=e.task))
                events.append(_ev(e.start_us, "task-start",
                                  task=e.task, node=e.node,
                                  variant=e.variant))
        for e in sorted(plan.entries.values(),
                        key=lambda e: (e.finish_us, e.task)):
            started = now <= e.start_us < horizon or e.start_us < now
            if started and now <= e.finish_us <= horizon \
                    and e.task not in completed:
                events.append(_ev(e.finish_us, "task-end",
                                  task=e.task, node=e.node))
                if e.variant == "fpga":
                    events.append(_ev(e.finish_us, "vf-detach",
                                      node=e.node, vm=e.task))
                completed.add(e.task)
                avail[e.task].add(e.node)
        for t in sorted(plan.transfers,
                        key=lambda t: (t.start_us, t.producer, t.consumer)):
            if now <= t.start_us < horizon:
                events.append(_ev(t.start_us, "transfer-start",
                                  producer=t.producer, consumer=t.consumer,
                                  src=t.src, dst=t.dst, bytes=t.bytes))
            if now <= t.end_us <= horizon and t.start_us < horizon:
                events.append(_ev(t.end_us, "transfer-end",
                                  producer=t.producer, consumer=t.consumer,
                                  src=t.src, dst=t.dst, bytes=t.bytes))
                avail[t.producer].add(t.dst)

        if fi >= len(failures):
            break
        tf, failed_node = failures[fi]
        fi += 1
        if failed_node not in alive:
            continue
        alive.discard(failed_node)
        events.append(_ev(tf, "node-fail", node=failed_node))

        # forget everything the node held or was doing
        for holders in avail.values():
            holders.discard(failed_node)
        # work already underway on surviving nodes keeps going
        in_flight = {
            tid: e for tid, e in plan.entries.items()
            if e.node in alive and tid not in completed
            and e.start_us < tf}
        carried = [
            t for t in plan.transfers
            if failed_node not in (t.src, t.dst)
            and t.start_us < tf and t.end_us > tf]

        # lineage: a finished task must rerun if no live node holds its
        # output and some unfinished consumer still wants it
        rerun = {t.id for t in g.tasks
                 if t.id not in completed and t.id not in in_flight}
        changed = True
        while changed:
            changed = False
            for t in g.tasks:
                if t.id in rerun or t.id not in completed:
                    continue
                still_coming = any(tr.producer == t.id for tr in carried)
                wanted = any(cons.id in rerun for cons in g.consumers(t.id))
                if not avail[t.id] and not still_coming and wanted:
                    completed.discard(t.id)
                    rerun.add(t.id)
                    changed = True

        now = tf
        plan = _reschedule(g, c, alive, avail, rerun, in_flight,
                           carried, tf)
        for tid in sorted(rerun):
            e = plan.entries[tid]
            events.append(_ev(tf, "reschedule", task=tid, node=e.node))

    events.sort(key=lambda e: (e.time_us, _KIND_ORDER[e.kind], e.subject))
    makespan = max((e.time_us for e in events), default=0.0)
    return SimTrace(tuple(events), makespan)


def _reschedule(g: TaskGraph, c: ClusterSpec, alive: set[str],
                avail: dict[str, set[str]], rerun: set[str],
                in_flight: dict[str, ScheduleEntry],
                carried: list[TransferEntry], t0: float) -> _PlanState:
    """Greedy placement of the remaining work from time t0."""
    from .cluster import ClusterError

    sub = ClusterSpec(tuple(n for n in c.nodes if n.id in alive))
    ranks = upward_ranks(g, sub)
    placed: dict[str, ScheduleEntry] = dict(in_flight)
    transfers: list[TransferEntry] = list(carried)
    cores = {n.id: _Timeline(n.cores) for n in sub.nodes}
    vfs = {n.id: _Timeline(n.vf_count) for n in sub.nodes}
    for e in in_flight.values():
        t = g.task(e.task)
        dur = e.finish_us - e.start_us
        if e.variant == "fpga":
            vfs[e.node].book(e.start_us, dur, 1)
            cores[e.node].book(e.start_us, dur, 1)
        else:
            cores[e.node].book(e.start_us, dur, t.cores_needed)
    incoming: dict[tuple[str, str], float] = {}
    for tr in carried:
        key = (tr.producer, tr.dst)
        if key not in incoming or tr.end_us < incoming[key]:
            incoming[key] = tr.end_us

    remaining = sorted(rerun, key=lambda t: (-ranks[t], t))
    while remaining:
        progress = False
        for i, tid in enumerate(remaining):
            t = g.task(tid)
            if any(p in rerun and p not in placed for p, _ in t.inputs):
                continue
            variant = _pick_variant(t, sub)
            dur = t.durations[variant]
            best = None
            for node in sorted(_candidates(t, sub, variant),
                               key=lambda n: n.id):
                ready = t0
                fetches = []
                ok = True
                for producer, nbytes in t.inputs:
                    if producer in placed:
                        pe = placed[producer]
                        arr = pe.finish_us + transfer_time(
                            nbytes, sub.node(pe.node), node)
                        if pe.node != node.id and nbytes > 0:
                            fetches.append((producer, pe.node, pe.finish_us,
                                            nbytes))
                        ready = max(ready, arr)
                        continue
                    holders = sorted(avail[producer] & alive)
                    if node.id in holders or nbytes == 0:
                        continue
                    options = []
                    arr_inc = incoming.get((producer, node.id))
                    if arr_inc is not None:
                        options.append((arr_inc, ""))
                    for h in holders:
                        tt = transfer_time(nbytes, sub.node(h), node)
                        options.append((t0 + tt, h))
                    if not options:
                        ok = False
                        break
                    arr, src = min(options)
                    if src:
                        fetches.append((producer, src, t0, nbytes))
                    ready = max(ready, arr)
                if not ok:
                    continue
                if variant == "fpga":
                    start = ready
                    while True:
                        s1 = vfs[node.id].earliest(start, dur, 1)
                        s2 = cores[node.id].earliest(s1, dur, 1)
                        if s2 == s1:
                            start = s1
                            break
                        start = s2
                else:
                    start = cores[node.id].earliest(ready, dur,
                                                    t.cores_needed)
                eft = start + dur
                if best is None or (eft, node.id) < (best[0], best[1].id):
                    best = (eft, node, start, fetches)
            if best is None:
                raise ClusterError(
                    f"task '{tid}': inputs unrecoverable after failure")
            eft, node, start, fetches = best
            if variant == "fpga":
                vfs[node.id].book(start, dur, 1)
                cores[node.id].book(start, dur, 1)
            else:
                cores[node.id].book(start, dur, t.cores_needed)
            placed[tid] = ScheduleEntry(tid, node.id, variant, start, eft)
            for producer, src, t_ready, nbytes in fetches:
                tt = transfer_time(nbytes, sub.node(src), node)
                transfers.append(TransferEntry(
                    producer, tid, src, node.id, t_ready, t_ready + tt,
                    nbytes))
            remaining.pop(i)
            progress = True
            break
        if not progress:
            raise ClusterError("rescheduling stalled on a dependency cycle")
    return _PlanState(placed, transfers)


@dataclass(frozen=True)
class NodeAvail:
    kind: str
    cores_free: int
    vfs_free: int
    running: tuple[str, ...]


@dataclass(frozen=True)
class AvailabilityReport:
    at_time: float
    nodes: dict[str, NodeAvail] = field(default_factory=dict)

    def free_vfs(self) -> int:
        return sum(n.vfs_free for n in self.nodes.values())

    def free_cores(self) -> int:
        return sum(n.cores_free for n in self.nodes.values())

    def has_kind(self, kind: str) -> bool:
        return any(n.kind == kind for n in self.nodes.values())

    def to_json(self) -> dict:
        return {
            "time": self.at_time,
            "nodes": {
                nid: {
                    "kind": n.kind,
                    "cores_free": n.cores_free,
                    "vfs_free": n.vfs_free,
                    "running": list(n.running),
                }
                for nid, n in sorted(self.nodes.items())
            },
        }


def query_resources(c: ClusterSpec, time_us: float = 0.0
                    ) -> AvailabilityReport:
    """Idle-cluster view: full capacity minus scripted failures."""
    nodes = {}
    failed = {nid for t, nid in c.failures if t <= time_us}
    for n in c.nodes:
        if n.id in failed:
            continue
        nodes[n.id] = NodeAvail(n.kind, n.cores, n.vf_count, ())
    return AvailabilityReport(time_us, nodes)


def availability(c: ClusterSpec, trace: SimTrace, time_us: float,
                 g: Optional[TaskGraph] = None) -> AvailabilityReport:
    """Replay the trace to the given instant and report free capacity."""
    failed: set[str] = set()
    running: dict[str, set[str]] = {n.id: set() for n in c.nodes}
    vfs_used: dict[str, int] = {n.id: 0 for n in c.nodes}
    for e in trace.events:
        if e.time_us > time_us:
            break
        s = dict(e.subject)
        if e.kind == "node-fail":
            failed.add(s["node"])
        elif e.kind == "task-start":
            running[s["node"]].add(s["task"])
        elif e.kind == "task-end":
            running[s["node"]].discard(s["task"])
        elif e.kind == "vf-attach":
            vfs_used[s["node"]] += 1
        elif e.kind == "vf-detach":
            vfs_used[s["node"]] -= 1
    nodes = {}
    for n in c.nodes:
        if n.id in failed:
            continue
        used_cores = 0
        for tid in running[n.id]:
            if g is not None:
                t = g.task(tid)
                used_cores += t.cores_needed if t.variant == "cpu" else 1
            else:
                used_cores += 1
        nodes[n.id] = NodeAvail(
            n.kind,
            max(0, n.cores - used_cores),
            max(0, n.vf_count - vfs_used[n.id]),
            tuple(sorted(running[n.id])))
    return AvailabilityReport(time_us, nodes)
