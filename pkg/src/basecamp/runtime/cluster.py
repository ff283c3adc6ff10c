"""Cluster and task-graph descriptions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..errors import BasecampError


class ClusterError(BasecampError):
    pass


@dataclass(frozen=True)
class NodeSpec:
    id: str
    kind: str  # "cpu" | "fpga"
    cores: int
    vf_count: int
    bandwidth_mbps: float
    latency_us: float

    def __post_init__(self):
        if self.kind not in ("cpu", "fpga"):
            raise ClusterError(f"node '{self.id}': unknown kind '{self.kind}'")
        if self.cores < 1:
            raise ClusterError(f"node '{self.id}': cores must be >= 1")
        if self.kind == "cpu" and self.vf_count != 0:
            raise ClusterError(
                f"node '{self.id}': only fpga nodes expose virtual functions")
        if self.kind == "fpga" and self.vf_count < 1:
            raise ClusterError(
                f"node '{self.id}': fpga node needs at least one VF")
        if self.bandwidth_mbps <= 0:
            raise ClusterError(f"node '{self.id}': bandwidth must be > 0")
        if self.latency_us < 0:
            raise ClusterError(f"node '{self.id}': negative latency")


@dataclass(frozen=True)
class ClusterSpec:
    nodes: tuple[NodeSpec, ...]
    failures: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ClusterError("duplicate node ids")
        for t, nid in self.failures:
            if t < 0:
                raise ClusterError("failure time must be >= 0")
            if nid not in ids:
                raise ClusterError(f"failure script names unknown node '{nid}'")

    def node(self, nid: str) -> NodeSpec:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise ClusterError(f"unknown node '{nid}'")

    def to_json(self) -> dict:
        return {
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind,
                    "cores": n.cores,
                    "vf_count": n.vf_count,
                    "bandwidth": n.bandwidth_mbps,
                    "latency": n.latency_us,
                }
                for n in self.nodes
            ],
            "failures": [[t, nid] for t, nid in self.failures],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ClusterSpec":
        try:
            nodes = tuple(
                NodeSpec(d["id"], d["kind"], int(d["cores"]),
                         int(d.get("vf_count", 0)), float(d["bandwidth"]),
                         float(d["latency"]))
                for d in doc["nodes"])
        except KeyError as e:
            raise ClusterError(f"cluster description missing field {e}")
        failures = tuple(
            (float(t), nid) for t, nid in doc.get("failures", ()))
        return cls(nodes, failures)

    @classmethod
    def load(cls, path: str) -> "ClusterSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class TaskSpec:
    id: str
    request: tuple  # ("cpu-cores", n) | ("fpga-vf",)
    durations: Mapping[str, float]  # variant -> µs; keys from {"cpu","fpga"}
    inputs: tuple[tuple[str, int], ...] = ()  # (producer id, bytes)
    knobs: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.request[0] not in ("cpu-cores", "fpga-vf"):
            raise ClusterError(
                f"task '{self.id}': unknown request {self.request!r}")
        if self.request[0] == "cpu-cores":
            if len(self.request) != 2 or int(self.request[1]) < 1:
                raise ClusterError(
                    f"task '{self.id}': cpu-cores request needs a count >= 1")
            if "cpu" not in self.durations:
                raise ClusterError(
                    f"task '{self.id}': cpu request without cpu duration")
        else:
            if "fpga" not in self.durations:
                raise ClusterError(
                    f"task '{self.id}': fpga request without fpga duration")
        for v, d in self.durations.items():
            if v not in ("cpu", "fpga"):
                raise ClusterError(
                    f"task '{self.id}': unknown variant '{v}'")
            if d <= 0:
                raise ClusterError(
                    f"task '{self.id}': duration must be > 0")
        for producer, nbytes in self.inputs:
            if nbytes < 0:
                raise ClusterError(
                    f"task '{self.id}': negative transfer from '{producer}'")

    @property
    def variant(self) -> str:
        return "cpu" if self.request[0] == "cpu-cores" else "fpga"

    @property
    def cores_needed(self) -> int:
        return int(self.request[1]) if self.request[0] == "cpu-cores" else 0


@dataclass(frozen=True)
class TaskGraph:
    tasks: tuple[TaskSpec, ...]

    def __post_init__(self):
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ClusterError("duplicate task ids")
        known = set(ids)
        for t in self.tasks:
            for producer, _ in t.inputs:
                if producer not in known:
                    raise ClusterError(
                        f"task '{t.id}' consumes unknown task '{producer}'")
        self.topological_order()

    def task(self, tid: str) -> TaskSpec:
        for t in self.tasks:
            if t.id == tid:
                return t
        raise ClusterError(f"unknown task '{tid}'")

    def consumers(self, tid: str) -> list[TaskSpec]:
        return [t for t in self.tasks
                if any(p == tid for p, _ in t.inputs)]

    def topological_order(self) -> list[str]:
        indeg = {t.id: len(t.inputs) for t in self.tasks}
        order: list[str] = []
        ready = sorted(tid for tid, d in indeg.items() if d == 0)
        while ready:
            tid = ready.pop(0)
            order.append(tid)
            added = False
            for c in self.consumers(tid):
                indeg[c.id] -= 1
                if indeg[c.id] == 0:
                    ready.append(c.id)
                    added = True
            if added:
                ready.sort()
        if len(order) != len(self.tasks):
            raise ClusterError("task graph has a cycle")
        return order

    def to_json(self) -> dict:
        return {
            "tasks": [
                {
                    "id": t.id,
                    "request": list(t.request),
                    "durations": dict(t.durations),
                    "inputs": [[p, b] for p, b in t.inputs],
                    "knobs": dict(t.knobs),
                }
                for t in self.tasks
            ]
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TaskGraph":
        tasks = []
        for d in doc["tasks"]:
            tasks.append(TaskSpec(
                d["id"],
                tuple(d["request"]),
                {k: float(v) for k, v in d["durations"].items()},
                tuple((p, int(b)) for p, b in d.get("inputs", ())),
                dict(d.get("knobs", {})),
            ))
        return cls(tuple(tasks))

    @classmethod
    def load(cls, path: str) -> "TaskGraph":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


class TaskGraphBuilder:
    """Submission-style construction: submit(task, deps, request)."""

    def __init__(self):
        self._tasks: list[TaskSpec] = []
        self._n = 0

    def submit(self, name: Optional[str] = None, *,
               deps: tuple = (), request: tuple = ("cpu-cores", 1),
               durations: Optional[Mapping[str, float]] = None,
               knobs: Optional[Mapping[str, object]] = None) -> str:
        """Add one task; deps are (task id, bytes) pairs or bare ids."""
        tid = name if name is not None else f"t{self._n}"
        self._n += 1
        inputs = tuple(
            (d, 0) if isinstance(d, str) else (d[0], int(d[1]))
            for d in deps)
        self._tasks.append(TaskSpec(
            tid, request, dict(durations or {"cpu": 1.0}), inputs,
            dict(knobs or {})))
        return tid

    def graph(self) -> TaskGraph:
        return TaskGraph(tuple(self._tasks))
