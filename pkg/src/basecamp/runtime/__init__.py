"""Virtualized heterogeneous cluster: scheduler, simulator, autotuner.

A cluster is a handful of cpu and fpga nodes with cores, virtual
functions, and an interconnect.  Task graphs are placed by a
list scheduler, replayed by a deterministic event simulator that
models transfers, virtual-function churn, and scripted node failures,
and steered by a small knob/metric autotuner.
"""

from .cluster import (
    ClusterError,
    ClusterSpec,
    NodeSpec,
    TaskGraph,
    TaskGraphBuilder,
    TaskSpec,
)
from .heft import Schedule, ScheduleEntry, schedule
from .sim import (
    AvailabilityReport,
    NotAttached,
    SimEvent,
    SimTrace,
    VFExhausted,
    VFRegistry,
    availability,
    query_resources,
    simulate,
)
from .autotune import (
    AutotuneError,
    TuningState,
    autotune_observe,
    autotune_select,
    tune,
)

__all__ = [
    "ClusterError",
    "ClusterSpec",
    "NodeSpec",
    "TaskGraph",
    "TaskGraphBuilder",
    "TaskSpec",
    "Schedule",
    "ScheduleEntry",
    "schedule",
    "AvailabilityReport",
    "NotAttached",
    "SimEvent",
    "SimTrace",
    "VFExhausted",
    "VFRegistry",
    "availability",
    "query_resources",
    "simulate",
    "AutotuneError",
    "TuningState",
    "autotune_observe",
    "autotune_select",
    "tune",
]
