"""System-level planner for offloaded kernels.

Given a dataflow graph, per-kernel operation counts, and a platform
description, choose replication, bus packing, tiling, and buffering
that minimize the modeled objective under the on-chip memory and
compute-slot budgets, then emit a plan report and C text for the
kernels.
"""

from .platform import Channel, HostLink, PlatformError, PlatformSpec
from .pipeline import StageTimes, pipeline_makespan, stage_times
from .sharing import BufferInterval, share_buffers
from .planner import (
    ArchitecturePlan,
    KernelConfig,
    NodeCost,
    PlanError,
    TILE_LADDER,
    kernel_node_cost,
    node_costs,
    plan,
)
from .hlsgen import emit_hls_c

__all__ = [
    "Channel",
    "HostLink",
    "PlatformError",
    "PlatformSpec",
    "StageTimes",
    "pipeline_makespan",
    "stage_times",
    "BufferInterval",
    "share_buffers",
    "ArchitecturePlan",
    "KernelConfig",
    "NodeCost",
    "PlanError",
    "TILE_LADDER",
    "kernel_node_cost",
    "node_costs",
    "plan",
    "emit_hls_c",
]
