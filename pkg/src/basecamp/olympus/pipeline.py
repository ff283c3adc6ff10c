"""Per-tile stage times and the read/execute/write pipeline model.

One tile passes through three stages.  Transfers move tile bytes over
the chosen channel at an effective rate scaled by how much of the bus
width the packing factor actually fills; execution issues one
multiply-accumulate per replicated lane per cycle.  With double
buffering, tile k+1 streams in while tile k computes, so steady state
is paced by the slowest stage; without it, tiles are strictly serial.

On a PCIe-attached platform transfers use the first memory channel.  A
network-attached platform moves data over its host link instead; a
byte stream has no lane structure, so packing efficiency is 1 there
and the packing factor only shapes on-chip execution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..numerics import NumericFormat, packed_lane_count
from .platform import PlatformSpec
from .planner_types import KernelConfig, NodeCost, PlanError


@dataclass(frozen=True)
class StageTimes:
    read_us: float
    execute_us: float
    write_us: float
    n_tiles: int


def tiles_for(cost: NodeCost, cfg: KernelConfig, fmt: NumericFormat) -> int:
    elem_bytes = fmt.bit_width / 8
    elems = max(cost.bytes_in, cost.bytes_out) / elem_bytes
    return max(1, math.ceil(elems / cfg.tile_elements))


def stage_times(cost: NodeCost, cfg: KernelConfig, p: PlatformSpec,
                f: NumericFormat) -> StageTimes:
    ch = p.channels[0]
    if f.bit_width > ch.width_bits:
        raise PlanError(
            f"element of {f.bit_width} bits is wider than the "
            f"{ch.width_bits}-bit memory channel")
    lanes = packed_lane_count(ch.width_bits, f)
    if not 1 <= cfg.packing <= lanes:
        raise PlanError(
            f"packing factor {cfg.packing} outside 1..{lanes} for "
            f"{f.spec()} on a {ch.width_bits}-bit channel")
    if cfg.replication < 1:
        raise PlanError("replication must be >= 1")

    if p.kind == "network-attached":
        bandwidth = p.host_link.bandwidth_mbps
        efficiency = 1.0
    else:
        bandwidth = ch.bandwidth_mbps
        efficiency = (cfg.packing * f.bit_width) / ch.width_bits

    n = tiles_for(cost, cfg, f)
    read = (cost.bytes_in / n) / (bandwidth * efficiency)
    write = (cost.bytes_out / n) / (bandwidth * efficiency)
    execute = (cost.macs / n) / (cfg.replication * p.clock_mhz)
    return StageTimes(read, execute, write, n)


def pipeline_makespan(stages: StageTimes, n_tiles: int | None = None,
                      double_buffered: bool = True) -> float:
    """Makespan in µs of n tiles through the three-stage pipeline."""
    n = stages.n_tiles if n_tiles is None else n_tiles
    if n < 1:
        raise PlanError("pipeline needs at least one tile")
    once = stages.read_us + stages.execute_us + stages.write_us
    if not double_buffered:
        return n * once
    slowest = max(stages.read_us, stages.execute_us, stages.write_us)
    return once + (n - 1) * slowest
