"""Shared planner datatypes, split out to keep imports acyclic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import BasecampError


class PlanError(BasecampError):
    pass


@dataclass(frozen=True)
class NodeCost:
    """Operation and traffic totals for one offloaded kernel."""

    macs: int
    bytes_in: int
    bytes_out: int

    def __post_init__(self):
        if self.macs < 0 or self.bytes_in < 0 or self.bytes_out < 0:
            raise PlanError("kernel cost fields must be non-negative")
        if self.bytes_in == 0 and self.bytes_out == 0:
            raise PlanError("kernel moves no bytes; nothing to plan")


@dataclass(frozen=True)
class KernelConfig:
    node_id: int
    replication: int        # R: parallel lanes, each its own compute slot
    packing: int            # P: elements packed side by side on the bus
    double_buffered: bool
    tile_elements: int
    buffer_bytes: int
    shared_with: Optional[int] = None

    def __post_init__(self):
        if self.replication < 1 or self.packing < 1:
            raise PlanError("replication and packing must be >= 1")
        if self.tile_elements < 1:
            raise PlanError("tile must hold at least one element")
