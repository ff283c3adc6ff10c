"""On-chip buffer sharing between kernels with disjoint lifetimes.

Greedy allocation: take kernels in decreasing buffer size and drop
each into the first existing slot whose members it does not overlap in
time, opening a new slot otherwise.  A slot's footprint is the largest
member buffer, so total memory never grows and never drops below what
any single instant keeps live.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class BufferInterval:
    kernel_id: int
    buffer_bytes: int
    start_us: float
    end_us: float

    def overlaps(self, other: "BufferInterval") -> bool:
        return self.start_us < other.end_us and other.start_us < self.end_us


def share_buffers(entries: list[BufferInterval]
                  ) -> tuple[dict[int, Optional[int]], int]:
    """Assign kernels to shared buffers.

    Returns (kernel_id -> slot leader kernel id or None, total bytes
    after sharing).  A kernel alone in its slot maps to None; members
    of a shared slot map to the largest (first-placed) member.
    """
    order = sorted(entries, key=lambda e: (-e.buffer_bytes, e.kernel_id))
    slots: list[list[BufferInterval]] = []
    for e in order:
        for slot in slots:
            if all(not e.overlaps(m) for m in slot):
                slot.append(e)
                break
        else:
            slots.append([e])
    assignment: dict[int, Optional[int]] = {}
    total = 0
    for slot in slots:
        leader = slot[0]  # largest member owns the storage
        total += leader.buffer_bytes
        assignment[leader.kernel_id] = None
        for m in slot[1:]:
            assignment[m.kernel_id] = leader.kernel_id
    return assignment, total
