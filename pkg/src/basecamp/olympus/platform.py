"""Target platform description.

Bandwidths are in MB/s, which conveniently equals bytes per µs, so the
timing model never converts units.  A network-attached card is capped
at 10 Gbps on its host link (1250 MB/s); a PCIe card is not.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import BasecampError

NETWORK_LINK_CAP_MBPS = 1250.0  # 10 Gbps


class PlatformError(BasecampError):
    pass


@dataclass(frozen=True)
class Channel:
    width_bits: int
    bandwidth_mbps: float


@dataclass(frozen=True)
class HostLink:
    bandwidth_mbps: float
    latency_us: float


@dataclass(frozen=True)
class PlatformSpec:
    name: str
    kind: str  # "pcie-attached" | "network-attached"
    channels: tuple[Channel, ...]
    clock_mhz: float
    onchip_memory: int
    compute_slots: int
    host_link: HostLink
    vf_count: int

    def __post_init__(self):
        if self.kind not in ("pcie-attached", "network-attached"):
            raise PlatformError(f"unknown platform kind '{self.kind}'")
        if not self.channels:
            raise PlatformError("platform needs at least one memory channel")
        for ch in self.channels:
            if ch.width_bits <= 0 or ch.bandwidth_mbps <= 0:
                raise PlatformError("channel width and bandwidth must be > 0")
        if (self.clock_mhz <= 0 or self.onchip_memory <= 0
                or self.compute_slots <= 0 or self.vf_count <= 0):
            raise PlatformError(
                "clock, onchip_memory, compute_slots, vf_count must be > 0")
        if self.host_link.bandwidth_mbps <= 0 or self.host_link.latency_us < 0:
            raise PlatformError("host link bandwidth must be > 0")
        if (self.kind == "network-attached"
                and self.host_link.bandwidth_mbps > NETWORK_LINK_CAP_MBPS):
            raise PlatformError(
                f"network-attached platform '{self.name}' claims "
                f"{self.host_link.bandwidth_mbps} MB/s on its host link; "
                f"the 10 Gbps stack caps it at {NETWORK_LINK_CAP_MBPS}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "channels": [
                {"width": c.width_bits, "bandwidth": c.bandwidth_mbps}
                for c in self.channels
            ],
            "clock": self.clock_mhz,
            "onchip_memory": self.onchip_memory,
            "compute_slots": self.compute_slots,
            "host_link": {
                "bandwidth": self.host_link.bandwidth_mbps,
                "latency": self.host_link.latency_us,
            },
            "vf_count": self.vf_count,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PlatformSpec":
        try:
            return cls(
                name=doc["name"],
                kind=doc["kind"],
                channels=tuple(
                    Channel(int(c["width"]), float(c["bandwidth"]))
                    for c in doc["channels"]),
                clock_mhz=float(doc["clock"]),
                onchip_memory=int(doc["onchip_memory"]),
                compute_slots=int(doc["compute_slots"]),
                host_link=HostLink(
                    float(doc["host_link"]["bandwidth"]),
                    float(doc["host_link"]["latency"])),
                vf_count=int(doc["vf_count"]),
            )
        except KeyError as e:
            raise PlatformError(f"platform description missing field {e}")

    @classmethod
    def load(cls, path: str) -> "PlatformSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))
