"""Wire message bodies carried inside WireMessage envelopes.

Every body here has a fixed little-endian binary layout owned by
tod.core.codec; equality between a decoded body and the original encoded
one is exact (bit-exact floats, including inf range sentinels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .geometry import Pose2D
from .types import PrimaryCommand, SecondaryCommand, VehicleState

# Beams with no obstacle inside [range_min, range_max] carry +inf.
NO_RETURN = math.inf


@dataclass(frozen=True)
class Heartbeat:
    """Empty keep-alive body."""


@dataclass(frozen=True)
class LaserScan:
    """Planar range scan: beam i is at angle_min + i * angle_increment."""

    frame_id: str = "laser"
    angle_min: float = -math.pi / 2
    angle_max: float = math.pi / 2
    angle_increment: float = math.pi / 180
    range_min: float = 0.05
    range_max: float = 30.0
    ranges: tuple[float, ...] = ()

    def beam_angle(self, i: int) -> float:
        return self.angle_min + i * self.angle_increment


@dataclass(frozen=True)
class FramePacket:
    """Synthetic camera frame: metadata plus a size-accounted payload.

    stamp_ns is the generation (shutter) time and anchors glass-to-glass
    measurement. simulated_size_bytes is what the encoded frame would have
    occupied; the codec pads the datagram to that size so bandwidth caps
    see the real load. digest stands in for pixel content.
    """

    camera_id: str = "front"
    seq: int = 0
    stamp_ns: int = 0
    width: int = 924
    height: int = 520
    simulated_size_bytes: int = 0
    digest: int = 0


@dataclass(frozen=True)
class DetectedObject:
    centroid_x: float
    centroid_y: float
    min_x: float
    min_y: float
    max_x: float
    max_y: float
    point_count: int


@dataclass(frozen=True)
class ObjectList:
    """Clustered obstacles in the source scan's frame."""

    frame_id: str = "laser"
    objects: tuple[DetectedObject, ...] = ()


@dataclass(frozen=True)
class OccupancyGrid:
    """Binary occupancy, bit-packed row-major (LSB first within each byte).

    origin is the world position of the corner of cell (0, 0); cell (ix, iy)
    covers [origin + i*res, origin + (i+1)*res).
    """

    origin_x: float = 0.0
    origin_y: float = 0.0
    resolution: float = 0.2
    width: int = 0
    height: int = 0
    cells: bytes = b""

    def __post_init__(self) -> None:
        expected = (self.width * self.height + 7) // 8
        if len(self.cells) != expected:
            raise ValueError(f"cells must hold {expected} bytes for {self.width}x{self.height}")

    def is_occupied(self, ix: int, iy: int) -> bool:
        if not (0 <= ix < self.width and 0 <= iy < self.height):
            raise IndexError(f"cell ({ix}, {iy}) outside {self.width}x{self.height}")
        idx = iy * self.width + ix
        return bool(self.cells[idx >> 3] >> (idx & 7) & 1)

    def occupied_count(self) -> int:
        return sum(bin(b).count("1") for b in self.cells)


@dataclass(frozen=True)
class LanePolylines:
    """Predicted sweep of the left/right vehicle front edges, vehicle frame."""

    swa_used: float = 0.0
    horizon: float = 0.0
    left: tuple[tuple[float, float], ...] = ()
    right: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if len(self.left) != len(self.right):
            raise ValueError("left and right polylines must have equal point counts")


@dataclass(frozen=True)
class ClockProbe:
    """Round-trip clock sample: originator stamp plus responder recv/send."""

    orig_ns: int = 0
    recv_ns: int = 0
    send_ns: int = 0


@dataclass(frozen=True)
class StatusBody:
    """Retained node status for the control channel."""

    node: str = ""
    state: str = ""
    stamp_ns: int = 0


Body = Union[
    Heartbeat,
    PrimaryCommand,
    SecondaryCommand,
    VehicleState,
    LaserScan,
    FramePacket,
    ObjectList,
    OccupancyGrid,
    LanePolylines,
    ClockProbe,
    StatusBody,
]


@dataclass(frozen=True)
class WireMessage:
    """Envelope: topic routing plus send stamp and per-topic sequence."""

    topic_id: int
    seq: int
    stamp_ns: int
    payload: Body


__all__ = [
    "NO_RETURN",
    "Heartbeat",
    "LaserScan",
    "FramePacket",
    "DetectedObject",
    "ObjectList",
    "OccupancyGrid",
    "LanePolylines",
    "ClockProbe",
    "StatusBody",
    "Body",
    "WireMessage",
    "Pose2D",
]
