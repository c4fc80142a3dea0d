"""Sensor generation: planar raycast scans and the synthetic frame stream."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from ..core.geometry import Pose2D, RigidTransform
from ..core.messages import NO_RETURN, FramePacket, LaserScan
from ..perception.ratecontrol import StreamConfig
from .world import World

BEAM_COUNT_TOL = 1e-9


@dataclass(frozen=True)
class ScanParams:
    """Scanner geometry; beam i sits at angle_min + i * angle_increment."""

    frame_id: str = "laser"
    angle_min: float = -math.pi / 2
    angle_max: float = math.pi / 2
    angle_increment: float = math.pi / 720
    range_min: float = 0.05
    range_max: float = 30.0
    rate_hz: float = 10.0

    def __post_init__(self) -> None:
        if self.angle_max <= self.angle_min:
            raise ValueError("angle_max must exceed angle_min")
        if self.angle_increment <= 0:
            raise ValueError("angle_increment must be > 0")
        if self.range_min < 0 or self.range_max <= self.range_min:
            raise ValueError("need 0 <= range_min < range_max")
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be > 0")
        span = (self.angle_max - self.angle_min) / self.angle_increment
        if abs(span - round(span)) > BEAM_COUNT_TOL * max(1.0, abs(span)):
            raise ValueError("angular span must be an integral number of increments")

    @property
    def beam_count(self) -> int:
        return round((self.angle_max - self.angle_min) / self.angle_increment) + 1


def scan_world(
    pose: Pose2D,
    world: World,
    sp: ScanParams,
    sensor_to_vehicle: RigidTransform | None = None,
) -> LaserScan:
    """Raycast every beam against the world's segments and circles.

    Pure: identical inputs produce an identical scan. Beams without a hit
    inside [range_min, range_max] carry the +inf no-return sentinel.
    """
    if sensor_to_vehicle is None:
        sensor_to_vehicle = RigidTransform.identity()
    sx, sy, _ = sensor_to_vehicle.apply((0.0, 0.0, 0.0))
    ox, oy = pose.transform_point(sx, sy)
    sensor_yaw = pose.yaw + sensor_to_vehicle.rotation.yaw()

    n = sp.beam_count
    angles = sensor_yaw + sp.angle_min + sp.angle_increment * np.arange(n)
    dx = np.cos(angles)
    dy = np.sin(angles)
    best = np.full(n, np.inf)

    for seg in world.segments:
        ex, ey = seg.x2 - seg.x1, seg.y2 - seg.y1
        denom = dx * ey - dy * ex
        rx, ry = seg.x1 - ox, seg.y1 - oy
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (rx * ey - ry * ex) / denom
            s = (rx * dy - ry * dx) / denom
        hit = (np.abs(denom) > 1e-12) & (t >= 0.0) & (s >= 0.0) & (s <= 1.0)
        best = np.where(hit & (t < best), t, best)

    for c in world.circles:
        fx, fy = c.cx - ox, c.cy - oy
        m = dx * fx + dy * fy  # projection of center onto the (unit) ray
        disc = m * m - (fx * fx + fy * fy - c.r * c.r)
        ok = disc >= 0.0
        root = np.sqrt(np.where(ok, disc, 0.0))
        near = m - root
        far = m + root
        t = np.where(near >= 0.0, near, far)
        hit = ok & (t >= 0.0)
        best = np.where(hit & (t < best), t, best)

    ranges = np.where((best >= sp.range_min) & (best <= sp.range_max), best, NO_RETURN)
    return LaserScan(
        frame_id=sp.frame_id,
        angle_min=sp.angle_min,
        angle_max=sp.angle_max,
        angle_increment=sp.angle_increment,
        range_min=sp.range_min,
        range_max=sp.range_max,
        ranges=tuple(float(r) for r in ranges),
    )


def frame_digest(camera_id: str, seq: int) -> int:
    """Deterministic stand-in for pixel content."""
    return zlib.crc32(f"{camera_id}:{seq}".encode()) & 0xFFFFFFFF


def simulated_frame_size(bitrate: float, framerate: float) -> int:
    """Byte budget per frame: bitrate / (8 * framerate), rounded up."""
    return math.ceil(bitrate / (8.0 * framerate))


class FrameStream:
    """Synthetic camera stream; size-accounted frames, no real pixels."""

    def __init__(self, camera_id: str, config: StreamConfig):
        self.camera_id = camera_id
        self.config = config
        self.active = True
        self._seq = 0

    def reconfigure(self, config: StreamConfig) -> None:
        self.config = config

    def generate_frame(self, pose: Pose2D, now_ns: int) -> FramePacket | None:
        """One frame at the stream's current configuration; None when paused."""
        if not self.active:
            return None
        cfg = self.config
        width = max(1, round(cfg.crop_width * cfg.scaling))
        height = max(1, round(cfg.crop_height * cfg.scaling))
        seq = self._seq
        self._seq += 1
        return FramePacket(
            camera_id=self.camera_id,
            seq=seq,
            stamp_ns=now_ns,
            width=width,
            height=height,
            simulated_size_bytes=simulated_frame_size(cfg.bitrate, cfg.framerate),
            digest=frame_digest(self.camera_id, seq),
        )
