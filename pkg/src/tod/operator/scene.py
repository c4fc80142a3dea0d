"""Entity registry backing the operator's visual scene.

Composition over inheritance: each entity is an id, a kind, and three
components (transform, data, style). The registry is the headless source
of truth; any UI renders snapshots of it. Updates are driven by incoming
wire messages and are idempotent per (topic, seq).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from ..core.geometry import TransformTree
from ..core.messages import (
    FramePacket,
    LanePolylines,
    LaserScan,
    ObjectList,
    OccupancyGrid,
    WireMessage,
)
from ..core.types import PrimaryCommand, SecondaryCommand, VehicleState

VEHICLE_FRAME = "vehicle"


class EntityKind(Enum):
    SCENE_CAMERA = "SceneCamera"
    COORDINATE_FRAME = "CoordinateFrame"
    VEHICLE_MODEL = "VehicleModel"
    SPEEDOMETER = "Speedometer"
    VIDEO_CANVAS = "VideoCanvas"
    LASER_SCAN_VIEW = "LaserScanView"
    VEHICLE_LANE = "VehicleLane"
    TOP_VIEW = "TopView"


@dataclass
class SceneEntity:
    entity_id: str
    kind: EntityKind
    transform: dict[str, float] = field(default_factory=lambda: {"x": 0.0, "y": 0.0, "yaw": 0.0})
    data: dict[str, Any] = field(default_factory=dict)
    style: dict[str, Any] = field(default_factory=dict)

    def snapshot(self) -> dict[str, Any]:
        return {
            "id": self.entity_id,
            "kind": self.kind.value,
            "transform": dict(self.transform),
            "data": dict(self.data),
            "style": dict(self.style),
        }


class SceneRegistry:
    """Owns the visual-scene entity set and routes telemetry into it."""

    def __init__(
        self,
        tree: TransformTree,
        scan_topics: dict[int, str],
        camera_topics: dict[int, str],
        lane_topic: int | None = None,
        state_topic: int | None = None,
        objects_topics: dict[int, str] | None = None,
        grid_topic: int | None = None,
    ):
        self._tree = tree
        self._scan_topics = scan_topics
        self._camera_topics = camera_topics
        self._lane_topic = lane_topic
        self._state_topic = state_topic
        self._objects_topics = objects_topics or {}
        self._grid_topic = grid_topic
        self._last_seq: dict[int, int] = {}
        self._frame_cache: dict[str, tuple[float, float, float, float]] = {}
        self.unknown_topics = 0
        self.stale_updates = 0
        self._frame_listener: Callable[[FramePacket], None] | None = None

        self.entities: dict[str, SceneEntity] = {}
        self._add(SceneEntity("scene_camera", EntityKind.SCENE_CAMERA, style={"follow": "vehicle"}))
        self._add(
            SceneEntity(
                "top_view",
                EntityKind.TOP_VIEW,
                data={"grid": None, "objects": []},
                style={"span_m": 60.0},
            )
        )
        self._add(
            SceneEntity(
                "vehicle",
                EntityKind.VEHICLE_MODEL,
                data={"velocity": 0.0, "swa": 0.0, "estop": False, "mode": "Normal"},
                style={"color": "#3a7"},
            )
        )
        self._add(
            SceneEntity(
                "speedometer",
                EntityKind.SPEEDOMETER,
                data={
                    "actual_velocity": 0.0,
                    "commanded_velocity": 0.0,
                    "gear": "Park",
                    "commanded_gear": "Park",
                },
            )
        )
        self._add(SceneEntity("vehicle_lane", EntityKind.VEHICLE_LANE, data={"left": [], "right": []}))
        for frame in sorted(tree.frames()):
            self._add(
                SceneEntity(
                    f"frame:{frame}", EntityKind.COORDINATE_FRAME, data={"frame_id": frame}
                )
            )
        for topic_id, camera_id in sorted(camera_topics.items()):
            self._add(
                SceneEntity(
                    f"video:{camera_id}",
                    EntityKind.VIDEO_CANVAS,
                    data={"camera_id": camera_id, "seq": -1, "stamp_ns": 0, "size_bytes": 0},
                )
            )
        for topic_id, sensor in sorted(scan_topics.items()):
            self._add(
                SceneEntity(
                    f"scan:{sensor}",
                    EntityKind.LASER_SCAN_VIEW,
                    data={"sensor": sensor, "points": []},
                    style={"color": "#d33"},
                )
            )
        self._assert_single_vehicle()

    def _add(self, entity: SceneEntity) -> None:
        self.entities[entity.entity_id] = entity

    def _assert_single_vehicle(self) -> None:
        count = sum(1 for e in self.entities.values() if e.kind == EntityKind.VEHICLE_MODEL)
        if count != 1:
            raise ValueError(f"scene must contain exactly one VehicleModel, found {count}")

    def on_frame(self, listener: Callable[[FramePacket], None]) -> None:
        """Hook for the display pipeline (render scheduling, G2G)."""
        self._frame_listener = listener

    def note_command(self, primary: PrimaryCommand, secondary: SecondaryCommand) -> None:
        """Operator-side command values shown by the speedometer."""
        speedo = self.entities["speedometer"]
        speedo.data["commanded_velocity"] = primary.desired_velocity
        speedo.data["commanded_gear"] = secondary.gear.name.capitalize()

    def apply(self, msg: WireMessage) -> list[str]:
        """Route one wire message; returns ids of changed entities."""
        last = self._last_seq.get(msg.topic_id)
        if last is not None and msg.seq <= last:
            self.stale_updates += 1
            return []

        payload = msg.payload
        changed: list[str]
        if isinstance(payload, VehicleState) and msg.topic_id == self._state_topic:
            changed = self._apply_state(payload)
        elif isinstance(payload, LaserScan) and msg.topic_id in self._scan_topics:
            changed = self._apply_scan(msg.topic_id, payload)
        elif isinstance(payload, LanePolylines) and msg.topic_id == self._lane_topic:
            changed = self._apply_lanes(payload)
        elif isinstance(payload, FramePacket) and msg.topic_id in self._camera_topics:
            changed = self._apply_frame(payload)
        elif isinstance(payload, ObjectList) and msg.topic_id in self._objects_topics:
            changed = self._apply_objects(payload)
        elif isinstance(payload, OccupancyGrid) and msg.topic_id == self._grid_topic:
            changed = self._apply_grid(payload)
        else:
            self.unknown_topics += 1
            return []
        self._last_seq[msg.topic_id] = msg.seq
        return changed

    def _apply_state(self, state: VehicleState) -> list[str]:
        vehicle = self.entities["vehicle"]
        vehicle.transform = {"x": state.pose.x, "y": state.pose.y, "yaw": state.pose.yaw}
        vehicle.data.update(
            velocity=state.velocity,
            swa=state.swa,
            estop=state.estop_engaged,
            mode=state.mode.name.replace("_", "").capitalize()
            if state.mode.name != "SAFE_STOP"
            else "SafeStop",
        )
        speedo = self.entities["speedometer"]
        speedo.data["actual_velocity"] = state.velocity
        speedo.data["gear"] = state.gear.name.capitalize()
        cam = self.entities["scene_camera"]
        cam.transform = dict(vehicle.transform)
        return ["vehicle", "speedometer", "scene_camera"]

    def _scan_frame_2d(self, frame_id: str) -> tuple[float, float, float, float]:
        """Cached planar (cos, sin, tx, ty) of frame -> vehicle."""
        cached = self._frame_cache.get(frame_id)
        if cached is None:
            xf = self._tree.resolve(frame_id, VEHICLE_FRAME)
            tx, ty, _ = xf.apply((0.0, 0.0, 0.0))
            yaw = xf.rotation.yaw()
            cached = (math.cos(yaw), math.sin(yaw), tx, ty)
            self._frame_cache[frame_id] = cached
        return cached

    def _apply_scan(self, topic_id: int, scan: LaserScan) -> list[str]:
        import numpy as np

        sensor = self._scan_topics[topic_id]
        entity = self.entities[f"scan:{sensor}"]
        c, s, tx, ty = self._scan_frame_2d(scan.frame_id)
        ranges = np.asarray(scan.ranges)
        idx = np.flatnonzero(
            np.isfinite(ranges) & (ranges >= scan.range_min) & (ranges <= scan.range_max)
        )
        angles = scan.angle_min + scan.angle_increment * idx
        px = ranges[idx] * np.cos(angles)
        py = ranges[idx] * np.sin(angles)
        xs = tx + c * px - s * py
        ys = ty + s * px + c * py
        entity.data["points"] = list(zip(xs.tolist(), ys.tolist()))
        return [entity.entity_id]

    def _apply_lanes(self, lanes: LanePolylines) -> list[str]:
        entity = self.entities["vehicle_lane"]
        entity.data["left"] = list(lanes.left)
        entity.data["right"] = list(lanes.right)
        entity.data["swa_used"] = lanes.swa_used
        return [entity.entity_id]

    def _apply_frame(self, frame: FramePacket) -> list[str]:
        entity = self.entities[f"video:{frame.camera_id}"]
        entity.data.update(
            seq=frame.seq,
            stamp_ns=frame.stamp_ns,
            size_bytes=frame.simulated_size_bytes,
            width=frame.width,
            height=frame.height,
        )
        if self._frame_listener is not None:
            self._frame_listener(frame)
        return [entity.entity_id]

    def _apply_objects(self, objects: ObjectList) -> list[str]:
        top = self.entities["top_view"]
        top.data["objects"] = [
            {
                "cx": o.centroid_x,
                "cy": o.centroid_y,
                "aabb": [o.min_x, o.min_y, o.max_x, o.max_y],
                "points": o.point_count,
            }
            for o in objects.objects
        ]
        return [top.entity_id]

    def _apply_grid(self, grid: OccupancyGrid) -> list[str]:
        import numpy as np

        top = self.entities["top_view"]
        bits = np.unpackbits(np.frombuffer(grid.cells, dtype=np.uint8), bitorder="little")
        flat = np.flatnonzero(bits[: grid.width * grid.height])
        occupied = [(int(i % grid.width), int(i // grid.width)) for i in flat]
        top.data["grid"] = {
            "origin": [grid.origin_x, grid.origin_y],
            "resolution": grid.resolution,
            "width": grid.width,
            "height": grid.height,
            "occupied": occupied,
        }
        return [top.entity_id]

    def snapshot(self) -> dict[str, Any]:
        self._assert_single_vehicle()
        return {"entities": [e.snapshot() for e in self.entities.values()]}


def update_scene(registry: SceneRegistry, msg: WireMessage) -> list[str]:
    """Functional alias for SceneRegistry.apply."""
    return registry.apply(msg)
