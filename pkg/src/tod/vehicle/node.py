"""Vehicle-side node: plant loop, command ingestion, sensors, perception.

One plant-stepping loop owns the VehicleState; commands arrive over the
datagram tier and are validated before they touch the plant; telemetry,
scans, object lists, grids, lane predictions and synthetic frames are
published on their own schedules. Status rides the control channel as a
retained message; stream reconfiguration arrives there too.
"""

from __future__ import annotations

import json

from dataclasses import dataclass, field

from ..core.codec import TopicRegistry, decode_message, encode_message
from ..core.geometry import RigidTransform, TransformTree
from ..core.messages import WireMessage
from ..core.messages import ClockProbe, StatusBody
from ..core.types import (
    CommandRejected,
    DriveMode,
    PrimaryCommand,
    SecondaryCommand,
    VehicleParams,
    VehicleState,
)
from ..netlink.control import ControlClient, ControlDelivery
from ..netlink.virtualtime import Scheduler
from ..perception.clustering import cluster_scan
from ..perception.grid import GridParams, build_grid
from ..perception.lane import predict_lane
from ..perception.ratecontrol import StreamConfig, decode_stream_config
from .bridge import Watchdog, ingest_command
from .plant import Actuation, Plant
from .sensors import FrameStream, ScanParams, scan_world
from .world import World


class WorldExit(Exception):
    """Vehicle left the world bounds; carries the position report."""

    def __init__(self, x: float, y: float, t_ns: int):
        super().__init__(f"vehicle left world bounds at ({x:.2f}, {y:.2f}) t={t_ns / 1e9:.3f}s")
        self.x = x
        self.y = y
        self.t_ns = t_ns


@dataclass(frozen=True)
class ScanSpec:
    name: str
    params: ScanParams
    cluster: bool = False
    d_c: float = 0.5
    min_pts: int = 3


@dataclass(frozen=True)
class CameraSpec:
    name: str
    config: StreamConfig


@dataclass(frozen=True)
class VehicleNodeConfig:
    name: str = "demo"
    plant_dt: float = 0.001
    telemetry_rate_hz: float = 100.0
    scans: tuple[ScanSpec, ...] = ()
    cameras: tuple[CameraSpec, ...] = ()
    grid: GridParams | None = None
    grid_scan: str | None = None  # which scan feeds the grid; default: first
    lane_horizon: float = 20.0
    lane_points: int = 24
    lane_rate_hz: float = 10.0
    publish_lane: bool = True
    initial_state: VehicleState = field(default_factory=VehicleState)


class VehicleNode:
    def __init__(
        self,
        scheduler: Scheduler,
        endpoint,
        control: ControlClient,
        registry: TopicRegistry,
        params: VehicleParams,
        world: World,
        tree: TransformTree,
        config: VehicleNodeConfig,
    ):
        self.scheduler = scheduler
        self.endpoint = endpoint
        self.control = control
        self.registry = registry
        self.params = params
        self.world = world
        self.tree = tree
        self.config = config

        self.plant = Plant(params, dt=config.plant_dt, initial=config.initial_state)
        self.watchdog = Watchdog(params, now_ns=scheduler.now_ns())
        self.stale_dropped = 0
        self.rejected_commands = 0
        self.aborted: WorldExit | None = None
        self._actuation = Actuation()
        self._last_primary: PrimaryCommand | None = None
        self._last_secondary: SecondaryCommand | None = None
        self._running = False

        v = config.name
        self._state_topic = registry.by_name(f"/vehicle/{v}/state").topic_id
        self._status_topic_name = f"/vehicle/{v}/status"
        self._lane_topic = registry.by_name(f"/vehicle/{v}/lane").topic_id if config.publish_lane else None
        self._grid_topic = registry.by_name(f"/vehicle/{v}/grid").topic_id if config.grid else None
        self._scan_topics = {
            s.name: registry.by_name(f"/vehicle/{v}/scan/{s.name}").topic_id for s in config.scans
        }
        self._object_topics = {
            s.name: registry.by_name(f"/vehicle/{v}/objects/{s.name}").topic_id
            for s in config.scans
            if s.cluster
        }
        self._camera_topics = {
            c.name: registry.by_name(f"/vehicle/{v}/frame/{c.name}").topic_id for c in config.cameras
        }
        self._scan_transforms: dict[str, RigidTransform] = {}
        for spec in config.scans:
            self._scan_transforms[spec.name] = tree.resolve(spec.params.frame_id, "vehicle")
        self._streams = {c.name: FrameStream(c.name, c.config) for c in config.cameras}

        self._sub_primary = endpoint.subscribe(registry.by_name("/operator/cmd_primary").topic_id)
        self._sub_secondary = endpoint.subscribe(
            registry.by_name("/operator/cmd_secondary").topic_id
        )
        self._sub_probe = endpoint.subscribe(registry.by_name("/operator/clock_probe").topic_id)
        self._clock_reply_topic = registry.by_name(f"/vehicle/{v}/clock_reply").topic_id

    def start(self) -> None:
        self._running = True
        now = self.scheduler.now_ns()
        status_topic = self.registry.by_name(self._status_topic_name).topic_id
        self.control.publish(
            self._status_topic_name,
            encode_message(
                WireMessage(status_topic, 0, now, StatusBody(self.config.name, "ready", now))
            ),
            retain=True,
        )
        self.control.subscribe(f"/vehicle/{self.config.name}/stream_config").set_listener(
            self._on_stream_config
        )
        self._schedule_tick(int(self.config.plant_dt * 1e9), self._plant_tick)
        self._schedule_tick(int(1e9 / self.config.telemetry_rate_hz), self._telemetry_tick)
        if self._lane_topic is not None:
            self._schedule_tick(int(1e9 / self.config.lane_rate_hz), self._lane_tick)
        for spec in self.config.scans:
            self._schedule_tick(
                int(1e9 / spec.params.rate_hz), lambda s=spec: self._scan_tick(s)
            )
        for cam in self.config.cameras:
            self._schedule_tick(
                int(1e9 / cam.config.framerate), lambda c=cam: self._frame_tick(c)
            )

    def stop(self) -> None:
        self._running = False

    def _schedule_tick(self, period_ns: int, fn) -> None:
        def tick() -> None:
            if not self._running or self.aborted is not None:
                return
            fn()
            self.scheduler.call_after(period_ns, tick)

        self.scheduler.call_after(period_ns, tick)

    def _drain_commands(self, now_ns: int) -> bool:
        fresh = False
        while (d := self._sub_primary.poll()) is not None:
            if d.stale:
                self.stale_dropped += 1
                continue
            self._last_primary = d.message.payload
            self.watchdog.command_received(d.recv_stamp_ns)
            fresh = True
        while (d := self._sub_secondary.poll()) is not None:
            if d.stale:
                self.stale_dropped += 1
                continue
            self._last_secondary = d.message.payload
            fresh = True
        while (d := self._sub_probe.poll()) is not None:
            probe: ClockProbe = d.message.payload
            try:
                self.endpoint.send(
                    self._clock_reply_topic,
                    ClockProbe(probe.orig_ns, d.recv_stamp_ns, now_ns),
                )
            except Exception:
                pass
        return fresh

    def _plant_tick(self) -> None:
        now = self.scheduler.now_ns()
        fresh = self._drain_commands(now)
        if fresh and self._last_primary is not None:
            secondary = self._last_secondary or SecondaryCommand()
            try:
                result = ingest_command(
                    self._last_primary, secondary, self.plant.state, self.params, now
                )
            except CommandRejected:
                self.rejected_commands += 1
            else:
                self._actuation = result.actuation
                self.plant.set_status(
                    gear=result.gear,
                    indicator=result.indicator,
                    estop_engaged=result.estop_engaged,
                )
        mode = self.watchdog.check(now, self.plant.state.velocity)
        if self.plant.state.estop_engaged:
            mode = DriveMode.SAFE_STOP
        self.plant.set_status(mode=mode)
        state = self.plant.step(self._actuation, stamp_ns=now)
        if not self.world.bounds.contains(state.pose.x, state.pose.y):
            self.aborted = WorldExit(state.pose.x, state.pose.y, now)
            raise self.aborted

    def _telemetry_tick(self) -> None:
        try:
            self.endpoint.send(self._state_topic, self.plant.state)
        except Exception:
            pass

    def _lane_tick(self) -> None:
        swa = self.plant.state.swa
        lanes = predict_lane(
            min(max(swa, -self.params.max_swa), self.params.max_swa),
            self.params,
            self.config.lane_horizon,
            self.config.lane_points,
        )
        try:
            self.endpoint.send(self._lane_topic, lanes)
        except Exception:
            pass

    def _scan_tick(self, spec: ScanSpec) -> None:
        scan = scan_world(
            self.plant.state.pose, self.world, spec.params, self._scan_transforms[spec.name]
        )
        try:
            self.endpoint.send(self._scan_topics[spec.name], scan)
        except Exception:
            pass
        if spec.cluster:
            objects = cluster_scan(scan, spec.d_c, spec.min_pts)
            try:
                self.endpoint.send(self._object_topics[spec.name], objects)
            except Exception:
                pass
        grid_source = self.config.grid_scan or (
            self.config.scans[0].name if self.config.scans else None
        )
        if self.config.grid is not None and spec.name == grid_source:
            grid = build_grid(
                scan,
                self.plant.state.pose,
                self._scan_transforms[spec.name],
                self.config.grid,
            )
            try:
                self.endpoint.send(self._grid_topic, grid)
            except Exception:
                pass

    def _frame_tick(self, cam: CameraSpec) -> None:
        stream = self._streams[cam.name]
        frame = stream.generate_frame(self.plant.state.pose, self.scheduler.now_ns())
        if frame is None:
            return
        try:
            self.endpoint.send(self._camera_topics[cam.name], frame, stamp_ns=frame.stamp_ns)
        except Exception:
            pass

    def _on_stream_config(self, delivery: ControlDelivery) -> None:
        try:
            cfg = decode_stream_config(delivery.payload)
        except (ValueError, KeyError, json.JSONDecodeError):
            return
        for stream in self._streams.values():
            stream.reconfigure(cfg)


def decode_status(payload: bytes, registry: TopicRegistry) -> StatusBody:
    """Status payloads on the control channel are core wire bytes."""
    msg = decode_message(payload, registry)
    if not isinstance(msg.payload, StatusBody):
        raise ValueError(f"expected StatusBody, got {type(msg.payload).__name__}")
    return msg.payload
