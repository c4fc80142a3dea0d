"""Scenario files: everything one reproducible run needs.

Scenarios are JSON documents referencing a world file. Parse errors carry
the line/column from the decoder; validation errors carry the offending
field path. All invariants (trace ordering, transform resolvability,
profile sanity) are checked at load time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..core.codec import TopicRegistry, registry_for
from ..core.geometry import Quaternion, Transform, TransformError, TransformTree
from ..core.types import Gear, Indicator, VehicleParams
from ..netlink.emulator import ChannelProfile
from ..operator.node import CommandSetpoint, OperatorNodeConfig
from ..perception.grid import GridParams
from ..perception.ratecontrol import RateMode, StreamConfig
from ..vehicle.node import CameraSpec, ScanSpec, VehicleNodeConfig
from ..vehicle.sensors import ScanParams
from ..vehicle.world import World, WorldFormatError, load_world


class ScenarioError(Exception):
    """Unloadable or invalid scenario; message carries the field path."""


@dataclass(frozen=True)
class ProfileOverride:
    t: float
    direction: str  # "up", "down" or "both"
    profile_up: ChannelProfile | None
    profile_down: ChannelProfile | None


@dataclass
class Scenario:
    name: str
    seed: int
    duration_s: float
    world: World
    world_path: Path
    params: VehicleParams
    uplink: ChannelProfile
    downlink: ChannelProfile
    transforms: list[Transform]
    vehicle_config: VehicleNodeConfig
    operator_config: OperatorNodeConfig
    trace: list[tuple[float, CommandSetpoint]] | None
    interactive: bool
    overrides: list[ProfileOverride] = field(default_factory=list)

    def registry(self) -> TopicRegistry:
        return registry_for(
            self.vehicle_config.name,
            tuple(s.name for s in self.vehicle_config.scans),
            tuple(c.name for c in self.vehicle_config.cameras),
        )

    def tree(self) -> TransformTree:
        return TransformTree(self.transforms)


def _expect(doc: dict, key: str, path: str):
    if key not in doc:
        raise ScenarioError(f"{path}.{key}: required field missing")
    return doc[key]


def _profile(doc: dict, path: str, seed: int) -> ChannelProfile:
    try:
        return ChannelProfile(
            one_way_delay=float(doc.get("one_way_delay", 0.0)),
            jitter=float(doc.get("jitter", 0.0)),
            loss_prob=float(doc.get("loss_prob", 0.0)),
            bandwidth_cap=doc.get("bandwidth_cap"),
            seed=seed,
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _gear(name: str, path: str) -> Gear:
    try:
        return Gear[name.upper()]
    except KeyError:
        raise ScenarioError(f"{path}: unknown gear {name!r}") from None


def _indicator(name: str, path: str) -> Indicator:
    try:
        return Indicator[name.upper()]
    except KeyError:
        raise ScenarioError(f"{path}: unknown indicator {name!r}") from None


def load_scenario(path: str | Path, seed_override: int | None = None) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc

    name = str(doc.get("name", path.stem))
    seed = int(doc.get("seed", 0)) if seed_override is None else seed_override
    duration_s = float(_expect(doc, "duration_s", "scenario"))
    if duration_s <= 0:
        raise ScenarioError("scenario.duration_s: must be > 0")

    world_ref = _expect(doc, "world", "scenario")
    world_path = (path.parent / world_ref).resolve()
    try:
        world = load_world(world_path)
    except WorldFormatError as exc:
        raise ScenarioError(f"scenario.world: {exc}") from exc

    try:
        params = VehicleParams(**doc.get("vehicle_params", {}))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"scenario.vehicle_params: {exc}") from exc
    vehicle_name = str(doc.get("vehicle_name", "demo"))

    uplink = _profile(doc.get("uplink", {}), "scenario.uplink", seed)
    downlink = _profile(doc.get("downlink", {}), "scenario.downlink", seed + 1)

    transforms: list[Transform] = []
    for i, tdoc in enumerate(doc.get("transforms", [])):
        tpath = f"scenario.transforms[{i}]"
        translation = tdoc.get("translation", [0.0, 0.0, 0.0])
        if len(translation) != 3:
            raise ScenarioError(f"{tpath}.translation: need [x, y, z]")
        rotation = Quaternion.from_yaw(float(tdoc.get("yaw", 0.0)))
        try:
            transforms.append(
                Transform(
                    _expect(tdoc, "parent", tpath),
                    _expect(tdoc, "child", tpath),
                    tuple(float(v) for v in translation),
                    rotation,
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"{tpath}: {exc}") from exc
    try:
        tree = TransformTree(transforms)
    except TransformError as exc:
        raise ScenarioError(f"scenario.transforms: {exc}") from exc

    rates = doc.get("rates", {})
    plant_dt = float(rates.get("plant_dt", 0.001))
    telemetry_hz = float(rates.get("telemetry_hz", 100.0))
    command_hz = float(rates.get("command_hz", 50.0))

    stream_doc = doc.get("stream", {})
    ladder = tuple(float(b) for b in stream_doc.get("ladder", (1e6, 2e6, 4e6)))
    try:
        initial_stream = StreamConfig(
            bitrate=float(stream_doc.get("bitrate", ladder[-1])),
            framerate=float(stream_doc.get("framerate", 40.0)),
            scaling=float(stream_doc.get("scaling", 1.0)),
            mode=RateMode(stream_doc.get("mode", "manual")),
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.stream: {exc}") from exc

    perception = doc.get("perception", {})
    scans: list[ScanSpec] = []
    cameras: list[CameraSpec] = []
    for i, sdoc in enumerate(doc.get("sensors", [])):
        spath = f"scenario.sensors[{i}]"
        kind = _expect(sdoc, "kind", spath)
        sensor_name = _expect(sdoc, "name", spath)
        frame = _expect(sdoc, "frame", spath)
        if frame not in tree.frames():
            raise ScenarioError(f"{spath}.frame: {frame!r} not in the transform tree")
        if kind == "laser":
            try:
                sp = ScanParams(
                    frame_id=frame,
                    angle_min=float(sdoc.get("angle_min", -3 * math.pi / 4)),
                    angle_max=float(sdoc.get("angle_max", 3 * math.pi / 4)),
                    angle_increment=float(sdoc.get("angle_increment", math.pi / 360)),
                    range_min=float(sdoc.get("range_min", 0.05)),
                    range_max=float(sdoc.get("range_max", 30.0)),
                    rate_hz=float(sdoc.get("rate_hz", 10.0)),
                )
            except ValueError as exc:
                raise ScenarioError(f"{spath}: {exc}") from exc
            scans.append(
                ScanSpec(
                    name=sensor_name,
                    params=sp,
                    cluster=bool(perception.get("cluster", False)),
                    d_c=float(perception.get("d_c", 0.5)),
                    min_pts=int(perception.get("min_pts", 3)),
                )
            )
        elif kind == "camera":
            cameras.append(CameraSpec(name=sensor_name, config=initial_stream))
        else:
            raise ScenarioError(f"{spath}.kind: unknown sensor kind {kind!r}")

    grid_params = None
    if perception.get("grid", False):
        resolution = float(perception.get("grid_resolution", 0.2))
        extent = float(perception.get("grid_extent", 40.0))
        cells = int(round(extent / resolution))
        grid_params = GridParams(resolution=resolution, width=cells, height=cells)

    trace_doc = doc.get("trace")
    interactive = bool(doc.get("interactive", False))
    if trace_doc is None and not interactive:
        raise ScenarioError("scenario: either a trace or interactive=true is required")
    trace = None
    if trace_doc is not None:
        trace = []
        last_t = -math.inf
        for i, entry in enumerate(trace_doc):
            tpath = f"scenario.trace[{i}]"
            t = float(_expect(entry, "t", tpath))
            if t <= last_t:
                raise ScenarioError(f"{tpath}.t: timestamps must be strictly increasing")
            last_t = t
            trace.append(
                (
                    t,
                    CommandSetpoint(
                        swa=float(entry.get("swa", 0.0)),
                        velocity=float(entry.get("velocity", 0.0)),
                        gear=_gear(entry.get("gear", "Park"), tpath),
                        indicator=_indicator(entry.get("indicator", "Off"), tpath),
                        estop=bool(entry.get("estop", False)),
                    ),
                )
            )
        if trace[-1][0] > duration_s:
            raise ScenarioError("scenario.trace: extends past duration_s")

    overrides: list[ProfileOverride] = []
    for i, odoc in enumerate(doc.get("profile_schedule", [])):
        opath = f"scenario.profile_schedule[{i}]"
        t = float(_expect(odoc, "t", opath))
        direction = odoc.get("direction", "both")
        if direction not in ("up", "down", "both"):
            raise ScenarioError(f"{opath}.direction: must be up, down or both")
        base_up = {
            "one_way_delay": uplink.one_way_delay,
            "jitter": uplink.jitter,
            "loss_prob": uplink.loss_prob,
            "bandwidth_cap": uplink.bandwidth_cap,
        }
        base_down = {
            "one_way_delay": downlink.one_way_delay,
            "jitter": downlink.jitter,
            "loss_prob": downlink.loss_prob,
            "bandwidth_cap": downlink.bandwidth_cap,
        }
        for key in ("one_way_delay", "jitter", "loss_prob", "bandwidth_cap"):
            if key in odoc:
                base_up[key] = odoc[key]
                base_down[key] = odoc[key]
        overrides.append(
            ProfileOverride(
                t=t,
                direction=direction,
                profile_up=_profile(base_up, opath, uplink.seed) if direction in ("up", "both") else None,
                profile_down=_profile(base_down, opath, downlink.seed)
                if direction in ("down", "both")
                else None,
            )
        )

    display = doc.get("display", {})
    vehicle_config = VehicleNodeConfig(
        name=vehicle_name,
        plant_dt=plant_dt,
        telemetry_rate_hz=telemetry_hz,
        scans=tuple(scans),
        cameras=tuple(cameras),
        grid=grid_params,
        lane_horizon=float(perception.get("lane_horizon", 20.0)),
        lane_points=int(perception.get("lane_points", 24)),
        lane_rate_hz=float(perception.get("lane_hz", 10.0)),
        publish_lane=bool(perception.get("lane", True)),
    )
    operator_config = OperatorNodeConfig(
        vehicle_name=vehicle_name,
        command_rate_hz=command_hz,
        display_hz=float(display.get("hz", 144.0)),
        processing_stub_s=float(display.get("processing_stub", 0.06)),
        scan_names=tuple(s.name for s in scans),
        camera_names=tuple(c.name for c in cameras),
        stream_ladder=ladder,
        stream_window_s=float(stream_doc.get("window_s", 1.0)),
        stream_cooldown=int(stream_doc.get("cooldown", 3)),
        initial_stream=initial_stream,
    )

    return Scenario(
        name=name,
        seed=seed,
        duration_s=duration_s,
        world=world,
        world_path=world_path,
        params=params,
        uplink=uplink,
        downlink=downlink,
        transforms=transforms,
        vehicle_config=vehicle_config,
        operator_config=operator_config,
        trace=trace,
        interactive=interactive,
        overrides=overrides,
    )
