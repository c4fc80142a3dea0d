"""Operator-side node: session loop, command cycle, telemetry intake.

The node owns the SessionState and the scene registry, runs the command
cycle at a fixed rate, logs desired/actual signal pairs for the metrics
module, models the display pipeline for glass-to-glass measurement when
running headless, and drives the stream rate controller from receive-side
link statistics.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Callable

from ..core.codec import TopicRegistry, encode_message
from ..core.geometry import TransformTree
from ..core.messages import ClockProbe, StatusBody, WireMessage
from ..core.types import (
    CommandRejected,
    DriveMode,
    Gear,
    Indicator,
    PrimaryCommand,
    SecondaryCommand,
    VehicleParams,
    clamp_primary,
)
from ..netlink.clocksync import ZERO_SYNC, ClockSyncEstimator, SampleRejected
from ..netlink.control import ControlClient, ControlDelivery
from ..netlink.virtualtime import Scheduler
from ..perception.ratecontrol import (
    RateMode,
    StreamConfig,
    StreamRateController,
    encode_stream_config,
)
from .dispatch import dispatch_direct
from .inputs import InputMapper, InputSample
from .manager import (
    ConnectAck,
    ControlChannelLost,
    Event,
    SessionPhase,
    SessionState,
    TransitionRejected,
    manager_transition,
)
from .metrics import LoopMetrics, MetricsWindow, compute_metrics
from .scene import SceneRegistry


@dataclass(frozen=True)
class CommandSetpoint:
    """One command cycle's worth of operator intent."""

    swa: float = 0.0
    velocity: float = 0.0
    gear: Gear = Gear.PARK
    indicator: Indicator = Indicator.OFF
    estop: bool = False


class ScriptedSource:
    """Samples a time-stamped trace: linear interpolation for the
    continuous channels, last-value hold for the discrete ones."""

    def __init__(self, entries: list[tuple[float, CommandSetpoint]]):
        if not entries:
            raise ValueError("trace must not be empty")
        times = [t for t, _ in entries]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trace timestamps must be strictly increasing")
        self._entries = entries

    def sample(self, t_s: float) -> CommandSetpoint:
        entries = self._entries
        if t_s <= entries[0][0]:
            return entries[0][1]
        if t_s >= entries[-1][0]:
            return entries[-1][1]
        lo, hi = 0, len(entries) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if entries[mid][0] <= t_s:
                lo = mid
            else:
                hi = mid
        t0, a = entries[lo]
        t1, b = entries[hi]
        f = (t_s - t0) / (t1 - t0)
        return CommandSetpoint(
            swa=a.swa + f * (b.swa - a.swa),
            velocity=a.velocity + f * (b.velocity - a.velocity),
            gear=a.gear,
            indicator=a.indicator,
            estop=a.estop,
        )


class InteractiveSource:
    """Maps the most recent input-device sample each command cycle."""

    def __init__(self, mapper: InputMapper):
        self.mapper = mapper
        self._latest: InputSample | None = None
        self._secondary = SecondaryCommand()

    def push_sample(self, sample: InputSample) -> None:
        self._latest = sample

    def sample(self, t_s: float) -> CommandSetpoint | None:
        if self._latest is None:
            return None
        mapped = self.mapper.map(self._latest, now_ns=int(t_s * 1e9))
        if mapped is None:
            return None
        primary, secondary = mapped
        self._secondary = secondary
        return CommandSetpoint(
            swa=primary.desired_swa,
            velocity=primary.desired_velocity,
            gear=secondary.gear,
            indicator=secondary.indicator,
            estop=secondary.estop_engaged,
        )


@dataclass(frozen=True)
class OperatorNodeConfig:
    vehicle_name: str = "demo"
    command_rate_hz: float = 50.0
    clock_probe_hz: float = 1.0
    display_hz: float = 144.0
    processing_stub_s: float = 0.06
    headless_display: bool = True
    scan_names: tuple[str, ...] = ()
    camera_names: tuple[str, ...] = ()
    stream_ladder: tuple[float, ...] = (1_000_000.0, 2_000_000.0, 4_000_000.0)
    stream_window_s: float = 1.0
    stream_cooldown: int = 3
    initial_stream: StreamConfig = field(default_factory=StreamConfig)


@dataclass(frozen=True)
class LogRow:
    t: float
    desired_swa: float
    actual_swa: float
    desired_v: float
    actual_v: float
    gear: Gear
    estop: bool
    mode: DriveMode


class OperatorNode:
    def __init__(
        self,
        scheduler: Scheduler,
        endpoint,
        control: ControlClient,
        registry: TopicRegistry,
        params: VehicleParams,
        tree: TransformTree,
        config: OperatorNodeConfig,
        command_source: ScriptedSource | InteractiveSource | None = None,
    ):
        self.scheduler = scheduler
        self.endpoint = endpoint
        self.control = control
        self.registry = registry
        self.params = params
        self.config = config
        self.command_source = command_source
        self.session = SessionState()
        self.estimator = ClockSyncEstimator()
        self.metrics_window = MetricsWindow()
        self.log_rows: list[LogRow] = []
        self.sent_primary = 0
        self.send_failures = 0
        self.session_listeners: list[Callable[[SessionState, str | None], None]] = []
        self._event_lock = threading.RLock()
        self._start_ns = scheduler.now_ns()
        self._primary_seq = 0
        self._secondary_seq = 0
        self._latest_state = None
        self._running = False
        self._status_sub = None
        self.stream_cfg = config.initial_stream
        self.rate_controller = StreamRateController(
            config.stream_ladder, cooldown=config.stream_cooldown
        )

        v = config.vehicle_name
        self._topic_primary = registry.by_name("/operator/cmd_primary").topic_id
        self._topic_secondary = registry.by_name("/operator/cmd_secondary").topic_id
        self._topic_probe = registry.by_name("/operator/clock_probe").topic_id
        self._session_topic = registry.by_name("/operator/session").topic_id

        scan_topics = {
            registry.by_name(f"/vehicle/{v}/scan/{n}").topic_id: n for n in config.scan_names
        }
        camera_topics = {
            registry.by_name(f"/vehicle/{v}/frame/{n}").topic_id: n for n in config.camera_names
        }
        objects_topics = {}
        for n in config.scan_names:
            try:
                objects_topics[registry.by_name(f"/vehicle/{v}/objects/{n}").topic_id] = n
            except Exception:
                pass
        self._state_topic = registry.by_name(f"/vehicle/{v}/state").topic_id
        lane_topic = registry.by_name(f"/vehicle/{v}/lane").topic_id
        grid_topic = registry.by_name(f"/vehicle/{v}/grid").topic_id
        self.scene = SceneRegistry(
            tree,
            scan_topics=scan_topics,
            camera_topics=camera_topics,
            lane_topic=lane_topic,
            state_topic=self._state_topic,
            objects_topics=objects_topics,
            grid_topic=grid_topic,
        )
        self.scene.on_frame(self._on_frame)

        self._subs = [
            endpoint.subscribe(t)
            for t in [self._state_topic, lane_topic, grid_topic]
            + sorted(scan_topics)
            + sorted(objects_topics)
        ]
        self._frame_subs = {t: endpoint.subscribe(t) for t in sorted(camera_topics)}
        self._reply_sub = endpoint.subscribe(registry.by_name(f"/vehicle/{v}/clock_reply").topic_id)

    # -- session management ------------------------------------------------

    def handle_event(self, event: Event) -> tuple[bool, str | None]:
        """Apply a manager event; returns (accepted, rejection_reason)."""
        with self._event_lock:
            try:
                self.session, actions = manager_transition(self.session, event)
            except TransitionRejected as exc:
                self._notify_session(exc.reason)
                return False, exc.reason
            for action in actions:
                self._run_action(action)
        self._publish_session()
        self._notify_session(None)
        return True, None

    def _run_action(self, action: str) -> None:
        if action == "send_connect_request":
            if self._status_sub is None:
                self._status_sub = self.control.subscribe(
                    f"/vehicle/{self.config.vehicle_name}/status"
                )
                self._status_sub.set_listener(self._on_vehicle_status)
                self._status_sub.on_terminate(self._on_control_lost)
        elif action == "apply_input_device":
            source = self.command_source
            if isinstance(source, InteractiveSource) and self.session.active_input_device:
                source.mapper.active_device = self.session.active_input_device

    def _on_vehicle_status(self, delivery: ControlDelivery) -> None:
        if self.session.phase == SessionPhase.CONFIGURED and self.session.handshake_pending:
            self.handle_event(ConnectAck())

    def _on_control_lost(self) -> None:
        if self.session.phase in (SessionPhase.CONNECTED, SessionPhase.TELEOPERATING):
            self.handle_event(ControlChannelLost())

    def _publish_session(self) -> None:
        now = self.scheduler.now_ns()
        body = StatusBody("operator", self.session.phase.value, now)
        try:
            self.control.publish(
                "/operator/session",
                encode_message(WireMessage(self._session_topic, 0, now, body)),
                retain=True,
            )
        except Exception:
            pass

    def _notify_session(self, rejection: str | None) -> None:
        for listener in self.session_listeners:
            listener(self.session, rejection)

    # -- periodic activities -------------------------------------------------

    def start(self) -> None:
        self._running = True
        self._start_ns = self.scheduler.now_ns()
        self._schedule_tick(int(1e9 / self.config.command_rate_hz), self._command_tick)
        self._schedule_tick(int(1e9 / self.config.clock_probe_hz), self._probe_tick)
        self._schedule_tick(int(self.config.stream_window_s * 1e9), self._stats_tick)

    def stop(self) -> None:
        self._running = False

    def _schedule_tick(self, period_ns: int, fn) -> None:
        def tick() -> None:
            if not self._running:
                return
            fn()
            self.scheduler.call_after(period_ns, tick)

        self.scheduler.call_after(period_ns, tick)

    def t_s(self) -> float:
        return (self.scheduler.now_ns() - self._start_ns) / 1e9

    def _drain_telemetry(self) -> None:
        for sub in self._subs:
            while (d := sub.poll()) is not None:
                if d.message.topic_id == self._state_topic and not d.stale:
                    self._latest_state = d.message.payload
                self.scene.apply(d.message)
        for sub in self._frame_subs.values():
            while (d := sub.poll()) is not None:
                if self.scene.apply(d.message) and not d.stale:
                    self._schedule_display(d.message.payload, d.recv_stamp_ns)
        while (d := self._reply_sub.poll()) is not None:
            probe: ClockProbe = d.message.payload
            try:
                self.estimator.update(
                    probe.orig_ns, probe.recv_ns, probe.send_ns, d.recv_stamp_ns
                )
            except SampleRejected:
                pass

    def _command_tick(self) -> None:
        now = self.scheduler.now_ns()
        self._drain_telemetry()
        if self.session.phase != SessionPhase.TELEOPERATING or self.command_source is None:
            return
        setpoint = self.command_source.sample(self.t_s())
        if setpoint is None:
            return
        primary = PrimaryCommand(
            desired_swa=setpoint.swa,
            desired_velocity=setpoint.velocity,
            seq=self._primary_seq,
            stamp_ns=now,
        )
        try:
            primary = clamp_primary(primary, self.params)
        except CommandRejected:
            return
        secondary = SecondaryCommand(
            gear=setpoint.gear,
            indicator=setpoint.indicator,
            estop_engaged=setpoint.estop,
            seq=self._secondary_seq,
            stamp_ns=now,
        )
        self._primary_seq += 1
        self._secondary_seq += 1
        for msg in dispatch_direct(
            primary, secondary, self.session, self._topic_primary, self._topic_secondary
        ):
            try:
                self.endpoint.send_message(msg)
                if msg.topic_id == self._topic_primary:
                    self.sent_primary += 1
            except Exception:
                self.send_failures += 1
        self.scene.note_command(primary, secondary)
        self._log_row(now, primary)

    def _log_row(self, now_ns: int, primary: PrimaryCommand) -> None:
        state = self._latest_state
        actual_swa = state.swa if state is not None else 0.0
        actual_v = state.velocity if state is not None else 0.0
        self.log_rows.append(
            LogRow(
                t=round((now_ns - self._start_ns) / 1e9, 9),
                desired_swa=primary.desired_swa,
                actual_swa=actual_swa,
                desired_v=primary.desired_velocity,
                actual_v=actual_v,
                gear=state.gear if state is not None else Gear.PARK,
                estop=state.estop_engaged if state is not None else False,
                mode=state.mode if state is not None else DriveMode.NORMAL,
            )
        )
        self.metrics_window.add_row(
            now_ns, primary.desired_swa, actual_swa, primary.desired_velocity, actual_v
        )

    def _probe_tick(self) -> None:
        try:
            self.endpoint.send(self._topic_probe, ClockProbe(orig_ns=self.scheduler.now_ns()))
        except Exception:
            pass

    def _stats_tick(self) -> None:
        now = self.scheduler.now_ns()
        if not self._frame_subs:
            return
        delivered = sum(
            sub.stats.delivered_bytes_per_s(now) for sub in self._frame_subs.values()
        )
        view = next(iter(self._frame_subs.values())).stats.snapshot(now)
        view = replace(view, delivered_bytes_per_s=delivered)
        cfg = replace(
            self.stream_cfg,
            mode=RateMode.AUTOMATIC
            if self.session.video_rate_mode == RateMode.AUTOMATIC
            else RateMode.MANUAL,
        )
        new_cfg = self.rate_controller.adapt(view, cfg)
        if new_cfg.bitrate != self.stream_cfg.bitrate:
            self.stream_cfg = new_cfg
            try:
                self.control.publish(
                    f"/vehicle/{self.config.vehicle_name}/stream_config",
                    encode_stream_config(new_cfg),
                    retain=True,
                )
            except Exception:
                pass
        else:
            self.stream_cfg = new_cfg

    # -- display pipeline ----------------------------------------------------

    def _on_frame(self, frame) -> None:
        # Canvas metadata comes through the scene registry; display
        # scheduling happens in _drain_telemetry with the receive stamp.
        pass

    def _schedule_display(self, frame, recv_ns: int) -> None:
        """Headless display model: decode/render stub, then the next refresh."""
        if not self.config.headless_display:
            return
        period_ns = int(1e9 / self.config.display_hz)
        ready = recv_ns + int(self.config.processing_stub_s * 1e9)
        display_at = ((ready + period_ns - 1) // period_ns) * period_ns
        camera = frame.camera_id
        stamp = frame.stamp_ns

        def ack() -> None:
            self.metrics_window.add_frame_event(camera, stamp, display_at)

        self.scheduler.call_at(display_at, ack)

    def record_render_ack(self, camera: str, frame_stamp_ns: int, ack_ns: int | None = None) -> None:
        """UI-supplied display acknowledgment (interactive mode)."""
        self.metrics_window.add_frame_event(
            camera, frame_stamp_ns, self.scheduler.now_ns() if ack_ns is None else ack_ns
        )

    def compute_metrics(self) -> LoopMetrics:
        sync = self.estimator.current or ZERO_SYNC
        return compute_metrics(
            self.metrics_window, sync, command_period_s=1.0 / self.config.command_rate_hz
        )
