"""Session manager: the operator-side connection state machine.

Phases: Idle -> Configured -> Connected -> Teleoperating, with
ConnectionLost reachable from any connected phase and Disconnect
returning to Configured. The Connect/ConnectAck handshake is tracked by
a pending flag on the state (there is no Connecting phase). Every
undefined (state, event) pair is rejected without a state change.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from ..perception.ratecontrol import RateMode


class SessionPhase(Enum):
    IDLE = "Idle"
    CONFIGURED = "Configured"
    CONNECTED = "Connected"
    TELEOPERATING = "Teleoperating"
    CONNECTION_LOST = "ConnectionLost"


class ControlMode(Enum):
    DIRECT = "DirectControl"


@dataclass(frozen=True)
class SessionState:
    phase: SessionPhase = SessionPhase.IDLE
    vehicle_endpoint: str | None = None
    operator_endpoint: str | None = None
    active_input_device: str | None = None
    control_mode: ControlMode = ControlMode.DIRECT
    video_rate_mode: RateMode = RateMode.MANUAL
    handshake_pending: bool = False


@dataclass(frozen=True)
class SetEndpoints:
    vehicle: str
    operator: str


@dataclass(frozen=True)
class Connect:
    pass


@dataclass(frozen=True)
class ConnectAck:
    pass


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class Disconnect:
    pass


@dataclass(frozen=True)
class ControlChannelLost:
    pass


@dataclass(frozen=True)
class SelectInputDevice:
    device: str


@dataclass(frozen=True)
class SelectControlMode:
    mode: ControlMode


@dataclass(frozen=True)
class SelectVideoRateMode:
    mode: RateMode


Event = (
    SetEndpoints
    | Connect
    | ConnectAck
    | Start
    | Stop
    | Disconnect
    | ControlChannelLost
    | SelectInputDevice
    | SelectControlMode
    | SelectVideoRateMode
)

EVENT_TYPES = (
    SetEndpoints,
    Connect,
    ConnectAck,
    Start,
    Stop,
    Disconnect,
    ControlChannelLost,
    SelectInputDevice,
    SelectControlMode,
    SelectVideoRateMode,
)


class TransitionRejected(Exception):
    """Undefined (state, event) pair or failed guard; carries the reason."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


_CONNECTED_PHASES = (SessionPhase.CONNECTED, SessionPhase.TELEOPERATING)


def manager_transition(s: SessionState, event: Event) -> tuple[SessionState, tuple[str, ...]]:
    """Apply one event; returns (new state, actions for the session loop)."""
    phase = s.phase

    if isinstance(event, SetEndpoints):
        if phase != SessionPhase.IDLE:
            raise TransitionRejected(f"SetEndpoints is only legal in Idle, not {phase.value}")
        return (
            replace(
                s,
                phase=SessionPhase.CONFIGURED,
                vehicle_endpoint=event.vehicle,
                operator_endpoint=event.operator,
            ),
            ("configure_links",),
        )

    if isinstance(event, Connect):
        if phase != SessionPhase.CONFIGURED:
            raise TransitionRejected(f"Connect is only legal in Configured, not {phase.value}")
        return replace(s, handshake_pending=True), ("open_control", "send_connect_request")

    if isinstance(event, ConnectAck):
        if phase != SessionPhase.CONFIGURED or not s.handshake_pending:
            raise TransitionRejected("ConnectAck without a pending Connect handshake")
        return (
            replace(s, phase=SessionPhase.CONNECTED, handshake_pending=False),
            ("announce_session",),
        )

    if isinstance(event, Start):
        if phase != SessionPhase.CONNECTED:
            raise TransitionRejected(f"Start is only legal in Connected, not {phase.value}")
        if s.active_input_device is None:
            raise TransitionRejected("Start requires an active input device")
        return replace(s, phase=SessionPhase.TELEOPERATING), ("start_dispatch",)

    if isinstance(event, Stop):
        if phase != SessionPhase.TELEOPERATING:
            raise TransitionRejected(f"Stop is only legal in Teleoperating, not {phase.value}")
        return replace(s, phase=SessionPhase.CONNECTED), ("stop_dispatch",)

    if isinstance(event, ControlChannelLost):
        if phase not in _CONNECTED_PHASES:
            raise TransitionRejected(f"no control channel to lose in {phase.value}")
        actions = ("stop_dispatch", "alert_connection_lost") if (
            phase == SessionPhase.TELEOPERATING
        ) else ("alert_connection_lost",)
        return replace(s, phase=SessionPhase.CONNECTION_LOST), actions

    if isinstance(event, Disconnect):
        if phase != SessionPhase.CONNECTION_LOST:
            raise TransitionRejected(
                f"Disconnect is only legal in ConnectionLost, not {phase.value}"
            )
        return replace(s, phase=SessionPhase.CONFIGURED, handshake_pending=False), ("reset_links",)

    if isinstance(event, SelectInputDevice):
        _require_connected(phase, "SelectInputDevice")
        return replace(s, active_input_device=event.device), ("apply_input_device",)

    if isinstance(event, SelectControlMode):
        _require_connected(phase, "SelectControlMode")
        return replace(s, control_mode=event.mode), ("apply_control_mode",)

    if isinstance(event, SelectVideoRateMode):
        _require_connected(phase, "SelectVideoRateMode")
        return replace(s, video_rate_mode=event.mode), ("apply_video_rate_mode",)

    raise TransitionRejected(f"unknown event {type(event).__name__}")


def _require_connected(phase: SessionPhase, name: str) -> None:
    if phase not in _CONNECTED_PHASES:
        raise TransitionRejected(
            f"{name} is only legal in Connected or Teleoperating, not {phase.value}"
        )
