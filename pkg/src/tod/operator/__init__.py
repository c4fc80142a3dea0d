"""Operator side: session manager, input mapping, dispatch, scene, metrics."""

from .dispatch import dispatch_direct
from .inputs import (
    AxisBinding,
    load_input_mapping,
    InputMapper,
    InputMapping,
    InputSample,
    map_inputs,
    shape_axis,
    shape_throttle,
)
from .manager import (
    EVENT_TYPES,
    Connect,
    ConnectAck,
    ControlChannelLost,
    ControlMode,
    Disconnect,
    Event,
    SelectControlMode,
    SelectInputDevice,
    SelectVideoRateMode,
    SessionPhase,
    SessionState,
    SetEndpoints,
    Start,
    Stop,
    TransitionRejected,
    manager_transition,
)
from .metrics import LoopMetrics, MetricsWindow, compute_metrics, estimate_lag_steps
from .scene import EntityKind, SceneEntity, SceneRegistry, update_scene

__all__ = [
    "dispatch_direct",
    "AxisBinding",
    "load_input_mapping",
    "InputMapper",
    "InputMapping",
    "InputSample",
    "map_inputs",
    "shape_axis",
    "shape_throttle",
    "EVENT_TYPES",
    "Connect",
    "ConnectAck",
    "ControlChannelLost",
    "ControlMode",
    "Disconnect",
    "Event",
    "SelectControlMode",
    "SelectInputDevice",
    "SelectVideoRateMode",
    "SessionPhase",
    "SessionState",
    "SetEndpoints",
    "Start",
    "Stop",
    "TransitionRejected",
    "manager_transition",
    "LoopMetrics",
    "MetricsWindow",
    "compute_metrics",
    "estimate_lag_steps",
    "EntityKind",
    "SceneEntity",
    "SceneRegistry",
    "update_scene",
]
