"""Shared domain types, transforms, limits and the wire codec."""

from .codec import (
    registry_for,
    HEADER_LEN,
    BadMagicError,
    CodecError,
    LengthMismatchError,
    OversizeError,
    TopicRegistry,
    TruncatedError,
    UnknownTopicError,
    UnknownVersionError,
    decode_message,
    default_registry,
    encode_message,
)
from .geometry import (
    Pose2D,
    Quaternion,
    RigidTransform,
    Transform,
    TransformError,
    TransformTree,
    normalize_angle,
    resolve_transform,
)
from .messages import (
    NO_RETURN,
    Body,
    ClockProbe,
    DetectedObject,
    FramePacket,
    Heartbeat,
    LanePolylines,
    LaserScan,
    ObjectList,
    OccupancyGrid,
    StatusBody,
    WireMessage,
)
from .types import (
    GEAR_ORDER,
    CommandRejected,
    DriveMode,
    Gear,
    Indicator,
    PrimaryCommand,
    SecondaryCommand,
    VehicleParams,
    VehicleState,
    clamp_primary,
)

__all__ = [
    "HEADER_LEN",
    "BadMagicError",
    "CodecError",
    "LengthMismatchError",
    "OversizeError",
    "TopicRegistry",
    "TruncatedError",
    "UnknownTopicError",
    "UnknownVersionError",
    "decode_message",
    "default_registry",
    "registry_for",
    "encode_message",
    "Pose2D",
    "Quaternion",
    "RigidTransform",
    "Transform",
    "TransformError",
    "TransformTree",
    "normalize_angle",
    "resolve_transform",
    "NO_RETURN",
    "Body",
    "ClockProbe",
    "DetectedObject",
    "FramePacket",
    "Heartbeat",
    "LanePolylines",
    "LaserScan",
    "ObjectList",
    "OccupancyGrid",
    "StatusBody",
    "WireMessage",
    "GEAR_ORDER",
    "CommandRejected",
    "DriveMode",
    "Gear",
    "Indicator",
    "PrimaryCommand",
    "SecondaryCommand",
    "VehicleParams",
    "VehicleState",
    "clamp_primary",
]
