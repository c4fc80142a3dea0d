"""Vehicle side: plant, bridge validation, watchdog, sensor generation."""

from .bridge import (
    GEAR_CHANGE_SPEED,
    IngestResult,
    Watchdog,
    ingest_command,
    watchdog_check,
)
from .plant import Actuation, Plant
from .sensors import FrameStream, ScanParams, frame_digest, scan_world, simulated_frame_size
from .world import Bounds, Circle, Segment, World, WorldFormatError, load_world

__all__ = [
    "GEAR_CHANGE_SPEED",
    "IngestResult",
    "Watchdog",
    "ingest_command",
    "watchdog_check",
    "Actuation",
    "Plant",
    "FrameStream",
    "ScanParams",
    "frame_digest",
    "scan_world",
    "simulated_frame_size",
    "Bounds",
    "Circle",
    "Segment",
    "World",
    "WorldFormatError",
    "load_world",
]
