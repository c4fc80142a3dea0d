"""Direct Control dispatch: commands go to the vehicle only while
teleoperating; everywhere else the cycle emits nothing."""

from __future__ import annotations

from ..core.messages import WireMessage
from ..core.types import PrimaryCommand, SecondaryCommand
from .manager import SessionPhase, SessionState


def dispatch_direct(
    primary: PrimaryCommand,
    secondary: SecondaryCommand,
    session: SessionState,
    primary_topic: int = 1,
    secondary_topic: int = 2,
) -> list[WireMessage]:
    """Wire messages for one command cycle; empty outside Teleoperating."""
    if session.phase != SessionPhase.TELEOPERATING:
        return []
    return [
        WireMessage(primary_topic, primary.seq, primary.stamp_ns, primary),
        WireMessage(secondary_topic, secondary.seq, secondary.stamp_ns, secondary),
    ]
