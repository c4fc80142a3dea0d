"""Bridge duties: validate operator commands, gate gear changes, watchdog.

The bridge never forwards anything outside the vehicle's limits: primary
commands are clamped, gear changes are honored only near standstill, a
velocity sign inconsistent with the gear zeroes the setpoint, and an
engaged E-stop forces SafeStop regardless of the rest of the command.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..core.types import (
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
from .plant import Actuation

# Gear-change requests are honored only below this speed.
GEAR_CHANGE_SPEED = 0.1

# Velocity at or below this counts as standstill for watchdog release.
STANDSTILL_SPEED = 1e-9


@dataclass(frozen=True)
class IngestResult:
    """Validated actuation plus the status fields the command sets."""

    actuation: Actuation
    gear: Gear
    indicator: Indicator
    estop_engaged: bool


def ingest_command(
    primary: PrimaryCommand,
    secondary: SecondaryCommand,
    state: VehicleState,
    params: VehicleParams,
    now_ns: int,
) -> IngestResult:
    """Validate a non-stale command pair into an Actuation.

    Raises CommandRejected for non-finite primary fields; stale commands
    are the caller's responsibility (dropped and counted at the receive
    path, never passed here).
    """
    primary = clamp_primary(primary, params)

    gear = state.gear
    if secondary.gear != state.gear and abs(state.velocity) < GEAR_CHANGE_SPEED:
        gear = secondary.gear

    velocity_setpoint = primary.desired_velocity
    if secondary.estop_engaged:
        velocity_setpoint = 0.0
    elif gear == Gear.DRIVE and velocity_setpoint < 0.0:
        velocity_setpoint = 0.0
    elif gear == Gear.REVERSE and velocity_setpoint > 0.0:
        velocity_setpoint = 0.0
    elif gear in (Gear.PARK, Gear.NEUTRAL):
        velocity_setpoint = 0.0

    act = Actuation(
        swa_setpoint=primary.desired_swa,
        velocity_setpoint=velocity_setpoint,
        source_seq=primary.seq,
        applied_at_ns=now_ns,
    )
    return IngestResult(act, gear, secondary.indicator, secondary.estop_engaged)


def watchdog_check(last_cmd_ns: int, now_ns: int, params: VehicleParams) -> DriveMode:
    """Stateless timeout test: SafeStop iff the command gap exceeds the window."""
    timeout_ns = int(params.command_timeout * 1e9)
    return DriveMode.SAFE_STOP if now_ns - last_cmd_ns > timeout_ns else DriveMode.NORMAL


class Watchdog:
    """Latching watchdog: once tripped, SafeStop holds until commands are
    fresh again AND the vehicle has reached standstill."""

    def __init__(self, params: VehicleParams, now_ns: int = 0):
        self._timeout_ns = int(params.command_timeout * 1e9)
        self._last_cmd_ns = now_ns
        self._latched = False

    @property
    def last_cmd_ns(self) -> int:
        return self._last_cmd_ns

    def command_received(self, now_ns: int) -> None:
        self._last_cmd_ns = now_ns

    def check(self, now_ns: int, velocity: float) -> DriveMode:
        if now_ns - self._last_cmd_ns > self._timeout_ns:
            self._latched = True
        elif self._latched and abs(velocity) <= STANDSTILL_SPEED:
            self._latched = False
        return DriveMode.SAFE_STOP if self._latched else DriveMode.NORMAL
