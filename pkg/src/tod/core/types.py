"""Command and telemetry value types shared across vehicle and operator sides."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

from .geometry import Pose2D


class Gear(IntEnum):
    PARK = 0
    REVERSE = 1
    NEUTRAL = 2
    DRIVE = 3


# Gear-up/gear-down buttons walk this order.
GEAR_ORDER = (Gear.PARK, Gear.REVERSE, Gear.NEUTRAL, Gear.DRIVE)


class Indicator(IntEnum):
    OFF = 0
    LEFT = 1
    RIGHT = 2
    HAZARD = 3


class DriveMode(IntEnum):
    NORMAL = 0
    SAFE_STOP = 1


class CommandRejected(Exception):
    """Raised when a command cannot be validated (e.g. non-finite fields)."""


@dataclass(frozen=True)
class VehicleParams:
    """Static vehicle configuration: geometry, actuation limits, dynamics.

    wheelbase_l and track_width_w are meters, steering_ratio_i_s maps the
    steering wheel angle to the road wheel angle (rwa = swa / i_s), max_swa
    is the steering wheel limit in radians, steer_delay is the pure actuator
    delay, velocity_tau the first-order longitudinal time constant, and
    command_timeout the watchdog window.
    """

    wheelbase_l: float = 2.9
    track_width_w: float = 1.62
    steering_ratio_i_s: float = 16.0
    max_swa: float = 7.85
    max_speed: float = 10.0
    max_decel: float = 3.0
    steer_delay: float = 0.04
    velocity_tau: float = 0.4
    command_timeout: float = 0.5

    def __post_init__(self) -> None:
        for name in (
            "wheelbase_l",
            "track_width_w",
            "steering_ratio_i_s",
            "max_swa",
            "max_speed",
            "max_decel",
            "velocity_tau",
            "command_timeout",
        ):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        if not math.isfinite(self.steer_delay) or self.steer_delay < 0.0:
            raise ValueError(f"steer_delay must be finite and >= 0, got {self.steer_delay}")
        if self.max_swa / self.steering_ratio_i_s >= math.pi / 2:
            raise ValueError("max_swa / steering_ratio_i_s must stay below pi/2")

    @property
    def max_rwa(self) -> float:
        return self.max_swa / self.steering_ratio_i_s


@dataclass(frozen=True)
class PrimaryCommand:
    """Lateral + longitudinal motion request from the operator."""

    desired_swa: float = 0.0
    desired_velocity: float = 0.0
    seq: int = 0
    stamp_ns: int = 0


@dataclass(frozen=True)
class SecondaryCommand:
    """Gear, indicator and emergency-stop request from the operator."""

    gear: Gear = Gear.PARK
    indicator: Indicator = Indicator.OFF
    estop_engaged: bool = False
    seq: int = 0
    stamp_ns: int = 0


@dataclass(frozen=True)
class VehicleState:
    """Telemetry snapshot reported by the vehicle."""

    pose: Pose2D = Pose2D()
    velocity: float = 0.0
    swa: float = 0.0
    gear: Gear = Gear.PARK
    indicator: Indicator = Indicator.OFF
    estop_engaged: bool = False
    mode: DriveMode = DriveMode.NORMAL
    stamp_ns: int = 0


def clamp_primary(cmd: PrimaryCommand, params: VehicleParams) -> PrimaryCommand:
    """Saturate a primary command to the vehicle's actuation limits.

    Idempotent; rejects non-finite inputs outright so they are never
    forwarded to the plant.
    """
    if not (math.isfinite(cmd.desired_swa) and math.isfinite(cmd.desired_velocity)):
        raise CommandRejected(
            f"non-finite primary command: swa={cmd.desired_swa}, velocity={cmd.desired_velocity}"
        )
    swa = min(max(cmd.desired_swa, -params.max_swa), params.max_swa)
    vel = min(max(cmd.desired_velocity, -params.max_speed), params.max_speed)
    if swa == cmd.desired_swa and vel == cmd.desired_velocity:
        return cmd
    return replace(cmd, desired_swa=swa, desired_velocity=vel)
