"""Input device samples and their mapping into command pairs.

Axes are continuous in [-1, 1]; buttons are momentary booleans. Rising
button edges walk the gear order, toggle indicators and the E-stop. A
dead zone around axis zero is removed and the remainder rescaled so the
full deflection still reaches the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..core.types import (
    GEAR_ORDER,
    Gear,
    Indicator,
    PrimaryCommand,
    SecondaryCommand,
    VehicleParams,
)

MAX_DEAD_ZONE = 0.2


@dataclass(frozen=True)
class InputSample:
    device_id: str
    axes: tuple[float, ...]
    buttons: tuple[bool, ...]
    stamp_ns: int = 0

    def __post_init__(self) -> None:
        for a in self.axes:
            if not math.isfinite(a) or not -1.0 <= a <= 1.0:
                raise ValueError(f"axis value {a} outside [-1, 1]")


@dataclass(frozen=True)
class AxisBinding:
    axis: int
    invert: bool = False

    def read(self, sample: InputSample) -> float:
        if self.axis >= len(sample.axes):
            raise ValueError(f"axis {self.axis} not present on {sample.device_id}")
        value = sample.axes[self.axis]
        return -value if self.invert else value


@dataclass(frozen=True)
class InputMapping:
    steering: AxisBinding = AxisBinding(0)
    velocity: AxisBinding = AxisBinding(1)
    gear_up: int = 0
    gear_down: int = 1
    indicator_left: int = 2
    indicator_right: int = 3
    estop: int = 4
    dead_zone: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.dead_zone <= MAX_DEAD_ZONE:
            raise ValueError(f"dead_zone must be within [0, {MAX_DEAD_ZONE}]")
        buttons = (self.gear_up, self.gear_down, self.indicator_left, self.indicator_right, self.estop)
        if len(set(buttons)) != len(buttons):
            raise ValueError("button bindings must be distinct")


def shape_axis(value: float, dead_zone: float) -> float:
    """Symmetric dead zone with rescaled remainder; odd in its argument."""
    if abs(value) <= dead_zone:
        return 0.0
    span = 1.0 - dead_zone
    return math.copysign((abs(value) - dead_zone) / span, value)


def shape_throttle(value: float, dead_zone: float) -> float:
    """One-sided shaping: values at or below the dead zone give zero."""
    if value <= dead_zone:
        return 0.0
    return (value - dead_zone) / (1.0 - dead_zone)


def _button(sample: InputSample, index: int) -> bool:
    return index < len(sample.buttons) and sample.buttons[index]


def map_inputs(
    sample: InputSample,
    mapping: InputMapping,
    params: VehicleParams,
    previous_secondary: SecondaryCommand,
    previous_buttons: tuple[bool, ...] = (),
) -> tuple[PrimaryCommand, SecondaryCommand]:
    """Map one sample; sequence numbers and stamps are the caller's job."""

    def rising(index: int) -> bool:
        was = index < len(previous_buttons) and previous_buttons[index]
        return _button(sample, index) and not was

    secondary = previous_secondary
    if rising(mapping.gear_up):
        i = GEAR_ORDER.index(secondary.gear)
        if i + 1 < len(GEAR_ORDER):
            secondary = replace(secondary, gear=GEAR_ORDER[i + 1])
    if rising(mapping.gear_down):
        i = GEAR_ORDER.index(secondary.gear)
        if i > 0:
            secondary = replace(secondary, gear=GEAR_ORDER[i - 1])
    if rising(mapping.indicator_left):
        new = Indicator.OFF if secondary.indicator == Indicator.LEFT else Indicator.LEFT
        secondary = replace(secondary, indicator=new)
    if rising(mapping.indicator_right):
        new = Indicator.OFF if secondary.indicator == Indicator.RIGHT else Indicator.RIGHT
        secondary = replace(secondary, indicator=new)
    if rising(mapping.estop):
        secondary = replace(secondary, estop_engaged=not secondary.estop_engaged)

    desired_swa = shape_axis(mapping.steering.read(sample), mapping.dead_zone) * params.max_swa
    magnitude = shape_throttle(mapping.velocity.read(sample), mapping.dead_zone) * params.max_speed
    desired_velocity = -magnitude if secondary.gear == Gear.REVERSE else magnitude

    primary = PrimaryCommand(
        desired_swa=desired_swa, desired_velocity=desired_velocity, stamp_ns=sample.stamp_ns
    )
    return primary, secondary


def load_input_mapping(path) -> InputMapping:
    """Parse a mapping file: one `signal = binding` line per signal.

        steering = axis 0 [invert]
        velocity = axis 1
        gear_up = button 0
        dead_zone = 0.05

    Unknown signals and malformed bindings raise ValueError with the line
    number; unspecified signals keep their defaults.
    """
    from pathlib import Path

    axis_signals = {"steering", "velocity"}
    button_signals = {"gear_up", "gear_down", "indicator_left", "indicator_right", "estop"}
    fields: dict[str, object] = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'signal = binding'")
        signal, binding = (part.strip() for part in line.split("=", 1))
        parts = binding.split()
        try:
            if signal in axis_signals:
                if not parts or parts[0] != "axis":
                    raise ValueError("axis signals need 'axis <index> [invert]'")
                fields[signal] = AxisBinding(int(parts[1]), invert="invert" in parts[2:])
            elif signal in button_signals:
                if not parts or parts[0] != "button":
                    raise ValueError("button signals need 'button <index>'")
                fields[signal] = int(parts[1])
            elif signal == "dead_zone":
                fields[signal] = float(parts[0])
            else:
                raise ValueError(f"unknown signal {signal!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"{path}:{line_no}: {exc}") from exc
    return InputMapping(**fields)  # type: ignore[arg-type]


class InputMapper:
    """Stateful wrapper: edge memory, sequence numbers, device filter."""

    def __init__(self, mapping: InputMapping, params: VehicleParams, active_device: str):
        self.mapping = mapping
        self.params = params
        self.active_device = active_device
        self._prev_buttons: tuple[bool, ...] = ()
        self._secondary = SecondaryCommand()
        self._primary_seq = 0
        self._secondary_seq = 0
        self.ignored_samples = 0

    def map(self, sample: InputSample, now_ns: int) -> tuple[PrimaryCommand, SecondaryCommand] | None:
        """None for samples from inactive devices (counted, ignored)."""
        if sample.device_id != self.active_device:
            self.ignored_samples += 1
            return None
        primary, secondary = map_inputs(
            sample, self.mapping, self.params, self._secondary, self._prev_buttons
        )
        self._prev_buttons = sample.buttons
        self._secondary = secondary
        primary = replace(primary, seq=self._primary_seq, stamp_ns=now_ns)
        secondary = replace(secondary, seq=self._secondary_seq, stamp_ns=now_ns)
        self._primary_seq += 1
        self._secondary_seq += 1
        self._secondary = replace(self._secondary, seq=secondary.seq, stamp_ns=now_ns)
        return primary, secondary
