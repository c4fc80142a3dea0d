"""Fixed-step kinematic bicycle plant with pure-delay steering.

Steering tracks its setpoint through an exact delay line (no shape
distortion), so loop-latency contributions stay additive. Velocity is a
first-order lag discretized exactly; a SafeStop or engaged E-stop
overrides the setpoint with a constant-rate ramp to zero at max_decel.
Pose integrates with explicit Euler using start-of-step velocity.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

from ..core.geometry import Pose2D, normalize_angle
from ..core.types import DriveMode, Gear, Indicator, VehicleParams, VehicleState

MAX_DT = 0.05


@dataclass(frozen=True)
class Actuation:
    """Validated setpoints the bridge hands to the plant."""

    swa_setpoint: float = 0.0
    velocity_setpoint: float = 0.0
    source_seq: int = 0
    applied_at_ns: int = 0


class Plant:
    """Owns VehicleState plus the steering delay line; steps at a fixed dt."""

    def __init__(
        self,
        params: VehicleParams,
        dt: float = 0.001,
        initial: VehicleState | None = None,
    ):
        if not 0.0 < dt <= MAX_DT:
            raise ValueError(f"dt must be in (0, {MAX_DT}], got {dt}")
        self.params = params
        self.dt = dt
        self.state = initial if initial is not None else VehicleState()
        self._delay_steps = round(params.steer_delay / dt)
        self._delay_line: deque[float] = deque(
            [self.state.swa] * self._delay_steps, maxlen=self._delay_steps + 1
        )

    def set_status(
        self,
        gear: Gear | None = None,
        indicator: Indicator | None = None,
        estop_engaged: bool | None = None,
        mode: DriveMode | None = None,
    ) -> None:
        """Update the non-dynamic state fields the bridge controls."""
        s = self.state
        self.state = replace(
            s,
            gear=s.gear if gear is None else gear,
            indicator=s.indicator if indicator is None else indicator,
            estop_engaged=s.estop_engaged if estop_engaged is None else estop_engaged,
            mode=s.mode if mode is None else mode,
        )

    def step(self, act: Actuation, stamp_ns: int = 0) -> VehicleState:
        """Advance one fixed step under the given (pre-validated) actuation."""
        s = self.state
        p = self.params
        dt = self.dt

        # Steering: pure delay of round(steer_delay/dt) steps.
        if self._delay_steps > 0:
            self._delay_line.append(act.swa_setpoint)
            swa = self._delay_line.popleft()
        else:
            swa = act.swa_setpoint

        # Pose: explicit Euler with start-of-step velocity, in-effect swa.
        v = s.velocity
        yaw = s.pose.yaw
        x = s.pose.x + v * math.cos(yaw) * dt
        y = s.pose.y + v * math.sin(yaw) * dt
        yaw = normalize_angle(yaw + v * math.tan(swa / p.steering_ratio_i_s) / p.wheelbase_l * dt)

        # Velocity: SafeStop/E-stop ramps to zero at max_decel; otherwise a
        # gear/sign-gated first-order lag toward the setpoint.
        if s.mode == DriveMode.SAFE_STOP or s.estop_engaged:
            step_dv = p.max_decel * dt
            v_new = math.copysign(max(0.0, abs(v) - step_dv), v)
        else:
            v_sp = act.velocity_setpoint
            if s.gear == Gear.DRIVE:
                v_sp = max(0.0, v_sp)
            elif s.gear == Gear.REVERSE:
                v_sp = min(0.0, v_sp)
            else:
                v_sp = 0.0
            alpha = math.exp(-dt / p.velocity_tau)
            v_new = v_sp + (v - v_sp) * alpha

        self.state = replace(
            s, pose=Pose2D(x, y, yaw), velocity=v_new, swa=swa, stamp_ns=stamp_ns
        )
        return self.state
