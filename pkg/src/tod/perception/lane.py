"""Constant-steering lane prediction from the kinematic bicycle geometry.

With the road wheel angle held constant the rear axle traces a circle of
radius R = L / tan(delta) about the instantaneous center (0, R) in the
vehicle frame. The two front-edge corner points (L, +/-W/2) sweep about
the same center; sampling that sweep at equal fractions of the horizon
(measured as rear-axle arc length) yields the lane polylines.
"""

from __future__ import annotations

import math

from ..core.messages import LanePolylines
from ..core.types import VehicleParams

# Below this road wheel angle the arc degenerates to straight rays.
STRAIGHT_DELTA = 1e-4


def predict_lane(
    swa: float, params: VehicleParams, horizon: float, n_points: int = 32
) -> LanePolylines:
    if not math.isfinite(swa):
        raise ValueError(f"swa must be finite, got {swa}")
    if abs(swa) > params.max_swa + 1e-12:
        raise ValueError(f"|swa| {abs(swa)} exceeds max_swa {params.max_swa}")
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")

    length = params.wheelbase_l
    half_w = 0.5 * params.track_width_w
    delta = swa / params.steering_ratio_i_s

    if abs(delta) < STRAIGHT_DELTA:
        step = horizon / (n_points - 1)
        left = tuple((length + k * step, half_w) for k in range(n_points))
        right = tuple((length + k * step, -half_w) for k in range(n_points))
        return LanePolylines(swa_used=swa, horizon=horizon, left=left, right=right)

    radius = length / math.tan(delta)  # signed; center at (0, radius)
    cy = radius
    sweep_step = (horizon / abs(radius)) / (n_points - 1)

    def sweep(start_y: float) -> tuple[tuple[float, float], ...]:
        px, py = length, start_y - cy  # corner relative to the center
        pts = []
        for k in range(n_points):
            phi = math.copysign(k * sweep_step, delta)
            c, s = math.cos(phi), math.sin(phi)
            pts.append((c * px - s * py, cy + s * px + c * py))
        return tuple(pts)

    return LanePolylines(
        swa_used=swa, horizon=horizon, left=sweep(half_w), right=sweep(-half_w)
    )
