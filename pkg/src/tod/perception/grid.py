"""Occupancy grid construction from scan endpoints.

Endpoint-only binary model: each valid beam endpoint marks exactly the
cell containing it; no free-space carving. Cell index is
floor((p - origin) / resolution), so a point exactly on a boundary lands
in the higher-index cell. Endpoints outside the extent are ignored and
counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.geometry import Pose2D, RigidTransform
from ..core.messages import LaserScan, OccupancyGrid
from .clustering import scan_points


@dataclass(frozen=True)
class GridParams:
    resolution: float = 0.2
    width: int = 200
    height: int = 200

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be > 0")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must have at least one cell per axis")

    def centered_origin(self, pose: Pose2D) -> tuple[float, float]:
        """Origin placing the vehicle at the grid center."""
        return (
            pose.x - 0.5 * self.width * self.resolution,
            pose.y - 0.5 * self.height * self.resolution,
        )


class GridBuilder:
    """Accumulates one or more scans into a single grid instance."""

    def __init__(self, params: GridParams, origin: tuple[float, float]):
        self.params = params
        self.origin = (float(origin[0]), float(origin[1]))
        self._occupied = np.zeros(params.width * params.height, dtype=bool)
        self.ignored_endpoints = 0

    def add_scan(
        self,
        scan: LaserScan,
        vehicle_pose: Pose2D,
        sensor_to_vehicle: RigidTransform | None = None,
    ) -> int:
        """Mark endpoint cells; returns how many endpoints fell outside."""
        pts, _ = scan_points(scan)
        if len(pts) == 0:
            return 0
        if sensor_to_vehicle is not None:
            sx, sy, _ = sensor_to_vehicle.apply((0.0, 0.0, 0.0))
            syaw = sensor_to_vehicle.rotation.yaw()
            c, s = math.cos(syaw), math.sin(syaw)
            pts = np.column_stack(
                (sx + c * pts[:, 0] - s * pts[:, 1], sy + s * pts[:, 0] + c * pts[:, 1])
            )
        c, s = math.cos(vehicle_pose.yaw), math.sin(vehicle_pose.yaw)
        wx = vehicle_pose.x + c * pts[:, 0] - s * pts[:, 1]
        wy = vehicle_pose.y + s * pts[:, 0] + c * pts[:, 1]

        ix = np.floor((wx - self.origin[0]) / self.params.resolution).astype(int)
        iy = np.floor((wy - self.origin[1]) / self.params.resolution).astype(int)
        inside = (ix >= 0) & (ix < self.params.width) & (iy >= 0) & (iy < self.params.height)
        ignored = int((~inside).sum())
        self.ignored_endpoints += ignored
        self._occupied[iy[inside] * self.params.width + ix[inside]] = True
        return ignored

    def grid(self) -> OccupancyGrid:
        packed = np.packbits(self._occupied, bitorder="little").tobytes()
        return OccupancyGrid(
            origin_x=self.origin[0],
            origin_y=self.origin[1],
            resolution=self.params.resolution,
            width=self.params.width,
            height=self.params.height,
            cells=packed,
        )

    def reset(self) -> None:
        self._occupied[:] = False
        self.ignored_endpoints = 0


def build_grid(
    scan: LaserScan,
    vehicle_pose: Pose2D,
    sensor_to_vehicle: RigidTransform | None,
    params: GridParams,
    origin: tuple[float, float] | None = None,
) -> OccupancyGrid:
    """Per-scan grid; origin defaults to centering the vehicle."""
    builder = GridBuilder(params, origin or params.centered_origin(vehicle_pose))
    builder.add_scan(scan, vehicle_pose, sensor_to_vehicle)
    return builder.grid()
