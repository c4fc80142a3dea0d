"""Pinhole projection of 3D points into camera images.

Camera frames in the transform tree are optical frames: +Z forward,
+X right, +Y down. Points with Z below z_min are culled; points that
project outside the image keep their pixel coordinates but are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..core.geometry import TransformTree


@dataclass(frozen=True)
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    frame_id: str = "camera_front"
    z_min: float = 0.05

    def __post_init__(self) -> None:
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be > 0")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        if self.z_min <= 0:
            raise ValueError("z_min must be > 0")


@dataclass(frozen=True)
class Projection:
    u: float
    v: float
    inside: bool


def project_points(
    points: Sequence[tuple[float, float, float]],
    cam: CameraModel,
    tree: TransformTree,
    source_frame: str,
) -> list[Projection | None]:
    """Project each point; culled (behind-camera) points map to None."""
    xf = tree.resolve(source_frame, cam.frame_id)
    out: list[Projection | None] = []
    for p in points:
        x, y, z = xf.apply(p)
        if z < cam.z_min:
            out.append(None)
            continue
        u = cam.fx * x / z + cam.cx
        v = cam.fy * y / z + cam.cy
        inside = 0.0 <= u < cam.width and 0.0 <= v < cam.height
        out.append(Projection(u, v, inside))
    return out


def back_project(cam: CameraModel, u: float, v: float, depth: float) -> tuple[float, float, float]:
    """Pixel + depth back to a 3D point in the camera optical frame."""
    if depth <= 0:
        raise ValueError("depth must be > 0")
    return ((u - cam.cx) * depth / cam.fx, (v - cam.cy) * depth / cam.fy, depth)
