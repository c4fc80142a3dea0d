"""Planar poses, unit quaternions and the rigid transform tree.

The driving plant lives in 2D (Pose2D); sensor extrinsics are full 3D rigid
transforms organized as a tree with a single parent per frame. A transform
with parent P and child C maps coordinates expressed in C into P:

    p_P = R * p_C + t
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

TWO_PI = 2.0 * math.pi

UNIT_NORM_TOL = 1e-9
INVERSE_TOL = 1e-9


def normalize_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Pose2D:
    """Planar pose; yaw is normalized into (-pi, pi] on construction."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    def transform_point(self, px: float, py: float) -> tuple[float, float]:
        """Map a point from this pose's body frame into the world frame."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return (self.x + c * px - s * py, self.y + s * px + c * py)


class Quaternion:
    """Unit quaternion (w, x, y, z) for 3D rotations."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w: float, x: float, y: float, z: float):
        self.w, self.x, self.y, self.z = float(w), float(x), float(y), float(z)

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_yaw(yaw: float) -> "Quaternion":
        h = 0.5 * yaw
        return Quaternion(math.cos(h), 0.0, 0.0, math.sin(h))

    @staticmethod
    def from_axis_angle(axis: Sequence[float], angle: float) -> "Quaternion":
        ax, ay, az = axis
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if n == 0.0:
            raise ValueError("rotation axis must be non-zero")
        h = 0.5 * angle
        s = math.sin(h) / n
        return Quaternion(math.cos(h), ax * s, ay * s, az * s)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, o: "Quaternion") -> "Quaternion":
        return Quaternion(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )

    def rotate(self, v: Sequence[float]) -> tuple[float, float, float]:
        """Rotate a 3-vector by this quaternion."""
        qv = Quaternion(0.0, v[0], v[1], v[2])
        r = self * qv * self.conjugate()
        return (r.x, r.y, r.z)

    def yaw(self) -> float:
        """Rotation about +z; exact for pure-yaw quaternions."""
        return math.atan2(
            2.0 * (self.w * self.z + self.x * self.y),
            1.0 - 2.0 * (self.y * self.y + self.z * self.z),
        )

    def __repr__(self) -> str:
        return f"Quaternion({self.w}, {self.x}, {self.y}, {self.z})"


class RigidTransform:
    """3D rotation + translation; composes left-to-right along frame chains."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation: Quaternion, translation: Sequence[float]):
        self.rotation = rotation
        self.translation = (
            float(translation[0]),
            float(translation[1]),
            float(translation[2]),
        )

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(Quaternion.identity(), (0.0, 0.0, 0.0))

    def apply(self, p: Sequence[float]) -> tuple[float, float, float]:
        rx, ry, rz = self.rotation.rotate(p)
        tx, ty, tz = self.translation
        return (rx + tx, ry + ty, rz + tz)

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """self o inner: apply `inner` first, then `self`."""
        t = self.apply(inner.translation)
        return RigidTransform(self.rotation * inner.rotation, t)

    def inverse(self) -> "RigidTransform":
        inv_rot = self.rotation.conjugate()
        ix, iy, iz = inv_rot.rotate(self.translation)
        return RigidTransform(inv_rot, (-ix, -iy, -iz))


class TransformError(Exception):
    """Unknown frame, disconnected frames, or an invalid tree."""


@dataclass(frozen=True)
class Transform:
    """Tree edge: coordinates in `child` map into `parent`."""

    parent: str
    child: str
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation: Quaternion = Quaternion.identity()

    def __post_init__(self) -> None:
        if abs(self.rotation.norm() - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"rotation must be a unit quaternion, norm={self.rotation.norm()}")
        if self.parent == self.child:
            raise ValueError("transform parent and child must differ")

    def as_rigid(self) -> RigidTransform:
        return RigidTransform(self.rotation, self.translation)


class TransformTree:
    """Acyclic single-parent frame tree with bidirectional resolution."""

    def __init__(self, transforms: Iterable[Transform] = ()):
        self._edges: dict[str, Transform] = {}
        self._frames: set[str] = set()
        for t in transforms:
            self.add(t)

    def add(self, t: Transform) -> None:
        if t.child in self._edges:
            raise TransformError(f"frame {t.child!r} already has a parent")
        self._edges[t.child] = t
        self._frames.add(t.child)
        self._frames.add(t.parent)
        if self._has_cycle(t.child):
            del self._edges[t.child]
            raise TransformError(f"adding {t.parent!r}->{t.child!r} would create a cycle")

    def _has_cycle(self, start: str) -> bool:
        seen = {start}
        frame = start
        while frame in self._edges:
            frame = self._edges[frame].parent
            if frame in seen:
                return True
            seen.add(frame)
        return False

    def frames(self) -> set[str]:
        return set(self._frames)

    def _ancestry(self, frame: str) -> list[str]:
        chain = [frame]
        while frame in self._edges:
            frame = self._edges[frame].parent
            chain.append(frame)
        return chain

    def resolve(self, from_frame: str, to_frame: str) -> RigidTransform:
        """Rigid transform mapping coordinates in from_frame into to_frame."""
        for f in (from_frame, to_frame):
            if f not in self._frames:
                raise TransformError(f"unknown frame {f!r}")
        if from_frame == to_frame:
            return RigidTransform.identity()

        up_from = self._ancestry(from_frame)
        up_to = self._ancestry(to_frame)
        common = None
        to_index = {f: i for i, f in enumerate(up_to)}
        for f in up_from:
            if f in to_index:
                common = f
                break
        if common is None:
            raise TransformError(f"frames {from_frame!r} and {to_frame!r} are disconnected")

        # from_frame -> common: successively map child coords into parent.
        xf = RigidTransform.identity()
        frame = from_frame
        while frame != common:
            edge = self._edges[frame]
            xf = edge.as_rigid().compose(xf)
            frame = edge.parent
        # common -> to_frame: inverse of to_frame's ancestry up to common.
        down = RigidTransform.identity()
        frame = to_frame
        while frame != common:
            edge = self._edges[frame]
            down = edge.as_rigid().compose(down)
            frame = edge.parent
        return down.inverse().compose(xf)


def resolve_transform(tree: TransformTree, from_frame: str, to_frame: str) -> RigidTransform:
    """Module-level alias for TransformTree.resolve."""
    return tree.resolve(from_frame, to_frame)
