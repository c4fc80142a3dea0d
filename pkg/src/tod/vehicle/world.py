"""Obstacle world for the desk-scale driving stage.

World files are line-oriented text:

    bounds  min_x min_y max_x max_y
    segment x1 y1 x2 y2
    circle  cx cy r

Blank lines and `#` comments are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path


class WorldFormatError(Exception):
    """Malformed world file; carries the offending line number."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class Segment:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x1, self.y1, self.x2, self.y2)):
            raise ValueError("segment coordinates must be finite")
        if self.x1 == self.x2 and self.y1 == self.y2:
            raise ValueError("segment must have non-zero length")


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.cx, self.cy, self.r)):
            raise ValueError("circle parameters must be finite")
        if self.r <= 0:
            raise ValueError("circle radius must be > 0")


@dataclass(frozen=True)
class Bounds:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self) -> None:
        if self.max_x <= self.min_x or self.max_y <= self.min_y:
            raise ValueError("bounds must span a non-empty rectangle")

    def contains(self, x: float, y: float) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y


@dataclass(frozen=True)
class World:
    segments: tuple[Segment, ...] = ()
    circles: tuple[Circle, ...] = ()
    bounds: Bounds = Bounds(-100.0, -100.0, 100.0, 100.0)


def load_world(path: str | Path) -> World:
    path = Path(path)
    segments: list[Segment] = []
    circles: list[Circle] = []
    bounds: Bounds | None = None
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise WorldFormatError(str(path), 0, f"cannot read world file: {exc}") from exc
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        try:
            values = [float(a) for a in args]
        except ValueError as exc:
            raise WorldFormatError(str(path), line_no, f"non-numeric field: {exc}") from exc
        try:
            if kind == "segment":
                if len(values) != 4:
                    raise ValueError("segment needs x1 y1 x2 y2")
                segments.append(Segment(*values))
            elif kind == "circle":
                if len(values) != 3:
                    raise ValueError("circle needs cx cy r")
                circles.append(Circle(*values))
            elif kind == "bounds":
                if len(values) != 4:
                    raise ValueError("bounds needs min_x min_y max_x max_y")
                bounds = Bounds(*values)
            else:
                raise ValueError(f"unknown record {kind!r}")
        except ValueError as exc:
            raise WorldFormatError(str(path), line_no, str(exc)) from exc
    return World(tuple(segments), tuple(circles), bounds or Bounds(-100.0, -100.0, 100.0, 100.0))
