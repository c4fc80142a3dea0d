"""Euclidean clustering of laser scans into object lists.

Two Cartesian points belong to the same object iff they are connected
through hops of at most d_c; components are order-independent (set
semantics) and reported in order of their first constituent beam index.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..core.messages import DetectedObject, LaserScan, ObjectList


def scan_points(scan: LaserScan) -> tuple[np.ndarray, np.ndarray]:
    """Valid beams as (n, 2) Cartesian points plus their beam indices."""
    ranges = np.asarray(scan.ranges, dtype=float)
    idx = np.flatnonzero(
        np.isfinite(ranges) & (ranges >= scan.range_min) & (ranges <= scan.range_max)
    )
    angles = scan.angle_min + scan.angle_increment * idx
    pts = np.column_stack((ranges[idx] * np.cos(angles), ranges[idx] * np.sin(angles)))
    return pts, idx


def cluster_scan(scan: LaserScan, d_c: float, min_pts: int) -> ObjectList:
    if d_c <= 0:
        raise ValueError("d_c must be > 0")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts, beam_idx = scan_points(scan)
    if len(pts) == 0:
        return ObjectList(frame_id=scan.frame_id)

    tree = cKDTree(pts)
    visited = np.zeros(len(pts), dtype=bool)
    objects: list[DetectedObject] = []
    for start in range(len(pts)):
        if visited[start]:
            continue
        component = []
        stack = [start]
        visited[start] = True
        while stack:
            i = stack.pop()
            component.append(i)
            for j in tree.query_ball_point(pts[i], d_c):
                if not visited[j]:
                    visited[j] = True
                    stack.append(j)
        if len(component) < min_pts:
            continue
        member = pts[component]
        cx, cy = member.mean(axis=0)
        min_x, min_y = member.min(axis=0)
        max_x, max_y = member.max(axis=0)
        objects.append(
            DetectedObject(
                centroid_x=float(cx),
                centroid_y=float(cy),
                min_x=float(min_x),
                min_y=float(min_y),
                max_x=float(max_x),
                max_y=float(max_y),
                point_count=len(component),
            )
        )
    return ObjectList(frame_id=scan.frame_id, objects=tuple(objects))
