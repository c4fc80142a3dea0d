"""Scan clustering, occupancy grids, lane prediction, projection, rate control."""

from .clustering import cluster_scan, scan_points
from .grid import GridBuilder, GridParams, build_grid
from .lane import STRAIGHT_DELTA, predict_lane
from .projection import CameraModel, Projection, back_project, project_points
from .ratecontrol import (
    RateMode,
    StreamConfig,
    StreamRateController,
    adapt_stream,
)

__all__ = [
    "cluster_scan",
    "scan_points",
    "GridBuilder",
    "GridParams",
    "build_grid",
    "STRAIGHT_DELTA",
    "predict_lane",
    "CameraModel",
    "Projection",
    "back_project",
    "project_points",
    "RateMode",
    "StreamConfig",
    "StreamRateController",
    "adapt_stream",
]
