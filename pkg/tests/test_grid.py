"""Occupancy grid: index arithmetic, boundary rule, accumulation."""

import math

from tod.core import NO_RETURN, LaserScan, Pose2D
from tod.perception import GridBuilder, GridParams, build_grid


def single_beam_scan(rng_value: float, angle: float = 0.0) -> LaserScan:
    return LaserScan(
        angle_min=angle,
        angle_max=angle + 1.0,
        angle_increment=1.0,
        range_min=0.05,
        range_max=30.0,
        ranges=(rng_value, NO_RETURN),
    )


def test_empty_scan_all_free():
    scan = LaserScan(ranges=(NO_RETURN,) * 10, angle_min=0.0, angle_max=9.0, angle_increment=1.0)
    grid = build_grid(scan, Pose2D(), None, GridParams())
    assert grid.occupied_count() == 0


def test_single_return_marks_exactly_one_cell():
    params = GridParams(resolution=0.2, width=200, height=200)
    grid = build_grid(single_beam_scan(5.0), Pose2D(), None, params)
    assert grid.occupied_count() == 1
    # Vehicle centered: endpoint (5, 0) relative to origin (-20, -20).
    ix = math.floor((5.0 - grid.origin_x) / 0.2)
    iy = math.floor((0.0 - grid.origin_y) / 0.2)
    assert grid.is_occupied(ix, iy)


def test_boundary_point_goes_to_higher_cell():
    params = GridParams(resolution=0.5, width=10, height=10)
    builder = GridBuilder(params, origin=(0.0, 0.0))
    # Endpoint exactly at x = 1.0 = 2 * resolution: belongs to cell 2.
    builder.add_scan(single_beam_scan(1.0), Pose2D(), None)
    grid = builder.grid()
    assert grid.is_occupied(2, 0)
    assert not grid.is_occupied(1, 0)


def test_out_of_extent_ignored_and_counted():
    params = GridParams(resolution=0.2, width=10, height=10)  # 2 m x 2 m
    builder = GridBuilder(params, origin=(-1.0, -1.0))
    ignored = builder.add_scan(single_beam_scan(5.0), Pose2D(), None)
    assert ignored == 1
    assert builder.ignored_endpoints == 1
    assert builder.grid().occupied_count() == 0


def test_idempotent_re_add():
    params = GridParams(resolution=0.2, width=100, height=100)
    builder = GridBuilder(params, origin=(-10.0, -10.0))
    scan = single_beam_scan(5.0)
    builder.add_scan(scan, Pose2D(), None)
    first = builder.grid()
    builder.add_scan(scan, Pose2D(), None)
    assert builder.grid() == first


def test_occupied_count_bounded_by_valid_beams():
    n = 181
    inc = math.pi / (n - 1)
    ranges = tuple(5.0 for _ in range(n))
    scan = LaserScan(
        angle_min=-math.pi / 2,
        angle_max=math.pi / 2,
        angle_increment=inc,
        range_min=0.05,
        range_max=30.0,
        ranges=ranges,
    )
    grid = build_grid(scan, Pose2D(), None, GridParams())
    assert 0 < grid.occupied_count() <= n


def test_pose_transform_applied():
    # Vehicle at (10, 10) facing +y: a 5 m return lands at (10, 15).
    params = GridParams(resolution=0.2, width=200, height=200)
    builder = GridBuilder(params, origin=(0.0, 0.0))
    builder.add_scan(single_beam_scan(5.0), Pose2D(10.0, 10.0, math.pi / 2), None)
    grid = builder.grid()
    assert grid.is_occupied(math.floor(10.0 / 0.2), math.floor(15.0 / 0.2))


def test_accumulate_multiple_scans():
    params = GridParams(resolution=0.2, width=200, height=200)
    builder = GridBuilder(params, origin=(-20.0, -20.0))
    builder.add_scan(single_beam_scan(5.0), Pose2D(), None)
    builder.add_scan(single_beam_scan(5.0, angle=math.pi / 2), Pose2D(), None)
    assert builder.grid().occupied_count() == 2
    builder.reset()
    assert builder.grid().occupied_count() == 0


def test_grid_wire_round_trip():
    from tod.core import WireMessage, decode_message, default_registry, encode_message

    reg = default_registry()
    params = GridParams(resolution=0.2, width=37, height=23)  # non-multiple-of-8 cells
    builder = GridBuilder(params, origin=(-3.0, -2.0))
    builder.add_scan(single_beam_scan(1.5), Pose2D(), None)
    grid = builder.grid()
    grid_topic = reg.by_name("/vehicle/demo/grid").topic_id
    msg = WireMessage(grid_topic, 1, 2, grid)
    assert decode_message(encode_message(msg), reg) == msg
