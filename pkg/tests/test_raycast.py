"""Laser raycasting against segment and circle obstacles."""

import math

import pytest

from tod.core import NO_RETURN, Pose2D, Quaternion, RigidTransform
from tod.vehicle import Circle, ScanParams, Segment, World, scan_world

SP = ScanParams(angle_min=-math.pi / 2, angle_max=math.pi / 2, angle_increment=math.pi / 180)


def beam_index(sp: ScanParams, angle: float) -> int:
    return round((angle - sp.angle_min) / sp.angle_increment)


def test_empty_world_all_no_return():
    scan = scan_world(Pose2D(), World(), SP)
    assert len(scan.ranges) == SP.beam_count
    assert all(r == NO_RETURN for r in scan.ranges)


def test_wall_ahead_range_exact():
    world = World(segments=(Segment(5.0, -10.0, 5.0, 10.0),))
    scan = scan_world(Pose2D(), world, SP)
    assert scan.ranges[beam_index(SP, 0.0)] == pytest.approx(5.0, abs=1e-9)
    # A 45-degree beam hits the wall at 5/cos(45deg).
    idx = beam_index(SP, math.pi / 4)
    assert scan.ranges[idx] == pytest.approx(5.0 / math.cos(math.pi / 4), abs=1e-9)


def test_circle_tangent_single_point():
    # Circle centered at (5, 1) radius 1: the 0-rad beam grazes it at (5, 0).
    world = World(circles=(Circle(5.0, 1.0, 1.0),))
    scan = scan_world(Pose2D(), world, SP)
    assert scan.ranges[beam_index(SP, 0.0)] == pytest.approx(5.0, abs=1e-6)


def test_circle_head_on_near_surface():
    world = World(circles=(Circle(10.0, 0.0, 2.0),))
    scan = scan_world(Pose2D(), world, SP)
    assert scan.ranges[beam_index(SP, 0.0)] == pytest.approx(8.0, abs=1e-9)


def test_range_limits_filtered():
    sp = ScanParams(
        angle_min=0.0, angle_max=0.1, angle_increment=0.1, range_min=1.0, range_max=4.0
    )
    near = World(segments=(Segment(0.5, -1.0, 0.5, 1.0),))
    far = World(segments=(Segment(6.0, -1.0, 6.0, 1.0),))
    assert scan_world(Pose2D(), near, sp).ranges[0] == NO_RETURN
    assert scan_world(Pose2D(), far, sp).ranges[0] == NO_RETURN


def test_nearest_obstacle_wins():
    world = World(
        segments=(Segment(5.0, -10.0, 5.0, 10.0), Segment(3.0, -10.0, 3.0, 10.0))
    )
    scan = scan_world(Pose2D(), world, SP)
    assert scan.ranges[beam_index(SP, 0.0)] == pytest.approx(3.0, abs=1e-9)


def test_vehicle_pose_and_sensor_transform_applied():
    # Sensor 1 m ahead of the vehicle origin, vehicle at (1, 0) facing +x:
    # a wall at x = 5 is 3 m from the sensor.
    world = World(segments=(Segment(5.0, -10.0, 5.0, 10.0),))
    sensor_xf = RigidTransform(Quaternion.identity(), (1.0, 0.0, 0.0))
    scan = scan_world(Pose2D(1.0, 0.0, 0.0), world, SP, sensor_xf)
    assert scan.ranges[beam_index(SP, 0.0)] == pytest.approx(3.0, abs=1e-9)


def test_rear_sensor_yaw():
    # Sensor rotated pi: its 0-rad beam looks backward at a wall at x = -4.
    world = World(segments=(Segment(-4.0, -10.0, -4.0, 10.0),))
    sensor_xf = RigidTransform(Quaternion.from_yaw(math.pi), (0.0, 0.0, 0.0))
    scan = scan_world(Pose2D(), world, SP, sensor_xf)
    assert scan.ranges[beam_index(SP, 0.0)] == pytest.approx(4.0, abs=1e-9)


def test_scan_is_pure():
    world = World(segments=(Segment(5.0, -1.0, 5.0, 1.0),), circles=(Circle(8.0, 2.0, 1.0),))
    a = scan_world(Pose2D(0.3, -0.2, 0.1), world, SP)
    b = scan_world(Pose2D(0.3, -0.2, 0.1), world, SP)
    assert a == b


def test_scan_params_validation():
    with pytest.raises(ValueError):
        ScanParams(angle_min=1.0, angle_max=0.0)
    with pytest.raises(ValueError):
        ScanParams(angle_increment=-0.1)
    with pytest.raises(ValueError):
        # 1.05 increments across the span: not integral.
        ScanParams(angle_min=0.0, angle_max=1.05, angle_increment=1.0)
    assert ScanParams().beam_count == 721
