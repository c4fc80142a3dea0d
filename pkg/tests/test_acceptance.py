"""Acceptance suite: every exit criterion at its stated tolerance.

Each test drives the full stack (virtual time unless stated), checks the
criterion bounds, and records one pass/fail line via conftest.
"""

import math
import os
import random
import subprocess
import sys
import time
from pathlib import Path

from conftest import record_criterion
from tod.core import (
    Gear,
    VehicleParams,
    WireMessage,
    decode_message,
    default_registry,
    encode_message,
)
from tod.harness import load_scenario, run_scenario
from tod.harness.logs import export_logs, read_log, CSV_HEADER
from tod.harness.runner import build_nodes
from tod.harness.scenario import Scenario
from tod.netlink import ChannelProfile, VirtualScheduler
from tod.operator.manager import (
    Connect,
    SelectInputDevice,
    SessionPhase,
    SetEndpoints,
    Start,
    Stop,
    TransitionRejected,
    manager_transition,
)
from tod.operator.node import CommandSetpoint, OperatorNodeConfig
from tod.perception import predict_lane
from tod.perception.ratecontrol import RateMode, StreamConfig
from tod.vehicle.node import CameraSpec, VehicleNodeConfig
from tod.vehicle.world import Bounds, World

DATA = Path(__file__).resolve().parent.parent / "src" / "tod" / "data"
PARAMS = VehicleParams()


def make_scenario(
    duration_s: float,
    trace: list[tuple[float, CommandSetpoint]],
    uplink: ChannelProfile,
    downlink: ChannelProfile,
    cameras: tuple[CameraSpec, ...] = (),
    stream_mode: RateMode = RateMode.MANUAL,
    ladder: tuple[float, ...] = (1e6, 2e6, 4e6),
    params: VehicleParams = PARAMS,
    display_hz: float = 144.0,
    processing_stub_s: float = 0.06,
    stream_window_s: float = 1.0,
) -> Scenario:
    initial_stream = (
        cameras[0].config if cameras else StreamConfig(mode=stream_mode)
    )
    return Scenario(
        name="inline",
        seed=11,
        duration_s=duration_s,
        world=World(bounds=Bounds(-500.0, -500.0, 500.0, 500.0)),
        world_path=Path("."),
        params=params,
        uplink=uplink,
        downlink=downlink,
        transforms=[],
        vehicle_config=VehicleNodeConfig(cameras=cameras, publish_lane=False),
        operator_config=OperatorNodeConfig(
            camera_names=tuple(c.name for c in cameras),
            display_hz=display_hz,
            processing_stub_s=processing_stub_s,
            initial_stream=initial_stream,
            stream_ladder=ladder,
            stream_window_s=stream_window_s,
        ),
        trace=trace,
        interactive=False,
    )


def drive_preamble(estop_until: float = 0.0) -> list[tuple[float, CommandSetpoint]]:
    return [
        (0.0, CommandSetpoint(gear=Gear.PARK)),
        (0.2, CommandSetpoint(gear=Gear.DRIVE)),
    ]


def test_actuation_latency_reproduction():
    """Full loop with 30 ms up + 30 ms down + 40 ms steering delay at
    50 Hz commands with a 0.2 Hz sine trace reports 100 ms +/- 20 ms."""
    t0 = time.monotonic()
    trace = drive_preamble()
    for i in range(1, int(30.0 / 0.02)):
        t = 0.2 + i * 0.02
        trace.append((t, CommandSetpoint(swa=1.5 * math.sin(2 * math.pi * 0.2 * t), gear=Gear.DRIVE)))
    scenario = make_scenario(
        30.0,
        trace,
        ChannelProfile(one_way_delay=0.03, seed=1),
        ChannelProfile(one_way_delay=0.03, seed=2),
        params=VehicleParams(steer_delay=0.04),
    )
    result = run_scenario(scenario)
    wall = time.monotonic() - t0
    latency = result.metrics.actuation_latency_ms
    ok = latency is not None and 80.0 <= latency <= 120.0 and wall < 10.0
    record_criterion(
        "actuation-latency 100ms +/- 20ms",
        ok,
        f"reported {latency} ms, wall {wall:.1f} s",
    )
    assert ok


def test_g2g_reproduction():
    """Synthetic 40 Hz stream over a 30 ms link with a 60 ms processing
    stub and 144 Hz display acknowledgment lands in [90, 120] ms and
    matches the configured sum within the display quantization."""
    t0 = time.monotonic()
    cameras = (CameraSpec("front", StreamConfig(bitrate=4e6, framerate=40.0)),)
    trace = drive_preamble()
    scenario = make_scenario(
        10.0,
        trace,
        ChannelProfile(one_way_delay=0.03, seed=3),
        ChannelProfile(one_way_delay=0.03, seed=4),
        cameras=cameras,
        display_hz=144.0,
        processing_stub_s=0.06,
    )
    result = run_scenario(scenario)
    wall = time.monotonic() - t0
    g2g = result.metrics.g2g_ms.get("front")
    display_period_ms = 1000.0 / 144.0
    configured = 30.0 + 60.0 + display_period_ms / 2.0
    ok = (
        g2g is not None
        and 90.0 <= g2g <= 120.0
        and abs(g2g - configured) <= display_period_ms
        and wall < 10.0
    )
    record_criterion(
        "glass-to-glass in [90, 120] ms",
        ok,
        f"reported {g2g:.2f} ms vs configured {configured:.2f} ms, wall {wall:.1f} s",
    )
    assert ok


def test_tracking_scenario():
    """Bundled lane-change trace: SWA RMSE < 0.01 rad after lag
    compensation, peak velocity within 2%, gear leaves Park only at
    standstill, CSV header validates."""
    t0 = time.monotonic()
    scenario = load_scenario(DATA / "lane_change.scenario")
    result = run_scenario(scenario)
    wall = time.monotonic() - t0

    m = result.metrics
    peak_desired = max(r.desired_v for r in result.log.rows)
    peak_actual = max(r.actual_v for r in result.log.rows)
    gear_ok = all(
        abs(row.actual_v) < 0.1
        for prev, row in zip(result.log.rows, result.log.rows[1:])
        if prev.gear == Gear.PARK and row.gear != Gear.PARK
    )
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        csv_path = export_logs(result.log, Path(tmp) / "log.csv")
        header_ok = csv_path.read_text().splitlines()[0] == CSV_HEADER
        read_log(csv_path)  # validates all rows

    checks = {
        "swa_rmse": m.swa_rmse is not None and m.swa_rmse < 0.01,
        "peak_velocity": abs(peak_actual - peak_desired) <= 0.02 * peak_desired,
        "peak_is_17kmh": abs(peak_desired - 17.0 / 3.6) < 1e-6,
        "gear_at_standstill": gear_ok,
        "csv_header": header_ok,
        "wall": wall < 30.0,
    }
    ok = all(checks.values())
    record_criterion(
        "tracking: rmse/peak/gear/csv",
        ok,
        f"rmse {m.swa_rmse:.5f} rad, peak {peak_actual:.3f}/{peak_desired:.3f}, wall {wall:.1f} s",
    )
    assert ok, checks


def test_watchdog_safety():
    """Total command loss at t=10 s while at 4 m/s: SafeStop and v=0
    within command_timeout + v/max_decel + 0.1 s, asserted from the log."""
    trace = drive_preamble() + [
        (2.0, CommandSetpoint(velocity=4.0, gear=Gear.DRIVE)),
        (19.0, CommandSetpoint(velocity=4.0, gear=Gear.DRIVE)),
    ]
    scenario = make_scenario(
        20.0,
        trace,
        ChannelProfile(one_way_delay=0.03, seed=5),
        ChannelProfile(one_way_delay=0.03, seed=6),
    )
    from tod.harness.scenario import ProfileOverride

    scenario.overrides = [
        ProfileOverride(
            t=10.0,
            direction="up",
            profile_up=ChannelProfile(one_way_delay=0.03, loss_prob=1.0, seed=5),
            profile_down=None,
        )
    ]
    result = run_scenario(scenario)
    rows = result.log.rows
    v_at_loss = next(r.actual_v for r in rows if r.t >= 10.0)
    from tod.core import DriveMode

    stopped = [r.t for r in rows if r.t > 10.0 and abs(r.actual_v) < 1e-9]
    safestop = [r.t for r in rows if r.mode == DriveMode.SAFE_STOP]
    bound = 10.0 + PARAMS.command_timeout + 4.0 / PARAMS.max_decel + 0.1
    ok = (
        abs(v_at_loss - 4.0) < 0.05
        and bool(safestop)
        and bool(stopped)
        and min(stopped) <= bound
    )
    record_criterion(
        "watchdog: SafeStop and stop within bound",
        ok,
        f"v=0 at t={min(stopped) if stopped else 'never'}s, bound {bound:.2f} s",
    )
    assert ok


def test_clustering_oracle_equivalence():
    """200 seeded random scans (up to 1081 beams): partitions identical to
    the O(n^2) brute-force connected components, zero mismatches."""
    from test_cluster import brute_force_partition, random_scan
    from tod.perception import cluster_scan, scan_points

    rng = random.Random(424242)
    mismatches = 0
    total_points = 0
    for _ in range(200):
        beams = rng.choice([181, 361, 541, 721, 1081])
        scan = random_scan(rng, beams)
        d_c = rng.choice([0.2, 0.5, 1.0])
        pts, _ = scan_points(scan)
        total_points += len(pts)
        oracle = brute_force_partition(pts, d_c)
        oracle_stats = sorted(
            (len(c), round(float(pts[list(c)].mean(axis=0)[0]), 9),
             round(float(pts[list(c)].mean(axis=0)[1]), 9))
            for c in oracle
        )
        result = cluster_scan(scan, d_c, min_pts=1)
        impl_stats = sorted(
            (o.point_count, round(o.centroid_x, 9), round(o.centroid_y, 9))
            for o in result.objects
        )
        if impl_stats != oracle_stats:
            mismatches += 1
    ok = mismatches == 0
    record_criterion(
        "clustering equals brute-force oracle",
        ok,
        f"200 scans, {total_points} points, {mismatches} mismatches",
    )
    assert ok


def test_lane_prediction_oracle():
    """50 seeded (swa, horizon) pairs spanning +/- max steering vs 1 ms
    ODE integration with +/- W/2 edge offsets: < 1 cm at 20 m horizon."""
    from test_lane import max_deviation, ode_lane_oracle

    rng = random.Random(777)
    worst = 0.0
    for trial in range(50):
        if trial == 0:
            swa = PARAMS.max_swa
        elif trial == 1:
            swa = -PARAMS.max_swa
        else:
            swa = rng.uniform(-PARAMS.max_swa, PARAMS.max_swa)
        lanes = predict_lane(swa, PARAMS, 20.0, n_points=21)
        left_o, right_o = ode_lane_oracle(swa, PARAMS, 20.0, 21)
        worst = max(
            worst, max_deviation(lanes.left, left_o), max_deviation(lanes.right, right_o)
        )
    ok = worst < 0.01
    record_criterion(
        "lane prediction vs ODE oracle < 1 cm", ok, f"max deviation {worst * 100:.4f} cm"
    )
    assert ok


def test_codec_property_suite():
    """10^4 randomized messages per payload type round-trip exactly; every
    malformed-input class returns its designated error."""
    from test_codec import random_message
    from tod.core import (
        BadMagicError,
        Heartbeat,
        LengthMismatchError,
        OversizeError,
        TruncatedError,
        UnknownTopicError,
        UnknownVersionError,
        LaserScan,
    )

    reg = default_registry()
    by_type: dict[type, int] = {}
    rng = random.Random(99)
    entries = reg.entries()
    failures = 0
    per_type_target = 10_000
    # Draw per topic entry until every payload type hits the target.
    for entry in entries:
        body_rng = random.Random(hash((entry.topic_id, 99)) & 0xFFFFFFFF)
        count = 0
        while count < per_type_target:
            msg = random_message(body_rng)
            if msg.topic_id != entry.topic_id:
                continue
            if decode_message(encode_message(msg), reg) != msg:
                failures += 1
            count += 1
        by_type[entry.body_type] = by_type.get(entry.body_type, 0) + count

    malformed_ok = True
    data = encode_message(WireMessage(0, 0, 0, Heartbeat()))
    for mutator, expected in [
        (lambda d: d[:10], TruncatedError),
        (lambda d: b"\x55" + d[1:], BadMagicError),
        (lambda d: d[:3] + b"\x09" + d[4:], UnknownVersionError),
        (lambda d: d + b"\x00", LengthMismatchError),
    ]:
        try:
            decode_message(mutator(data), reg)
            malformed_ok = False
        except expected:
            pass
        except Exception:
            malformed_ok = False
    try:
        decode_message(encode_message(WireMessage(999, 0, 0, Heartbeat())), reg)
        malformed_ok = False
    except UnknownTopicError:
        pass
    try:
        encode_message(WireMessage(6, 0, 0, LaserScan(ranges=(1.0,) * 8500)))
        malformed_ok = False
    except OversizeError:
        pass

    ok = failures == 0 and malformed_ok and min(by_type.values()) >= per_type_target
    record_criterion(
        "codec round-trip 10^4 per type + malformed errors",
        ok,
        f"{sum(by_type.values())} messages over {len(by_type)} types, {failures} failures",
    )
    assert ok


def test_manager_exhaustive_and_gating():
    """Every defined transition taken, every undefined pair rejected with
    no state change; zero primary datagrams outside Teleoperating."""
    from test_manager import DEFINED, make_event, state_in
    from tod.operator import EVENT_TYPES

    table_ok = True
    for phase in SessionPhase:
        for pending in (False, True):
            if pending and phase != SessionPhase.CONFIGURED:
                continue
            for event_type in EVENT_TYPES:
                state = state_in(phase, handshake_pending=pending)
                key = (phase, pending, event_type)
                try:
                    new_state, _ = manager_transition(state, make_event(event_type))
                    if key not in DEFINED or new_state.phase != DEFINED[key]:
                        table_ok = False
                except TransitionRejected:
                    if key in DEFINED:
                        table_ok = False
                    if state != state_in(phase, handshake_pending=pending):
                        table_ok = False

    # Scripted session: Start at 0, Stop at 2 s, Start again at 4 s.
    trace = drive_preamble() + [(5.9, CommandSetpoint(gear=Gear.DRIVE))]
    scenario = make_scenario(
        6.0, trace, ChannelProfile(seed=7), ChannelProfile(seed=8)
    )
    scheduler = VirtualScheduler()
    vehicle, operator, *_ = build_nodes(scenario, scheduler)
    vehicle.start()
    operator.start()
    operator.handle_event(SetEndpoints("veh", "op"))
    operator.handle_event(Connect())
    operator.handle_event(SelectInputDevice("script"))
    operator.handle_event(Start())
    counts = {}

    def stop_and_count():
        operator.handle_event(Stop())
        counts["at_stop"] = operator.sent_primary

    def restart_and_count():
        counts["at_restart"] = operator.sent_primary
        operator.handle_event(Start())

    scheduler.call_at(int(2.0e9), stop_and_count)
    scheduler.call_at(int(4.0e9), restart_and_count)
    scheduler.run_until(int(6.0e9))
    sent_while_stopped = counts["at_restart"] - counts["at_stop"]
    gating_ok = sent_while_stopped == 0 and operator.sent_primary > 150

    ok = table_ok and gating_ok
    record_criterion(
        "manager table exhaustive + dispatch gating",
        ok,
        f"sent while stopped: {sent_while_stopped}, total {operator.sent_primary}",
    )
    assert ok


def test_stream_adaptation():
    """Bandwidth cap at 50% of the bitrate: Automatic steps down within 2
    windows and the delivered frame rate returns to nominal +/- 1 frame/s;
    Manual never changes configuration.

    The ladder's middle rung (1.8 Mbit/s) sits below the 2 Mbit/s cap so
    the stepped-down stream coexists with telemetry on the same link; a
    rung exactly at the cap can never reach nominal rate."""
    cameras = (
        CameraSpec(
            "front", StreamConfig(bitrate=4e6, framerate=40.0, mode=RateMode.AUTOMATIC)
        ),
    )
    trace = drive_preamble() + [(19.9, CommandSetpoint(gear=Gear.DRIVE))]
    scenario = make_scenario(
        20.0,
        trace,
        ChannelProfile(seed=9),
        ChannelProfile(bandwidth_cap=250_000.0, seed=10),  # 50% of 4 Mbit/s in bytes
        cameras=cameras,
        ladder=(1e6, 1.8e6, 4e6),
        stream_window_s=1.0,
    )
    scheduler = VirtualScheduler()
    vehicle, operator, uplink, downlink, broker = build_nodes(scenario, scheduler)
    reconfigs: list[tuple[float, float]] = []
    watcher = broker.client("watcher")
    from tod.perception.ratecontrol import decode_stream_config

    watcher.subscribe("/vehicle/demo/stream_config").set_listener(
        lambda d: reconfigs.append(
            (scheduler.now_ns() / 1e9, decode_stream_config(d.payload).bitrate)
        )
    )
    vehicle.start()
    operator.start()
    operator.handle_event(SetEndpoints("veh", "op"))
    operator.handle_event(Connect())
    operator.handle_event(SelectInputDevice("script"))
    operator.handle_event(Start())
    from tod.operator.manager import SelectVideoRateMode

    operator.handle_event(SelectVideoRateMode(RateMode.AUTOMATIC))
    frame_counts = {}

    def snapshot_counts(tag):
        sub = next(iter(operator._frame_subs.values()))
        frame_counts[tag] = sub.stats.snapshot(scheduler.now_ns()).datagrams_received

    scheduler.call_at(int(15.0e9), lambda: snapshot_counts("t15"))
    scheduler.run_until(int(20.0e9))
    snapshot_counts("t20")

    stepped_down = [r for r in reconfigs if r[1] == 1.8e6]
    down_in_time = bool(stepped_down) and stepped_down[0][0] <= 2.5  # 2 windows + startup
    rate_last5 = (frame_counts["t20"] - frame_counts["t15"]) / 5.0
    rate_ok = abs(rate_last5 - 40.0) <= 1.0

    # Manual mode: identical cap, no reconfiguration ever.
    manual_cameras = (
        CameraSpec("front", StreamConfig(bitrate=4e6, framerate=40.0, mode=RateMode.MANUAL)),
    )
    manual = make_scenario(
        8.0,
        drive_preamble() + [(7.9, CommandSetpoint(gear=Gear.DRIVE))],
        ChannelProfile(seed=9),
        ChannelProfile(bandwidth_cap=250_000.0, seed=10),
        cameras=manual_cameras,
    )
    result_manual = run_scenario(manual)
    manual_ok = result_manual.stream_bitrate == 4e6

    ok = down_in_time and rate_ok and manual_ok
    record_criterion(
        "stream adaptation: down in 2 windows, nominal rate, manual no-op",
        ok,
        f"down at {stepped_down[0][0]:.2f}s, last-5s rate {rate_last5:.1f} fps"
        if stepped_down
        else "never stepped down",
    )
    assert ok


def test_run_determinism_cli():
    """`tod run` twice with the same scenario and seed produces
    byte-identical CSV logs."""
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        out_a = Path(tmp) / "a"
        out_b = Path(tmp) / "b"
        for out in (out_a, out_b):
            proc = subprocess.run(
                [
                    sys.executable,
                    "-m",
                    "tod.harness.cli",
                    "run",
                    "--scenario",
                    str(DATA / "lane_change.scenario"),
                    "--out",
                    str(out),
                ],
                capture_output=True,
                text=True,
                timeout=300,
            )
            assert proc.returncode == 0, proc.stderr
        bytes_a = (out_a / "log.csv").read_bytes()
        bytes_b = (out_b / "log.csv").read_bytes()
        ok = bytes_a == bytes_b and len(bytes_a) > 100_000
    record_criterion(
        "determinism: byte-identical CSV over two runs", ok, f"{len(bytes_a)} bytes each"
    )
    assert ok
