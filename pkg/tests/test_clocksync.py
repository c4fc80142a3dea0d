"""Clock-offset estimation from round-trip stamp quadruples."""

import pytest

from tod.netlink import ClockSyncEstimator, SampleRejected, estimate_clock_offset

MS = 1_000_000


def test_symmetric_path_zero_offset():
    # True offset 0, 30 ms each way, server hold 0.
    offset, rtt = estimate_clock_offset(0, 30 * MS, 30 * MS, 60 * MS)
    assert offset == 0
    assert rtt == 60 * MS


def test_server_ahead_by_5ms_symmetric():
    # Server clock +5 ms; 10 ms paths: t1 = 10+5, t2 = 10+5, t3 = 20.
    offset, rtt = estimate_clock_offset(0, 15 * MS, 15 * MS, 20 * MS)
    assert offset == 5 * MS
    assert rtt == 20 * MS


def test_asymmetric_paths_bias():
    # True offset 0; 10 ms up, 30 ms down: estimator reports -10 ms.
    offset, rtt = estimate_clock_offset(0, 10 * MS, 10 * MS, 40 * MS)
    assert offset == -10 * MS
    assert rtt == 40 * MS


def test_negative_rtt_rejected():
    with pytest.raises(SampleRejected):
        estimate_clock_offset(0, 50 * MS, 200 * MS, 100 * MS)


def test_estimator_keeps_minimum_rtt_sample():
    est = ClockSyncEstimator()
    est.update(0, 40 * MS, 40 * MS, 80 * MS)  # rtt 80, offset 0
    first = est.current
    assert first.rtt_ns == 80 * MS and first.sample_count == 1
    est.update(100 * MS, 125 * MS, 125 * MS, 140 * MS)  # rtt 40, offset +5
    best = est.current
    assert best.rtt_ns == 40 * MS
    assert best.offset_ns == 5 * MS
    assert best.sample_count == 2
    # A worse-rtt sample keeps the previous offset but counts.
    est.update(200 * MS, 290 * MS, 290 * MS, 380 * MS)
    assert est.current.offset_ns == 5 * MS
    assert est.current.rtt_ns == 40 * MS
    assert est.current.sample_count == 3


def test_estimator_undefined_until_first_sample():
    est = ClockSyncEstimator()
    assert est.current is None
    with pytest.raises(SampleRejected):
        est.update(0, 0, 100, 0)
    assert est.current is None
    assert est.rejected == 1


def test_asymmetry_bias_over_emulated_links():
    """Probe exchange across an emulated asymmetric pair: the estimator's
    offset equals (d_down - d_up) / 2 with both delays known exactly."""
    from tod.core import ClockProbe, default_registry
    from tod.netlink import ChannelProfile, VirtualScheduler, duplex_pair

    d_up, d_down = 0.010, 0.030
    sched = VirtualScheduler()
    reg = default_registry()
    op, veh, *_ = duplex_pair(
        sched, reg, ChannelProfile(one_way_delay=d_up), ChannelProfile(one_way_delay=d_down)
    )
    probe_topic = reg.by_name("/operator/clock_probe").topic_id
    reply_topic = reg.by_name("/vehicle/demo/clock_reply").topic_id
    probe_sub = veh.subscribe(probe_topic)
    reply_sub = op.subscribe(reply_topic)

    def vehicle_poll():
        while (d := probe_sub.poll()) is not None:
            p = d.message.payload
            veh.send(reply_topic, ClockProbe(p.orig_ns, d.recv_stamp_ns, sched.now_ns()))
        sched.call_after(1_000_000, vehicle_poll)

    est = ClockSyncEstimator()

    def operator_poll():
        while (d := reply_sub.poll()) is not None:
            p = d.message.payload
            est.update(p.orig_ns, p.recv_ns, p.send_ns, d.recv_stamp_ns)
        sched.call_after(1_000_000, operator_poll)

    vehicle_poll()
    operator_poll()
    for i in range(10):
        sched.call_at(int(i * 0.1e9), lambda: op.send(probe_topic, ClockProbe(orig_ns=sched.now_ns())))
    sched.run_until(int(2e9))

    # offset = ((t1-t0)+(t2-t3))/2 makes the bias (d_up - d_down)/2, the
    # sign the hand-evaluated 10/30 ms case above pins down.
    expected_bias_ns = (d_up - d_down) / 2 * 1e9
    assert est.current is not None
    # Same virtual clock on both sides: the reported offset IS the bias.
    assert abs(est.current.offset_ns - expected_bias_ns) < 2_000_000  # polling granularity
    assert abs(est.current.rtt_ns - int((d_up + d_down) * 1e9)) < 4_000_000
