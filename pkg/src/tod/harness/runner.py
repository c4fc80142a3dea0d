"""Headless scenario execution over the virtual-time emulator.

Both nodes run against one VirtualScheduler and two emulated links; the
same (scenario, seed) pair replays byte-for-byte. A vehicle leaving the
world bounds aborts the run with a position report.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..netlink.control import ControlBroker
from ..netlink.emulator import duplex_pair
from ..netlink.virtualtime import VirtualScheduler
from ..operator.manager import Connect, SelectInputDevice, SessionPhase, SetEndpoints, Start
from ..operator.metrics import LoopMetrics
from ..operator.node import OperatorNode, ScriptedSource
from ..vehicle.node import VehicleNode, WorldExit
from .logs import LogTable
from .scenario import Scenario


class ScenarioAborted(Exception):
    def __init__(self, reason: str, log: LogTable):
        super().__init__(reason)
        self.reason = reason
        self.log = log


@dataclass
class RunResult:
    log: LogTable
    metrics: LoopMetrics
    sent_primary: int
    stale_dropped: int
    stream_bitrate: float
    frame_stats: dict[str, float]


def build_nodes(scenario: Scenario, scheduler: VirtualScheduler):
    """Wire endpoints, links, broker and both nodes for one run."""
    registry = scenario.registry()
    tree = scenario.tree()
    op_ep, veh_ep, uplink, downlink = duplex_pair(
        scheduler, registry, scenario.uplink, scenario.downlink, names=("operator", "vehicle")
    )
    broker = ControlBroker()
    vehicle = VehicleNode(
        scheduler,
        veh_ep,
        broker.client("vehicle"),
        registry,
        scenario.params,
        scenario.world,
        tree,
        scenario.vehicle_config,
    )
    source = ScriptedSource(scenario.trace) if scenario.trace else None
    operator = OperatorNode(
        scheduler,
        op_ep,
        broker.client("operator"),
        registry,
        scenario.params,
        tree,
        scenario.operator_config,
        command_source=source,
    )
    return vehicle, operator, uplink, downlink, broker


def run_scenario(scenario: Scenario) -> RunResult:
    scheduler = VirtualScheduler()
    vehicle, operator, uplink, downlink, _ = build_nodes(scenario, scheduler)

    vehicle.start()
    operator.start()

    # Scripted session bring-up: the trace stands in for the human.
    operator.handle_event(SetEndpoints("vehicle", "operator"))
    operator.handle_event(Connect())
    assert operator.session.phase == SessionPhase.CONNECTED, "handshake must complete"
    operator.handle_event(SelectInputDevice("script"))
    operator.handle_event(Start())

    for override in scenario.overrides:
        t_ns = int(override.t * 1e9)
        if override.profile_up is not None:
            scheduler.call_at(t_ns, lambda p=override.profile_up: uplink.set_profile(p))
        if override.profile_down is not None:
            scheduler.call_at(t_ns, lambda p=override.profile_down: downlink.set_profile(p))

    try:
        scheduler.run_until(int(scenario.duration_s * 1e9))
    except WorldExit as exc:
        log = LogTable(list(operator.log_rows))
        raise ScenarioAborted(str(exc), log) from exc

    log = LogTable(list(operator.log_rows))
    metrics = operator.compute_metrics()
    now = scheduler.now_ns()
    frame_stats = {
        name: sub.stats.delivered_bytes_per_s(now)
        for name, sub in zip(scenario.operator_config.camera_names, operator._frame_subs.values())
    }
    return RunResult(
        log=log,
        metrics=metrics,
        sent_primary=operator.sent_primary,
        stale_dropped=vehicle.stale_dropped,
        stream_bitrate=operator.stream_cfg.bitrate,
        frame_stats=frame_stats,
    )
