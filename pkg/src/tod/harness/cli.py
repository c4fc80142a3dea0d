"""Command-line entry points.

    tod run --scenario <file> --out <dir>     headless virtual-time run
    tod report --log <csv>                    metrics from an exported log
    tod vehicle --config <file>               live vehicle node (UDP + TCP)
    tod operator --config <file> [--ui-port]  live operator node + UI socket

Exit codes: 0 success, 2 validation error, 3 aborted run. TOD_SEED
overrides the scenario seed.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import time
from pathlib import Path

from .logs import export_logs
from .report import format_report, metrics_as_dict, report_from_log, write_metrics_json
from .runner import ScenarioAborted, run_scenario
from .scenario import Scenario, ScenarioError, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ABORTED = 3


def _seed_override() -> int | None:
    raw = os.environ.get("TOD_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"TOD_SEED must be an integer, got {raw!r}") from None


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario, seed_override=_seed_override())
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        result = run_scenario(scenario)
    except ScenarioAborted as exc:
        print(f"run aborted: {exc.reason}", file=sys.stderr)
        if exc.log.rows:
            export_logs(exc.log, out_dir / "log.csv")
        return EXIT_ABORTED
    export_logs(result.log, out_dir / "log.csv")
    write_metrics_json(result.metrics, out_dir / "metrics.json")
    print(f"scenario:  {scenario.name} (seed {scenario.seed})")
    print(f"log rows:  {len(result.log)} -> {out_dir / 'log.csv'}")
    print(format_report(result.metrics))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    try:
        metrics = report_from_log(args.log)
    except (ValueError, OSError) as exc:
        print(f"log error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.json:
        print(json.dumps(metrics_as_dict(metrics), indent=2, sort_keys=True))
    else:
        print(format_report(metrics))
    return EXIT_OK


def _live_addresses(scenario_doc: dict) -> dict:
    live = scenario_doc.get("live", {})
    return {
        "vehicle_addr": tuple(live.get("vehicle_addr", ("127.0.0.1", 47101))),
        "operator_addr": tuple(live.get("operator_addr", ("127.0.0.1", 47102))),
        "control_addr": tuple(live.get("control_addr", ("127.0.0.1", 47110))),
    }


def _load_scenario_and_doc(path: str) -> tuple[Scenario, dict]:
    scenario = load_scenario(path, seed_override=_seed_override())
    doc = json.loads(Path(path).read_text())
    return scenario, doc


def cmd_vehicle(args: argparse.Namespace) -> int:
    from ..netlink.control import ControlBroker, ControlChannelServer
    from ..netlink.udp import UdpEndpoint
    from ..netlink.virtualtime import RealTimeScheduler
    from ..vehicle.node import VehicleNode

    try:
        scenario, doc = _load_scenario_and_doc(args.config)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    addrs = _live_addresses(doc)
    scheduler = RealTimeScheduler()
    endpoint = UdpEndpoint(
        scenario.registry(), bind=tuple(addrs["vehicle_addr"]), peer=tuple(addrs["operator_addr"])
    )
    broker = ControlBroker()
    server = ControlChannelServer(broker, *addrs["control_addr"])
    node = VehicleNode(
        scheduler,
        endpoint,
        broker.client("vehicle"),
        scenario.registry(),
        scenario.params,
        scenario.world,
        scenario.tree(),
        scenario.vehicle_config,
    )
    scheduler.start()
    node.start()
    print(
        f"vehicle {scenario.vehicle_config.name}: UDP {endpoint.address}, "
        f"control {server.address}",
        flush=True,
    )
    return _run_until_interrupt(lambda: (node.stop(), scheduler.stop(), server.close()))


def cmd_operator(args: argparse.Namespace) -> int:
    from ..netlink.control import TcpControlClient
    from ..netlink.udp import UdpEndpoint
    from ..netlink.virtualtime import RealTimeScheduler
    from ..operator.inputs import InputMapper, InputMapping, load_input_mapping
    from ..operator.node import InteractiveSource, OperatorNode
    from ..operator.uiserver import UiServer

    try:
        scenario, doc = _load_scenario_and_doc(args.config)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    addrs = _live_addresses(doc)
    scheduler = RealTimeScheduler()
    endpoint = UdpEndpoint(
        scenario.registry(), bind=tuple(addrs["operator_addr"]), peer=tuple(addrs["vehicle_addr"])
    )
    try:
        control = TcpControlClient(*addrs["control_addr"], name="operator")
    except OSError as exc:
        print(f"cannot reach control channel at {addrs['control_addr']}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    from dataclasses import replace as dc_replace

    mapping = load_input_mapping(args.mapping) if args.mapping else InputMapping()
    mapper = InputMapper(mapping, scenario.params, active_device="virtual_joystick")
    # Live display acks come from the UI, not the headless model.
    config = dc_replace(scenario.operator_config, headless_display=False)
    node = OperatorNode(
        scheduler,
        endpoint,
        control,
        scenario.registry(),
        scenario.params,
        scenario.tree(),
        config,
        command_source=InteractiveSource(mapper),
    )
    scheduler.start()
    node.start()
    ui = UiServer(node, port=args.ui_port)
    print(f"operator: UDP {endpoint.address}, UI socket {ui.address}", flush=True)
    return _run_until_interrupt(lambda: (ui.close(), node.stop(), scheduler.stop()))


def _run_until_interrupt(cleanup) -> int:
    stop = {"flag": False}

    def handler(_sig, _frm):
        stop["flag"] = True

    signal.signal(signal.SIGINT, handler)
    signal.signal(signal.SIGTERM, handler)
    try:
        while not stop["flag"]:
            time.sleep(0.2)
    finally:
        cleanup()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tod", description="teleoperated driving stack")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless in virtual time")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--out", required=True)
    p_run.set_defaults(fn=cmd_run)

    p_report = sub.add_parser("report", help="recompute metrics from a CSV log")
    p_report.add_argument("--log", required=True)
    p_report.add_argument("--json", action="store_true")
    p_report.set_defaults(fn=cmd_report)

    p_vehicle = sub.add_parser("vehicle", help="run the live vehicle node")
    p_vehicle.add_argument("--config", required=True)
    p_vehicle.set_defaults(fn=cmd_vehicle)

    p_operator = sub.add_parser("operator", help="run the live operator node")
    p_operator.add_argument("--config", required=True)
    p_operator.add_argument("--ui-port", type=int, default=0)
    p_operator.add_argument("--mapping", help="input mapping file (signal = binding lines)")
    p_operator.set_defaults(fn=cmd_operator)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
