"""Scenario harness: loading, virtual-time execution, logs, CLI."""

from .logs import CSV_HEADER, LogTable, export_logs, read_log
from .report import format_report, metrics_as_dict, report_from_log, window_from_log
from .runner import RunResult, ScenarioAborted, build_nodes, run_scenario
from .scenario import Scenario, ScenarioError, load_scenario

__all__ = [
    "CSV_HEADER",
    "LogTable",
    "export_logs",
    "read_log",
    "format_report",
    "metrics_as_dict",
    "report_from_log",
    "window_from_log",
    "RunResult",
    "ScenarioAborted",
    "build_nodes",
    "run_scenario",
    "Scenario",
    "ScenarioError",
    "load_scenario",
]
