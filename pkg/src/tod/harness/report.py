"""Metric reports recomputed from exported CSV logs."""

from __future__ import annotations

import json
from pathlib import Path

from ..operator.metrics import LoopMetrics, MetricsWindow, compute_metrics
from .logs import LogTable, read_log


def window_from_log(table: LogTable) -> tuple[MetricsWindow, float]:
    """Rebuild the metrics window; returns it with the median period."""
    window = MetricsWindow()
    for row in table.rows:
        window.add_row(
            int(row.t * 1e9), row.desired_swa, row.actual_swa, row.desired_v, row.actual_v
        )
    if len(table.rows) >= 2:
        dts = sorted(b.t - a.t for a, b in zip(table.rows, table.rows[1:]))
        period = dts[len(dts) // 2]
    else:
        period = 0.02
    return window, period


def report_from_log(path: str | Path) -> LoopMetrics:
    table = read_log(path)
    window, period = window_from_log(table)
    return compute_metrics(window, command_period_s=period)


def metrics_as_dict(metrics: LoopMetrics) -> dict:
    return {
        "actuation_latency_ms": metrics.actuation_latency_ms,
        "swa_rmse": metrics.swa_rmse,
        "velocity_rmse": metrics.velocity_rmse,
        "command_rate_hz": metrics.command_rate_hz,
        "g2g_ms": metrics.g2g_ms,
    }


def format_report(metrics: LoopMetrics) -> str:
    def fmt(value, unit=""):
        return "undefined" if value is None else f"{value:.3f}{unit}"

    lines = [
        f"actuation latency: {fmt(metrics.actuation_latency_ms, ' ms')}",
        f"swa rmse:          {fmt(metrics.swa_rmse, ' rad')}",
        f"velocity rmse:     {fmt(metrics.velocity_rmse, ' m/s')}",
        f"command rate:      {fmt(metrics.command_rate_hz, ' Hz')}",
    ]
    for camera, g2g in metrics.g2g_ms.items():
        lines.append(f"g2g[{camera}]:        {g2g:.3f} ms")
    return "\n".join(lines)


def write_metrics_json(metrics: LoopMetrics, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(metrics_as_dict(metrics), indent=2, sort_keys=True) + "\n")
    return path
