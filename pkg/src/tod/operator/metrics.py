"""Operator-side loop metrics: actuation latency, tracking error, G2G.

Actuation latency is found by a least-squares lag search: desired and
actual signals are logged at the command period, and the shift that
minimizes mean squared error over the overlap is the estimate. Tracking
RMSE is computed after removing that lag. Glass-to-glass latency per
camera is the mean of (display acknowledgment - frame stamp - clock
offset) over the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..netlink.clocksync import ZERO_SYNC, ClockSync

MAX_LAG_S = 0.5
MIN_WINDOW_S = 5.0
EXCITATION_STD = 1e-9


@dataclass(frozen=True)
class LoopMetrics:
    """None fields mean "undefined": not enough data or no excitation."""

    actuation_latency_ms: float | None
    swa_rmse: float | None
    velocity_rmse: float | None
    command_rate_hz: float | None
    g2g_ms: dict[str, float] = field(default_factory=dict)


@dataclass
class MetricsWindow:
    """Paired signal log at the command period plus display frame events."""

    t_ns: list[int] = field(default_factory=list)
    desired_swa: list[float] = field(default_factory=list)
    actual_swa: list[float] = field(default_factory=list)
    desired_v: list[float] = field(default_factory=list)
    actual_v: list[float] = field(default_factory=list)
    frame_events: list[tuple[str, int, int]] = field(default_factory=list)  # camera, stamp, ack

    def add_row(
        self, t_ns: int, desired_swa: float, actual_swa: float, desired_v: float, actual_v: float
    ) -> None:
        self.t_ns.append(t_ns)
        self.desired_swa.append(desired_swa)
        self.actual_swa.append(actual_swa)
        self.desired_v.append(desired_v)
        self.actual_v.append(actual_v)

    def add_frame_event(self, camera: str, frame_stamp_ns: int, ack_ns: int) -> None:
        self.frame_events.append((camera, frame_stamp_ns, ack_ns))

    def span_s(self) -> float:
        if len(self.t_ns) < 2:
            return 0.0
        return (self.t_ns[-1] - self.t_ns[0]) / 1e9


def estimate_lag_steps(desired: np.ndarray, actual: np.ndarray, max_steps: int) -> int | None:
    """argmin over integer shifts of mean squared (actual[t] - desired[t-k])."""
    n = len(desired)
    best_k, best_err = None, None
    for k in range(0, min(max_steps, n - 2) + 1):
        a = actual[k:]
        d = desired[: n - k]
        err = float(np.mean((a - d) ** 2))
        if best_err is None or err < best_err:
            best_err = err
            best_k = k
    return best_k


def compute_metrics(
    window: MetricsWindow,
    sync: ClockSync = ZERO_SYNC,
    command_period_s: float = 0.02,
) -> LoopMetrics:
    g2g: dict[str, list[float]] = {}
    for camera, stamp, ack in window.frame_events:
        g2g.setdefault(camera, []).append((ack - stamp - sync.offset_ns) / 1e6)
    g2g_ms = {cam: float(np.mean(vals)) for cam, vals in sorted(g2g.items())}

    n = len(window.t_ns)
    if n < 2 or window.span_s() < MIN_WINDOW_S:
        return LoopMetrics(None, None, None, None, g2g_ms)

    command_rate = (n - 1) / window.span_s()
    desired = np.asarray(window.desired_swa)
    actual = np.asarray(window.actual_swa)
    if float(np.std(desired)) < EXCITATION_STD:
        return LoopMetrics(None, None, None, command_rate, g2g_ms)

    max_steps = int(round(MAX_LAG_S / command_period_s))
    k = estimate_lag_steps(desired, actual, max_steps)
    if k is None:
        return LoopMetrics(None, None, None, command_rate, g2g_ms)

    shifted_desired = desired[: n - k] if k else desired
    shifted_actual = actual[k:]
    swa_rmse = float(np.sqrt(np.mean((shifted_actual - shifted_desired) ** 2)))
    dv = np.asarray(window.desired_v)
    av = np.asarray(window.actual_v)
    vel_rmse = float(np.sqrt(np.mean((av[k:] - dv[: n - k]) ** 2)))

    return LoopMetrics(
        actuation_latency_ms=k * command_period_s * 1e3,
        swa_rmse=swa_rmse,
        velocity_rmse=vel_rmse,
        command_rate_hz=command_rate,
        g2g_ms=g2g_ms,
    )
