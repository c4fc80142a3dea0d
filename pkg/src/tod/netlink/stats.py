"""Sliding-window link statistics feeding the stream rate controller."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from threading import Lock

# Histogram bucket upper edges in milliseconds; the last bucket is open.
LATENCY_BUCKETS_MS = (5, 10, 20, 40, 60, 80, 100, 150, 200, 400, 800)


@dataclass(frozen=True)
class LinkStatsView:
    """Immutable snapshot of a LinkStats instance."""

    delivered_bytes_per_s: float
    datagrams_sent: int
    datagrams_received: int
    datagrams_lost: int
    latency_histogram: tuple[int, ...]
    window_s: float


class LinkStats:
    """Delivered-throughput window plus monotone datagram counters.

    Counters never decrease; the throughput window has a fixed length set
    at construction. Safe to update from one producer while another thread
    snapshots.
    """

    def __init__(self, window_s: float = 1.0):
        if window_s <= 0:
            raise ValueError("window_s must be > 0")
        self.window_s = window_s
        self._window_ns = int(window_s * 1e9)
        self._deliveries: deque[tuple[int, int]] = deque()
        self._sent = 0
        self._received = 0
        self._lost = 0
        self._hist = [0] * (len(LATENCY_BUCKETS_MS) + 1)
        self._lock = Lock()

    def record_sent(self, nbytes: int) -> None:
        with self._lock:
            self._sent += 1

    def record_lost(self) -> None:
        with self._lock:
            self._lost += 1

    def record_delivered(self, t_ns: int, nbytes: int, latency_ns: int) -> None:
        with self._lock:
            self._received += 1
            self._deliveries.append((t_ns, nbytes))
            self._trim(t_ns)
            ms = latency_ns / 1e6
            for i, edge in enumerate(LATENCY_BUCKETS_MS):
                if ms <= edge:
                    self._hist[i] += 1
                    break
            else:
                self._hist[-1] += 1

    def _trim(self, now_ns: int) -> None:
        cutoff = now_ns - self._window_ns
        while self._deliveries and self._deliveries[0][0] <= cutoff:
            self._deliveries.popleft()

    def delivered_bytes_per_s(self, now_ns: int) -> float:
        with self._lock:
            self._trim(now_ns)
            return sum(n for _, n in self._deliveries) / self.window_s

    def snapshot(self, now_ns: int) -> LinkStatsView:
        with self._lock:
            self._trim(now_ns)
            return LinkStatsView(
                delivered_bytes_per_s=sum(n for _, n in self._deliveries) / self.window_s,
                datagrams_sent=self._sent,
                datagrams_received=self._received,
                datagrams_lost=self._lost,
                latency_histogram=tuple(self._hist),
                window_s=self.window_s,
            )


def link_stats(stats: LinkStats, now_ns: int) -> LinkStatsView:
    """Snapshot helper mirroring the one-shot query contract."""
    return stats.snapshot(now_ns)
