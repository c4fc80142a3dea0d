"""Deterministic virtual-time scheduler plus a wall-clock twin.

Nodes are written against the Scheduler protocol so the same code runs
under the single-threaded virtual executor (tests, scenario runs) and the
threaded real-time executor (live CLI). Virtual event order is total:
(time, insertion sequence), so identical schedules replay identically.
"""

from __future__ import annotations

import heapq
import threading
import time
from typing import Callable, Protocol


class Scheduler(Protocol):
    def now_ns(self) -> int: ...

    def call_at(self, t_ns: int, fn: Callable[[], None]) -> "EventHandle": ...

    def call_after(self, delay_ns: int, fn: Callable[[], None]) -> "EventHandle": ...


class EventHandle:
    __slots__ = ("cancelled",)

    def __init__(self) -> None:
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


class VirtualScheduler:
    """Single-threaded event loop over integer nanoseconds."""

    def __init__(self, start_ns: int = 0):
        self._now_ns = start_ns
        self._heap: list[tuple[int, int, EventHandle, Callable[[], None]]] = []
        self._counter = 0

    def now_ns(self) -> int:
        return self._now_ns

    def call_at(self, t_ns: int, fn: Callable[[], None]) -> EventHandle:
        if t_ns < self._now_ns:
            t_ns = self._now_ns
        handle = EventHandle()
        self._counter += 1
        heapq.heappush(self._heap, (int(t_ns), self._counter, handle, fn))
        return handle

    def call_after(self, delay_ns: int, fn: Callable[[], None]) -> EventHandle:
        return self.call_at(self._now_ns + max(0, int(delay_ns)), fn)

    def run_until(self, t_ns: int) -> None:
        """Execute every event due at or before t_ns, then set now to t_ns."""
        while self._heap and self._heap[0][0] <= t_ns:
            when, _, handle, fn = heapq.heappop(self._heap)
            self._now_ns = when
            if not handle.cancelled:
                fn()
        if t_ns > self._now_ns:
            self._now_ns = t_ns

    def run_all(self, limit: int = 1_000_000) -> None:
        """Drain the queue; guards against runaway self-rescheduling."""
        for _ in range(limit):
            if not self._heap:
                return
            when, _, handle, fn = heapq.heappop(self._heap)
            self._now_ns = when
            if not handle.cancelled:
                fn()
        raise RuntimeError(f"virtual scheduler did not drain within {limit} events")

    def pending(self) -> int:
        return len(self._heap)


class RealTimeScheduler:
    """Wall-clock scheduler: one dispatcher thread draining a heap."""

    def __init__(self) -> None:
        self._heap: list[tuple[int, int, EventHandle, Callable[[], None]]] = []
        self._counter = 0
        self._cv = threading.Condition()
        self._running = False
        self._thread: threading.Thread | None = None

    def now_ns(self) -> int:
        return time.monotonic_ns()

    def call_at(self, t_ns: int, fn: Callable[[], None]) -> EventHandle:
        handle = EventHandle()
        with self._cv:
            self._counter += 1
            heapq.heappush(self._heap, (int(t_ns), self._counter, handle, fn))
            self._cv.notify()
        return handle

    def call_after(self, delay_ns: int, fn: Callable[[], None]) -> EventHandle:
        return self.call_at(self.now_ns() + max(0, int(delay_ns)), fn)

    def start(self) -> None:
        if self._running:
            return
        self._running = True
        self._thread = threading.Thread(target=self._loop, name="tod-sched", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        with self._cv:
            self._running = False
            self._cv.notify()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None

    def _loop(self) -> None:
        while True:
            with self._cv:
                if not self._running:
                    return
                if not self._heap:
                    self._cv.wait(timeout=0.1)
                    continue
                when = self._heap[0][0]
                now = time.monotonic_ns()
                if when > now:
                    self._cv.wait(timeout=min((when - now) / 1e9, 0.1))
                    continue
                _, _, handle, fn = heapq.heappop(self._heap)
            if not handle.cancelled:
                try:
                    fn()
                except Exception:  # noqa: BLE001 - a live tick must not kill the loop
                    pass
