"""Round-trip clock-offset estimation between operator and vehicle.

One exchange yields the classic two-way sample:

    offset = ((t1 - t0) + (t2 - t3)) / 2
    rtt    = (t3 - t0) - (t2 - t1)

Asymmetric paths bias the offset by (d_down - d_up) / 2; that bias is a
documented property, not an error. The estimator keeps the minimum-rtt
sample as its running estimate.
"""

from __future__ import annotations

from dataclasses import dataclass


class SampleRejected(Exception):
    """Sample with negative round-trip time (clock misuse or corruption)."""


@dataclass(frozen=True)
class ClockSync:
    offset_ns: int
    rtt_ns: int
    sample_count: int
    last_update_ns: int

    def remote_to_local(self, remote_ns: int) -> int:
        """Map a remote stamp onto the local clock (remote = local + offset)."""
        return remote_ns - self.offset_ns


ZERO_SYNC = ClockSync(offset_ns=0, rtt_ns=0, sample_count=0, last_update_ns=0)


def estimate_clock_offset(t0: int, t1: int, t2: int, t3: int) -> tuple[int, int]:
    """One (offset_ns, rtt_ns) sample from a request/reply stamp quadruple."""
    rtt = (t3 - t0) - (t2 - t1)
    if rtt < 0:
        raise SampleRejected(f"negative rtt {rtt} ns")
    offset = ((t1 - t0) + (t2 - t3)) // 2
    return offset, rtt


class ClockSyncEstimator:
    """Accumulates exchange samples, reporting the minimum-rtt one."""

    def __init__(self) -> None:
        self._best: ClockSync | None = None
        self._count = 0
        self.rejected = 0

    def update(self, t0: int, t1: int, t2: int, t3: int) -> ClockSync:
        try:
            offset, rtt = estimate_clock_offset(t0, t1, t2, t3)
        except SampleRejected:
            self.rejected += 1
            raise
        self._count += 1
        if self._best is None or rtt < self._best.rtt_ns:
            self._best = ClockSync(offset, rtt, self._count, t3)
        else:
            self._best = ClockSync(
                self._best.offset_ns, self._best.rtt_ns, self._count, t3
            )
        return self._best

    @property
    def current(self) -> ClockSync | None:
        """None until at least one sample was accepted."""
        return self._best
