"""Deterministic datagram network emulation in virtual time.

A DatagramLink models one direction between two endpoints: seeded loss,
uniform jitter around a base one-way delay, and an optional bandwidth cap
realized as store-and-forward serialization. Identical (profile seed,
send schedule) pairs replay byte-for-byte. Endpoints speak core wire
bytes; receivers flag late/reordered datagrams as stale instead of
dropping them.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from threading import Lock

from ..core.codec import TopicRegistry, decode_message, encode_message
from ..core.messages import Body, WireMessage
from .stats import LinkStats
from .virtualtime import Scheduler

MAX_DATAGRAM = 65507


class TransportClosed(Exception):
    """Send or receive on a closed link, endpoint or subscription."""


class DatagramTooLarge(Exception):
    """Encoded datagram exceeds the 65507-byte datagram limit."""


@dataclass(frozen=True)
class ChannelProfile:
    """One-way link behavior: delay, uniform +/- jitter, loss, byte cap."""

    one_way_delay: float = 0.0
    jitter: float = 0.0
    loss_prob: float = 0.0
    bandwidth_cap: float | None = None  # bytes/s; None = unlimited
    seed: int = 0

    def __post_init__(self) -> None:
        if self.one_way_delay < 0 or self.jitter < 0:
            raise ValueError("delay and jitter must be >= 0")
        if self.jitter > self.one_way_delay:
            raise ValueError("jitter must not exceed one_way_delay")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must be within [0, 1]")
        if self.bandwidth_cap is not None and self.bandwidth_cap <= 0:
            raise ValueError("bandwidth_cap must be > 0 when set")


@dataclass(frozen=True)
class SendReceipt:
    topic_id: int
    seq: int
    size_bytes: int


@dataclass(frozen=True)
class Delivery:
    message: WireMessage
    recv_stamp_ns: int
    stale: bool


class Subscription:
    """Single-consumer queue for one topic on one endpoint."""

    def __init__(self, topic_id: int, stats_window_s: float = 1.0):
        self.topic_id = topic_id
        self.stats = LinkStats(stats_window_s)
        self._queue: deque[Delivery] = deque()
        self._highest_seq: int | None = None
        self._closed = False
        self._lock = Lock()

    def push(self, msg: WireMessage, recv_ns: int, nbytes: int = 0) -> None:
        with self._lock:
            if self._closed:
                return
            stale = self._highest_seq is not None and msg.seq <= self._highest_seq
            if not stale:
                self._highest_seq = msg.seq
            self._queue.append(Delivery(msg, recv_ns, stale))
        self.stats.record_delivered(recv_ns, nbytes, max(0, recv_ns - msg.stamp_ns))

    def poll(self) -> Delivery | None:
        """Non-blocking: next delivery, or None when the queue is empty."""
        with self._lock:
            if self._closed:
                raise TransportClosed("subscription closed")
            return self._queue.popleft() if self._queue else None

    def drain(self) -> list[Delivery]:
        with self._lock:
            if self._closed:
                raise TransportClosed("subscription closed")
            out = list(self._queue)
            self._queue.clear()
            return out

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self._queue.clear()

    def __len__(self) -> int:
        return len(self._queue)


class DatagramLink:
    """One emulated direction; call connect() with the receiving endpoint."""

    def __init__(self, scheduler: Scheduler, profile: ChannelProfile, window_s: float = 1.0):
        self._scheduler = scheduler
        self._profile = profile
        self._rng = random.Random(profile.seed)
        self._busy_until_ns = 0
        self._sink: "DatagramEndpoint | None" = None
        self._closed = False
        self.stats = LinkStats(window_s)

    @property
    def profile(self) -> ChannelProfile:
        return self._profile

    def set_profile(self, profile: ChannelProfile) -> None:
        """Swap link behavior mid-run (loss injection); rng stream continues."""
        self._profile = profile

    def connect(self, sink: "DatagramEndpoint") -> None:
        self._sink = sink

    def close(self) -> None:
        self._closed = True

    def send(self, data: bytes) -> None:
        if self._closed:
            raise TransportClosed("link closed")
        if len(data) > MAX_DATAGRAM:
            raise DatagramTooLarge(f"{len(data)} bytes > {MAX_DATAGRAM}")
        self.stats.record_sent(len(data))
        p = self._profile
        if self._rng.random() < p.loss_prob:
            self.stats.record_lost()
            return
        now = self._scheduler.now_ns()
        depart = now
        if p.bandwidth_cap is not None:
            serialization = int(math.ceil(len(data) * 1e9 / p.bandwidth_cap))
            start = max(now, self._busy_until_ns)
            depart = start + serialization
            self._busy_until_ns = depart
        delay_ns = int(p.one_way_delay * 1e9)
        if p.jitter > 0.0:
            delay_ns += int(self._rng.uniform(-p.jitter, p.jitter) * 1e9)
        arrival = depart + delay_ns
        sink = self._sink
        if sink is None:
            return
        size = len(data)

        def deliver() -> None:
            self.stats.record_delivered(arrival, size, arrival - now)
            sink._deliver(data, arrival)

        self._scheduler.call_at(arrival, deliver)


class DatagramEndpoint:
    """Topic-addressed datagram sender/receiver over an emulated link."""

    def __init__(self, scheduler: Scheduler, registry: TopicRegistry, name: str = "endpoint"):
        self.name = name
        self._scheduler = scheduler
        self._registry = registry
        self._out: DatagramLink | None = None
        self._subs: dict[int, list[Subscription]] = {}
        self._seq: dict[int, int] = {}
        self._closed = False
        self.recv_stats = LinkStats()
        self.decode_errors = 0

    def bind_out(self, link: DatagramLink) -> None:
        self._out = link

    def next_seq(self, topic_id: int) -> int:
        seq = self._seq.get(topic_id, 0)
        self._seq[topic_id] = seq + 1
        return seq

    def send(self, topic_id: int, body: Body, stamp_ns: int | None = None) -> SendReceipt:
        """Wrap a body in the next per-topic sequence number and transmit."""
        if self._closed or self._out is None:
            raise TransportClosed(f"endpoint {self.name} has no open outbound link")
        seq = self.next_seq(topic_id)
        stamp = self._scheduler.now_ns() if stamp_ns is None else stamp_ns
        msg = WireMessage(topic_id, seq, stamp, body)
        data = encode_message(msg, self._registry)
        self._out.send(data)
        return SendReceipt(topic_id, seq, len(data))

    def send_message(self, msg: WireMessage) -> SendReceipt:
        if self._closed or self._out is None:
            raise TransportClosed(f"endpoint {self.name} has no open outbound link")
        data = encode_message(msg, self._registry)
        self._out.send(data)
        return SendReceipt(msg.topic_id, msg.seq, len(data))

    def subscribe(self, topic_id: int) -> Subscription:
        sub = Subscription(topic_id)
        self._subs.setdefault(topic_id, []).append(sub)
        return sub

    def subscribe_name(self, topic_name: str) -> Subscription:
        return self.subscribe(self._registry.by_name(topic_name).topic_id)

    def close(self) -> None:
        self._closed = True
        for subs in self._subs.values():
            for sub in subs:
                sub.close()

    def _deliver(self, data: bytes, recv_ns: int) -> None:
        if self._closed:
            return
        try:
            msg = decode_message(data, self._registry)
        except Exception:
            self.decode_errors += 1
            return
        self.recv_stats.record_delivered(recv_ns, len(data), recv_ns - msg.stamp_ns)
        for sub in self._subs.get(msg.topic_id, ()):
            sub.push(msg, recv_ns, len(data))


def duplex_pair(
    scheduler: Scheduler,
    registry: TopicRegistry,
    a_to_b: ChannelProfile,
    b_to_a: ChannelProfile,
    names: tuple[str, str] = ("a", "b"),
) -> tuple[DatagramEndpoint, DatagramEndpoint, DatagramLink, DatagramLink]:
    """Two endpoints joined by independent per-direction links."""
    ep_a = DatagramEndpoint(scheduler, registry, names[0])
    ep_b = DatagramEndpoint(scheduler, registry, names[1])
    link_ab = DatagramLink(scheduler, a_to_b)
    link_ba = DatagramLink(scheduler, b_to_a)
    link_ab.connect(ep_b)
    link_ba.connect(ep_a)
    ep_a.bind_out(link_ab)
    ep_b.bind_out(link_ba)
    return ep_a, ep_b, link_ab, link_ba
