"""Live UDP datagram endpoint with the emulated-endpoint surface."""

from __future__ import annotations

import socket
import threading

from ..core.codec import TopicRegistry, decode_message, encode_message
from ..core.messages import Body, WireMessage
from .emulator import MAX_DATAGRAM, DatagramTooLarge, SendReceipt, Subscription, TransportClosed
from .stats import LinkStats


class UdpEndpoint:
    """Real-socket twin of DatagramEndpoint for live runs.

    Timestamps use time.monotonic_ns via the caller-provided clock so the
    same node code runs against either transport.
    """

    def __init__(
        self,
        registry: TopicRegistry,
        bind: tuple[str, int] = ("127.0.0.1", 0),
        peer: tuple[str, int] | None = None,
        clock_ns=None,
    ):
        import time

        self._registry = registry
        self._peer = peer
        self._clock_ns = clock_ns or time.monotonic_ns
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind(bind)
        self.address = self._sock.getsockname()
        self._subs: dict[int, list[Subscription]] = {}
        self._seq: dict[int, int] = {}
        self._closed = False
        self.recv_stats = LinkStats()
        self.decode_errors = 0
        self._thread = threading.Thread(target=self._recv_loop, daemon=True)
        self._thread.start()

    def set_peer(self, peer: tuple[str, int]) -> None:
        self._peer = peer

    def send(self, topic_id: int, body: Body, stamp_ns: int | None = None) -> SendReceipt:
        if self._closed:
            raise TransportClosed("endpoint closed")
        if self._peer is None:
            raise TransportClosed("no peer address configured")
        seq = self._seq.get(topic_id, 0)
        self._seq[topic_id] = seq + 1
        stamp = self._clock_ns() if stamp_ns is None else stamp_ns
        data = encode_message(WireMessage(topic_id, seq, stamp, body), self._registry)
        if len(data) > MAX_DATAGRAM:
            raise DatagramTooLarge(f"{len(data)} bytes > {MAX_DATAGRAM}")
        try:
            self._sock.sendto(data, self._peer)
        except OSError as exc:
            raise TransportClosed(str(exc)) from exc
        return SendReceipt(topic_id, seq, len(data))

    def send_message(self, msg: WireMessage) -> SendReceipt:
        if self._closed:
            raise TransportClosed("endpoint closed")
        if self._peer is None:
            raise TransportClosed("no peer address configured")
        data = encode_message(msg, self._registry)
        if len(data) > MAX_DATAGRAM:
            raise DatagramTooLarge(f"{len(data)} bytes > {MAX_DATAGRAM}")
        try:
            self._sock.sendto(data, self._peer)
        except OSError as exc:
            raise TransportClosed(str(exc)) from exc
        return SendReceipt(msg.topic_id, msg.seq, len(data))

    def subscribe(self, topic_id: int) -> Subscription:
        sub = Subscription(topic_id)
        self._subs.setdefault(topic_id, []).append(sub)
        return sub

    def close(self) -> None:
        self._closed = True
        try:
            self._sock.close()
        except OSError:
            pass
        for subs in self._subs.values():
            for sub in subs:
                sub.close()

    def _recv_loop(self) -> None:
        while not self._closed:
            try:
                data, _ = self._sock.recvfrom(MAX_DATAGRAM + 1)
            except OSError:
                return
            now = self._clock_ns()
            try:
                msg = decode_message(data, self._registry)
            except Exception:
                self.decode_errors += 1
                continue
            self.recv_stats.record_delivered(now, len(data), max(0, now - msg.stamp_ns))
            for sub in self._subs.get(msg.topic_id, ()):
                sub.push(msg, now, len(data))
