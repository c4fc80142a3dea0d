"""Reliable topic-based control channel with retained messages.

A minimal publish/subscribe subset: connect, publish (optionally
retained), pattern subscribe where `+` matches exactly one path level,
and ping. Delivery is in-order per topic; a lost connection surfaces as
an explicit termination signal on every open subscription, exactly once.

The in-process broker serves emulated runs; ControlChannelServer exposes
the same broker over TCP with the frame layout:

    LE32 body length | type u8 | topic len LE16 | topic UTF-8 | payload

    types: 1=HELLO 2=SUB 3=PUB 4=PING 5=PONG 6=PUBRETAIN
"""

from __future__ import annotations

import socket
import struct
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable

MSG_HELLO = 1
MSG_SUB = 2
MSG_PUB = 3
MSG_PING = 4
MSG_PONG = 5
MSG_PUBRETAIN = 6

_LEN = struct.Struct("<I")
_TOPIC_LEN = struct.Struct("<H")


class ControlError(Exception):
    """Protocol violation or use of a dead control connection."""


def encode_frame(msg_type: int, topic: str, payload: bytes = b"") -> bytes:
    raw_topic = topic.encode("utf-8")
    body = bytes([msg_type]) + _TOPIC_LEN.pack(len(raw_topic)) + raw_topic + payload
    return _LEN.pack(len(body)) + body


def decode_frame(body: bytes) -> tuple[int, str, bytes]:
    """Decode one length-stripped frame body."""
    if len(body) < 3:
        raise ControlError("frame body shorter than type + topic length")
    msg_type = body[0]
    (topic_len,) = _TOPIC_LEN.unpack_from(body, 1)
    if len(body) < 3 + topic_len:
        raise ControlError("frame body ends mid-topic")
    topic = body[3 : 3 + topic_len].decode("utf-8")
    return msg_type, topic, body[3 + topic_len :]


def read_frame(sock: socket.socket) -> tuple[int, str, bytes] | None:
    """Blocking read of one frame; None on orderly EOF."""
    header = _read_exact(sock, 4)
    if header is None:
        return None
    (length,) = _LEN.unpack(header)
    body = _read_exact(sock, length)
    if body is None:
        return None
    return decode_frame(body)


def _read_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        try:
            chunk = sock.recv(n - len(buf))
        except OSError:
            return None
        if not chunk:
            return None
        buf += chunk
    return buf


def topic_matches(pattern: str, topic: str) -> bool:
    """`+` matches exactly one path level; everything else is literal."""
    p_parts = pattern.split("/")
    t_parts = topic.split("/")
    if len(p_parts) != len(t_parts):
        return False
    return all(p == "+" or p == t for p, t in zip(p_parts, t_parts))


@dataclass(frozen=True)
class ControlDelivery:
    topic: str
    payload: bytes
    retained_replay: bool = False


class ControlSubscription:
    """Ordered delivery stream for one pattern; terminates exactly once."""

    def __init__(self, pattern: str):
        self.pattern = pattern
        self._queue: deque[ControlDelivery] = deque()
        self._terminated = False
        self._lock = threading.Lock()
        self._listener: Callable[[ControlDelivery], None] | None = None
        self._on_terminate: Callable[[], None] | None = None

    def push(self, delivery: ControlDelivery) -> None:
        listener = None
        with self._lock:
            if self._terminated:
                return
            if self._listener is None:
                self._queue.append(delivery)
            else:
                listener = self._listener
        if listener is not None:
            listener(delivery)

    def poll(self) -> ControlDelivery | None:
        with self._lock:
            return self._queue.popleft() if self._queue else None

    def set_listener(self, fn: Callable[[ControlDelivery], None]) -> None:
        """Deliver directly to fn; queued backlog is flushed first."""
        with self._lock:
            backlog = list(self._queue)
            self._queue.clear()
            self._listener = fn
        for d in backlog:
            fn(d)

    def on_terminate(self, fn: Callable[[], None]) -> None:
        with self._lock:
            if self._terminated:
                fire = True
            else:
                self._on_terminate = fn
                fire = False
        if fire:
            fn()

    def terminate(self) -> None:
        with self._lock:
            if self._terminated:
                return
            self._terminated = True
            fn = self._on_terminate
        if fn is not None:
            fn()

    @property
    def terminated(self) -> bool:
        return self._terminated


class ControlClient:
    """In-process broker attachment used by nodes in emulated runs."""

    def __init__(self, broker: "ControlBroker", name: str = "client"):
        self.name = name
        self._broker = broker
        self._subs: list[ControlSubscription] = []
        self._connected = True
        broker._attach(self)

    @property
    def connected(self) -> bool:
        return self._connected

    def publish(self, topic: str, payload: bytes, retain: bool = False) -> None:
        if not self._connected:
            raise ControlError(f"client {self.name} is disconnected")
        self._broker.publish(topic, payload, retain)

    def subscribe(self, pattern: str) -> ControlSubscription:
        if not self._connected:
            raise ControlError(f"client {self.name} is disconnected")
        sub = ControlSubscription(pattern)
        self._subs.append(sub)
        self._broker._replay_retained(sub)
        return sub

    def ping(self) -> bool:
        return self._connected

    def disconnect(self) -> None:
        if not self._connected:
            return
        self._connected = False
        self._broker._detach(self)
        for sub in self._subs:
            sub.terminate()

    def _deliver(self, topic: str, payload: bytes) -> None:
        for sub in self._subs:
            if topic_matches(sub.pattern, topic):
                sub.push(ControlDelivery(topic, payload))

    def _drop(self) -> None:
        """Broker-side loss: same termination path as disconnect."""
        self.disconnect()


class ControlBroker:
    """Topic router with per-topic retained payloads."""

    def __init__(self) -> None:
        self._clients: list[ControlClient] = []
        self._retained: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def client(self, name: str = "client") -> ControlClient:
        return ControlClient(self, name)

    def publish(self, topic: str, payload: bytes, retain: bool = False) -> None:
        with self._lock:
            if retain:
                self._retained[topic] = payload
            clients = list(self._clients)
        for c in clients:
            c._deliver(topic, payload)

    def retained(self, topic: str) -> bytes | None:
        with self._lock:
            return self._retained.get(topic)

    def drop_client(self, client: ControlClient) -> None:
        """Simulate connection loss toward one client."""
        client._drop()

    def _attach(self, client: ControlClient) -> None:
        with self._lock:
            self._clients.append(client)

    def _detach(self, client: ControlClient) -> None:
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)

    def _replay_retained(self, sub: ControlSubscription) -> None:
        with self._lock:
            matches = sorted(
                (t, p) for t, p in self._retained.items() if topic_matches(sub.pattern, t)
            )
        for topic, payload in matches:
            sub.push(ControlDelivery(topic, payload, retained_replay=True))


class ControlChannelServer:
    """TCP face of a ControlBroker for live mode."""

    def __init__(self, broker: ControlBroker, host: str = "127.0.0.1", port: int = 0):
        self._broker = broker
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(8)
        self.address = self._sock.getsockname()
        self._running = True
        self._threads: list[threading.Thread] = []
        self._conns: list[socket.socket] = []
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    def close(self) -> None:
        self._running = False
        try:
            self._sock.close()
        except OSError:
            pass
        for conn in list(self._conns):
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                conn.close()
            except OSError:
                pass

    def _accept_loop(self) -> None:
        while self._running:
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            self._conns.append(conn)
            t = threading.Thread(target=self._serve, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)

    def _serve(self, conn: socket.socket) -> None:
        client = self._broker.client("tcp-session")
        send_lock = threading.Lock()

        def forward(delivery: ControlDelivery) -> None:
            frame = encode_frame(MSG_PUB, delivery.topic, delivery.payload)
            with send_lock:
                try:
                    conn.sendall(frame)
                except OSError:
                    pass

        try:
            first = read_frame(conn)
            if first is None or first[0] != MSG_HELLO:
                return
            while True:
                frame = read_frame(conn)
                if frame is None:
                    return
                msg_type, topic, payload = frame
                if msg_type == MSG_SUB:
                    client.subscribe(topic).set_listener(forward)
                elif msg_type in (MSG_PUB, MSG_PUBRETAIN):
                    client.publish(topic, payload, retain=msg_type == MSG_PUBRETAIN)
                elif msg_type == MSG_PING:
                    with send_lock:
                        conn.sendall(encode_frame(MSG_PONG, ""))
        finally:
            client.disconnect()
            try:
                conn.close()
            except OSError:
                pass


class TcpControlClient:
    """Client-side TCP attachment with the ControlClient surface."""

    def __init__(self, host: str, port: int, name: str = "client", timeout: float = 5.0):
        self.name = name
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._sock.settimeout(None)
        self._send_lock = threading.Lock()
        self._subs: list[ControlSubscription] = []
        self._connected = True
        self._pong = threading.Event()
        self._send(encode_frame(MSG_HELLO, "", b""))
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    @property
    def connected(self) -> bool:
        return self._connected

    def publish(self, topic: str, payload: bytes, retain: bool = False) -> None:
        if not self._connected:
            raise ControlError(f"client {self.name} is disconnected")
        self._send(encode_frame(MSG_PUBRETAIN if retain else MSG_PUB, topic, payload))

    def subscribe(self, pattern: str) -> ControlSubscription:
        if not self._connected:
            raise ControlError(f"client {self.name} is disconnected")
        sub = ControlSubscription(pattern)
        self._subs.append(sub)
        self._send(encode_frame(MSG_SUB, pattern, b""))
        return sub

    def ping(self, timeout: float = 2.0) -> bool:
        if not self._connected:
            return False
        self._pong.clear()
        self._send(encode_frame(MSG_PING, "", b""))
        return self._pong.wait(timeout)

    def disconnect(self) -> None:
        self._teardown()

    def _send(self, frame: bytes) -> None:
        with self._send_lock:
            try:
                self._sock.sendall(frame)
            except OSError as exc:
                self._teardown()
                raise ControlError("control connection lost") from exc

    def _read_loop(self) -> None:
        while True:
            frame = read_frame(self._sock)
            if frame is None:
                self._teardown()
                return
            msg_type, topic, payload = frame
            if msg_type == MSG_PUB:
                for sub in self._subs:
                    if topic_matches(sub.pattern, topic):
                        sub.push(ControlDelivery(topic, payload))
            elif msg_type == MSG_PONG:
                self._pong.set()

    def _teardown(self) -> None:
        if not self._connected:
            return
        self._connected = False
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass
        for sub in self._subs:
            sub.terminate()
