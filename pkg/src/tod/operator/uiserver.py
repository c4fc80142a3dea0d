"""Local UI socket: newline-delimited JSON frames, WebSocket optional.

Down frames: {"type": "scene_snapshot" | "metrics" | "session", ...}
Up frames:   {"type": "input_sample" | "manager_event" | "render_ack", ...}

A client speaking plain TCP sends one JSON document per line. Browsers
cannot open raw TCP sockets, so the same port also accepts a WebSocket
handshake (detected by the leading "GET "); each WS text message carries
one JSON frame with identical schemas.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import struct
import threading
from typing import Any

from ..perception.ratecontrol import RateMode
from .inputs import InputSample
from .manager import (
    Connect,
    ControlMode,
    Disconnect,
    SelectControlMode,
    SelectInputDevice,
    SelectVideoRateMode,
    SetEndpoints,
    Start,
    Stop,
)
from .metrics import LoopMetrics
from .node import InteractiveSource, OperatorNode

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def event_from_frame(doc: dict[str, Any]):
    """Build a manager event from a manager_event frame; None if unknown."""
    name = doc.get("event")
    if name == "SetEndpoints":
        return SetEndpoints(str(doc.get("vehicle", "")), str(doc.get("operator", "")))
    if name == "Connect":
        return Connect()
    if name == "Start":
        return Start()
    if name == "Stop":
        return Stop()
    if name == "Disconnect":
        return Disconnect()
    if name == "SelectInputDevice":
        return SelectInputDevice(str(doc.get("device", "")))
    if name == "SelectControlMode":
        return SelectControlMode(ControlMode(doc.get("mode", "DirectControl")))
    if name == "SelectVideoRateMode":
        return SelectVideoRateMode(RateMode(doc.get("mode", "manual")))
    return None


def session_frame(node: OperatorNode, rejected: str | None = None) -> dict[str, Any]:
    s = node.session
    return {
        "type": "session",
        "state": s.phase.value,
        "pending": s.handshake_pending,
        "vehicle_endpoint": s.vehicle_endpoint,
        "operator_endpoint": s.operator_endpoint,
        "input_device": s.active_input_device,
        "control_mode": s.control_mode.value,
        "video_rate_mode": s.video_rate_mode.value,
        "rejected": rejected,
    }


def metrics_frame(metrics: LoopMetrics) -> dict[str, Any]:
    return {
        "type": "metrics",
        "actuation_latency_ms": metrics.actuation_latency_ms,
        "swa_rmse": metrics.swa_rmse,
        "velocity_rmse": metrics.velocity_rmse,
        "command_rate_hz": metrics.command_rate_hz,
        "g2g_ms": metrics.g2g_ms,
    }


class _Client:
    def __init__(self, conn: socket.socket):
        self.conn = conn
        self.websocket = False
        self.lock = threading.Lock()
        self.alive = True

    def send_json(self, doc: dict[str, Any]) -> None:
        if not self.alive:
            return
        data = json.dumps(doc, separators=(",", ":")).encode()
        try:
            with self.lock:
                if self.websocket:
                    self.conn.sendall(_ws_encode_text(data))
                else:
                    self.conn.sendall(data + b"\n")
        except OSError:
            self.alive = False


def _ws_encode_text(payload: bytes) -> bytes:
    header = b"\x81"  # FIN + text opcode
    n = len(payload)
    if n < 126:
        header += bytes([n])
    elif n < 65536:
        header += b"\x7e" + struct.pack(">H", n)
    else:
        header += b"\x7f" + struct.pack(">Q", n)
    return header + payload


def _ws_read_message(conn: socket.socket) -> bytes | None:
    """One complete (possibly fragmented) client message; None on close."""
    message = b""
    while True:
        head = _read_exact(conn, 2)
        if head is None:
            return None
        fin = head[0] & 0x80
        opcode = head[0] & 0x0F
        masked = head[1] & 0x80
        length = head[1] & 0x7F
        if length == 126:
            ext = _read_exact(conn, 2)
            if ext is None:
                return None
            length = struct.unpack(">H", ext)[0]
        elif length == 127:
            ext = _read_exact(conn, 8)
            if ext is None:
                return None
            length = struct.unpack(">Q", ext)[0]
        mask = b"\x00\x00\x00\x00"
        if masked:
            mask = _read_exact(conn, 4)
            if mask is None:
                return None
        payload = _read_exact(conn, length) if length else b""
        if payload is None:
            return None
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            return None
        if opcode == 0x9:  # ping -> pong
            try:
                conn.sendall(b"\x8a" + bytes([len(payload)]) + payload)
            except OSError:
                return None
            continue
        if opcode == 0xA:  # pong
            continue
        message += payload
        if fin:
            return message


def _read_exact(conn: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        try:
            chunk = conn.recv(n - len(buf))
        except OSError:
            return None
        if not chunk:
            return None
        buf += chunk
    return buf


class UiServer:
    """Serves the operator console protocol on a local socket."""

    def __init__(
        self,
        node: OperatorNode,
        host: str = "127.0.0.1",
        port: int = 0,
        snapshot_hz: float = 20.0,
        metrics_hz: float = 1.0,
    ):
        self.node = node
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(8)
        self.address = self._sock.getsockname()
        self._clients: list[_Client] = []
        self._running = True
        self.frames_received = {"input_sample": 0, "manager_event": 0, "render_ack": 0}
        node.session_listeners.append(self._on_session)
        threading.Thread(target=self._accept_loop, daemon=True).start()
        self._snapshot_period = 1.0 / snapshot_hz
        self._metrics_period = 1.0 / metrics_hz
        threading.Thread(target=self._broadcast_loop, daemon=True).start()

    def close(self) -> None:
        self._running = False
        try:
            self._sock.close()
        except OSError:
            pass
        for client in self._clients:
            client.alive = False
            try:
                client.conn.close()
            except OSError:
                pass

    # -- outbound ------------------------------------------------------------

    def _on_session(self, _session, rejected: str | None) -> None:
        self._broadcast(session_frame(self.node, rejected))

    def _broadcast(self, doc: dict[str, Any]) -> None:
        for client in list(self._clients):
            client.send_json(doc)

    def _broadcast_loop(self) -> None:
        import time

        next_metrics = 0.0
        while self._running:
            time.sleep(self._snapshot_period)
            if not self._clients:
                continue
            snapshot = self.node.scene.snapshot()
            snapshot["type"] = "scene_snapshot"
            snapshot["t_ns"] = self.node.scheduler.now_ns()
            self._broadcast(snapshot)
            next_metrics -= self._snapshot_period
            if next_metrics <= 0:
                next_metrics = self._metrics_period
                self._broadcast(metrics_frame(self.node.compute_metrics()))

    # -- inbound -------------------------------------------------------------

    def _accept_loop(self) -> None:
        while self._running:
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            threading.Thread(target=self._serve, args=(conn,), daemon=True).start()

    def _serve(self, conn: socket.socket) -> None:
        client = _Client(conn)
        try:
            # WebSocket clients open with an HTTP GET immediately; a silent
            # peek timeout means a plain line-based listener.
            conn.settimeout(0.25)
            try:
                first = conn.recv(4, socket.MSG_PEEK)
            except socket.timeout:
                first = b""
            conn.settimeout(None)
            if first == b"GET ":
                if not self._ws_handshake(conn):
                    return
                client.websocket = True
            self._clients.append(client)
            client.send_json(session_frame(self.node))
            if client.websocket:
                while self._running and client.alive:
                    message = _ws_read_message(conn)
                    if message is None:
                        break
                    self._handle_frame(client, message)
            else:
                buf = b""
                while self._running and client.alive:
                    chunk = conn.recv(65536)
                    if not chunk:
                        break
                    buf += chunk
                    while b"\n" in buf:
                        line, buf = buf.split(b"\n", 1)
                        if line.strip():
                            self._handle_frame(client, line)
        except OSError:
            pass
        finally:
            client.alive = False
            if client in self._clients:
                self._clients.remove(client)
            try:
                conn.close()
            except OSError:
                pass

    def _ws_handshake(self, conn: socket.socket) -> bool:
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = conn.recv(4096)
            if not chunk:
                return False
            data += chunk
        key = None
        for line in data.split(b"\r\n"):
            if line.lower().startswith(b"sec-websocket-key:"):
                key = line.split(b":", 1)[1].strip().decode()
        if key is None:
            return False
        accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        )
        conn.sendall(response.encode())
        return True

    def _handle_frame(self, client: _Client, raw: bytes) -> None:
        try:
            doc = json.loads(raw.decode())
        except (UnicodeDecodeError, json.JSONDecodeError):
            return
        kind = doc.get("type")
        if kind == "input_sample":
            self.frames_received["input_sample"] += 1
            source = self.node.command_source
            if isinstance(source, InteractiveSource):
                try:
                    sample = InputSample(
                        device_id=str(doc.get("device", "")),
                        axes=tuple(float(a) for a in doc.get("axes", [])),
                        buttons=tuple(bool(b) for b in doc.get("buttons", [])),
                        stamp_ns=int(doc.get("stamp_ns", 0)),
                    )
                except (TypeError, ValueError):
                    return
                source.push_sample(sample)
        elif kind == "manager_event":
            self.frames_received["manager_event"] += 1
            event = event_from_frame(doc)
            if event is None:
                client.send_json(session_frame(self.node, rejected="unknown event"))
                return
            ok, reason = self.node.handle_event(event)
            client.send_json(session_frame(self.node, rejected=reason))
        elif kind == "render_ack":
            self.frames_received["render_ack"] += 1
            self.node.record_render_ack(
                str(doc.get("camera", "")), int(doc.get("frame_stamp_ns", 0))
            )
