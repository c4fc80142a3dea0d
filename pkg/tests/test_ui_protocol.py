"""Operator UI socket: JSON frame protocol over loopback TCP."""

import json
import socket
import time

import pytest

from tod.core import Transform, TransformTree, VehicleParams, default_registry
from tod.netlink import ChannelProfile, ControlBroker, VirtualScheduler, duplex_pair
from tod.operator import InputMapper, InputMapping, SessionPhase
from tod.operator.node import InteractiveSource, OperatorNode, OperatorNodeConfig
from tod.operator.uiserver import UiServer


@pytest.fixture
def node_and_server():
    sched = VirtualScheduler()
    reg = default_registry()
    op_ep, veh_ep, *_ = duplex_pair(sched, reg, ChannelProfile(), ChannelProfile())
    broker = ControlBroker()
    tree = TransformTree(
        [
            Transform("vehicle", "laser_front", (3.6, 0.0, 0.2)),
            Transform("vehicle", "laser_rear", (-1.0, 0.0, 0.2)),
            Transform("vehicle", "camera_front", (2.0, 0.0, 1.4)),
        ]
    )
    mapper = InputMapper(InputMapping(), VehicleParams(), active_device="virtual_joystick")
    node = OperatorNode(
        sched,
        op_ep,
        broker.client("operator"),
        reg,
        VehicleParams(),
        tree,
        OperatorNodeConfig(scan_names=("front", "rear"), camera_names=("front",)),
        command_source=InteractiveSource(mapper),
    )
    server = UiServer(node, port=0, snapshot_hz=50.0, metrics_hz=10.0)
    yield node, server, broker
    server.close()


def connect(server) -> socket.socket:
    sock = socket.create_connection(("127.0.0.1", server.address[1]), timeout=3.0)
    sock.settimeout(3.0)
    return sock


def read_frames(sock: socket.socket, want: int, timeout: float = 3.0) -> list[dict]:
    frames = []
    buf = b""
    deadline = time.time() + timeout
    while len(frames) < want and time.time() < deadline:
        try:
            chunk = sock.recv(65536)
        except socket.timeout:
            break
        if not chunk:
            break
        buf += chunk
        while b"\n" in buf:
            line, buf = buf.split(b"\n", 1)
            if line.strip():
                frames.append(json.loads(line))
    return frames


def send_frame(sock: socket.socket, doc: dict) -> None:
    sock.sendall(json.dumps(doc).encode() + b"\n")


def test_initial_session_pushed(node_and_server):
    _, server, _ = node_and_server
    sock = connect(server)
    [frame] = read_frames(sock, 1)
    assert frame["type"] == "session"
    assert frame["state"] == "Idle"
    sock.close()


def test_manager_event_round_trip(node_and_server):
    node, server, _ = node_and_server
    sock = connect(server)
    read_frames(sock, 1)
    send_frame(
        sock,
        {"type": "manager_event", "event": "SetEndpoints", "vehicle": "veh", "operator": "op"},
    )
    frames = read_frames(sock, 2)
    states = [f["state"] for f in frames if f["type"] == "session"]
    assert "Configured" in states
    assert node.session.phase == SessionPhase.CONFIGURED
    sock.close()


def test_rejected_event_reports_reason(node_and_server):
    node, server, _ = node_and_server
    sock = connect(server)
    read_frames(sock, 1)
    send_frame(sock, {"type": "manager_event", "event": "Start"})
    frames = read_frames(sock, 1)
    rejected = [f for f in frames if f.get("rejected")]
    assert rejected
    assert "Start" in rejected[0]["rejected"]
    assert node.session.phase == SessionPhase.IDLE
    sock.close()


def test_scene_snapshot_flows(node_and_server):
    _, server, _ = node_and_server
    sock = connect(server)
    frames = read_frames(sock, 4)
    kinds = {f["type"] for f in frames}
    assert "scene_snapshot" in kinds
    snapshot = next(f for f in frames if f["type"] == "scene_snapshot")
    entity_kinds = {e["kind"] for e in snapshot["entities"]}
    assert "VehicleModel" in entity_kinds
    assert "Speedometer" in entity_kinds
    sock.close()


def test_input_sample_reaches_source(node_and_server):
    node, server, _ = node_and_server
    sock = connect(server)
    read_frames(sock, 1)
    send_frame(
        sock,
        {
            "type": "input_sample",
            "device": "virtual_joystick",
            "axes": [0.5, 0.0],
            "buttons": [False] * 5,
            "stamp_ns": 123,
        },
    )
    deadline = time.time() + 2.0
    while time.time() < deadline and node.command_source._latest is None:
        time.sleep(0.01)
    assert node.command_source._latest is not None
    assert node.command_source._latest.axes == (0.5, 0.0)
    sock.close()


def test_render_ack_recorded(node_and_server):
    node, server, _ = node_and_server
    sock = connect(server)
    read_frames(sock, 1)
    send_frame(sock, {"type": "render_ack", "camera": "front", "frame_stamp_ns": 1000})
    deadline = time.time() + 2.0
    while time.time() < deadline and not node.metrics_window.frame_events:
        time.sleep(0.01)
    assert node.metrics_window.frame_events[0][0] == "front"
    assert node.metrics_window.frame_events[0][1] == 1000
    sock.close()


def test_websocket_handshake_and_frames(node_and_server):
    _, server, _ = node_and_server
    sock = socket.create_connection(("127.0.0.1", server.address[1]), timeout=3.0)
    sock.settimeout(3.0)
    key = "dGhlIHNhbXBsZSBub25jZQ=="
    request = (
        f"GET / HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\n"
        f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
        f"Sec-WebSocket-Version: 13\r\n\r\n"
    )
    sock.sendall(request.encode())
    response = b""
    while b"\r\n\r\n" not in response:
        response += sock.recv(1024)
    assert b"101 Switching Protocols" in response
    assert b"s3pPLMBiTxaQ9kYGzzhZRbK+xOo=" in response  # RFC 6455 sample accept
    rest = response.split(b"\r\n\r\n", 1)[1]

    def read_ws_text():
        nonlocal rest

        def take(n):
            nonlocal rest
            while len(rest) < n:
                rest += sock.recv(4096)
            out, rest = rest[:n], rest[n:]
            return out

        head = take(2)
        assert head[0] == 0x81
        length = head[1] & 0x7F
        if length == 126:
            import struct

            length = struct.unpack(">H", take(2))[0]
        return json.loads(take(length))

    kinds = {read_ws_text()["type"] for _ in range(4)}
    assert "session" in kinds
    assert "scene_snapshot" in kinds
    sock.close()
