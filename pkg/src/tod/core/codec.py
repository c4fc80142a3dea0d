"""Bit-exact binary codec for WireMessage envelopes.

Header layout (little-endian, 20 bytes total):

    offset  size  field
    0       3     magic 0x54 0x4F 0x44
    3       1     version (currently 1)
    4       2     topic_id     u16
    6       4     seq          u32
    10      8     stamp_ns     u64
    18      2     payload_len  u16

Payload fields follow in declared order: f64 for floats, u8 for enums and
booleans, u16-length-prefixed UTF-8 for strings, u16 counts for lists.
decode_message(encode_message(m)) == m for every valid message; malformed
inputs raise a distinct error per failure class.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable

from .geometry import Pose2D
from .messages import (
    ClockProbe,
    DetectedObject,
    FramePacket,
    Heartbeat,
    LanePolylines,
    LaserScan,
    ObjectList,
    OccupancyGrid,
    StatusBody,
    WireMessage,
)
from .types import DriveMode, Gear, Indicator, PrimaryCommand, SecondaryCommand, VehicleState

MAGIC = b"\x54\x4f\x44"
VERSION = 1
HEADER_LEN = 20
MAX_PAYLOAD = 0xFFFF

_HEADER = struct.Struct("<3sBHIQH")
assert _HEADER.size == HEADER_LEN


class CodecError(Exception):
    """Base class for encode/decode failures."""


class OversizeError(CodecError):
    """Payload longer than the 16-bit length field allows."""


class TruncatedError(CodecError):
    """Buffer ends before the header or declared payload completes."""


class BadMagicError(CodecError):
    """Leading magic bytes are not 0x54 0x4F 0x44."""


class UnknownVersionError(CodecError):
    """Version byte not understood by this codec."""


class UnknownTopicError(CodecError):
    """topic_id not present in the registry."""


class LengthMismatchError(CodecError):
    """payload_len disagrees with the actual payload contents."""


class _Writer:
    __slots__ = ("parts",)

    def __init__(self) -> None:
        self.parts: list[bytes] = []

    def u8(self, v: int) -> None:
        self.parts.append(struct.pack("<B", v))

    def u16(self, v: int) -> None:
        self.parts.append(struct.pack("<H", v))

    def u32(self, v: int) -> None:
        self.parts.append(struct.pack("<I", v))

    def u64(self, v: int) -> None:
        self.parts.append(struct.pack("<Q", v))

    def f64(self, v: float) -> None:
        self.parts.append(struct.pack("<d", v))

    def string(self, s: str) -> None:
        raw = s.encode("utf-8")
        if len(raw) > MAX_PAYLOAD:
            raise OversizeError("string field too long")
        self.u16(len(raw))
        self.parts.append(raw)

    def raw(self, b: bytes) -> None:
        self.parts.append(b)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes) -> None:
        self.buf = buf
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise LengthMismatchError("payload ends mid-field")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def string(self) -> str:
        n = self.u16()
        return self._take(n).decode("utf-8")

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def done(self) -> bool:
        return self.pos == len(self.buf)


def _enc_heartbeat(w: _Writer, body: Heartbeat) -> None:
    pass


def _dec_heartbeat(r: _Reader) -> Heartbeat:
    return Heartbeat()


def _enc_primary(w: _Writer, body: PrimaryCommand) -> None:
    w.f64(body.desired_swa)
    w.f64(body.desired_velocity)
    w.u32(body.seq)
    w.u64(body.stamp_ns)


def _dec_primary(r: _Reader) -> PrimaryCommand:
    return PrimaryCommand(r.f64(), r.f64(), r.u32(), r.u64())


def _enc_secondary(w: _Writer, body: SecondaryCommand) -> None:
    w.u8(body.gear)
    w.u8(body.indicator)
    w.u8(1 if body.estop_engaged else 0)
    w.u32(body.seq)
    w.u64(body.stamp_ns)


def _dec_secondary(r: _Reader) -> SecondaryCommand:
    return SecondaryCommand(Gear(r.u8()), Indicator(r.u8()), bool(r.u8()), r.u32(), r.u64())


def _enc_state(w: _Writer, body: VehicleState) -> None:
    w.f64(body.pose.x)
    w.f64(body.pose.y)
    w.f64(body.pose.yaw)
    w.f64(body.velocity)
    w.f64(body.swa)
    w.u8(body.gear)
    w.u8(body.indicator)
    w.u8(1 if body.estop_engaged else 0)
    w.u8(body.mode)
    w.u64(body.stamp_ns)


def _dec_state(r: _Reader) -> VehicleState:
    pose = Pose2D(r.f64(), r.f64(), r.f64())
    return VehicleState(
        pose=pose,
        velocity=r.f64(),
        swa=r.f64(),
        gear=Gear(r.u8()),
        indicator=Indicator(r.u8()),
        estop_engaged=bool(r.u8()),
        mode=DriveMode(r.u8()),
        stamp_ns=r.u64(),
    )


def _enc_scan(w: _Writer, body: LaserScan) -> None:
    w.string(body.frame_id)
    w.f64(body.angle_min)
    w.f64(body.angle_max)
    w.f64(body.angle_increment)
    w.f64(body.range_min)
    w.f64(body.range_max)
    w.u16(len(body.ranges))
    w.raw(struct.pack(f"<{len(body.ranges)}d", *body.ranges))


def _dec_scan(r: _Reader) -> LaserScan:
    frame_id = r.string()
    angle_min, angle_max, inc, rmin, rmax = (r.f64() for _ in range(5))
    n = r.u16()
    ranges = struct.unpack(f"<{n}d", r.raw(8 * n))
    return LaserScan(frame_id, angle_min, angle_max, inc, rmin, rmax, ranges)


# Frame datagrams are padded with zeros up to simulated_size_bytes so the
# emulated link is loaded with the size the encoder would have produced.
_FRAME_META = struct.Struct("<IQHHIQ")


def _frame_padding(body: FramePacket) -> int:
    meta = 2 + len(body.camera_id.encode("utf-8")) + _FRAME_META.size
    return max(0, body.simulated_size_bytes - HEADER_LEN - meta)


def _enc_frame(w: _Writer, body: FramePacket) -> None:
    w.string(body.camera_id)
    w.raw(
        _FRAME_META.pack(
            body.seq,
            body.stamp_ns,
            body.width,
            body.height,
            body.simulated_size_bytes,
            body.digest,
        )
    )
    w.raw(b"\x00" * _frame_padding(body))


def _dec_frame(r: _Reader) -> FramePacket:
    camera_id = r.string()
    seq, stamp_ns, width, height, size, digest = _FRAME_META.unpack(r.raw(_FRAME_META.size))
    body = FramePacket(camera_id, seq, stamp_ns, width, height, size, digest)
    r.raw(_frame_padding(body))
    return body


def _enc_objects(w: _Writer, body: ObjectList) -> None:
    w.string(body.frame_id)
    w.u16(len(body.objects))
    for o in body.objects:
        w.raw(
            struct.pack(
                "<6dI", o.centroid_x, o.centroid_y, o.min_x, o.min_y, o.max_x, o.max_y, o.point_count
            )
        )


def _dec_objects(r: _Reader) -> ObjectList:
    frame_id = r.string()
    n = r.u16()
    objs = []
    for _ in range(n):
        vals = struct.unpack("<6dI", r.raw(52))
        objs.append(DetectedObject(*vals))
    return ObjectList(frame_id, tuple(objs))


def _enc_grid(w: _Writer, body: OccupancyGrid) -> None:
    w.f64(body.origin_x)
    w.f64(body.origin_y)
    w.f64(body.resolution)
    w.u16(body.width)
    w.u16(body.height)
    w.raw(body.cells)


def _dec_grid(r: _Reader) -> OccupancyGrid:
    ox, oy, res = r.f64(), r.f64(), r.f64()
    width, height = r.u16(), r.u16()
    cells = r.raw((width * height + 7) // 8)
    return OccupancyGrid(ox, oy, res, width, height, cells)


def _enc_lanes(w: _Writer, body: LanePolylines) -> None:
    w.f64(body.swa_used)
    w.f64(body.horizon)
    w.u16(len(body.left))
    for pts in (body.left, body.right):
        for x, y in pts:
            w.f64(x)
            w.f64(y)


def _dec_lanes(r: _Reader) -> LanePolylines:
    swa_used = r.f64()
    horizon = r.f64()
    n = r.u16()
    left = tuple((r.f64(), r.f64()) for _ in range(n))
    right = tuple((r.f64(), r.f64()) for _ in range(n))
    return LanePolylines(swa_used, horizon, left, right)


def _enc_probe(w: _Writer, body: ClockProbe) -> None:
    w.u64(body.orig_ns)
    w.u64(body.recv_ns)
    w.u64(body.send_ns)


def _dec_probe(r: _Reader) -> ClockProbe:
    return ClockProbe(r.u64(), r.u64(), r.u64())


def _enc_status(w: _Writer, body: StatusBody) -> None:
    w.string(body.node)
    w.string(body.state)
    w.u64(body.stamp_ns)


def _dec_status(r: _Reader) -> StatusBody:
    return StatusBody(r.string(), r.string(), r.u64())


_BODY_CODECS: dict[type, tuple[Callable, Callable]] = {
    Heartbeat: (_enc_heartbeat, _dec_heartbeat),
    PrimaryCommand: (_enc_primary, _dec_primary),
    SecondaryCommand: (_enc_secondary, _dec_secondary),
    VehicleState: (_enc_state, _dec_state),
    LaserScan: (_enc_scan, _dec_scan),
    FramePacket: (_enc_frame, _dec_frame),
    ObjectList: (_enc_objects, _dec_objects),
    OccupancyGrid: (_enc_grid, _dec_grid),
    LanePolylines: (_enc_lanes, _dec_lanes),
    ClockProbe: (_enc_probe, _dec_probe),
    StatusBody: (_enc_status, _dec_status),
}


@dataclass(frozen=True)
class TopicEntry:
    topic_id: int
    name: str
    body_type: type


class TopicRegistry:
    """Numeric topic ids mapped to names and payload types.

    Names follow /vehicle/<name>/<channel> and /operator/<channel>; the
    numeric assignment comes from configuration and docs/wire-format.md
    publishes the bundled default table.
    """

    def __init__(self) -> None:
        self._by_id: dict[int, TopicEntry] = {}
        self._by_name: dict[str, TopicEntry] = {}

    def register(self, topic_id: int, name: str, body_type: type) -> TopicEntry:
        if body_type not in _BODY_CODECS:
            raise ValueError(f"no codec for body type {body_type.__name__}")
        if topic_id in self._by_id:
            raise ValueError(f"topic id {topic_id} already registered")
        if name in self._by_name:
            raise ValueError(f"topic name {name!r} already registered")
        entry = TopicEntry(topic_id, name, body_type)
        self._by_id[topic_id] = entry
        self._by_name[name] = entry
        return entry

    def entry(self, topic_id: int) -> TopicEntry:
        try:
            return self._by_id[topic_id]
        except KeyError:
            raise UnknownTopicError(f"unknown topic id {topic_id}") from None

    def by_name(self, name: str) -> TopicEntry:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownTopicError(f"unknown topic name {name!r}") from None

    def __contains__(self, topic_id: int) -> bool:
        return topic_id in self._by_id

    def entries(self) -> list[TopicEntry]:
        return sorted(self._by_id.values(), key=lambda e: e.topic_id)


def registry_for(
    vehicle: str,
    scan_names: tuple[str, ...] = (),
    camera_names: tuple[str, ...] = (),
) -> TopicRegistry:
    """Allocate the session topic table for one vehicle's sensor set.

    Core topics hold fixed ids 0..5; sensor topics are allocated
    sequentially from 6 (scans, cameras, one object list per scan, grid,
    lane); control-channel status topics sit at 30/31.
    """
    reg = TopicRegistry()
    reg.register(0, "/sys/heartbeat", Heartbeat)
    reg.register(1, "/operator/cmd_primary", PrimaryCommand)
    reg.register(2, "/operator/cmd_secondary", SecondaryCommand)
    reg.register(3, "/operator/clock_probe", ClockProbe)
    reg.register(4, f"/vehicle/{vehicle}/clock_reply", ClockProbe)
    reg.register(5, f"/vehicle/{vehicle}/state", VehicleState)
    next_id = 6
    for name in scan_names:
        reg.register(next_id, f"/vehicle/{vehicle}/scan/{name}", LaserScan)
        next_id += 1
    for name in camera_names:
        reg.register(next_id, f"/vehicle/{vehicle}/frame/{name}", FramePacket)
        next_id += 1
    for name in scan_names:
        reg.register(next_id, f"/vehicle/{vehicle}/objects/{name}", ObjectList)
        next_id += 1
    reg.register(next_id, f"/vehicle/{vehicle}/grid", OccupancyGrid)
    reg.register(next_id + 1, f"/vehicle/{vehicle}/lane", LanePolylines)
    reg.register(30, f"/vehicle/{vehicle}/status", StatusBody)
    reg.register(31, "/operator/session", StatusBody)
    return reg


def default_registry(vehicle: str = "demo") -> TopicRegistry:
    """The bundled demo topic table: front/rear scanners, one camera."""
    return registry_for(vehicle, ("front", "rear"), ("front",))


def encode_message(msg: WireMessage, registry: TopicRegistry | None = None) -> bytes:
    """Serialize a WireMessage; raises OversizeError past the u16 length."""
    codec = _BODY_CODECS.get(type(msg.payload))
    if codec is None:
        raise ValueError(f"no codec for body type {type(msg.payload).__name__}")
    if registry is not None:
        entry = registry.entry(msg.topic_id)
        if entry.body_type is not type(msg.payload):
            raise ValueError(
                f"topic {entry.name} carries {entry.body_type.__name__}, "
                f"got {type(msg.payload).__name__}"
            )
    w = _Writer()
    codec[0](w, msg.payload)
    payload = w.getvalue()
    if len(payload) > MAX_PAYLOAD:
        raise OversizeError(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    header = _HEADER.pack(MAGIC, VERSION, msg.topic_id, msg.seq, msg.stamp_ns, len(payload))
    return header + payload


def decode_message(data: bytes, registry: TopicRegistry) -> WireMessage:
    """Inverse of encode_message; rejects anything outside its image."""
    if len(data) < HEADER_LEN:
        raise TruncatedError(f"buffer of {len(data)} bytes is shorter than the header")
    magic, version, topic_id, seq, stamp_ns, payload_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnknownVersionError(f"unknown version {version}")
    if len(data) < HEADER_LEN + payload_len:
        raise TruncatedError(
            f"payload truncated: declared {payload_len}, got {len(data) - HEADER_LEN}"
        )
    if len(data) > HEADER_LEN + payload_len:
        raise LengthMismatchError(
            f"trailing bytes: declared {payload_len}, got {len(data) - HEADER_LEN}"
        )
    entry = registry.entry(topic_id)
    r = _Reader(data[HEADER_LEN:])
    try:
        body = _BODY_CODECS[entry.body_type][1](r)
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise LengthMismatchError(f"malformed {entry.body_type.__name__} payload: {exc}") from exc
    if not r.done():
        raise LengthMismatchError(
            f"{entry.body_type.__name__} payload has {len(r.buf) - r.pos} unread bytes"
        )
    return WireMessage(topic_id, seq, stamp_ns, body)
