"""Video stream configuration and the bitrate ladder controller.

The controller sees only delivered throughput (receiver-side link stats).
It steps down one ladder rung after a starved window, and steps up one
rung after `cooldown` consecutive healthy windows. A rung that just
caused starvation is quarantined for a while so a hard bandwidth cap
does not produce probe oscillation. Manual mode is always a no-op.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from ..netlink.stats import LinkStatsView

DOWN_THRESHOLD = 0.9
UP_THRESHOLD = 0.95
DEFAULT_COOLDOWN = 3
DEFAULT_QUARANTINE = 30


class RateMode(Enum):
    MANUAL = "manual"
    AUTOMATIC = "automatic"


@dataclass(frozen=True)
class StreamConfig:
    """Encoder knobs: bitrate, framerate, resolution scaling and crop."""

    bitrate: float = 4_000_000.0  # bits/s
    framerate: float = 40.0
    scaling: float = 1.0
    nominal_width: int = 924
    nominal_height: int = 520
    crop_x: int = 0
    crop_y: int = 0
    crop_width: int = 924
    crop_height: int = 520
    mode: RateMode = RateMode.MANUAL

    def __post_init__(self) -> None:
        if self.bitrate <= 0 or self.framerate <= 0:
            raise ValueError("bitrate and framerate must be > 0")
        if not 0.0 < self.scaling <= 1.0:
            raise ValueError("scaling must be in (0, 1]")
        if self.crop_width <= 0 or self.crop_height <= 0:
            raise ValueError("crop must be non-empty")
        if (
            self.crop_x < 0
            or self.crop_y < 0
            or self.crop_x + self.crop_width > self.nominal_width
            or self.crop_y + self.crop_height > self.nominal_height
        ):
            raise ValueError("crop must fit inside the nominal frame")


class StreamRateController:
    """One adapt() call per stats window; moves at most one rung per call."""

    def __init__(
        self,
        ladder: tuple[float, ...],
        cooldown: int = DEFAULT_COOLDOWN,
        quarantine: int = DEFAULT_QUARANTINE,
    ):
        if not ladder:
            raise ValueError("ladder must not be empty")
        if list(ladder) != sorted(ladder):
            raise ValueError("ladder must be sorted ascending")
        if cooldown < 1:
            raise ValueError("cooldown must be >= 1")
        self.ladder = tuple(float(b) for b in ladder)
        self.cooldown = cooldown
        self.quarantine = quarantine
        self._healthy_streak = 0
        self._quarantined: dict[int, int] = {}  # rung index -> windows left

    def adapt(self, stats: LinkStatsView, cfg: StreamConfig) -> StreamConfig:
        if cfg.mode != RateMode.AUTOMATIC:
            return cfg
        try:
            rung = self.ladder.index(cfg.bitrate)
        except ValueError:
            raise ValueError(f"bitrate {cfg.bitrate} is not a ladder rung") from None

        for idx in list(self._quarantined):
            self._quarantined[idx] -= 1
            if self._quarantined[idx] <= 0:
                del self._quarantined[idx]

        target_bps = cfg.bitrate / 8.0
        delivered = stats.delivered_bytes_per_s
        if delivered < DOWN_THRESHOLD * target_bps:
            self._healthy_streak = 0
            if rung > 0:
                self._quarantined[rung] = self.quarantine
                return replace(cfg, bitrate=self.ladder[rung - 1])
            return cfg
        if delivered >= UP_THRESHOLD * target_bps:
            self._healthy_streak += 1
            if (
                self._healthy_streak >= self.cooldown
                and rung + 1 < len(self.ladder)
                and rung + 1 not in self._quarantined
            ):
                self._healthy_streak = 0
                return replace(cfg, bitrate=self.ladder[rung + 1])
            return cfg
        self._healthy_streak = 0
        return cfg


def adapt_stream(
    stats: LinkStatsView, cfg: StreamConfig, controller: StreamRateController
) -> StreamConfig:
    """Functional alias over a controller instance."""
    return controller.adapt(stats, cfg)


def encode_stream_config(cfg: StreamConfig) -> bytes:
    """JSON encoding used on the control channel for reconfiguration."""
    import json

    return json.dumps(
        {
            "bitrate": cfg.bitrate,
            "framerate": cfg.framerate,
            "scaling": cfg.scaling,
            "crop": [cfg.crop_x, cfg.crop_y, cfg.crop_width, cfg.crop_height],
            "nominal": [cfg.nominal_width, cfg.nominal_height],
            "mode": cfg.mode.value,
        }
    ).encode()


def decode_stream_config(payload: bytes) -> StreamConfig:
    import json

    doc = json.loads(payload.decode())
    crop = doc.get("crop", [0, 0, doc["nominal"][0], doc["nominal"][1]])
    return StreamConfig(
        bitrate=doc["bitrate"],
        framerate=doc["framerate"],
        scaling=doc.get("scaling", 1.0),
        nominal_width=doc["nominal"][0],
        nominal_height=doc["nominal"][1],
        crop_x=crop[0],
        crop_y=crop[1],
        crop_width=crop[2],
        crop_height=crop[3],
        mode=RateMode(doc.get("mode", "manual")),
    )
