"""Two-tier transport: emulated/live datagrams plus a reliable control channel."""

from .clocksync import ZERO_SYNC, ClockSync, ClockSyncEstimator, SampleRejected, estimate_clock_offset
from .control import (
    ControlBroker,
    ControlChannelServer,
    ControlClient,
    ControlDelivery,
    ControlError,
    ControlSubscription,
    TcpControlClient,
    decode_frame,
    encode_frame,
    topic_matches,
)
from .emulator import (
    MAX_DATAGRAM,
    ChannelProfile,
    DatagramEndpoint,
    DatagramLink,
    DatagramTooLarge,
    Delivery,
    SendReceipt,
    Subscription,
    TransportClosed,
    duplex_pair,
)
from .stats import LinkStats, LinkStatsView, link_stats
from .udp import UdpEndpoint
from .virtualtime import EventHandle, RealTimeScheduler, Scheduler, VirtualScheduler

__all__ = [
    "ZERO_SYNC",
    "ClockSync",
    "ClockSyncEstimator",
    "SampleRejected",
    "estimate_clock_offset",
    "ControlBroker",
    "ControlChannelServer",
    "ControlClient",
    "ControlDelivery",
    "ControlError",
    "ControlSubscription",
    "TcpControlClient",
    "decode_frame",
    "encode_frame",
    "topic_matches",
    "MAX_DATAGRAM",
    "ChannelProfile",
    "DatagramEndpoint",
    "DatagramLink",
    "DatagramTooLarge",
    "Delivery",
    "SendReceipt",
    "Subscription",
    "TransportClosed",
    "duplex_pair",
    "LinkStats",
    "LinkStatsView",
    "link_stats",
    "UdpEndpoint",
    "EventHandle",
    "RealTimeScheduler",
    "Scheduler",
    "VirtualScheduler",
]
