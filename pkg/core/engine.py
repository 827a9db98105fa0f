"""Deterministic discrete-event radio simulator.

Events sit in a heap ordered by (time, sequence number), so equal-time events
run in the order they were scheduled. Every radio transmission is one packet
and ends in exactly one fate: dropped at send time, expired on arrival, or
delivered to at least one receiver.
"""

from __future__ import annotations

import heapq
import itertools
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from functools import partial
from types import MappingProxyType
from typing import Any

import numpy as np
from cachetools import LRUCache

from core.metrics import Metrics
from core.radio import RadioModel, neighbors
from core.serialization import TraceEvent, TraceRecord
from core.type_aliases import Channel, DeviceId, PacketId, Position, Seconds

__all__ = [
    "Engine",
    "EventKind",
    "Packet",
    "PacketHandler",
    "PacketKind",
    "SimEvent",
]

_EMPTY: Mapping[str, Any] = MappingProxyType({})


class EventKind(StrEnum):
    PACKET_DELIVERY = "packet-delivery"
    MOBILITY_UPDATE = "mobility-update"
    TIMER_EXPIRY = "timer-expiry"
    POWER_TOGGLE = "node-power-toggle"


class PacketKind(StrEnum):
    GRI_GO = "gri-go"
    GRI_RETURN = "gri-return"
    GRI_INFO = "gri-info"
    FLOOD = "flood"
    ZKP_MSG = "zkp-msg"
    INSERTION_MSG = "insertion-msg"


@dataclass(slots=True, frozen=True, kw_only=True)
class Packet:
    """One radio transmission.

    Attributes:
        dst: Addressee, ``None`` for a local broadcast
        trail: IDs gathered on the way back to a broadcast initiator
        session: Protocol session whose handler receives the packet
        body: Small protocol fields (parent, phase, origin, ...)
    """

    id: PacketId
    kind: PacketKind
    src: DeviceId
    size: int
    created_at: Seconds
    channel: Channel
    session: int
    dst: DeviceId | None = None
    trail: tuple[DeviceId, ...] = ()
    body: Mapping[str, Any] = field(default_factory=lambda: _EMPTY)

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ValueError("Packet size must be positive")


@dataclass(slots=True, frozen=True, order=True)
class SimEvent:
    time: Seconds
    seq: int
    kind: EventKind = field(compare=False)
    node: DeviceId = field(compare=False, default=-1)
    action: Callable[[], None] = field(compare=False, repr=False, default=lambda: None)


PacketHandler = Callable[[DeviceId, Packet], None]


@dataclass(slots=True)
class _Session:
    handler: PacketHandler
    on_idle: Callable[[], None] | None = None
    in_flight: int = 0


class Engine:
    """Event loop, radio medium and trace sink for one scenario."""

    __slots__ = (
        "_adjacency_cache",
        "_epoch",
        "_handlers",
        "_packet_ids",
        "_pending",
        "_queue",
        "_seq",
        "_session_ids",
        "_sessions",
        "hop_latency",
        "loss_prob",
        "now",
        "online",
        "positions",
        "processing_delay",
        "radio",
        "rng",
        "trace",
    )

    def __init__(
        self,
        radio: RadioModel,
        positions: Mapping[DeviceId, Position],
        rng: np.random.Generator,
        *,
        hop_latency: Seconds = 0.010,
        processing_delay: Seconds = 0.001,
        loss_prob: float = 0.0,
        online: set[DeviceId] | None = None,
    ) -> None:
        self.radio = radio
        self.positions: dict[DeviceId, Position] = dict(positions)
        self.online: set[DeviceId] = set(self.positions) if online is None else set(online)
        self.rng = rng
        self.hop_latency = hop_latency
        self.processing_delay = processing_delay
        self.loss_prob = loss_prob
        self.now: Seconds = 0.0
        self.trace: list[TraceRecord] = []
        self._queue: list[SimEvent] = []
        self._seq = itertools.count()
        self._packet_ids = itertools.count()
        self._session_ids = itertools.count(1)
        self._sessions: dict[int, _Session] = {}
        self._pending: dict[PacketId, list[int]] = {}
        self._handlers: dict[EventKind, list[Callable[[SimEvent], None]]] = {}
        self._epoch = 0
        self._adjacency_cache: LRUCache[Any, dict[DeviceId, frozenset[DeviceId]]] = LRUCache(
            maxsize=4
        )

    @property
    def latency(self) -> Seconds:
        """Time from transmission to handling at the next hop."""
        return self.hop_latency + self.processing_delay

    # Topology

    def adjacency(self) -> dict[DeviceId, frozenset[DeviceId]]:
        """Radio links among powered-on devices for the current topology epoch."""
        links = self._adjacency_cache.get(self._epoch)
        if links is None:
            live = {d: p for d, p in self.positions.items() if d in self.online}
            links = neighbors(self.radio, live)
            self._adjacency_cache[self._epoch] = links
        return links

    def neighbors_of(self, device: DeviceId) -> frozenset[DeviceId]:
        return self.adjacency().get(device, frozenset())

    def move(self, device: DeviceId, position: Position) -> None:
        self.positions[device] = position
        self._epoch += 1

    def set_power(self, device: DeviceId, on: bool) -> None:
        if on:
            self.online.add(device)
        else:
            self.online.discard(device)
        self._epoch += 1

    # Event loop

    def register_handler(self, kind: EventKind, handler: Callable[[SimEvent], None]) -> None:
        """Observe every processed event of ``kind`` after its action ran."""
        self._handlers.setdefault(kind, []).append(handler)

    def schedule(
        self,
        at: Seconds,
        kind: EventKind,
        action: Callable[[], None],
        *,
        node: DeviceId = -1,
    ) -> SimEvent:
        if at < self.now:
            raise ValueError(f"Cannot schedule at {at} before now={self.now}")
        event = SimEvent(at, next(self._seq), kind, node, action)
        heapq.heappush(self._queue, event)
        return event

    def set_timer(
        self, delay: Seconds, action: Callable[[], None], *, node: DeviceId = -1
    ) -> SimEvent:
        return self.schedule(self.now + delay, EventKind.TIMER_EXPIRY, action, node=node)

    def _step(self) -> None:
        event = heapq.heappop(self._queue)
        self.now = event.time
        event.action()
        for handler in self._handlers.get(event.kind, ()):
            handler(event)

    def advance(self, until: Seconds) -> list[TraceRecord]:
        """Process every event due at or before ``until``; returns new trace records."""
        if until < self.now:
            raise ValueError(f"Cannot advance backwards from {self.now} to {until}")
        start = len(self.trace)
        while self._queue and self._queue[0].time <= until:
            self._step()
        self.now = until
        return self.trace[start:]

    def run_until(self, done: Callable[[], bool], *, limit: Seconds) -> bool:
        """Process events until ``done()`` holds, the queue drains or ``limit`` passes."""
        while not done():
            if not self._queue or self._queue[0].time > limit:
                return done()
            self._step()
        return True

    @property
    def pending_events(self) -> int:
        return len(self._queue)

    # Sessions and packets

    def open_session(
        self, handler: PacketHandler, *, on_idle: Callable[[], None] | None = None
    ) -> int:
        """Route packets of a new session to ``handler``.

        ``on_idle`` runs whenever the session's last in-flight packet resolves.
        """
        session_id = next(self._session_ids)
        self._sessions[session_id] = _Session(handler, on_idle)
        return session_id

    def close_session(self, session_id: int) -> None:
        self._sessions.pop(session_id, None)

    def in_flight(self, session_id: int) -> int:
        session = self._sessions.get(session_id)
        return session.in_flight if session is not None else 0

    def transmit(
        self,
        sender: DeviceId,
        kind: PacketKind,
        *,
        size: int,
        channel: Channel,
        session: int,
        dst: DeviceId | None = None,
        trail: tuple[DeviceId, ...] = (),
        body: Mapping[str, Any] | None = None,
        forwarded: bool = False,
        created_at: Seconds | None = None,
    ) -> Packet:
        """Put one packet on the air from ``sender``."""
        packet = Packet(
            id=next(self._packet_ids),
            kind=kind,
            src=sender,
            dst=dst,
            size=size,
            created_at=self.now if created_at is None else created_at,
            channel=channel,
            session=session,
            trail=trail,
            body=MappingProxyType(dict(body)) if body else _EMPTY,
        )
        self.log(
            TraceEvent.FORWARD if forwarded else TraceEvent.SEND,
            node=sender,
            packet=packet,
            ch=channel,
        )

        in_range = self.neighbors_of(sender) if sender in self.online else frozenset()
        receivers = sorted(in_range if dst is None else in_range & {dst})
        if self.loss_prob > 0.0:
            receivers = [r for r in receivers if self.rng.random() >= self.loss_prob]
        if not receivers:
            self.log(TraceEvent.DROP, node=sender, packet=packet, ch=channel)
            Metrics.record_packet(kind.value, "drop")
            return packet

        self._pending[packet.id] = [len(receivers), 0]
        tracked = self._sessions.get(session)
        if tracked is not None:
            tracked.in_flight += 1
        arrival = self.now + self.latency
        for receiver in receivers:
            self.schedule(
                arrival,
                EventKind.PACKET_DELIVERY,
                partial(self._deliver, packet, receiver),
                node=receiver,
            )
        return packet

    def _deliver(self, packet: Packet, receiver: DeviceId) -> None:
        counts = self._pending[packet.id]
        counts[0] -= 1
        session = self._sessions.get(packet.session)
        if receiver in self.online and session is not None:
            counts[1] += 1
            self.log(
                TraceEvent.RECEIVE,
                node=receiver,
                packet=packet,
                ch=packet.channel,
                src=packet.src,
                created=f"{packet.created_at:.6f}",
            )
            session.handler(receiver, packet)
        if counts[0]:
            return

        del self._pending[packet.id]
        if counts[1] == 0:
            self.log(TraceEvent.EXPIRE, node=receiver, packet=packet, ch=packet.channel)
            Metrics.record_packet(packet.kind.value, "expire")
        else:
            Metrics.record_packet(packet.kind.value, "delivered")
        session = self._sessions.get(packet.session)
        if session is not None:
            session.in_flight -= 1
            if session.in_flight == 0 and session.on_idle is not None:
                session.on_idle()

    def log(
        self,
        event: TraceEvent,
        *,
        node: DeviceId = -1,
        packet: Packet | None = None,
        **extra: object,
    ) -> TraceRecord:
        """Append a trace record stamped with the current time."""
        record = TraceRecord(
            time=self.now,
            event=event,
            node=node,
            packet_kind=packet.kind.value if packet is not None else "-",
            packet_id=packet.id if packet is not None else -1,
            size=packet.size if packet is not None else 0,
            extra=tuple((k, str(v)) for k, v in extra.items()),
        )
        self.trace.append(record)
        return record
