"""GRI three-phase broadcast and the flooding baselines.

GRI floods a request outward (go), folds node IDs back along the flood tree
(return) and rebroadcasts the gathered roster (information). A node is a leaf
when, within a short wait after forwarding the request, it overhears nobody
naming it as parent. Leaves start the return phase and do not rebroadcast the
information phase.

The flooding gather does the same job without aggregation: every node replies
individually and each reply is relayed hop by hop to the initiator.
"""

from __future__ import annotations

from collections.abc import Callable, Collection
from dataclasses import dataclass, replace
from functools import partial
from typing import Any

import networkx as nx

from config.models import BroadcastMode, MessageSizes
from core.engine import Engine, EventKind, Packet, PacketKind
from core.exceptions import ErrorContext, InitiatorNotLegitimateError
from core.metrics import Metrics
from core.type_aliases import Channel, DeviceId, Seconds

__all__ = [
    "LEAF_WAIT_HOPS",
    "FloodGatherSession",
    "FloodSession",
    "GatherSession",
    "GriResult",
    "GriSession",
    "default_response_timer",
    "flood_broadcast",
    "flood_gather",
    "gri_broadcast",
    "open_gather",
]

LEAF_WAIT_HOPS = 2.5

BENCH = Channel("bench")

Decision = Callable[["GriResult"], bool]
Completion = Callable[["GriResult"], None]


@dataclass(slots=True, frozen=True, kw_only=True)
class GriResult:
    """Outcome of one roster-gathering broadcast.

    Attributes:
        roster: Members gathered in the return phase, initiator excluded
        completed: The sweep finished before the response timer fired
        informed: The information phase was sent
    """

    initiator: DeviceId
    roster: frozenset[DeviceId]
    packets_go: int = 0
    packets_return: int = 0
    packets_info: int = 0
    completed: bool = True
    informed: bool = False

    @property
    def total(self) -> int:
        return self.packets_go + self.packets_return + self.packets_info


def _member_graph(engine: Engine, members: Collection[DeviceId]) -> nx.Graph:
    allowed = set(members) & engine.online
    graph = nx.Graph()
    graph.add_nodes_from(allowed)
    adjacency = engine.adjacency()
    graph.add_edges_from((u, v) for u in allowed for v in adjacency.get(u, ()) if v in allowed)
    return graph


def default_response_timer(
    engine: Engine, initiator: DeviceId, members: Collection[DeviceId]
) -> Seconds:
    """Twice the hop latency times an estimated diameter, plus the leaf wait.

    The diameter is bounded by twice the initiator's eccentricity in its
    connected component of members.
    """
    graph = _member_graph(engine, members)
    if initiator not in graph:
        return (LEAF_WAIT_HOPS + 1) * engine.latency
    component = graph.subgraph(nx.node_connected_component(graph, initiator))
    ecc = nx.eccentricity(component, v=initiator) if component.number_of_nodes() > 1 else 0
    return (2 * 2 * ecc + LEAF_WAIT_HOPS + 1) * engine.latency


def _check_initiator(engine: Engine, initiator: DeviceId, members: Collection[DeviceId]) -> None:
    if initiator not in members or initiator not in engine.online:
        raise InitiatorNotLegitimateError(
            f"Device {initiator} is not an online legitimate node",
            context=ErrorContext(device=initiator),
        )


class GatherSession:
    """Shared plumbing of the two roster-gathering broadcasts."""

    mode: BroadcastMode = BroadcastMode.GRI
    _info_kind: PacketKind = PacketKind.GRI_INFO

    def __init__(
        self,
        engine: Engine,
        initiator: DeviceId,
        members: Collection[DeviceId],
        *,
        sizes: MessageSizes | None = None,
        channel: Channel = BENCH,
        timer: Seconds | None = None,
        payload_size: int = 0,
        entry_size: int | None = None,
        info_size: int | None = None,
        decide: Decision | None = None,
        on_complete: Completion | None = None,
    ) -> None:
        _check_initiator(engine, initiator, members)
        self.engine = engine
        self.initiator = initiator
        self.members = frozenset(members)
        self.sizes = sizes or MessageSizes()
        self.channel = channel
        self.timer = timer if timer is not None else default_response_timer(
            engine, initiator, self.members
        )
        self.payload_size = payload_size
        # Bytes per gathered member; roster gathers carry a proof entry each.
        self.entry_size = entry_size if entry_size is not None else self.sizes.proof_entry
        self.info_size = info_size
        self.decide = decide
        self.on_complete = on_complete
        self.phase = "idle"
        self.counts = {"go": 0, "return": 0, "info": 0}
        self.parent: dict[DeviceId, DeviceId] = {}
        self.depth: dict[DeviceId, int] = {initiator: 0}
        self.info_seen: set[DeviceId] = set()
        self.result: GriResult | None = None
        self.session = -1

    @property
    def done(self) -> bool:
        return self.phase == "done"

    def start(self) -> GatherSession:
        self.session = self.engine.open_session(self._on_packet, on_idle=self._on_idle)
        self.phase = "gather"
        self._start()
        if self.phase == "gather":
            self.engine.set_timer(self.timer, self._on_timeout, node=self.initiator)
        return self

    @property
    def _request_size(self) -> int:
        return self.sizes.header + self.entry_size + self.payload_size

    def _send(
        self,
        sender: DeviceId,
        kind: PacketKind,
        phase: str,
        *,
        size: int,
        dst: DeviceId | None = None,
        trail: tuple[DeviceId, ...] = (),
        forwarded: bool = False,
        created_at: Seconds | None = None,
        **body: object,
    ) -> Packet:
        self.counts[phase] += 1
        return self.engine.transmit(
            sender,
            kind,
            size=size,
            channel=self.channel,
            session=self.session,
            dst=dst,
            trail=trail,
            body={"phase": phase, **body},
            forwarded=forwarded,
            created_at=created_at,
        )

    def _start(self) -> None:
        raise NotImplementedError

    def _on_packet(self, node: DeviceId, packet: Packet) -> None:
        raise NotImplementedError

    def _on_timeout(self) -> None:
        if self.phase == "gather":
            self._finish_gather(completed=False)

    def _gathered(self) -> frozenset[DeviceId]:
        raise NotImplementedError

    def _snapshot(self, *, completed: bool, informed: bool) -> GriResult:
        return GriResult(
            initiator=self.initiator,
            roster=self._gathered(),
            packets_go=self.counts["go"],
            packets_return=self.counts["return"],
            packets_info=self.counts["info"],
            completed=completed,
            informed=informed,
        )

    def _finish_gather(self, *, completed: bool) -> None:
        gathered = self._snapshot(completed=completed, informed=False)
        Metrics.roster_size.labels(mode=self.mode.value).observe(len(gathered.roster))
        go_ahead = self.decide(gathered) if self.decide is not None else True
        if not (go_ahead and gathered.roster):
            self._complete(gathered)
            return
        self.phase = "info"
        self.result = replace(gathered, informed=True)
        self.info_seen.add(self.initiator)
        size = self.info_size
        if size is None:
            size = self.sizes.header + self.entry_size * (len(gathered.roster) + 1)
        self._send(
            self.initiator, self._info_kind, "info", size=size, roster_size=len(gathered.roster)
        )
        if self.engine.in_flight(self.session) == 0:
            self._complete(self.result)

    def _relay_info(self, node: DeviceId, packet: Packet, *, rebroadcast: bool) -> None:
        if node in self.info_seen:
            return
        self.info_seen.add(node)
        if rebroadcast:
            self._send(
                node,
                packet.kind,
                "info",
                size=packet.size,
                forwarded=True,
                created_at=packet.created_at,
                roster_size=packet.body.get("roster_size", 0),
            )

    def _on_idle(self) -> None:
        if self.phase == "info" and self.result is not None:
            self._complete(self.result)

    def _complete(self, snapshot: GriResult) -> None:
        self.phase = "done"
        self.result = replace(snapshot, packets_info=self.counts["info"])
        self.engine.close_session(self.session)
        if self.on_complete is not None:
            self.on_complete(self.result)


class GriSession(GatherSession):
    """Go / return / information broadcast from ``initiator``."""

    mode = BroadcastMode.GRI

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.children: dict[DeviceId, set[DeviceId]] = {}
        self.returned: dict[DeviceId, dict[DeviceId, tuple[DeviceId, ...]]] = {}
        self.checked: set[DeviceId] = set()
        self.reported: set[DeviceId] = set()

    def _start(self) -> None:
        self._forward_go(self.initiator, None)

    def _forward_go(self, node: DeviceId, packet: Packet | None) -> None:
        self.children.setdefault(node, set())
        self.returned.setdefault(node, {})
        if packet is None:
            self._send(node, PacketKind.GRI_GO, "go", size=self._request_size, parent=-1, depth=0)
        else:
            self._send(
                node,
                PacketKind.GRI_GO,
                "go",
                size=packet.size,
                forwarded=True,
                created_at=packet.created_at,
                parent=self.parent[node],
                depth=self.depth[node],
            )
            deadline = self.timer - (self.depth[node] + 1) * self.engine.latency
            start = packet.created_at
            self.engine.schedule(
                max(self.engine.now, start + deadline),
                EventKind.TIMER_EXPIRY,
                partial(self._deadline, node),
                node=node,
            )
        self.engine.set_timer(
            LEAF_WAIT_HOPS * self.engine.latency, partial(self._leaf_check, node), node=node
        )

    def _on_packet(self, node: DeviceId, packet: Packet) -> None:
        if node not in self.members or self.done:
            return
        if packet.kind is PacketKind.GRI_GO:
            if packet.body.get("parent") == node:
                self.children.setdefault(node, set()).add(packet.src)
            if node != self.initiator and node not in self.parent:
                self.parent[node] = packet.src
                self.depth[node] = int(packet.body.get("depth", 0)) + 1
                self._forward_go(node, packet)
        elif packet.kind is PacketKind.GRI_RETURN and packet.dst == node:
            self.returned.setdefault(node, {})[packet.src] = packet.trail
            if node == self.initiator:
                self._maybe_finish()
            else:
                self._maybe_report(node)
        elif packet.kind is PacketKind.GRI_INFO:
            leaf = not self.children.get(node)
            self._relay_info(node, packet, rebroadcast=node != self.initiator and not leaf)

    def _leaf_check(self, node: DeviceId) -> None:
        if self.phase != "gather":
            return
        self.checked.add(node)
        if node == self.initiator:
            self._maybe_finish()
        else:
            self._maybe_report(node)

    def _all_returned(self, node: DeviceId) -> bool:
        return self.children.get(node, set()) <= self.returned.get(node, {}).keys()

    def _maybe_report(self, node: DeviceId) -> None:
        if node in self.checked and node not in self.reported and self._all_returned(node):
            self._report(node)

    def _deadline(self, node: DeviceId) -> None:
        if self.phase == "gather" and node not in self.reported:
            self._report(node)

    def _trail(self, node: DeviceId) -> tuple[DeviceId, ...]:
        returned = self.returned.get(node, {})
        merged: tuple[DeviceId, ...] = ()
        for child in sorted(returned):
            merged += returned[child]
        return merged

    def _report(self, node: DeviceId) -> None:
        self.reported.add(node)
        trail = self._trail(node) + (node,)
        self._send(
            node,
            PacketKind.GRI_RETURN,
            "return",
            size=self.sizes.header + self.entry_size * len(trail),
            dst=self.parent[node],
            trail=trail,
        )

    def _maybe_finish(self) -> None:
        if (
            self.phase == "gather"
            and self.initiator in self.checked
            and self._all_returned(self.initiator)
        ):
            self._finish_gather(completed=True)

    def _gathered(self) -> frozenset[DeviceId]:
        return frozenset(self._trail(self.initiator))


class FloodGatherSession(GatherSession):
    """Request flood, per-node replies relayed unaggregated, roster flood."""

    mode = BroadcastMode.FLOOD
    _info_kind = PacketKind.FLOOD

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.roster: set[DeviceId] = set()
        self.requested: set[DeviceId] = {self.initiator}

    def _start(self) -> None:
        self._send(self.initiator, PacketKind.FLOOD, "go", size=self._request_size, depth=0)

    def _on_packet(self, node: DeviceId, packet: Packet) -> None:
        if node not in self.members or self.done:
            return
        phase = packet.body.get("phase")
        if phase == "go" and node not in self.requested:
            self.requested.add(node)
            self.parent[node] = packet.src
            self._send(
                node,
                PacketKind.FLOOD,
                "go",
                size=packet.size,
                forwarded=True,
                created_at=packet.created_at,
            )
            self._send(
                node,
                PacketKind.FLOOD,
                "return",
                size=self.sizes.header + self.entry_size,
                dst=packet.src,
                trail=(node,),
                origin=node,
            )
        elif phase == "return" and packet.dst == node:
            if node == self.initiator:
                if self.phase == "gather":
                    self.roster.add(int(packet.body["origin"]))
            elif node in self.parent:
                self._send(
                    node,
                    PacketKind.FLOOD,
                    "return",
                    size=packet.size,
                    dst=self.parent[node],
                    trail=packet.trail,
                    forwarded=True,
                    created_at=packet.created_at,
                    origin=packet.body["origin"],
                )
        elif phase == "info":
            self._relay_info(node, packet, rebroadcast=node != self.initiator)

    def _gathered(self) -> frozenset[DeviceId]:
        return frozenset(self.roster)


class FloodSession:
    """Plain flood: every member retransmits the first copy it hears, once."""

    def __init__(
        self,
        engine: Engine,
        initiator: DeviceId,
        members: Collection[DeviceId] | None = None,
        *,
        size: int = 36,
        channel: Channel = BENCH,
    ) -> None:
        self.engine = engine
        self.initiator = initiator
        self.members = frozenset(members) if members is not None else frozenset(engine.online)
        _check_initiator(engine, initiator, self.members)
        self.size = size
        self.channel = channel
        self.seen: set[DeviceId] = set()
        self.transmissions = 0
        self.done = False
        self.session = -1

    def start(self) -> FloodSession:
        self.session = self.engine.open_session(self._on_packet, on_idle=self._on_idle)
        self.seen.add(self.initiator)
        self._transmit(self.initiator, None)
        if self.engine.in_flight(self.session) == 0:
            self._on_idle()
        return self

    def _transmit(self, node: DeviceId, packet: Packet | None) -> None:
        self.transmissions += 1
        self.engine.transmit(
            node,
            PacketKind.FLOOD,
            size=self.size,
            channel=self.channel,
            session=self.session,
            forwarded=packet is not None,
            created_at=packet.created_at if packet is not None else None,
        )

    def _on_packet(self, node: DeviceId, packet: Packet) -> None:
        if node in self.members and node not in self.seen:
            self.seen.add(node)
            self._transmit(node, packet)

    def _on_idle(self) -> None:
        self.done = True
        self.engine.close_session(self.session)


def open_gather(
    mode: BroadcastMode,
    engine: Engine,
    initiator: DeviceId,
    members: Collection[DeviceId],
    **kwargs: Any,
) -> GatherSession:
    """Start a roster gather of the configured broadcast mode."""
    cls = GriSession if BroadcastMode(mode) is BroadcastMode.GRI else FloodGatherSession
    return cls(engine, initiator, members, **kwargs).start()


def _run(engine: Engine, session: GatherSession) -> GriResult:
    session.start()
    limit = engine.now + 4 * session.timer + (len(session.members) + 4) * engine.latency
    engine.run_until(lambda: session.done, limit=limit)
    if session.result is None:
        return session._snapshot(completed=False, informed=False)
    return session.result


def gri_broadcast(
    engine: Engine,
    initiator: DeviceId,
    members: Collection[DeviceId] | None = None,
    *,
    payload_size: int = 0,
    response_timer: Seconds | None = None,
    sizes: MessageSizes | None = None,
    channel: Channel = BENCH,
) -> GriResult:
    """Run a full GRI broadcast to completion on ``engine``.

    Raises:
        InitiatorNotLegitimateError: initiator offline or not a member
    """
    session = GriSession(
        engine,
        initiator,
        members if members is not None else engine.online,
        sizes=sizes,
        channel=channel,
        timer=response_timer,
        payload_size=payload_size,
    )
    return _run(engine, session)


def flood_gather(
    engine: Engine,
    initiator: DeviceId,
    members: Collection[DeviceId] | None = None,
    *,
    response_timer: Seconds | None = None,
    sizes: MessageSizes | None = None,
    channel: Channel = BENCH,
) -> GriResult:
    """Gather a roster with the unaggregated flooding baseline."""
    session = FloodGatherSession(
        engine,
        initiator,
        members if members is not None else engine.online,
        sizes=sizes,
        channel=channel,
        timer=response_timer,
    )
    return _run(engine, session)


def flood_broadcast(
    engine: Engine,
    initiator: DeviceId,
    members: Collection[DeviceId] | None = None,
    *,
    payload_size: int = 0,
    sizes: MessageSizes | None = None,
    channel: Channel = BENCH,
) -> int:
    """Flood once from ``initiator``; returns the number of transmissions."""
    sizes = sizes or MessageSizes()
    size = max(1, sizes.header + payload_size)
    session = FloodSession(engine, initiator, members, size=size, channel=channel).start()
    limit = engine.now + (len(session.members) + 4) * engine.latency
    engine.run_until(lambda: session.done, limit=limit)
    return session.transmissions
