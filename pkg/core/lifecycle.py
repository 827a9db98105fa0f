"""Self-organized life-cycle management of network members.

A ``LifeCycleManager`` owns every device record, the authoritative network
secret (G_t, HC_t) and the offline threshold T. Its methods are the five
procedures of the protocol: initialization, insertion, access control,
proofs of life and deletion.

Records are keyed by device. A device holds a vertex ID only while it is a
legitimate member; IDs of deleted vertices are handed out again.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import StrEnum
from types import MappingProxyType

import numpy as np
import structlog

from config.models import ScenarioConfig
from core.exceptions import (
    DuplicateVertexIdError,
    ErrorContext,
    IllegalTransitionError,
    NetworkTooSmallError,
    NotAuthenticatedError,
    StaleBeyondFifoError,
    TooFewFoundersError,
)
from core.fifo import UpdateEvent, UpdateKind, UpdateQueue, replay
from core.graph import (
    HamiltonianCycle,
    NeighborGroup,
    NetworkGraph,
    Permutation,
    complete_graph,
    delete_vertex,
    generate_initial_cycle,
    insert_vertex,
)
from core.metrics import Metrics
from core.rng import derive_rng
from core.type_aliases import DeviceId, Seconds, Stage, VertexId
from core.zkp import CheatStrategy, ZkpTranscript, run_protocol

__all__ = [
    "TRANSITIONS",
    "AccessOutcome",
    "AccessStatus",
    "InsertionOutcome",
    "InsertionStatus",
    "LifeCycleManager",
    "LifeState",
    "NodeRecord",
    "ProofOfLifeAction",
    "ProofOfLifeOutcome",
    "Quorum",
    "ThresholdT",
    "initialize_network",
    "next_vertex_id",
    "quorum_reached",
    "transition",
    "update_threshold",
]

logger = structlog.get_logger(__name__)


class LifeState(StrEnum):
    ON_AUTHENTICATED = "on-authenticated"
    NON_LEGITIMATE = "non-legitimate"
    ON_TO_AUTHENTICATE = "on-to-authenticate"
    OFF = "off"
    RE_INSERTED = "re-inserted"
    DELETED = "deleted"
    OUT_OF_SERVICE = "out-of-service"
    ADDED = "added"


_S = LifeState

TRANSITIONS: Mapping[LifeState, frozenset[LifeState]] = MappingProxyType(
    {
        _S.NON_LEGITIMATE: frozenset({_S.ADDED}),
        _S.ADDED: frozenset({_S.ON_AUTHENTICATED}),
        _S.ON_AUTHENTICATED: frozenset({_S.OFF, _S.OUT_OF_SERVICE}),
        _S.OFF: frozenset({_S.ON_TO_AUTHENTICATE, _S.DELETED}),
        _S.ON_TO_AUTHENTICATE: frozenset({_S.RE_INSERTED, _S.OFF}),
        _S.RE_INSERTED: frozenset({_S.ON_AUTHENTICATED}),
        _S.OUT_OF_SERVICE: frozenset({_S.ON_TO_AUTHENTICATE, _S.DELETED, _S.OFF}),
        _S.DELETED: frozenset({_S.NON_LEGITIMATE}),
    }
)

# States whose holders receive broadcast updates.
_LISTENING = frozenset({_S.ON_AUTHENTICATED, _S.ADDED, _S.RE_INSERTED})
_ENTRY = frozenset({_S.ADDED, _S.RE_INSERTED})


@dataclass(slots=True)
class NodeRecord:
    """Protocol state of one device.

    Attributes:
        device: Stable device identity
        vertex: Current vertex ID, ``None`` while not a member
        state: Life-cycle state
        graph: G_t as known to this device
        cycle: HC_t as known to this device
        fifo: Update log heard over the broadcast channel
        last_seen_stage: Graph stage when the device went offline
        offline_since: Time the device went offline or was found unreachable
        last_proof: Local-clock origin, reset by every proof of life
        last_duty: Last time the device authenticated someone or broadcast a deletion
        clock_offset: Skew of the local clock against simulated time
        online: Powered on
        isolated: Flagged by a Sybil check or a failed proof
    """

    device: DeviceId
    fifo: UpdateQueue
    vertex: VertexId | None = None
    state: LifeState = LifeState.NON_LEGITIMATE
    graph: NetworkGraph | None = None
    cycle: HamiltonianCycle | None = None
    last_seen_stage: Stage = 0
    offline_since: Seconds | None = None
    last_proof: Seconds = 0.0
    last_duty: Seconds | None = None
    clock_offset: Seconds = 0.0
    online: bool = True
    isolated: bool = False

    def clock(self, now: Seconds) -> Seconds:
        """Local time elapsed since the last proof of life."""
        return now + self.clock_offset - self.last_proof

    def reset_clock(self, now: Seconds) -> None:
        self.last_proof = now + self.clock_offset

    @property
    def is_member(self) -> bool:
        return self.state not in (_S.NON_LEGITIMATE, _S.DELETED)


def transition(record: NodeRecord, to: LifeState) -> None:
    """Move ``record`` along one edge of the transition table.

    Raises:
        IllegalTransitionError: the edge is not in ``TRANSITIONS``
    """
    current = record.state
    if to not in TRANSITIONS[current]:
        raise IllegalTransitionError(
            f"{current} -> {to} is not a legal transition",
            context=ErrorContext(device=record.device, vertex=record.vertex),
            from_state=current.value,
            to_state=to.value,
        )
    record.state = to
    Metrics.record_transition(current.value, to.value)
    logger.debug("state_change", device=record.device, vertex=record.vertex, to=to.value)


@dataclass(slots=True, frozen=True, kw_only=True)
class ThresholdT:
    """Offline threshold T with the offline durations observed so far."""

    current: Seconds
    epsilon: Seconds
    history: tuple[Seconds, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "history", tuple(self.history))
        if self.current <= 0:
            raise ValueError("Threshold must be positive")
        if self.epsilon <= 0:
            raise ValueError("Epsilon must be positive")


def update_threshold(th: ThresholdT, observed_offline: Seconds) -> ThresholdT:
    """Append an offline duration; T becomes mean + population stddev + epsilon."""
    if observed_offline < 0:
        raise ValueError("Offline duration cannot be negative")
    history = (*th.history, float(observed_offline))
    samples = np.asarray(history, dtype=float)
    current = float(samples.mean() + samples.std() + th.epsilon)
    return ThresholdT(current=current, epsilon=th.epsilon, history=history)


@dataclass(slots=True, frozen=True, kw_only=True)
class Quorum:
    """Answers collected against the live vertex count ``n``."""

    n: int
    received: frozenset[VertexId] = frozenset()

    @property
    def required(self) -> int:
        return (self.n + 1) // 2

    @property
    def satisfied(self) -> bool:
        return 2 * len(self.received) >= self.n


def quorum_reached(n: int, answers: int) -> bool:
    """Fewer than n/2 answers aborts; exactly n/2 proceeds."""
    return 2 * answers >= n


def next_vertex_id(used: Iterable[VertexId]) -> VertexId:
    """Lowest positive ID not in ``used``."""
    taken = set(used)
    candidate = 1
    while candidate in taken:
        candidate += 1
    return candidate


class InsertionStatus(StrEnum):
    COMMITTED = "committed"
    ABORTED = "aborted"


@dataclass(slots=True, frozen=True, kw_only=True)
class InsertionOutcome:
    status: InsertionStatus
    vertex: VertexId | None = None
    group: NeighborGroup | None = None
    stage: Stage | None = None

    @property
    def committed(self) -> bool:
        return self.status is InsertionStatus.COMMITTED


class AccessStatus(StrEnum):
    READMITTED = "readmitted"
    EXPIRED = "expired"
    ISOLATED = "isolated"


@dataclass(slots=True, frozen=True, kw_only=True)
class AccessOutcome:
    """Result of one access-control session.

    Attributes:
        replayed: Structural updates the supplicant applied after acceptance
        offline_for: Measured offline duration, fed into T on readmission
    """

    status: AccessStatus
    vertex: VertexId | None
    transcript: ZkpTranscript | None = None
    replayed: tuple[UpdateEvent, ...] = ()
    offline_for: Seconds | None = None

    @property
    def admitted(self) -> bool:
        return self.status is AccessStatus.READMITTED


@dataclass(slots=True, frozen=True, kw_only=True)
class ProofOfLifeAction:
    """A node whose clock passed T, waiting out its random defer."""

    device: DeviceId
    vertex: VertexId
    due: Seconds
    defer: Seconds


@dataclass(slots=True, frozen=True, kw_only=True)
class ProofOfLifeOutcome:
    committed: bool
    roster: frozenset[VertexId] = frozenset()
    deleted: tuple[VertexId, ...] = ()
    out_of_service: tuple[VertexId, ...] = ()
    isolated: tuple[DeviceId, ...] = ()
    terminated: bool = False


def initialize_network(
    node_ids: Iterable[VertexId],
    m: int,
    seed: int,
    *,
    n_min: int = 5,
    retention: Seconds = 30.0,
) -> dict[VertexId, NodeRecord]:
    """Founders jointly generate (G_0, HC_0).

    Each founder draws a private permutation; they are composed in ascending
    ID order. Founders keep their vertex ID as device ID.

    Raises:
        TooFewFoundersError: fewer than ``n_min`` founders
        InfeasibleDensityError: ``m`` cannot be realised on the founders
    """
    founders = sorted(set(node_ids))
    if len(founders) < max(3, n_min):
        raise TooFewFoundersError(
            f"{len(founders)} founders, at least {max(3, n_min)} required",
            context=ErrorContext(extra={"n_min": n_min}),
        )
    perms = [Permutation.random(founders, derive_rng(seed, f"founder-{v}")) for v in founders]
    hc = generate_initial_cycle(perms)
    g = complete_graph(hc, m, derive_rng(seed, "graph-complete"))
    roster = UpdateEvent(kind=UpdateKind.ROSTER, stage=0, time=0.0, alive=frozenset(founders))

    records = {
        v: NodeRecord(
            device=v,
            vertex=v,
            state=LifeState.ON_AUTHENTICATED,
            graph=g,
            cycle=hc,
            fifo=UpdateQueue(retention, [roster]),
        )
        for v in founders
    }
    Metrics.record_graph(g.n)
    logger.info("network_initialized", founders=len(founders), edges=g.m)
    return records


class LifeCycleManager:
    """All device records plus the authoritative network secret.

    Example:
        >>> mgr = LifeCycleManager.bootstrap(ScenarioConfig(nodes=10))
        >>> mgr.graph.n
        10
    """

    __slots__ = ("config", "cycle", "graph", "records", "terminated", "threshold")

    def __init__(
        self,
        config: ScenarioConfig,
        records: Mapping[DeviceId, NodeRecord],
        *,
        threshold: ThresholdT | None = None,
    ) -> None:
        self.config = config
        self.records: dict[DeviceId, NodeRecord] = dict(records)
        self.threshold = threshold or ThresholdT(
            current=config.initial_threshold, epsilon=config.epsilon
        )
        self.terminated = False
        members = [r for r in self.records.values() if r.is_member and r.graph is not None]
        if not members:
            raise TooFewFoundersError("No member records to take the network secret from")
        newest = max(members, key=lambda r: r.graph.stage if r.graph is not None else -1)
        if newest.graph is None or newest.cycle is None:
            raise TooFewFoundersError("Member record without a network secret")
        self.graph: NetworkGraph = newest.graph
        self.cycle: HamiltonianCycle = newest.cycle

    @classmethod
    def bootstrap(cls, config: ScenarioConfig) -> LifeCycleManager:
        """Manager over ``config.nodes`` founders with IDs 1..n."""
        retention = max(2 * config.initial_threshold, 2 * config.pol_period)
        records = initialize_network(
            range(1, config.nodes + 1),
            config.initial_edges,
            config.seed,
            n_min=config.n_min,
            retention=retention,
        )
        return cls(config, records)

    @property
    def T(self) -> Seconds:  # noqa: N802
        return self.threshold.current

    @property
    def survival_window(self) -> Seconds:
        """Span a vertex may go without a proof of life before pruning.

        Committed rosters are at least T apart, so 2T always reaches back to the
        previous one: an absent member keeps its vertex for one missed round.
        """
        return 2 * self.threshold.current

    @property
    def retention(self) -> Seconds:
        return max(self.survival_window, 2 * self.config.pol_period)

    @property
    def group_size(self) -> int:
        """NeighborGroup size for new vertices.

        Capped so that a greedy draw of cycle-non-adjacent extras always succeeds.
        """
        return max(2, min(self.config.group_size, 2 + self.graph.n // 3))

    def legitimate_vertices(self) -> frozenset[VertexId]:
        return self.graph.vertices

    def owner_of(self, vertex: VertexId) -> NodeRecord | None:
        for record in self.records.values():
            if record.vertex == vertex and record.is_member:
                return record
        return None

    def online_members(self) -> list[NodeRecord]:
        """Online, authenticated, non-isolated records in device order."""
        return [
            r
            for _, r in sorted(self.records.items())
            if r.online and r.state is LifeState.ON_AUTHENTICATED and not r.isolated
        ]

    def add_device(self, *, online: bool = True) -> NodeRecord:
        """Register a new, not yet legitimate device."""
        device = max(self.records, default=0) + 1
        record = NodeRecord(device=device, fifo=UpdateQueue(self.retention), online=online)
        self.records[device] = record
        return record

    def power_off(self, record: NodeRecord, now: Seconds) -> None:
        if not record.online:
            return
        record.online = False
        if record.state in _ENTRY:
            transition(record, LifeState.ON_AUTHENTICATED)
        if record.state is LifeState.ON_AUTHENTICATED:
            transition(record, LifeState.OFF)
            record.offline_since = now
        elif record.state is LifeState.OUT_OF_SERVICE:
            transition(record, LifeState.OFF)
        if record.graph is not None:
            record.last_seen_stage = record.graph.stage
        logger.debug("power_off", device=record.device, vertex=record.vertex, now=now)

    def power_on(self, record: NodeRecord, now: Seconds) -> None:
        record.online = True
        logger.debug("power_on", device=record.device, state=record.state.value, now=now)

    def normalize(self) -> None:
        """Entry-transient states settle into OnAuthenticated."""
        for record in self.records.values():
            if record.state in _ENTRY:
                transition(record, LifeState.ON_AUTHENTICATED)

    def is_consistent(self) -> bool:
        """All online authenticated records hold the authoritative secret."""
        return all(
            r.graph == self.graph and r.cycle == self.cycle
            for r in self.records.values()
            if r.online and r.state in _LISTENING and not r.isolated
        )

    def _broadcast_update(self, event: UpdateEvent, now: Seconds) -> None:
        for record in self.records.values():
            if not (record.online and record.state in _LISTENING and not record.isolated):
                continue
            record.fifo.retention = self.retention
            record.fifo.append(event)
            record.fifo.evict(now)
            if event.kind in (UpdateKind.INSERTION, UpdateKind.DELETION):
                record.graph, record.cycle = self.graph, self.cycle

    def _require_authenticator(self, record: NodeRecord) -> VertexId:
        if not record.online or record.state is not LifeState.ON_AUTHENTICATED:
            raise NotAuthenticatedError(
                f"Device {record.device} is not an online authenticated member",
                context=ErrorContext(device=record.device, vertex=record.vertex),
            )
        if record.vertex is None:
            raise NotAuthenticatedError(f"Device {record.device} holds no vertex")
        return record.vertex

    def handle_insertion(
        self,
        authenticator: NodeRecord,
        supplicant: NodeRecord,
        quorum_answers: int,
        rng: np.random.Generator,
        *,
        now: Seconds,
        requested_id: VertexId | None = None,
    ) -> InsertionOutcome:
        """Admit a new device as the lowest free vertex.

        Raises:
            NotAuthenticatedError: ``authenticator`` cannot vouch
            DuplicateVertexIdError: ``requested_id`` is live; the supplicant is isolated
        """
        auth_vertex = self._require_authenticator(authenticator)
        if supplicant.state is LifeState.DELETED:
            transition(supplicant, LifeState.NON_LEGITIMATE)

        vertex = requested_id if requested_id is not None else next_vertex_id(self.graph.vertices)
        if vertex in self.graph.vertices:
            supplicant.isolated = True
            Metrics.record_membership("insertion", "denied")
            logger.warning("insertion_denied", device=supplicant.device, vertex=vertex)
            raise DuplicateVertexIdError(
                f"Vertex {vertex} is already live",
                context=ErrorContext(vertex=vertex, device=supplicant.device),
            )

        if not quorum_reached(self.graph.n, quorum_answers):
            Metrics.record_membership("insertion", "aborted")
            logger.warning(
                "insertion_aborted",
                answers=quorum_answers,
                n=self.graph.n,
                device=supplicant.device,
            )
            return InsertionOutcome(status=InsertionStatus.ABORTED)

        g, hc, group = insert_vertex(
            self.graph, self.cycle, vertex, rng, group_size=self.group_size
        )
        self.graph, self.cycle = g, hc
        event = UpdateEvent(
            kind=UpdateKind.INSERTION,
            stage=g.stage,
            time=now,
            vertex=vertex,
            between=hc.neighbors(vertex),
            group=group.members,
            alive=frozenset({auth_vertex, vertex}),
            initiator=auth_vertex,
        )
        self._broadcast_update(event, now)

        # G_{t+1} travels openly, HC_{t+1} and the queue over the secure channel.
        supplicant.vertex = vertex
        supplicant.graph, supplicant.cycle = g, hc
        supplicant.fifo = authenticator.fifo.copy()
        supplicant.clock_offset = authenticator.clock_offset
        supplicant.reset_clock(now)
        supplicant.offline_since = None
        supplicant.online = True
        supplicant.isolated = False
        transition(supplicant, LifeState.ADDED)
        authenticator.last_duty = now

        Metrics.record_membership("insertion", "committed")
        Metrics.record_graph(g.n)
        logger.info("insertion_committed", vertex=vertex, device=supplicant.device, stage=g.stage)
        return InsertionOutcome(
            status=InsertionStatus.COMMITTED, vertex=vertex, group=group, stage=g.stage
        )

    def handle_access_control(
        self,
        authenticator: NodeRecord,
        supplicant: NodeRecord,
        rng: np.random.Generator,
        *,
        now: Seconds,
        rounds: int | None = None,
        claimed_vertex: VertexId | None = None,
        strategy: CheatStrategy = CheatStrategy.COIN_FLIP,
    ) -> AccessOutcome:
        """Readmit a returning member that proves it still knows HC_t.

        The supplicant shows its stale G_t; the authenticator replays its
        queue over it and, if that reproduces the current graph, runs the
        zero-knowledge proof against the stale graph.

        Raises:
            NotAuthenticatedError: ``authenticator`` cannot vouch
            IllegalTransitionError: supplicant is neither Off nor OutOfService
            StaleBeyondFifoError: the gap is within T but no longer in the queue
        """
        auth_vertex = self._require_authenticator(authenticator)
        vertex = claimed_vertex if claimed_vertex is not None else supplicant.vertex
        transition(supplicant, LifeState.ON_TO_AUTHENTICATE)

        owner = self.owner_of(vertex) if vertex is not None else None
        if (
            owner is not None
            and owner is not supplicant
            and owner.online
            and owner.state is LifeState.ON_AUTHENTICATED
        ):
            return self._reject(supplicant, vertex, AccessStatus.ISOLATED, now)

        t = supplicant.offline_since
        if vertex is None or t is None or t <= now - self.T or vertex not in self.graph.vertices:
            return self._reject(supplicant, vertex, AccessStatus.EXPIRED, now)

        stale_g, stale_hc = supplicant.graph, supplicant.cycle
        if stale_g is None:
            return self._reject(supplicant, vertex, AccessStatus.ISOLATED, now)
        try:
            events = authenticator.fifo.replay_events(stale_g.stage, self.graph.stage)
        except StaleBeyondFifoError:
            transition(supplicant, LifeState.OFF)
            logger.warning("access_stale_queue", vertex=vertex, stage=stale_g.stage, now=now)
            raise
        if stale_hc is not None:
            replayed_g, replayed_hc = replay(stale_g, stale_hc, events)
            if replayed_g.edges != self.graph.edges or replayed_hc != self.cycle:
                transition(supplicant, LifeState.OFF)
                raise StaleBeyondFifoError(
                    f"Replaying stage {stale_g.stage} does not reach the current graph",
                    context=ErrorContext(vertex=vertex, stage=stale_g.stage),
                )

        transcript = run_protocol(
            (stale_g, stale_hc) if stale_hc is not None else None,
            stale_g,
            rounds or self.config.zkp_rounds,
            rng,
            strategy=strategy,
        )
        authenticator.last_duty = now
        if not transcript.accepted:
            outcome = self._reject(supplicant, vertex, AccessStatus.ISOLATED, now)
            return AccessOutcome(status=outcome.status, vertex=vertex, transcript=transcript)

        offline_for = now - t
        supplicant.vertex = vertex
        supplicant.graph, supplicant.cycle = self.graph, self.cycle
        supplicant.fifo = authenticator.fifo.copy()
        supplicant.clock_offset = authenticator.clock_offset
        supplicant.reset_clock(now)
        supplicant.offline_since = None
        supplicant.isolated = False
        transition(supplicant, LifeState.RE_INSERTED)

        self.threshold = update_threshold(self.threshold, offline_for)
        Metrics.threshold_seconds.set(self.threshold.current)
        self._broadcast_update(
            UpdateEvent(
                kind=UpdateKind.ADMISSION,
                stage=self.graph.stage,
                time=now,
                alive=frozenset({auth_vertex, vertex}),
                initiator=auth_vertex,
            ),
            now,
        )
        Metrics.record_membership("admission", "readmitted")
        logger.info(
            "access_granted", vertex=vertex, offline_for=round(offline_for, 3), T=self.T, now=now
        )
        return AccessOutcome(
            status=AccessStatus.READMITTED,
            vertex=vertex,
            transcript=transcript,
            replayed=tuple(events),
            offline_for=offline_for,
        )

    def _reject(
        self, supplicant: NodeRecord, vertex: VertexId | None, status: AccessStatus, now: Seconds
    ) -> AccessOutcome:
        transition(supplicant, LifeState.OFF)
        if status is AccessStatus.ISOLATED:
            supplicant.isolated = True
            logger.warning("access_isolated", device=supplicant.device, vertex=vertex, now=now)
        elif vertex is None or vertex not in self.graph.vertices:
            transition(supplicant, LifeState.DELETED)
            supplicant.vertex, supplicant.cycle = None, None
            logger.info("access_expired", device=supplicant.device, vertex=vertex, now=now)
        Metrics.record_membership("admission", status.value)
        return AccessOutcome(status=status, vertex=vertex)

    def exemption_check(
        self, record: NodeRecord, now: Seconds, window: Seconds | None = None
    ) -> bool:
        """True if the node authenticated someone or broadcast a deletion within T."""
        span = self.T if window is None else window
        return record.last_duty is not None and now - record.last_duty < span

    def proof_of_life_tick(
        self, record: NodeRecord, now: Seconds, rng: np.random.Generator
    ) -> ProofOfLifeAction | None:
        """Schedule a proof of life once the local clock passes T."""
        if (
            self.terminated
            or not record.online
            or record.isolated
            or record.state is not LifeState.ON_AUTHENTICATED
            or record.vertex is None
            or self.exemption_check(record, now)
            or record.clock(now) <= self.T
        ):
            return None
        defer = float(rng.uniform(0.0, self.T / 10.0))
        return ProofOfLifeAction(
            device=record.device, vertex=record.vertex, due=now + defer, defer=defer
        )

    def commit_proof_of_life(
        self,
        initiator: NodeRecord,
        responders: Iterable[tuple[VertexId, DeviceId]],
        now: Seconds,
    ) -> ProofOfLifeOutcome:
        """Close a proof-of-life gather with the (vertex, device) pairs that answered.

        A device answering under two vertex IDs is isolated and dropped. With
        fewer than n/2 answers the initiator only resets its clock. Otherwise
        the roster is broadcast, every listener resynchronizes its clock to the
        initiator, unreached online members go OutOfService and the initiator
        prunes vertices with no evidence of life within the survival window.
        """
        init_vertex = self._require_authenticator(initiator)
        pairs = [(v, d) for v, d in responders if v != init_vertex and v in self.graph.vertices]
        per_device = Counter(d for _, d in set(pairs))
        sybils = tuple(sorted(d for d, count in per_device.items() if count > 1))
        for device in sybils:
            if device in self.records:
                self.records[device].isolated = True
            logger.warning("sybil_roster_entry", device=device, now=now)
        roster = frozenset(v for v, d in pairs if d not in sybils)

        quorum = Quorum(n=self.graph.n, received=roster)
        if not quorum.satisfied:
            initiator.reset_clock(now)
            Metrics.record_membership("roster", "aborted")
            logger.warning(
                "proof_of_life_aborted", answers=len(roster), required=quorum.required, now=now
            )
            return ProofOfLifeOutcome(committed=False, roster=roster, isolated=sybils)

        proven = roster | {init_vertex}
        unreached = []
        for record in self.online_members():
            if record.vertex is not None and record.vertex not in proven:
                transition(record, LifeState.OUT_OF_SERVICE)
                record.offline_since = now
                unreached.append(record.vertex)

        self._broadcast_update(
            UpdateEvent(
                kind=UpdateKind.ROSTER,
                stage=self.graph.stage,
                time=now,
                alive=proven,
                initiator=init_vertex,
            ),
            now,
        )
        for record in self.records.values():
            if record.online and record.state in _LISTENING and not record.isolated:
                record.clock_offset = initiator.clock_offset
                record.reset_clock(now)
        Metrics.record_membership("roster", "committed")
        logger.info("proof_of_life", initiator=init_vertex, roster=len(roster), now=now)

        try:
            deleted = self.prune_dead_nodes(initiator, now)
        except NetworkTooSmallError:
            return ProofOfLifeOutcome(
                committed=True,
                roster=roster,
                out_of_service=tuple(sorted(unreached)),
                isolated=sybils,
                terminated=True,
            )
        return ProofOfLifeOutcome(
            committed=True,
            roster=roster,
            deleted=tuple(deleted),
            out_of_service=tuple(sorted(unreached)),
            isolated=sybils,
        )

    def prune_dead_nodes(self, node: NodeRecord, now: Seconds) -> list[VertexId]:
        """Delete vertices with no proof of life in ``node``'s queue within the survival window.

        Raises:
            NetworkTooSmallError: the deletions would leave fewer than n_min
                vertices; the network is marked terminated and left unchanged
        """
        init_vertex = self._require_authenticator(node)
        alive = node.fifo.alive_within(now, self.survival_window) | {init_vertex}
        dead = sorted(self.graph.vertices - alive)
        if not dead:
            return []
        floor = max(3, self.config.n_min)
        remaining = self.graph.n - len(dead)
        if remaining < floor:
            self.terminated = True
            logger.warning("network_terminated", remaining=remaining, n_min=floor, now=now)
            raise NetworkTooSmallError(
                f"Pruning {len(dead)} vertices leaves {remaining} (minimum {floor})",
                context=ErrorContext(stage=self.graph.stage, vertex=init_vertex),
                remaining=remaining,
                n_min=floor,
            )

        for vertex in dead:
            self.graph, self.cycle = delete_vertex(
                self.graph, self.cycle, vertex, n_min=self.config.n_min
            )
            self._broadcast_update(
                UpdateEvent(
                    kind=UpdateKind.DELETION,
                    stage=self.graph.stage,
                    time=now,
                    vertex=vertex,
                    alive=frozenset({init_vertex}),
                    initiator=init_vertex,
                ),
                now,
            )
            owner = self.owner_of(vertex)
            if owner is not None:
                self._expel(owner)
            Metrics.record_membership("deletion", "committed")
            logger.info("vertex_deleted", vertex=vertex, stage=self.graph.stage, now=now)
        node.last_duty = now
        Metrics.record_graph(self.graph.n)
        return dead

    def _expel(self, owner: NodeRecord) -> None:
        if owner.state in _ENTRY:
            transition(owner, LifeState.ON_AUTHENTICATED)
        if owner.state is LifeState.ON_AUTHENTICATED:
            transition(owner, LifeState.OUT_OF_SERVICE)
        if owner.state is LifeState.ON_TO_AUTHENTICATE:
            transition(owner, LifeState.OFF)
        transition(owner, LifeState.DELETED)
        owner.vertex, owner.cycle = None, None
