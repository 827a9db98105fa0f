"""Scenario driver: mobility, churn and the life-cycle protocol on one engine."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import structlog

from config.models import ScenarioConfig
from core.broadcast import GriResult, open_gather
from core.engine import Engine, EventKind, Packet, PacketKind
from core.exceptions import (
    NotAuthenticatedError,
    SimulationError,
    StaleBeyondFifoError,
)
from core.graph import NetworkGraph
from core.lifecycle import (
    AccessStatus,
    LifeCycleManager,
    LifeState,
    NodeRecord,
)
from core.radio import (
    MobilityState,
    RadioModel,
    connected_placement,
    random_mobility,
    random_placement,
    step_mobility,
)
from core.rng import derive_rng
from core.serialization import TraceEvent
from core.summary import RunSummary, summarize
from core.type_aliases import Channel, DeviceId, Position, Seconds
from core.zkp import Challenge, ZkpTranscript

__all__ = [
    "INSERTION",
    "POL",
    "SECURE",
    "ZKP",
    "ScenarioDriver",
    "ScenarioResult",
    "run_scenario",
    "trace_filename",
]

logger = structlog.get_logger(__name__)

POL = Channel("pol")
ZKP = Channel("zkp")
INSERTION = Channel("insertion")
SECURE = Channel("secure")

_WAITING = frozenset(
    {LifeState.OFF, LifeState.OUT_OF_SERVICE, LifeState.DELETED, LifeState.NON_LEGITIMATE}
)


@dataclass(slots=True, frozen=True, kw_only=True)
class ScenarioResult:
    summary: RunSummary
    trace_lines: tuple[str, ...]
    manager: LifeCycleManager
    trace_path: Path | None = None

    @property
    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace_lines)


def trace_filename(cfg: ScenarioConfig) -> str:
    return f"trace_n{cfg.nodes}_s{cfg.seed}.tsv"


class ScenarioDriver:
    """Runs one seeded scenario to completion.

    Every random choice draws from a generator derived from the scenario seed
    and a per-purpose tag, so the trace is a pure function of the config.
    """

    __slots__ = (
        "_busy",
        "_cfg",
        "_closing",
        "_churn_rng",
        "_clock_rng",
        "_engine",
        "_mgr",
        "_mobility",
        "_mobility_rng",
        "_p2p",
        "_pol_active",
        "_pol_due",
        "_pol_rng",
        "_protocol_rng",
        "_retry_at",
        "_zkp_rng",
    )

    def __init__(self, cfg: ScenarioConfig) -> None:
        self._cfg = cfg
        seed = cfg.seed
        self._mobility_rng = derive_rng(seed, "mobility")
        self._churn_rng = derive_rng(seed, "churn")
        self._protocol_rng = derive_rng(seed, "protocol")
        self._zkp_rng = derive_rng(seed, "zkp")
        self._pol_rng = derive_rng(seed, "proof-of-life")
        self._clock_rng = derive_rng(seed, "clock")

        self._mgr = LifeCycleManager.bootstrap(cfg)
        radio = RadioModel(range=cfg.radio_range, width=cfg.arena[0], height=cfg.arena[1])
        ids = sorted(self._mgr.records)
        placement_rng = derive_rng(seed, "placement")
        try:
            positions = connected_placement(ids, radio, placement_rng)
        except SimulationError:
            logger.warning("placement_not_connected", nodes=len(ids), range=cfg.radio_range)
            positions = random_placement(ids, cfg.arena, placement_rng)
        self._engine = Engine(
            radio,
            positions,
            derive_rng(seed, "radio"),
            hop_latency=cfg.hop_latency,
            processing_delay=cfg.processing_delay,
            loss_prob=cfg.loss_prob,
        )
        self._mobility: dict[DeviceId, MobilityState] = {
            d: random_mobility(
                self._mobility_rng, arena=cfg.arena, speed_range=cfg.speed_range, position=p
            )
            for d, p in positions.items()
        }
        self._p2p = self._engine.open_session(self._sink)
        self._pol_active = False
        self._pol_due: set[DeviceId] = set()
        self._busy: set[DeviceId] = set()
        self._retry_at: dict[DeviceId, Seconds] = {}
        self._closing = False

        T = self._mgr.T
        for record in self._mgr.records.values():
            record.last_proof = -float(self._clock_rng.uniform(0.0, T))
            if cfg.clock_skew > 0:
                skew = cfg.clock_skew
                record.clock_offset = float(self._clock_rng.uniform(-skew, skew))

    @property
    def engine(self) -> Engine:
        return self._engine

    @property
    def manager(self) -> LifeCycleManager:
        return self._mgr

    def _sink(self, node: DeviceId, packet: Packet) -> None:
        """Point-to-point traffic needs no handling beyond the trace."""

    def _members(self) -> frozenset[DeviceId]:
        return frozenset(r.device for r in self._mgr.online_members())

    def _log_graph(self) -> None:
        g = self._mgr.graph
        self._engine.log(TraceEvent.GRAPH, n=g.n, m=g.m, stage=g.stage)

    def _log_state(self, record: NodeRecord) -> None:
        self._engine.log(
            TraceEvent.STATE, node=record.device, state=record.state.value, vertex=record.vertex
        )

    # Main loop

    def run(self, cancel: threading.Event | None = None) -> None:
        cfg = self._cfg
        self._engine.log(
            TraceEvent.META,
            nodes=cfg.nodes,
            seed=cfg.seed,
            mode=cfg.broadcast_mode.value,
            proc_cost=cfg.proc_cost,
        )
        self._log_graph()
        logger.info("scenario_start", nodes=cfg.nodes, seed=cfg.seed, duration=cfg.duration)

        steps = int(np.ceil(cfg.duration / cfg.mobility_step))
        for k in range(1, steps + 1):
            now = min(k * cfg.mobility_step, cfg.duration)
            self._engine.schedule(now, EventKind.MOBILITY_UPDATE, self._move_all)
            self._engine.advance(now)
            if self._mgr.terminated or (cancel is not None and cancel.is_set()):
                break
            self._mgr.normalize()
            self._churn(now)
            self._reconnect(now)
            self._schedule_proofs(now)
        if not self._mgr.terminated and not (cancel is not None and cancel.is_set()):
            # Let broadcasts already under way resolve; nothing new starts.
            self._closing = True
            self._engine.advance(cfg.duration + self._mgr.T)
        logger.info(
            "scenario_end",
            nodes=self._mgr.graph.n,
            stage=self._mgr.graph.stage,
            terminated=self._mgr.terminated,
            records=len(self._engine.trace),
        )

    def _move_all(self) -> None:
        cfg = self._cfg
        for device in sorted(self._mobility):
            state = step_mobility(
                self._mobility[device],
                cfg.mobility_step,
                self._mobility_rng,
                arena=cfg.arena,
                speed_range=cfg.speed_range,
            )
            self._mobility[device] = state
            self._engine.move(device, state.position)

    # Churn

    def _churn(self, now: Seconds) -> None:
        cfg = self._cfg
        if self._churn_rng.random() < cfg.insert_prob * cfg.mobility_step:
            self._arrive(now)
        if self._churn_rng.random() < cfg.delete_prob * cfg.mobility_step:
            self._leave(now)

    def _arrive(self, now: Seconds) -> None:
        members = self._mgr.online_members()
        if not members:
            return
        anchor = members[int(self._churn_rng.integers(len(members)))]
        record = self._mgr.add_device()
        position = self._near(self._engine.positions[anchor.device])
        self._engine.move(record.device, position)
        self._engine.set_power(record.device, True)
        self._mobility[record.device] = random_mobility(
            self._mobility_rng,
            arena=self._cfg.arena,
            speed_range=self._cfg.speed_range,
            position=position,
        )
        self._log_state(record)
        self._begin_insertion(anchor, record)

    def _near(self, origin: Position) -> Position:
        reach = self._cfg.radio_range / 2
        angle = float(self._churn_rng.uniform(0.0, 2 * np.pi))
        dist = float(self._churn_rng.uniform(0.0, reach))
        x = min(max(origin[0] + dist * np.cos(angle), 0.0), self._cfg.arena[0])
        y = min(max(origin[1] + dist * np.sin(angle), 0.0), self._cfg.arena[1])
        return float(x), float(y)

    def _leave(self, now: Seconds) -> None:
        candidates = [r for r in self._mgr.online_members() if r.device not in self._busy]
        if not candidates:
            return
        record = candidates[int(self._churn_rng.integers(len(candidates)))]
        self._mgr.power_off(record, now)
        self._engine.set_power(record.device, False)
        self._pol_due.discard(record.device)
        self._log_state(record)
        if self._churn_rng.random() < self._cfg.return_prob:
            delay = float(self._churn_rng.exponential(self._cfg.mean_offline))
            self._engine.schedule(
                now + delay,
                EventKind.POWER_TOGGLE,
                lambda: self._power_on(record),
                node=record.device,
            )

    def _power_on(self, record: NodeRecord) -> None:
        self._mgr.power_on(record, self._engine.now)
        self._engine.set_power(record.device, True)
        self._log_state(record)

    # Returning and out-of-service devices

    def _reconnect(self, now: Seconds) -> None:
        members = {r.device: r for r in self._mgr.online_members()}
        for device, record in sorted(self._mgr.records.items()):
            if not record.online or record.isolated or device in self._busy:
                continue
            if record.state not in _WAITING or device not in self._engine.online:
                continue
            if self._retry_at.get(device, 0.0) > now:
                continue
            near = sorted(d for d in self._engine.neighbors_of(device) if d in members)
            near = [d for d in near if d not in self._busy]
            if not near:
                continue
            authenticator = members[near[0]]
            self._retry_at[device] = now + self._cfg.pol_period
            if record.state in (LifeState.DELETED, LifeState.NON_LEGITIMATE):
                self._begin_insertion(authenticator, record)
            else:
                self._access(authenticator, record, now)

    def _access(self, authenticator: NodeRecord, supplicant: NodeRecord, now: Seconds) -> None:
        stale = supplicant.graph
        try:
            outcome = self._mgr.handle_access_control(
                authenticator, supplicant, self._zkp_rng, now=now
            )
        except StaleBeyondFifoError as e:
            self._engine.log(
                TraceEvent.ACCESS, node=supplicant.device, status="stale", vertex=supplicant.vertex
            )
            logger.warning("access_stale", device=supplicant.device, error=str(e))
            return
        if outcome.transcript is not None and stale is not None:
            self._zkp_traffic(authenticator.device, supplicant.device, stale, outcome.transcript)
        if outcome.admitted:
            sizes = self._cfg.sizes
            self._engine.transmit(
                authenticator.device,
                PacketKind.INSERTION_MSG,
                size=sizes.header + sizes.proof_entry * len(supplicant.fifo),
                channel=SECURE,
                session=self._p2p,
                dst=supplicant.device,
            )
        self._engine.log(
            TraceEvent.ACCESS,
            node=supplicant.device,
            status=outcome.status.value,
            vertex=outcome.vertex,
            by=authenticator.device,
        )
        self._log_state(supplicant)
        if outcome.status is AccessStatus.EXPIRED and supplicant.state is LifeState.DELETED:
            self._log_graph()

    def _zkp_traffic(
        self,
        authenticator: DeviceId,
        supplicant: DeviceId,
        stale: NetworkGraph,
        transcript: ZkpTranscript,
    ) -> None:
        """Put the access-control exchange on the air."""
        sizes = self._cfg.sizes
        graph_bytes = sizes.edge * stale.m

        def send(src: DeviceId, dst: DeviceId, body: int) -> None:
            self._engine.transmit(
                src,
                PacketKind.ZKP_MSG,
                size=sizes.header + body,
                channel=ZKP,
                session=self._p2p,
                dst=dst,
            )

        send(supplicant, authenticator, graph_bytes)
        for rnd in transcript.rounds:
            send(supplicant, authenticator, 2 * sizes.commitment)
            send(authenticator, supplicant, sizes.challenge)
            if rnd.challenge is Challenge.REVEAL_ISOMORPHISM:
                send(supplicant, authenticator, sizes.vertex_id * stale.n + sizes.salt)
            else:
                send(
                    supplicant,
                    authenticator,
                    graph_bytes + sizes.cycle_entry * stale.n + 2 * sizes.salt,
                )

    # Insertion

    def _begin_insertion(self, anchor: NodeRecord, supplicant: NodeRecord) -> None:
        self._busy.update({anchor.device, supplicant.device})

        def decide(result: GriResult) -> bool:
            return self._commit_insertion(anchor, supplicant, result)

        def release(_: GriResult) -> None:
            self._busy.difference_update({anchor.device, supplicant.device})

        sizes = self._cfg.sizes
        # Agreement answers are bare IDs; the announcement names the new vertex and its group.
        open_gather(
            self._cfg.broadcast_mode,
            self._engine,
            anchor.device,
            self._members(),
            sizes=sizes,
            channel=INSERTION,
            payload_size=sizes.vertex_id,
            entry_size=sizes.vertex_id,
            info_size=sizes.header + sizes.vertex_id * (self._mgr.group_size + 1),
            decide=decide,
            on_complete=release,
        )

    def _commit_insertion(
        self, anchor: NodeRecord, supplicant: NodeRecord, result: GriResult
    ) -> bool:
        now = self._engine.now
        if not supplicant.online:
            return False
        try:
            outcome = self._mgr.handle_insertion(
                anchor, supplicant, len(result.roster), self._protocol_rng, now=now
            )
        except NotAuthenticatedError:
            logger.info("insertion_anchor_lost", anchor=anchor.device, now=now)
            return False
        if not outcome.committed:
            self._engine.log(TraceEvent.INSERT, node=supplicant.device, status="aborted")
            return False

        sizes = self._cfg.sizes
        g = self._mgr.graph
        self._engine.transmit(
            anchor.device,
            PacketKind.INSERTION_MSG,
            size=sizes.header + sizes.edge * g.m,
            channel=INSERTION,
            session=self._p2p,
            dst=supplicant.device,
        )
        self._engine.transmit(
            anchor.device,
            PacketKind.INSERTION_MSG,
            size=sizes.header + sizes.cycle_entry * g.n + sizes.proof_entry * len(anchor.fifo),
            channel=SECURE,
            session=self._p2p,
            dst=supplicant.device,
        )
        self._engine.log(
            TraceEvent.INSERT,
            node=supplicant.device,
            status="committed",
            vertex=outcome.vertex,
            by=anchor.device,
        )
        self._log_state(supplicant)
        self._log_graph()
        return True

    # Proofs of life

    def _schedule_proofs(self, now: Seconds) -> None:
        for record in self._mgr.online_members():
            if record.device in self._pol_due:
                continue
            action = self._mgr.proof_of_life_tick(record, now, self._pol_rng)
            if action is None:
                continue
            self._pol_due.add(record.device)
            self._engine.schedule(
                action.due,
                EventKind.TIMER_EXPIRY,
                lambda r=record: self._launch_proof(r),
                node=record.device,
            )

    def _launch_proof(self, record: NodeRecord) -> None:
        self._pol_due.discard(record.device)
        now = self._engine.now
        if (
            self._pol_active
            or self._closing
            or self._mgr.terminated
            or not record.online
            or record.state is not LifeState.ON_AUTHENTICATED
            or record.clock(now) <= self._mgr.T
        ):
            return
        self._pol_active = True

        def decide(result: GriResult) -> bool:
            return self._commit_proof(record, result)

        def release(_: GriResult) -> None:
            self._pol_active = False

        open_gather(
            self._cfg.broadcast_mode,
            self._engine,
            record.device,
            self._members(),
            sizes=self._cfg.sizes,
            channel=POL,
            decide=decide,
            on_complete=release,
        )

    def _commit_proof(self, initiator: NodeRecord, result: GriResult) -> bool:
        now = self._engine.now
        if not initiator.online or initiator.state is not LifeState.ON_AUTHENTICATED:
            return False
        records = self._mgr.records
        before = {d: r.state for d, r in records.items()}
        pairs = [
            (vertex, d) for d in sorted(result.roster) if (vertex := records[d].vertex) is not None
        ]
        outcome = self._mgr.commit_proof_of_life(initiator, pairs, now)
        for device, state in sorted(before.items()):
            if records[device].state is not state:
                self._log_state(records[device])
        for vertex in outcome.deleted:
            self._engine.log(TraceEvent.DELETE, node=initiator.device, vertex=vertex)
        if outcome.deleted:
            self._log_graph()
        if outcome.terminated:
            self._engine.log(TraceEvent.TERMINATE, n=self._mgr.graph.n, n_min=self._cfg.n_min)
            logger.warning("network_terminated", now=now, n=self._mgr.graph.n)
            return False
        return outcome.committed


def run_scenario(
    cfg: ScenarioConfig,
    *,
    out_dir: Path | None = None,
    cancel: threading.Event | None = None,
) -> ScenarioResult:
    """Simulate ``cfg`` and summarize its trace.

    With ``out_dir`` the trace is also written there as TSV.
    """
    driver = ScenarioDriver(cfg)
    driver.run(cancel)
    lines = tuple(record.to_line() for record in driver.engine.trace)
    summary = summarize(lines, nodes=cfg.nodes)
    trace_path = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        trace_path = out_dir / trace_filename(cfg)
        trace_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return ScenarioResult(
        summary=summary, trace_lines=lines, manager=driver.manager, trace_path=trace_path
    )
