"""Per-node FIFO log of membership updates.

Every update a node hears over the broadcast channel is kept for a retention
window. Structural events (insertions, deletions) replay a stale graph up to
the current stage; every event also names the vertices it proves alive, which
is the evidence the deletion pass checks.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import StrEnum

from core.exceptions import ErrorContext, StaleBeyondFifoError
from core.graph import HamiltonianCycle, NetworkGraph, delete_vertex, splice_vertex
from core.type_aliases import Seconds, Stage, VertexId

__all__ = ["UpdateEvent", "UpdateKind", "UpdateQueue", "replay"]


class UpdateKind(StrEnum):
    INSERTION = "insertion"
    DELETION = "deletion"
    ROSTER = "roster"
    ADMISSION = "admission"


STRUCTURAL = frozenset({UpdateKind.INSERTION, UpdateKind.DELETION})


@dataclass(slots=True, frozen=True, kw_only=True)
class UpdateEvent:
    """One logged update.

    Attributes:
        kind: What happened
        stage: Graph stage after the update (unchanged for roster/admission)
        time: Simulated time the update was committed
        vertex: Inserted or deleted vertex, if structural
        between: Cycle edge the inserted vertex was spliced into
        group: NeighborGroup members of the inserted vertex
        alive: Vertices this update proves alive
        initiator: Vertex that broadcast the update
    """

    kind: UpdateKind
    stage: Stage
    time: Seconds
    vertex: VertexId | None = None
    between: tuple[VertexId, VertexId] | None = None
    group: frozenset[VertexId] = frozenset()
    alive: frozenset[VertexId] = frozenset()
    initiator: VertexId | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "group", frozenset(self.group))
        object.__setattr__(self, "alive", frozenset(self.alive))
        if self.kind in STRUCTURAL and self.vertex is None:
            raise ValueError(f"{self.kind} event needs a vertex")
        if self.kind is UpdateKind.INSERTION and self.between is None:
            raise ValueError("insertion event needs its splice pair")
        if self.time < 0:
            raise ValueError("Event time cannot be negative")


class UpdateQueue:
    """Time-ordered update log with a sliding retention window."""

    __slots__ = ("_events", "retention")

    def __init__(self, retention: Seconds, events: Iterable[UpdateEvent] = ()) -> None:
        if retention <= 0:
            raise ValueError("Retention must be positive")
        self.retention = retention
        self._events: deque[UpdateEvent] = deque()
        for event in events:
            self.append(event)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[UpdateEvent]:
        return iter(self._events)

    def append(self, event: UpdateEvent) -> None:
        if self._events and event.time < self._events[-1].time:
            raise ValueError("Events must be appended in time order")
        self._events.append(event)

    def evict(self, now: Seconds) -> int:
        """Drop events older than the retention window; returns how many."""
        dropped = 0
        while self._events and self._events[0].time < now - self.retention:
            self._events.popleft()
            dropped += 1
        return dropped

    def copy(self) -> UpdateQueue:
        return UpdateQueue(self.retention, self._events)

    def alive_within(self, now: Seconds, window: Seconds) -> frozenset[VertexId]:
        """Vertices named alive by any event in ``(now - window, now]``."""
        alive: set[VertexId] = set()
        for event in self._events:
            if now - window < event.time <= now:
                alive |= event.alive
        return frozenset(alive)

    def replay_events(self, from_stage: Stage, to_stage: Stage) -> list[UpdateEvent]:
        """Structural events taking a graph from ``from_stage`` to ``to_stage``.

        Raises:
            StaleBeyondFifoError: some stage in the gap is no longer retained
        """
        events = [
            e for e in self._events if e.kind in STRUCTURAL and from_stage < e.stage <= to_stage
        ]
        if [e.stage for e in events] != list(range(from_stage + 1, to_stage + 1)):
            raise StaleBeyondFifoError(
                f"Queue cannot bridge stage {from_stage} to {to_stage}",
                context=ErrorContext(stage=from_stage, extra={"target": to_stage}),
            )
        return events


def replay(
    g: NetworkGraph, hc: HamiltonianCycle, events: Iterable[UpdateEvent]
) -> tuple[NetworkGraph, HamiltonianCycle]:
    """Apply structural events in order."""
    for event in events:
        if event.vertex is None:
            continue
        if event.kind is UpdateKind.INSERTION and event.between is not None:
            g, hc, _ = splice_vertex(g, hc, event.vertex, event.between, event.group)
        elif event.kind is UpdateKind.DELETION:
            g, hc = delete_vertex(g, hc, event.vertex)
    return g, hc
