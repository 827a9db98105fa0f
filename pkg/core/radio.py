"""Disk-range radio and random-waypoint mobility."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import networkx as nx
import numpy as np

from core.exceptions import ErrorContext, SimulationError
from core.retry import RejectedSample, resampling
from core.type_aliases import DeviceId, Position

__all__ = [
    "PLACEMENT_ATTEMPTS",
    "MobilityState",
    "RadioModel",
    "connected_placement",
    "neighbors",
    "random_mobility",
    "random_placement",
    "step_mobility",
    "topology_graph",
]

PLACEMENT_ATTEMPTS = 200
_MAX_LEGS = 64


@dataclass(slots=True, frozen=True, kw_only=True)
class RadioModel:
    """Symmetric unit-disk radio: a link exists iff distance <= range."""

    range: float
    width: float
    height: float

    def __post_init__(self) -> None:
        if self.range <= 0:
            raise ValueError("Radio range must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("Arena dimensions must be positive")


def neighbors(
    radio: RadioModel, positions: Mapping[DeviceId, Position]
) -> dict[DeviceId, frozenset[DeviceId]]:
    """Adjacency over the given nodes; the range boundary is inclusive."""
    ids = sorted(positions)
    if not ids:
        return {}
    coords = np.array([positions[i] for i in ids], dtype=float)
    dist = np.hypot(
        coords[:, 0, None] - coords[None, :, 0], coords[:, 1, None] - coords[None, :, 1]
    )
    linked = dist <= radio.range
    np.fill_diagonal(linked, False)
    return {ids[i]: frozenset(ids[j] for j in np.flatnonzero(linked[i])) for i in range(len(ids))}


def topology_graph(radio: RadioModel, positions: Mapping[DeviceId, Position]) -> nx.Graph:
    """Radio links as a networkx graph, one node per position."""
    graph = nx.Graph()
    adjacency = neighbors(radio, positions)
    graph.add_nodes_from(adjacency)
    graph.add_edges_from((u, v) for u, ws in adjacency.items() for v in ws if u < v)
    return graph


@dataclass(slots=True, frozen=True, kw_only=True)
class MobilityState:
    position: Position
    waypoint: Position
    speed: float

    def __post_init__(self) -> None:
        if self.speed < 0:
            raise ValueError("Speed cannot be negative")


def _draw_point(rng: np.random.Generator, arena: tuple[float, float]) -> Position:
    return float(rng.uniform(0.0, arena[0])), float(rng.uniform(0.0, arena[1]))


def _draw_speed(rng: np.random.Generator, speed_range: tuple[float, float]) -> float:
    low, high = speed_range
    return low if high <= low else float(rng.uniform(low, high))


def random_mobility(
    rng: np.random.Generator,
    *,
    arena: tuple[float, float],
    speed_range: tuple[float, float],
    position: Position | None = None,
) -> MobilityState:
    """Fresh random-waypoint state, at ``position`` or a uniform point."""
    start = position if position is not None else _draw_point(rng, arena)
    return MobilityState(
        position=start, waypoint=_draw_point(rng, arena), speed=_draw_speed(rng, speed_range)
    )


def step_mobility(
    state: MobilityState,
    dt: float,
    rng: np.random.Generator,
    *,
    arena: tuple[float, float],
    speed_range: tuple[float, float],
) -> MobilityState:
    """Advance ``dt`` seconds of random waypoint with zero pause time.

    Arriving at a waypoint lands on it exactly, then a new uniform waypoint
    and speed are drawn and the rest of ``dt`` is spent on the next leg.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    (x, y), (wx, wy), speed = state.position, state.waypoint, state.speed
    remaining = dt
    for _ in range(_MAX_LEGS):
        dist = float(np.hypot(wx - x, wy - y))
        if speed <= 0.0 and dist > 0.0:
            break
        if speed * remaining < dist:
            frac = speed * remaining / dist
            x, y = x + (wx - x) * frac, y + (wy - y) * frac
            break
        x, y = wx, wy
        remaining -= dist / speed if speed > 0 else 0.0
        (wx, wy), speed = _draw_point(rng, arena), _draw_speed(rng, speed_range)
        if remaining <= 0.0:
            break
    x = min(max(x, 0.0), arena[0])
    y = min(max(y, 0.0), arena[1])
    return MobilityState(position=(x, y), waypoint=(wx, wy), speed=speed)


def random_placement(
    ids: list[DeviceId], arena: tuple[float, float], rng: np.random.Generator
) -> dict[DeviceId, Position]:
    return {i: _draw_point(rng, arena) for i in ids}


def _connected_draw(
    ids: list[DeviceId], radio: RadioModel, rng: np.random.Generator
) -> dict[DeviceId, Position]:
    positions = random_placement(ids, (radio.width, radio.height), rng)
    if len(ids) > 1 and not nx.is_connected(topology_graph(radio, positions)):
        raise RejectedSample("radio topology not connected")
    return positions


def connected_placement(
    ids: list[DeviceId],
    radio: RadioModel,
    rng: np.random.Generator,
    *,
    attempts: int = PLACEMENT_ATTEMPTS,
) -> dict[DeviceId, Position]:
    """Uniform placement redrawn until the radio topology is connected.

    Raises:
        SimulationError: no connected placement within ``attempts`` draws
    """
    try:
        return resampling(attempts, sampler="connected_placement")(_connected_draw, ids, radio, rng)
    except RejectedSample as e:
        raise SimulationError(
            f"No connected placement of {len(ids)} nodes in {attempts} draws",
            context=ErrorContext(extra={"range": radio.range}),
        ) from e
