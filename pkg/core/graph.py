"""Graph and Hamiltonian-cycle algebra.

The network secret is a pair (G_t, HC_t): an undirected graph over the live
vertex IDs and a Hamiltonian cycle planted in it. All values here are
immutable; every operation returns new values and draws randomness only from
the generator it is handed.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType

import networkx as nx
import numpy as np

from core.exceptions import (
    DomainMismatchError,
    DuplicateIdError,
    ErrorContext,
    FewerThanThreeVerticesError,
    InfeasibleDensityError,
    InsufficientNonAdjacentCandidatesError,
    NetworkTooSmallError,
    TooLargeError,
    UnknownIdError,
)
from core.retry import RejectedSample, resampling
from core.type_aliases import Edge, VertexId

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "INSERTION_ATTEMPTS",
    "HamiltonianCycle",
    "NeighborGroup",
    "NetworkGraph",
    "Permutation",
    "apply_permutation",
    "brute_force_find_cycle",
    "complete_graph",
    "delete_vertex",
    "edge_key",
    "generate_initial_cycle",
    "insert_vertex",
    "permute_graph",
    "splice_vertex",
    "verify_cycle",
]

BRUTE_FORCE_LIMIT = 12
INSERTION_ATTEMPTS = 100
COMPLETION_ATTEMPTS = 50


def edge_key(u: VertexId, v: VertexId) -> Edge:
    """Unordered edge as a sorted pair."""
    return (u, v) if u < v else (v, u)


class Permutation:
    """Bijection over a vertex set.

    Composition reads left to right: ``p.then(q)`` applies ``p`` first.
    """

    __slots__ = ("_images",)

    def __init__(self, mapping: Mapping[VertexId, VertexId]) -> None:
        images = dict(mapping)
        if set(images.values()) != set(images):
            raise ValueError("Permutation must be a bijection onto its own domain")
        self._images: Mapping[VertexId, VertexId] = MappingProxyType(images)

    @classmethod
    def identity(cls, vertices: Iterable[VertexId]) -> Permutation:
        return cls({v: v for v in vertices})

    @classmethod
    def random(cls, vertices: Iterable[VertexId], rng: np.random.Generator) -> Permutation:
        """Uniform permutation of ``vertices``."""
        domain = sorted(vertices)
        shuffled = [domain[i] for i in rng.permutation(len(domain))]
        return cls(dict(zip(domain, shuffled)))

    @property
    def domain(self) -> frozenset[VertexId]:
        return frozenset(self._images)

    @property
    def mapping(self) -> Mapping[VertexId, VertexId]:
        return self._images

    def __call__(self, v: VertexId) -> VertexId:
        return self._images[v]

    def __len__(self) -> int:
        return len(self._images)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return dict(self._images) == dict(other._images)

    def __hash__(self) -> int:
        return hash(frozenset(self._images.items()))

    def __repr__(self) -> str:
        pairs = ", ".join(f"{k}->{v}" for k, v in sorted(self._images.items()))
        return f"Permutation({pairs})"

    def then(self, other: Permutation) -> Permutation:
        """Composition applying ``self`` first, then ``other``."""
        if self.domain != other.domain:
            raise DomainMismatchError("Cannot compose permutations over different vertex sets")
        return Permutation({v: other(self(v)) for v in self._images})

    def inverse(self) -> Permutation:
        return Permutation({image: v for v, image in self._images.items()})


@dataclass(slots=True, frozen=True)
class HamiltonianCycle:
    """Cyclic vertex ordering.

    Orderings of three or more distinct vertices are stored in canonical form:
    start at the smallest ID and head towards its smaller neighbour. Anything
    else is kept verbatim so that :func:`verify_cycle` can reject it.
    """

    order: tuple[VertexId, ...]

    def __post_init__(self) -> None:
        order = tuple(self.order)
        if len(order) >= 3 and len(set(order)) == len(order):
            start = order.index(min(order))
            order = order[start:] + order[:start]
            if order[-1] < order[1]:
                order = (order[0],) + tuple(reversed(order[1:]))
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[VertexId]:
        return iter(self.order)

    def edges(self) -> frozenset[Edge]:
        """Consecutive pairs, including last to first."""
        n = len(self.order)
        return frozenset(edge_key(self.order[i], self.order[(i + 1) % n]) for i in range(n))

    def neighbors(self, v: VertexId) -> tuple[VertexId, VertexId]:
        """Predecessor and successor of ``v`` on the cycle."""
        i = self.order.index(v)
        n = len(self.order)
        return self.order[i - 1], self.order[(i + 1) % n]

    def relabel(self, p: Permutation) -> HamiltonianCycle:
        return HamiltonianCycle(tuple(p(v) for v in self.order))


@dataclass(slots=True, frozen=True, kw_only=True)
class NetworkGraph:
    """Undirected graph G_t over live vertex IDs.

    Attributes:
        stage: Membership stage t; bumped by every insertion or deletion
        vertices: Live vertex set V_t
        edges: Unordered edge set E_t, each stored as a sorted pair
    """

    stage: int = 0
    vertices: frozenset[VertexId]
    edges: frozenset[Edge]

    def __post_init__(self) -> None:
        if self.stage < 0:
            raise ValueError("Graph stage cannot be negative")
        vertices = frozenset(self.vertices)
        edges = frozenset(edge_key(u, v) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise ValueError(f"Self-loop on vertex {u}")
            if u not in vertices or v not in vertices:
                raise ValueError(f"Edge ({u}, {v}) references a vertex outside the graph")
        if any(v < 1 for v in vertices):
            raise ValueError("Vertex IDs must be positive integers")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        return edge_key(u, v) in self.edges

    def adjacency(self) -> dict[VertexId, set[VertexId]]:
        adj: dict[VertexId, set[VertexId]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degree(self, v: VertexId) -> int:
        return sum(1 for e in self.edges if v in e)

    def neighbor_group(self, owner: VertexId) -> NeighborGroup:
        """All neighbours of ``owner`` in G_t."""
        if owner not in self.vertices:
            raise UnknownIdError(f"Vertex {owner} not in graph", context=ErrorContext(vertex=owner))
        members = frozenset(v for e in self.edges if owner in e for v in e if v != owner)
        return NeighborGroup(owner=owner, members=members)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(sorted(self.vertices))
        g.add_edges_from(sorted(self.edges))
        return g


@dataclass(slots=True, frozen=True, kw_only=True)
class NeighborGroup:
    """Neighbour set a vertex is wired to when it joins."""

    owner: VertexId
    members: frozenset[VertexId]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if self.owner in self.members:
            raise ValueError("NeighborGroup cannot contain its owner")

    def __len__(self) -> int:
        return len(self.members)


def generate_initial_cycle(participant_permutations: Sequence[Permutation]) -> HamiltonianCycle:
    """Compose founders' permutations into HC_0.

    The composed permutation ``P`` yields the cycle ``P(u1), ..., P(un)`` for the
    ascending domain ``u1 < ... < un``.
    """
    if not participant_permutations:
        raise DomainMismatchError("At least one permutation is required")
    domain = participant_permutations[0].domain
    for p in participant_permutations[1:]:
        if p.domain != domain:
            raise DomainMismatchError("Participant permutations act on different vertex sets")
    if len(domain) < 3:
        raise FewerThanThreeVerticesError(
            f"A Hamiltonian cycle needs at least 3 vertices, got {len(domain)}"
        )
    composed = participant_permutations[0]
    for p in participant_permutations[1:]:
        composed = composed.then(p)
    return HamiltonianCycle(tuple(composed(v) for v in sorted(domain)))


def _fill_to_regular(
    hc: HamiltonianCycle, degree: int, rng: np.random.Generator
) -> frozenset[Edge]:
    """Add random chords until every vertex has ``degree`` neighbours."""
    edges = set(hc.edges())
    adjacency: dict[VertexId, set[VertexId]] = {v: set() for v in hc.order}
    for u, v in edges:
        adjacency[u].add(v)
        adjacency[v].add(u)
    deficit = {v: degree - 2 for v in sorted(hc.order)}

    while True:
        open_vertices = [v for v, d in deficit.items() if d > 0]
        if not open_vertices:
            return frozenset(edges)
        top = max(deficit[v] for v in open_vertices)
        heads = [v for v in open_vertices if deficit[v] == top]
        u = heads[int(rng.integers(len(heads)))]
        partners = [w for w in open_vertices if w != u and w not in adjacency[u]]
        if not partners:
            raise RejectedSample(f"vertex {u} left with deficit {deficit[u]}")
        weights = np.array([deficit[w] for w in partners], dtype=float)
        w = partners[int(rng.choice(len(partners), p=weights / weights.sum()))]
        edges.add(edge_key(u, w))
        adjacency[u].add(w)
        adjacency[w].add(u)
        deficit[u] -= 1
        deficit[w] -= 1


def complete_graph(
    hc: HamiltonianCycle, m: int, rng: np.random.Generator, *, stage: int = 0
) -> NetworkGraph:
    """Build G_0 around the planted cycle.

    Every vertex ends up with exactly 2m/n neighbours (its NeighborGroup),
    both HC neighbours included, so the graph has exactly ``m`` edges.

    Raises:
        InfeasibleDensityError: m outside [n, n(n-1)/2], 2m not divisible by n,
            or the random completion failed on every attempt
    """
    n = len(hc)
    max_edges = n * (n - 1) // 2
    if m > max_edges:
        raise InfeasibleDensityError(f"m={m} exceeds the {max_edges} edges possible on n={n}")
    if m < n:
        raise InfeasibleDensityError(f"m={m} is below the {n} edges of the cycle itself")
    if (2 * m) % n:
        raise InfeasibleDensityError(f"2m={2 * m} is not divisible by n={n}")
    degree = 2 * m // n
    if degree > n - 1:
        raise InfeasibleDensityError(f"group size {degree} exceeds n-1={n - 1}")

    try:
        edges = resampling(COMPLETION_ATTEMPTS, sampler="complete_graph")(
            _fill_to_regular, hc, degree, rng
        )
    except RejectedSample as e:
        raise InfeasibleDensityError(
            f"Could not complete a {degree}-regular graph on n={n}"
        ) from e
    return NetworkGraph(stage=stage, vertices=frozenset(hc.order), edges=edges)


def verify_cycle(g: NetworkGraph, hc: HamiltonianCycle) -> bool:
    """True iff ``hc`` visits every vertex of ``g`` once along edges of ``g``."""
    order = hc.order
    n = len(order)
    if n < 3 or n != g.n or len(set(order)) != n or set(order) != g.vertices:
        return False
    return all(g.has_edge(order[i], order[(i + 1) % n]) for i in range(n))


def splice_vertex(
    g: NetworkGraph,
    hc: HamiltonianCycle,
    new_id: VertexId,
    between: tuple[VertexId, VertexId],
    members: Iterable[VertexId],
) -> tuple[NetworkGraph, HamiltonianCycle, NeighborGroup]:
    """Deterministic part of an insertion; also used to replay queued updates.

    ``new_id`` is placed on the cycle between the adjacent pair ``between`` and
    wired to ``members``. The old edge between the pair stays in E_{t+1}.
    """
    if new_id in g.vertices:
        raise DuplicateIdError(f"Vertex {new_id} already live", context=ErrorContext(vertex=new_id))
    vj, vk = between
    if edge_key(vj, vk) not in hc.edges():
        raise ValueError(f"({vj}, {vk}) is not an edge of the cycle")
    group = NeighborGroup(owner=new_id, members=frozenset(members) | {vj, vk})
    if not group.members <= g.vertices:
        raise UnknownIdError("Neighbour group references vertices outside the graph")

    order = hc.order
    i = order.index(vj)
    n = len(order)
    if order[(i + 1) % n] == vk:
        new_order = order[: i + 1] + (new_id,) + order[i + 1 :]
    else:
        new_order = order[:i] + (new_id,) + order[i:]

    new_graph = NetworkGraph(
        stage=g.stage + 1,
        vertices=g.vertices | {new_id},
        edges=g.edges | {edge_key(new_id, w) for w in group.members},
    )
    return new_graph, HamiltonianCycle(new_order), group


def _draw_insertion(
    hc: HamiltonianCycle, extras: int, rng: np.random.Generator
) -> tuple[tuple[VertexId, VertexId], tuple[VertexId, ...]]:
    """Random splice pair plus ``extras`` vertices pairwise non-adjacent on the cycle."""
    n = len(hc)
    pos = int(rng.integers(n))
    vj, vk = hc.order[pos], hc.order[(pos + 1) % n]
    pool = [v for v in hc.order if v not in (vj, vk)]
    chosen: list[VertexId] = []
    while len(chosen) < extras:
        if not pool:
            raise RejectedSample(f"pool exhausted after {len(chosen)} of {extras} extras")
        pick = pool[int(rng.integers(len(pool)))]
        chosen.append(pick)
        blocked = {pick, *hc.neighbors(pick)}
        pool = [v for v in pool if v not in blocked]
    return (vj, vk), tuple(sorted(chosen))


def insert_vertex(
    g: NetworkGraph,
    hc: HamiltonianCycle,
    new_id: VertexId,
    rng: np.random.Generator,
    *,
    group_size: int | None = None,
) -> tuple[NetworkGraph, HamiltonianCycle, NeighborGroup]:
    """Splice ``new_id`` into a random cycle edge and wire its NeighborGroup.

    Args:
        group_size: Size of the new NeighborGroup; defaults to floor(2m/n) of ``g``
            and is never below 2 (the splice pair)

    Raises:
        DuplicateIdError: ``new_id`` already live
        FewerThanThreeVerticesError: ``g`` has fewer than 3 vertices
        InsufficientNonAdjacentCandidatesError: no valid extras within the attempt budget
    """
    if new_id in g.vertices:
        raise DuplicateIdError(f"Vertex {new_id} already live", context=ErrorContext(vertex=new_id))
    if g.n < 3:
        raise FewerThanThreeVerticesError(f"Cannot insert into a graph of {g.n} vertices")
    size = group_size if group_size is not None else (2 * g.m) // g.n
    extras = max(2, size) - 2

    try:
        between, chosen = resampling(INSERTION_ATTEMPTS, sampler="insert_vertex")(
            _draw_insertion, hc, extras, rng
        )
    except RejectedSample as e:
        raise InsufficientNonAdjacentCandidatesError(
            f"No {extras} HC-non-adjacent extras found on n={g.n}",
            context=ErrorContext(vertex=new_id, stage=g.stage),
            attempts=INSERTION_ATTEMPTS,
        ) from e
    return splice_vertex(g, hc, new_id, between, chosen)


def delete_vertex(
    g: NetworkGraph, hc: HamiltonianCycle, vertex: VertexId, *, n_min: int = 3
) -> tuple[NetworkGraph, HamiltonianCycle]:
    """Remove ``vertex`` and bypass it with an edge between its cycle neighbours.

    Raises:
        UnknownIdError: ``vertex`` not live
        NetworkTooSmallError: fewer than ``n_min`` vertices would remain
    """
    if vertex not in g.vertices:
        raise UnknownIdError(f"Vertex {vertex} not in graph", context=ErrorContext(vertex=vertex))
    remaining = g.n - 1
    if remaining < max(3, n_min):
        raise NetworkTooSmallError(
            f"Deleting {vertex} leaves {remaining} vertices (minimum {max(3, n_min)})",
            context=ErrorContext(vertex=vertex, stage=g.stage),
            remaining=remaining,
            n_min=max(3, n_min),
        )
    vj, vk = hc.neighbors(vertex)
    edges = {e for e in g.edges if vertex not in e}
    edges.add(edge_key(vj, vk))
    new_graph = NetworkGraph(
        stage=g.stage + 1, vertices=g.vertices - {vertex}, edges=frozenset(edges)
    )
    return new_graph, HamiltonianCycle(tuple(v for v in hc.order if v != vertex))


def permute_graph(g: NetworkGraph, p: Permutation) -> NetworkGraph:
    """Isomorphic copy of ``g`` relabelled by ``p``."""
    if p.domain != g.vertices:
        raise DomainMismatchError("Permutation domain differs from the graph's vertex set")
    return NetworkGraph(
        stage=g.stage,
        vertices=g.vertices,
        edges=frozenset(edge_key(p(u), p(v)) for u, v in g.edges),
    )


def apply_permutation(
    g: NetworkGraph, hc: HamiltonianCycle, p: Permutation
) -> tuple[NetworkGraph, HamiltonianCycle]:
    """Relabel graph and cycle together; the result verifies iff the input did."""
    return permute_graph(g, p), hc.relabel(p)


def brute_force_find_cycle(g: NetworkGraph) -> HamiltonianCycle | None:
    """Exhaustive backtracking search; test oracle for small graphs only."""
    if g.n > BRUTE_FORCE_LIMIT:
        raise TooLargeError(f"Refusing exhaustive search on {g.n} > {BRUTE_FORCE_LIMIT} vertices")
    if g.n < 3:
        return None
    adjacency = {v: sorted(ws) for v, ws in g.adjacency().items()}
    start = min(g.vertices)
    path = [start]
    visited = {start}

    def extend() -> bool:
        if len(path) == g.n:
            return start in adjacency[path[-1]]
        for nxt in adjacency[path[-1]]:
            if nxt not in visited:
                path.append(nxt)
                visited.add(nxt)
                if extend():
                    return True
                path.pop()
                visited.discard(nxt)
        return False

    return HamiltonianCycle(tuple(path)) if extend() else None
