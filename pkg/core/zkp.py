"""Zero-knowledge proof of knowledge of the Hamiltonian cycle.

One round: the prover commits to a random isomorph of the graph and to the
relabelled cycle, the verifier flips a bit, and the prover either reveals the
isomorphism (bit 0) or opens the isomorph and its cycle (bit 1). A prover
without the cycle survives each round with probability 1/2, so ``l`` rounds
bound cheating by 2^-l.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum, StrEnum
from typing import Protocol, TypeAlias

import numpy as np
import structlog

from core.exceptions import (
    InvalidWitnessError,
    RoundCountError,
    SaltTooShortError,
    StateAlreadyConsumedError,
    VariantMismatchError,
)
from core.graph import (
    HamiltonianCycle,
    NetworkGraph,
    Permutation,
    edge_key,
    permute_graph,
    verify_cycle,
)
from core.metrics import Metrics
from core.serialization import canonical_cycle_bytes, canonical_graph_bytes

__all__ = [
    "DEFAULT_ROUNDS",
    "MIN_SALT_BYTES",
    "Challenge",
    "CheatStrategy",
    "CoinFlipProver",
    "Commitment",
    "CommitmentPair",
    "CycleReveal",
    "FakeGraphProver",
    "HonestProver",
    "IsomorphProver",
    "IsomorphismReveal",
    "Prover",
    "RoundRecord",
    "RoundResponse",
    "RoundState",
    "ZkpTranscript",
    "commit",
    "make_cheater",
    "prover_commit",
    "prover_respond",
    "run_protocol",
    "verifier_check",
]

logger = structlog.get_logger(__name__)

MIN_SALT_BYTES = 16
DEFAULT_ROUNDS = 20


@dataclass(slots=True, frozen=True)
class Commitment:
    """SHA-256 digest of ``payload || salt``."""

    digest: bytes

    def __post_init__(self) -> None:
        if len(self.digest) != hashlib.sha256().digest_size:
            raise ValueError("Commitment digest must be 32 bytes")

    @property
    def hex(self) -> str:
        return self.digest.hex()


def commit(payload: bytes, salt: bytes) -> Commitment:
    """Hash commitment; identical inputs always give identical digests."""
    if len(salt) < MIN_SALT_BYTES:
        raise SaltTooShortError(f"Salt has {len(salt)} bytes, need at least {MIN_SALT_BYTES}")
    return Commitment(hashlib.sha256(payload + salt).digest())


@dataclass(slots=True, frozen=True)
class CommitmentPair:
    graph: Commitment
    cycle: Commitment


class Challenge(IntEnum):
    """Verifier's bit b_j."""

    REVEAL_ISOMORPHISM = 0
    REVEAL_CYCLE = 1


@dataclass(slots=True)
class RoundState:
    """Prover-private state for one round; answers exactly one challenge.

    For honest provers ``permuted_cycle`` verifies in ``permuted_graph``.
    """

    permutation: Permutation
    permuted_graph: NetworkGraph
    permuted_cycle: HamiltonianCycle
    salt_graph: bytes
    salt_cycle: bytes
    consumed: bool = field(default=False)


@dataclass(slots=True, frozen=True)
class IsomorphismReveal:
    """Answer to bit 0: the permutation and the graph salt."""

    permutation: Permutation
    salt_graph: bytes

    @property
    def challenge(self) -> Challenge:
        return Challenge.REVEAL_ISOMORPHISM


@dataclass(slots=True, frozen=True)
class CycleReveal:
    """Answer to bit 1: the isomorph, its cycle and both salts (never the permutation)."""

    permuted_graph: NetworkGraph
    permuted_cycle: HamiltonianCycle
    salt_cycle: bytes
    salt_graph: bytes

    @property
    def challenge(self) -> Challenge:
        return Challenge.REVEAL_CYCLE


RoundResponse: TypeAlias = IsomorphismReveal | CycleReveal


def _salt(rng: np.random.Generator) -> bytes:
    return rng.bytes(MIN_SALT_BYTES)


def _commit_state(state: RoundState) -> CommitmentPair:
    return CommitmentPair(
        graph=commit(canonical_graph_bytes(state.permuted_graph), state.salt_graph),
        cycle=commit(canonical_cycle_bytes(state.permuted_cycle), state.salt_cycle),
    )


def prover_commit(
    g: NetworkGraph, hc: HamiltonianCycle, rng: np.random.Generator
) -> tuple[RoundState, CommitmentPair]:
    """Draw a fresh isomorph of ``(g, hc)`` and commit to both halves."""
    if not verify_cycle(g, hc):
        raise InvalidWitnessError("Refusing to commit: the cycle does not verify in the graph")
    p = Permutation.random(g.vertices, rng)
    state = RoundState(
        permutation=p,
        permuted_graph=permute_graph(g, p),
        permuted_cycle=hc.relabel(p),
        salt_graph=_salt(rng),
        salt_cycle=_salt(rng),
    )
    return state, _commit_state(state)


def prover_respond(state: RoundState, c: Challenge) -> RoundResponse:
    if state.consumed:
        raise StateAlreadyConsumedError("Round state already answered a challenge")
    state.consumed = True
    if c is Challenge.REVEAL_ISOMORPHISM:
        return IsomorphismReveal(permutation=state.permutation, salt_graph=state.salt_graph)
    return CycleReveal(
        permuted_graph=state.permuted_graph,
        permuted_cycle=state.permuted_cycle,
        salt_cycle=state.salt_cycle,
        salt_graph=state.salt_graph,
    )


def verifier_check(
    public_g: NetworkGraph,
    commitments: CommitmentPair,
    c: Challenge,
    resp: RoundResponse,
) -> bool:
    """Check one round's response against the commitments."""
    if resp.challenge is not c:
        raise VariantMismatchError(f"Challenge {int(c)} answered with {type(resp).__name__}")
    try:
        if isinstance(resp, IsomorphismReveal):
            if resp.permutation.domain != public_g.vertices:
                return False
            recomputed = permute_graph(public_g, resp.permutation)
            return commit(canonical_graph_bytes(recomputed), resp.salt_graph) == commitments.graph
        return (
            commit(canonical_graph_bytes(resp.permuted_graph), resp.salt_graph)
            == commitments.graph
            and commit(canonical_cycle_bytes(resp.permuted_cycle), resp.salt_cycle)
            == commitments.cycle
            and verify_cycle(resp.permuted_graph, resp.permuted_cycle)
        )
    except SaltTooShortError:
        return False


class Prover(Protocol):
    """Anything that can play the prover side of a round."""

    def commit(self, rng: np.random.Generator) -> tuple[RoundState, CommitmentPair]: ...

    def respond(self, state: RoundState, c: Challenge) -> RoundResponse: ...


@dataclass(slots=True, frozen=True)
class HonestProver:
    graph: NetworkGraph
    cycle: HamiltonianCycle

    def commit(self, rng: np.random.Generator) -> tuple[RoundState, CommitmentPair]:
        return prover_commit(self.graph, self.cycle, rng)

    def respond(self, state: RoundState, c: Challenge) -> RoundResponse:
        return prover_respond(state, c)


def _fake_instance(
    public_g: NetworkGraph, rng: np.random.Generator
) -> tuple[NetworkGraph, HamiltonianCycle]:
    """A graph with a known cycle over the same vertices, never equal to ``public_g``."""
    vertices = sorted(public_g.vertices)
    fake_cycle = HamiltonianCycle(tuple(vertices[i] for i in rng.permutation(len(vertices))))
    edges = set(fake_cycle.edges())
    if frozenset(edges) == public_g.edges:
        o = fake_cycle.order
        edges.add(edge_key(o[0], o[2]))
    fake = NetworkGraph(stage=public_g.stage, vertices=public_g.vertices, edges=frozenset(edges))
    return fake, fake_cycle


@dataclass(slots=True)
class FakeGraphProver:
    """Commits to a different graph whose cycle it knows; passes bit 1 only."""

    public_graph: NetworkGraph

    def commit(self, rng: np.random.Generator) -> tuple[RoundState, CommitmentPair]:
        fake_g, fake_hc = _fake_instance(self.public_graph, rng)
        return prover_commit(fake_g, fake_hc, rng)

    def respond(self, state: RoundState, c: Challenge) -> RoundResponse:
        return prover_respond(state, c)


def _non_cycle_order(public_g: NetworkGraph) -> tuple[int, ...]:
    """Vertex ordering that is not a Hamiltonian cycle of ``public_g`` when one exists."""
    order = sorted(public_g.vertices)
    n = len(order)
    for i in range(n):
        for j in range(i + 1, n):
            candidate = list(order)
            candidate[i], candidate[j] = candidate[j], candidate[i]
            if not verify_cycle(public_g, HamiltonianCycle(tuple(candidate))):
                return tuple(candidate)
    return tuple(order)


@dataclass(slots=True)
class IsomorphProver:
    """Commits to a genuine isomorph but a guessed cycle; passes bit 0 only.

    On a complete graph every ordering is a cycle, so the guess always verifies.
    """

    public_graph: NetworkGraph
    _guess: tuple[int, ...] = field(init=False, default=())

    def __post_init__(self) -> None:
        self._guess = _non_cycle_order(self.public_graph)

    def commit(self, rng: np.random.Generator) -> tuple[RoundState, CommitmentPair]:
        p = Permutation.random(self.public_graph.vertices, rng)
        state = RoundState(
            permutation=p,
            permuted_graph=permute_graph(self.public_graph, p),
            permuted_cycle=HamiltonianCycle(tuple(p(v) for v in self._guess)),
            salt_graph=_salt(rng),
            salt_cycle=_salt(rng),
        )
        return state, _commit_state(state)

    def respond(self, state: RoundState, c: Challenge) -> RoundResponse:
        return prover_respond(state, c)


@dataclass(slots=True)
class CoinFlipProver:
    """Picks one of the two blind strategies afresh every round."""

    public_graph: NetworkGraph
    _fake: FakeGraphProver = field(init=False)
    _isomorph: IsomorphProver = field(init=False)

    def __post_init__(self) -> None:
        self._fake = FakeGraphProver(self.public_graph)
        self._isomorph = IsomorphProver(self.public_graph)

    def commit(self, rng: np.random.Generator) -> tuple[RoundState, CommitmentPair]:
        inner: Prover = self._fake if rng.integers(2) else self._isomorph
        return inner.commit(rng)

    def respond(self, state: RoundState, c: Challenge) -> RoundResponse:
        return prover_respond(state, c)


class CheatStrategy(StrEnum):
    """Blind provers used to measure soundness."""

    FAKE_GRAPH = "fake-graph"
    ISOMORPH = "isomorph"
    COIN_FLIP = "coin-flip"


def make_cheater(strategy: CheatStrategy | str, public_g: NetworkGraph) -> Prover:
    strategy = CheatStrategy(strategy)
    if strategy is CheatStrategy.FAKE_GRAPH:
        return FakeGraphProver(public_g)
    if strategy is CheatStrategy.ISOMORPH:
        return IsomorphProver(public_g)
    return CoinFlipProver(public_g)


@dataclass(slots=True, frozen=True)
class RoundRecord:
    index: int
    commitments: CommitmentPair
    challenge: Challenge
    response: RoundResponse
    verdict: bool


@dataclass(slots=True, frozen=True)
class ZkpTranscript:
    """Record of one access-control session; accepted iff every round passed."""

    rounds: tuple[RoundRecord, ...]
    round_count: int

    @property
    def accepted(self) -> bool:
        return len(self.rounds) == self.round_count and all(r.verdict for r in self.rounds)

    @property
    def leaks_witness(self) -> bool:
        """True if any round revealed both a permutation and a cycle."""
        return any(
            hasattr(r.response, "permutation") and hasattr(r.response, "permuted_cycle")
            for r in self.rounds
        )

    def to_text(self) -> str:
        lines = [
            f"round {r.index}: C_G={r.commitments.graph.hex} C_H={r.commitments.cycle.hex} "
            f"b={int(r.challenge)} verdict={'ok' if r.verdict else 'fail'}"
            for r in self.rounds
        ]
        lines.append(f"verdict: {'accepted' if self.accepted else 'rejected'}")
        return "\n".join(lines) + "\n"


def run_protocol(
    prover_secret: tuple[NetworkGraph, HamiltonianCycle] | None,
    public_g: NetworkGraph,
    l: int,
    rng: np.random.Generator,
    *,
    strategy: CheatStrategy = CheatStrategy.FAKE_GRAPH,
    stop_on_failure: bool = False,
) -> ZkpTranscript:
    """Run ``l`` rounds between a prover and a verifier.

    Args:
        prover_secret: Graph and cycle the prover holds; ``None`` plays ``strategy``
        stop_on_failure: End the session at the first failed round

    Raises:
        RoundCountError: ``l`` is below 1
    """
    if l < 1:
        raise RoundCountError(f"Round count must be at least 1, got {l}")
    prover: Prover
    if prover_secret is not None:
        prover = HonestProver(*prover_secret)
    else:
        prover = make_cheater(strategy, public_g)
    rounds: list[RoundRecord] = []
    for j in range(1, l + 1):
        state, pair = prover.commit(rng)
        challenge = Challenge(int(rng.integers(2)))
        response = prover.respond(state, challenge)
        verdict = verifier_check(public_g, pair, challenge, response)
        rounds.append(RoundRecord(j, pair, challenge, response, verdict))
        if not verdict and stop_on_failure:
            break
    transcript = ZkpTranscript(rounds=tuple(rounds), round_count=l)
    Metrics.record_zkp_session(transcript.accepted)
    logger.debug("zkp_session", rounds=len(rounds), accepted=transcript.accepted)
    return transcript

