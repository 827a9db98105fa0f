"""Exception hierarchy with structured context."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

__all__ = [
    "ErrorContext",
    "SlcmError",
    "GraphError",
    "FewerThanThreeVerticesError",
    "DomainMismatchError",
    "InfeasibleDensityError",
    "DuplicateIdError",
    "InsufficientNonAdjacentCandidatesError",
    "UnknownIdError",
    "NetworkTooSmallError",
    "TooLargeError",
    "ZkpError",
    "SaltTooShortError",
    "InvalidWitnessError",
    "StateAlreadyConsumedError",
    "VariantMismatchError",
    "RoundCountError",
    "ProtocolError",
    "TooFewFoundersError",
    "DuplicateVertexIdError",
    "StaleBeyondFifoError",
    "IllegalTransitionError",
    "NotAuthenticatedError",
    "SimulationError",
    "InitiatorNotLegitimateError",
    "ConfigError",
    "TraceCorruptError",
]


@dataclass(slots=True, frozen=True, kw_only=True)
class ErrorContext:
    """Structured error context for diagnostics.

    All fields optional; populate only relevant context.
    """

    stage: int | None = None
    vertex: int | None = None
    device: int | None = None
    field_name: str | None = None
    line: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)


class SlcmError(Exception):
    """Base exception with optional structured context."""

    def __init__(
        self,
        message: str,
        *,
        context: ErrorContext | None = None,
    ) -> None:
        super().__init__(message)
        self.context = context or ErrorContext()


# graph-core


class GraphError(SlcmError):
    """Graph or Hamiltonian-cycle algebra failure."""


class FewerThanThreeVerticesError(GraphError):
    """No Hamiltonian cycle exists on fewer than three vertices."""


class DomainMismatchError(GraphError):
    """Permutations or graphs act on different vertex sets."""


class InfeasibleDensityError(GraphError):
    """Requested edge count cannot be realised on n vertices."""


class DuplicateIdError(GraphError):
    """Vertex ID already present in the graph."""


class InsufficientNonAdjacentCandidatesError(GraphError):
    """Rejection sampling could not find HC-non-adjacent neighbours."""

    def __init__(
        self,
        message: str,
        *,
        context: ErrorContext | None = None,
        attempts: int | None = None,
    ) -> None:
        super().__init__(message, context=context)
        self.attempts = attempts


class UnknownIdError(GraphError):
    """Vertex ID not present in the graph."""


class NetworkTooSmallError(GraphError):
    """Removing vertices would drop the network below its minimum size."""

    def __init__(
        self,
        message: str,
        *,
        context: ErrorContext | None = None,
        remaining: int | None = None,
        n_min: int | None = None,
    ) -> None:
        super().__init__(message, context=context)
        self.remaining = remaining
        self.n_min = n_min


class TooLargeError(GraphError):
    """Exhaustive search refused on a graph above the size guard."""


# zkp-auth


class ZkpError(SlcmError):
    """Zero-knowledge session failure."""


class SaltTooShortError(ZkpError):
    """Commitment salt below the minimum length."""


class InvalidWitnessError(ZkpError):
    """Honest prover asked to commit to a cycle that does not verify."""


class StateAlreadyConsumedError(ZkpError):
    """Round state already answered a challenge."""


class VariantMismatchError(ZkpError):
    """Response variant disagrees with the challenge bit."""


class RoundCountError(ZkpError):
    """Session asked for fewer than one round."""


# slcm-protocol


class ProtocolError(SlcmError):
    """Life-cycle protocol failure."""


class TooFewFoundersError(ProtocolError):
    """Initialization attempted with fewer than n_min founders."""


class DuplicateVertexIdError(ProtocolError):
    """Sybil guard: the requested vertex ID is already live."""


class StaleBeyondFifoError(ProtocolError):
    """Updates needed for replay were already evicted from the queue."""


class IllegalTransitionError(ProtocolError):
    """Life-state change not allowed by the transition table."""

    def __init__(
        self,
        message: str,
        *,
        context: ErrorContext | None = None,
        from_state: str | None = None,
        to_state: str | None = None,
    ) -> None:
        super().__init__(message, context=context)
        self.from_state = from_state
        self.to_state = to_state


class NotAuthenticatedError(ProtocolError):
    """Operation requires an online, authenticated node."""


# net-sim


class SimulationError(SlcmError):
    """Discrete-event simulation failure."""


class InitiatorNotLegitimateError(SimulationError):
    """Only online legitimate nodes may launch a broadcast."""


# metrics-cli


class ConfigError(SlcmError):
    """Configuration validation or loading error."""

    def __init__(
        self,
        message: str,
        *,
        context: ErrorContext | None = None,
        diagnostics: dict[str, str] | None = None,
    ) -> None:
        super().__init__(message, context=context)
        self.diagnostics = dict(diagnostics or {})


class TraceCorruptError(SlcmError):
    """Malformed trace record."""

    def __init__(
        self,
        message: str,
        *,
        context: ErrorContext | None = None,
        line: int | None = None,
    ) -> None:
        super().__init__(message, context=context)
        self.line = line
