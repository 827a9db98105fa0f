"""Typed configuration models with strict immutability and validation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from enum import StrEnum

from config.validators import scenario_problems

__all__ = ["BroadcastMode", "MessageSizes", "ScenarioConfig"]


class BroadcastMode(StrEnum):
    """How rosters are gathered across the network."""

    GRI = "gri"
    FLOOD = "flood"


@dataclass(slots=True, frozen=True, kw_only=True)
class MessageSizes:
    """Byte sizes used for packet accounting.

    Attributes:
        header: Fixed header on every packet
        vertex_id: One vertex ID
        proof_entry: One proof of life (ID, timestamp, signature-equivalent)
        edge: One edge of a transmitted graph
        cycle_entry: One position of a transmitted cycle
        commitment: One hash commitment
        salt: One commitment salt
        challenge: One challenge bit with framing
    """

    header: int = 32
    vertex_id: int = 4
    proof_entry: int = 40
    edge: int = 4
    cycle_entry: int = 2
    commitment: int = 32
    salt: int = 16
    challenge: int = 1

    def __post_init__(self) -> None:
        """Validate sizes."""
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"sizes.{f.name}: cannot be negative")


@dataclass(slots=True, frozen=True, kw_only=True)
class ScenarioConfig:
    """One simulation scenario.

    Times are simulated seconds, distances meters, speeds m/s.

    Example:
        ScenarioConfig(nodes=20, arena=(500.0, 500.0), radio_range=150.0, seed=7)
    """

    nodes: int = 20
    arena: tuple[float, float] = (500.0, 500.0)
    duration: float = 120.0
    insert_prob: float = 0.05
    delete_prob: float = 0.05
    speed_range: tuple[float, float] = (2.0, 15.0)
    radio_range: float = 150.0
    broadcast_mode: BroadcastMode = BroadcastMode.GRI
    zkp_rounds: int = 20
    seed: int = 1
    epsilon: float = 5.0
    n_min: int = 5

    group_size: int = 6
    pol_period: float = 10.0
    mean_offline: float = 20.0
    return_prob: float = 0.9
    hop_latency: float = 0.010
    processing_delay: float = 0.001
    loss_prob: float = 0.0
    proc_cost: float = 0.001
    mobility_step: float = 1.0
    clock_skew: float = 0.0
    sizes: MessageSizes = field(default_factory=MessageSizes)

    def __post_init__(self) -> None:
        """Validate scenario configuration."""
        object.__setattr__(self, "arena", tuple(float(x) for x in self.arena))
        object.__setattr__(self, "speed_range", tuple(float(x) for x in self.speed_range))
        object.__setattr__(self, "broadcast_mode", BroadcastMode(self.broadcast_mode))
        if len(self.arena) != 2 or len(self.speed_range) != 2:
            raise ValueError("arena and speed_range need exactly two values")
        problems = scenario_problems(self)
        if problems:
            raise ValueError("; ".join(f"{k}: {v}" for k, v in sorted(problems.items())))

    @property
    def initial_threshold(self) -> float:
        """Starting T, three proof-of-life periods."""
        return 3.0 * self.pol_period

    @property
    def initial_edges(self) -> int:
        """Edge count m of G_0 for the configured group size.

        The group size is capped at n-1 and lowered by one if n*k is odd.
        """
        k = min(self.group_size, self.nodes - 1)
        if (self.nodes * k) % 2:
            k -= 1
        return self.nodes * max(k, 2) // 2

    def scaled(self, nodes: int) -> ScenarioConfig:
        """Same density with ``nodes`` nodes: arena area grows with node count."""
        factor = (nodes / self.nodes) ** 0.5
        return replace(self, nodes=nodes, arena=(self.arena[0] * factor, self.arena[1] * factor))
