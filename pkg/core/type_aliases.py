"""Type aliases and NewTypes for domain modeling."""

from __future__ import annotations

from typing import NewType, TypeAlias

# Graph-level identities
VertexId: TypeAlias = int
Edge: TypeAlias = tuple[int, int]
Stage: TypeAlias = int

# Simulation-level identities
DeviceId: TypeAlias = int
PacketId: TypeAlias = int
Seconds: TypeAlias = float
Position: TypeAlias = tuple[float, float]

# Channel label carried by every packet (pol, zkp, insertion, ...)
Channel = NewType("Channel", str)
