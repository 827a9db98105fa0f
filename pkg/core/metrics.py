"""Prometheus metrics for observability."""

from __future__ import annotations

from prometheus_client import Counter, Gauge, Histogram, Info

__all__ = ["Metrics"]


class Metrics:
    """Centralized metrics collection."""

    __slots__ = ()

    # Counters
    packets_total = Counter(
        "slcm_packets_total",
        "Radio transmissions by packet kind and fate",
        ["kind", "fate"],
    )

    zkp_sessions_total = Counter(
        "slcm_zkp_sessions_total",
        "Zero-knowledge sessions by verdict",
        ["verdict"],
    )

    membership_events_total = Counter(
        "slcm_membership_events_total",
        "Membership events (insertion, deletion, admission, roster)",
        ["event", "outcome"],
    )

    state_transitions_total = Counter(
        "slcm_state_transitions_total",
        "Life-state transitions",
        ["from_state", "to_state"],
    )

    resamples_total = Counter(
        "slcm_resamples_total",
        "Rejected random draws that were retried",
        ["sampler"],
    )

    # Histograms
    roster_size = Histogram(
        "slcm_roster_size",
        "Nodes gathered per broadcast",
        ["mode"],
        buckets=(1, 5, 10, 20, 50, 100, 200, 500),
    )

    scenario_duration_seconds = Histogram(
        "slcm_scenario_duration_seconds",
        "Wall time spent per scenario run",
        buckets=(0.1, 0.5, 1, 5, 10, 30, 60, 300),
    )

    # Gauges
    live_vertices = Gauge(
        "slcm_live_vertices",
        "Vertices in the current network graph",
    )

    threshold_seconds = Gauge(
        "slcm_threshold_seconds",
        "Current offline threshold T",
    )

    # Info
    build_info = Info(
        "slcm_build",
        "Build information",
    )

    @classmethod
    def record_packet(cls, kind: str, fate: str) -> None:
        """Record one transmission outcome."""
        cls.packets_total.labels(kind=kind, fate=fate).inc()

    @classmethod
    def record_zkp_session(cls, accepted: bool) -> None:
        """Record a finished access-control proof."""
        cls.zkp_sessions_total.labels(verdict="accepted" if accepted else "rejected").inc()

    @classmethod
    def record_membership(cls, event: str, outcome: str) -> None:
        """Record a membership event."""
        cls.membership_events_total.labels(event=event, outcome=outcome).inc()

    @classmethod
    def record_transition(cls, from_state: str, to_state: str) -> None:
        """Record a life-state change."""
        cls.state_transitions_total.labels(from_state=from_state, to_state=to_state).inc()

    @classmethod
    def record_graph(cls, vertices: int) -> None:
        """Publish the live vertex count."""
        cls.live_vertices.set(vertices)
