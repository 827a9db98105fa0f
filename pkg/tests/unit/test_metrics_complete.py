"""Tests for core.metrics against the default Prometheus registry."""

import pytest
from prometheus_client import REGISTRY

from core.metrics import Metrics


def _sample(name: str, labels: dict[str, str] | None = None) -> float:
    return REGISTRY.get_sample_value(name, labels or {}) or 0.0


@pytest.mark.unit
class TestMetrics:
    def test_record_packet(self):
        labels = {"kind": "gri-go", "fate": "delivered"}
        before = _sample("slcm_packets_total", labels)
        Metrics.record_packet("gri-go", "delivered")
        assert _sample("slcm_packets_total", labels) == before + 1

    def test_record_zkp_session(self):
        before = _sample("slcm_zkp_sessions_total", {"verdict": "rejected"})
        Metrics.record_zkp_session(False)
        assert _sample("slcm_zkp_sessions_total", {"verdict": "rejected"}) == before + 1

    def test_record_membership(self):
        labels = {"event": "insertion", "outcome": "aborted"}
        before = _sample("slcm_membership_events_total", labels)
        Metrics.record_membership("insertion", "aborted")
        assert _sample("slcm_membership_events_total", labels) == before + 1

    def test_record_transition(self):
        labels = {"from_state": "off", "to_state": "deleted"}
        before = _sample("slcm_state_transitions_total", labels)
        Metrics.record_transition("off", "deleted")
        assert _sample("slcm_state_transitions_total", labels) == before + 1

    def test_gauges(self):
        Metrics.record_graph(42)
        assert _sample("slcm_live_vertices") == 42
        Metrics.threshold_seconds.set(31.5)
        assert _sample("slcm_threshold_seconds") == 31.5

    def test_histograms_observe(self):
        before = _sample("slcm_roster_size_count", {"mode": "flood"})
        Metrics.roster_size.labels(mode="flood").observe(7)
        assert _sample("slcm_roster_size_count", {"mode": "flood"}) == before + 1

    def test_resample_counter_from_retry(self):
        from core.retry import RejectedSample, resampling

        calls = []

        def flaky():
            calls.append(1)
            if len(calls) < 3:
                raise RejectedSample("again")
            return "ok"

        before = _sample("slcm_resamples_total", {"sampler": "unit"})
        assert resampling(5, sampler="unit")(flaky) == "ok"
        assert _sample("slcm_resamples_total", {"sampler": "unit"}) == before + 2

    def test_resampling_gives_up(self):
        from core.retry import RejectedSample, resampling

        def never():
            raise RejectedSample("no")

        with pytest.raises(RejectedSample):
            resampling(3, sampler="unit-fail")(never)
