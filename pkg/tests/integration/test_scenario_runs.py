"""Integration tests running whole scenarios on the simulated network."""

from __future__ import annotations

from dataclasses import replace

import pytest

from config.models import BroadcastMode, ScenarioConfig
from core.experiments import compare_broadcast, zkp_bench
from core.graph import verify_cycle
from core.scenario import run_scenario
from core.serialization import TraceEvent, parse_trace

CHURN = ScenarioConfig(
    nodes=12,
    arena=(300.0, 300.0),
    duration=40.0,
    insert_prob=0.1,
    delete_prob=0.05,
    speed_range=(1.0, 5.0),
    seed=7,
)


@pytest.fixture(scope="module")
def churn_result():
    return run_scenario(CHURN)


@pytest.mark.integration
class TestScenarioRun:
    """Test one churning run end to end."""

    def test_same_seed_same_trace(self, churn_result):
        assert run_scenario(CHURN).trace_lines == churn_result.trace_lines

    def test_other_seed_other_trace(self, churn_result):
        assert run_scenario(replace(CHURN, seed=8)).trace_lines != churn_result.trace_lines

    def test_secret_stays_valid(self, churn_result):
        mgr = churn_result.manager
        assert verify_cycle(mgr.graph, mgr.cycle)
        assert mgr.graph.n >= CHURN.n_min

    def test_trace_parses_cleanly(self, churn_result):
        records = parse_trace(churn_result.trace_lines)
        assert len(records) == len(churn_result.trace_lines)
        assert records[0].event is TraceEvent.META
        assert [r.time for r in records] == sorted(r.time for r in records)

    def test_summary_is_sane(self, churn_result):
        summary = churn_result.summary
        assert summary.nodes == 12
        assert 0 <= summary.lost <= summary.generated
        assert summary.generated > 0
        assert sum(summary.traffic_share.values()) == pytest.approx(1.0)
        assert summary.share("pol") > 0.0
        assert summary.final_n == churn_result.manager.graph.n

    def test_trace_written(self, tmp_path):
        result = run_scenario(replace(CHURN, duration=10.0), out_dir=tmp_path)
        assert result.trace_path == tmp_path / "trace_n12_s7.tsv"
        assert result.trace_path.read_text(encoding="utf-8") == result.trace_text

    def test_flooding_mode_costs_more(self):
        static = replace(CHURN, insert_prob=0.0, delete_prob=0.0, speed_range=(0.0, 0.0))
        gri = run_scenario(static).summary
        flood = run_scenario(replace(static, broadcast_mode=BroadcastMode.FLOOD)).summary
        assert gri.generated + gri.forwarded < flood.generated + flood.forwarded


@pytest.mark.integration
class TestExperiments:
    """Test the comparison and benchmark drivers against their expected shape."""

    def test_gri_beats_flooding_over_seeds(self):
        cfg = ScenarioConfig(nodes=30, arena=(500.0, 500.0), speed_range=(0.0, 0.0))
        result = compare_broadcast(cfg, range(1, 6))
        assert all(s.ratio < 1.0 for s in result.per_seed)
        assert 0.0 < result.ratio < 1.0

    def test_honest_prover_always_accepted(self):
        assert zkp_bench(10, 30, strategy="honest").rate == 1.0

    @pytest.mark.slow
    @pytest.mark.timeout(600)
    @pytest.mark.parametrize("strategy", ["fake-graph", "isomorph", "coin-flip"])
    def test_cheater_acceptance_near_half_power(self, strategy):
        result = zkp_bench(3, 2000, strategy=strategy, seed=5)
        assert result.expected == pytest.approx(0.125)
        assert abs(result.rate - result.expected) < 0.04
