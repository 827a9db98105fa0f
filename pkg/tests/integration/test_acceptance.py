"""Acceptance runs: broadcast efficiency, proof rates, cycle upkeep, growth and shares.

Every check has a reduced default run; the full-size statistical runs are marked slow.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from config.loader import load_scenario
from config.models import ScenarioConfig
from core.experiments import compare_broadcast, run_sweep, zkp_bench
from core.graph import (
    Permutation,
    brute_force_find_cycle,
    complete_graph,
    delete_vertex,
    generate_initial_cycle,
    insert_vertex,
    verify_cycle,
)
from core.scenario import run_scenario
from core.summary import write_summary_csv

SCENARIOS = Path(__file__).resolve().parents[2] / "config" / "scenarios"


def _r_squared(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    residual = ((y - (slope * x + intercept)) ** 2).sum()
    return float(slope), float(1 - residual / ((y - y.mean()) ** 2).sum())


def _three_sigma(rate: float, p: float, trials: int) -> bool:
    return abs(rate - p) <= 3 * np.sqrt(p * (1 - p) / trials)


@pytest.mark.integration
class TestBroadcastEfficiency:
    """GRI against the flooding gather on 20-node random topologies."""

    def test_ratio_band(self):
        cfg = load_scenario(SCENARIOS / "compare20.cfg")
        result = compare_broadcast(cfg, range(1, 31))
        assert all(s.gri_go <= s.flood for s in result.per_seed)
        ratios = [s.ratio for s in result.per_seed]
        assert 0.25 <= float(np.mean(ratios)) <= 0.75


@pytest.mark.integration
class TestProofRates:
    """Completeness and soundness of the access-control proof."""

    def test_completeness(self):
        assert zkp_bench(20, 200, strategy="honest").accepted == 200

    @pytest.mark.parametrize("rounds", [1, 2, 3])
    def test_soundness(self, rounds):
        trials = 4000
        result = zkp_bench(rounds, trials, strategy="coin-flip", seed=rounds)
        assert _three_sigma(result.rate, 2.0**-rounds, trials)

    @pytest.mark.slow
    @pytest.mark.timeout(600)
    def test_completeness_full(self):
        assert zkp_bench(20, 10_000, strategy="honest").accepted == 10_000

    @pytest.mark.slow
    @pytest.mark.timeout(900)
    @pytest.mark.parametrize("strategy", ["fake-graph", "isomorph", "coin-flip"])
    @pytest.mark.parametrize("rounds", range(1, 9))
    def test_soundness_full(self, strategy, rounds):
        trials = 100_000
        result = zkp_bench(rounds, trials, strategy=strategy, seed=rounds)
        assert _three_sigma(result.rate, 2.0**-rounds, trials)


@pytest.mark.integration
class TestCycleUpkeep:
    """A thousand interleaved insertions and deletions between 4 and 12 vertices."""

    def test_interleaved_churn(self):
        rng = np.random.default_rng(2024)
        hc = generate_initial_cycle([Permutation.random(range(1, 9), rng)])
        g = complete_graph(hc, 16, rng)
        for step in range(1, 1001):
            grow = g.n <= 4 or (g.n < 12 and rng.random() < 0.5)
            if grow:
                new_id = min(set(range(1, 14)) - g.vertices)
                size = min(4, 2 + g.n // 3)
                g, hc, _ = insert_vertex(g, hc, new_id, rng, group_size=size)
            else:
                victim = sorted(g.vertices)[int(rng.integers(g.n))]
                g, hc = delete_vertex(g, hc, victim)
            assert verify_cycle(g, hc), step
            assert 4 <= g.n <= 12
            if step % 100 == 0:
                found = brute_force_find_cycle(g)
                assert found is not None and verify_cycle(g, found)


@pytest.mark.integration
class TestGrowthAndShares:
    """Traffic trends over node counts and the steady-state byte split."""

    @staticmethod
    def _sweep(nodes, seeds, duration):
        base = ScenarioConfig(nodes=10, arena=(300.0, 300.0), duration=duration)
        rows = run_sweep(base, nodes, seeds, max_workers=4)
        x = np.array([r.nodes for r in rows], dtype=float)
        generated = np.array([r.generated for r in rows], dtype=float)
        overhead = np.array([r.forwarded + r.lost for r in rows], dtype=float)
        return x, generated, overhead

    def test_generated_grows_with_nodes(self):
        x, generated, _ = self._sweep([10, 20, 30], [1, 2], 40.0)
        means = [generated[x == n].mean() for n in (10, 20, 30)]
        assert means[0] < means[1] < means[2]

    @pytest.mark.slow
    @pytest.mark.timeout(3600)
    def test_linear_growth_full(self):
        x, generated, overhead = self._sweep(list(range(10, 101, 10)), [1, 2, 3, 4, 5], 120.0)
        slope, r_squared = _r_squared(x, generated)
        assert slope > 0
        assert r_squared > 0.9
        overhead_slope, _ = _r_squared(x, overhead)
        assert overhead_slope / overhead.mean() < slope / generated.mean()

    def test_proof_of_life_dominates(self):
        cfg = ScenarioConfig(nodes=30, arena=(612.0, 612.0), duration=150.0, seed=3)
        shares = run_scenario(cfg).summary.traffic_share
        assert max(shares, key=shares.get) == "pol"

    @pytest.mark.slow
    @pytest.mark.timeout(3600)
    def test_steady_state_shares_full(self):
        shares = run_scenario(load_scenario(SCENARIOS / "steady100.yaml")).summary.traffic_share
        assert max(shares, key=shares.get) == "pol"
        assert shares.get("zkp", 0.0) < 0.2


@pytest.mark.integration
class TestDeterminism:
    """Same scenario and seed give byte-identical output files."""

    def test_trace_and_csv_bytes(self, tmp_path):
        cfg = replace(load_scenario(SCENARIOS / "default.cfg"), nodes=12, duration=40.0)
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = run_scenario(cfg, out_dir=out)
            csv = write_summary_csv([result.summary], out / "summary.csv")
            outputs.append((result.trace_path.read_bytes(), csv.read_bytes()))
        assert outputs[0] == outputs[1]
