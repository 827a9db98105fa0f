"""Batch experiments behind the command line: sweeps, broadcast comparison, ZKP rates."""

from __future__ import annotations

import threading
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, replace
from enum import StrEnum
from pathlib import Path

import structlog

from config.models import ScenarioConfig
from core.broadcast import flood_gather, gri_broadcast
from core.engine import Engine
from core.exceptions import ConfigError
from core.graph import (
    HamiltonianCycle,
    NetworkGraph,
    Permutation,
    complete_graph,
    generate_initial_cycle,
)
from core.metrics import Metrics
from core.radio import RadioModel, connected_placement
from core.rng import derive_rng
from core.scenario import ScenarioResult, run_scenario
from core.summary import RunSummary
from core.zkp import CheatStrategy, run_protocol

__all__ = [
    "BenchStrategy",
    "BroadcastComparison",
    "SeedComparison",
    "ZkpBenchResult",
    "bench_secret",
    "compare_broadcast",
    "run_sweep",
    "timed_run",
    "zkp_bench",
]

logger = structlog.get_logger(__name__)


def timed_run(
    cfg: ScenarioConfig,
    *,
    out_dir: Path | None = None,
    cancel: threading.Event | None = None,
) -> ScenarioResult:
    """``run_scenario`` with its wall time recorded in the duration histogram."""
    with structlog.contextvars.bound_contextvars(nodes=cfg.nodes, seed=cfg.seed):
        start = time.perf_counter()
        result = run_scenario(cfg, out_dir=out_dir, cancel=cancel)
        elapsed = time.perf_counter() - start
        Metrics.scenario_duration_seconds.observe(elapsed)
        logger.info(
            "scenario_done", generated=result.summary.generated, seconds=round(elapsed, 3)
        )
    return result


def run_sweep(
    base: ScenarioConfig,
    node_counts: Sequence[int],
    seeds: Sequence[int],
    *,
    out_dir: Path | None = None,
    max_workers: int = 4,
    cancel: threading.Event | None = None,
) -> list[RunSummary]:
    """Constant-density sweep, one engine per worker.

    Rows come back ordered by (nodes, seed) whatever order workers finish in.
    """
    configs = [replace(base.scaled(n), seed=s) for n in node_counts for s in seeds]
    results: dict[tuple[int, int], RunSummary] = {}
    workers = max(1, min(max_workers, len(configs)))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(timed_run, cfg, out_dir=out_dir, cancel=cancel): (cfg.nodes, cfg.seed)
            for cfg in configs
        }
        for future in as_completed(futures):
            if cancel is not None and cancel.is_set():
                logger.warning("sweep_cancelled", finished=len(results), total=len(configs))
                executor.shutdown(wait=False, cancel_futures=True)
                break
            results[futures[future]] = future.result().summary
    return [results[key] for key in sorted(results)]


@dataclass(slots=True, frozen=True)
class SeedComparison:
    seed: int
    gri: int
    flood: int
    gri_go: int

    @property
    def ratio(self) -> float:
        return self.gri / self.flood if self.flood else 0.0


@dataclass(slots=True, frozen=True)
class BroadcastComparison:
    """Transmission totals of GRI against the flooding gather, summed over seeds."""

    per_seed: tuple[SeedComparison, ...]

    @property
    def gri(self) -> int:
        return sum(s.gri for s in self.per_seed)

    @property
    def flood(self) -> int:
        return sum(s.flood for s in self.per_seed)

    @property
    def ratio(self) -> float:
        return self.gri / self.flood if self.flood else 0.0

    def report(self) -> str:
        return f"gri={self.gri} flood={self.flood} ratio={self.ratio:.4f}"


def _compare_one(cfg: ScenarioConfig, seed: int) -> SeedComparison:
    radio = RadioModel(range=cfg.radio_range, width=cfg.arena[0], height=cfg.arena[1])
    ids = list(range(1, cfg.nodes + 1))
    positions = connected_placement(ids, radio, derive_rng(seed, "placement"))
    engines = [
        Engine(
            radio,
            positions,
            derive_rng(seed, "radio"),
            hop_latency=cfg.hop_latency,
            processing_delay=cfg.processing_delay,
            loss_prob=cfg.loss_prob,
        )
        for _ in range(2)
    ]
    gri = gri_broadcast(engines[0], ids[0], sizes=cfg.sizes)
    flood = flood_gather(engines[1], ids[0], sizes=cfg.sizes)
    return SeedComparison(seed=seed, gri=gri.total, flood=flood.total, gri_go=gri.packets_go)


def compare_broadcast(cfg: ScenarioConfig, seeds: Sequence[int]) -> BroadcastComparison:
    """Gather the same roster on the same topologies with both broadcasts.

    Raises:
        SimulationError: no connected placement for some seed
    """
    per_seed = tuple(_compare_one(cfg, s) for s in seeds)
    result = BroadcastComparison(per_seed)
    logger.info("broadcast_compared", seeds=len(per_seed), ratio=round(result.ratio, 4))
    return result


class BenchStrategy(StrEnum):
    HONEST = "honest"
    FAKE_GRAPH = CheatStrategy.FAKE_GRAPH.value
    ISOMORPH = CheatStrategy.ISOMORPH.value
    COIN_FLIP = CheatStrategy.COIN_FLIP.value


@dataclass(slots=True, frozen=True)
class ZkpBenchResult:
    strategy: BenchStrategy
    rounds: int
    trials: int
    accepted: int

    @property
    def rate(self) -> float:
        return self.accepted / self.trials if self.trials else 0.0

    @property
    def expected(self) -> float:
        return 1.0 if self.strategy is BenchStrategy.HONEST else 2.0**-self.rounds

    def report(self) -> str:
        return (
            f"strategy={self.strategy.value} rounds={self.rounds} trials={self.trials} "
            f"accepted={self.accepted} rate={self.rate:.6f} expected={self.expected:.6f}"
        )


def bench_secret(nodes: int, seed: int) -> tuple[NetworkGraph, HamiltonianCycle]:
    """A 4-regular (or cycle-only for tiny n) secret over vertices 1..nodes."""
    vertices = range(1, nodes + 1)
    hc = generate_initial_cycle([Permutation.random(vertices, derive_rng(seed, "bench-cycle"))])
    degree = 4 if nodes >= 6 else 2
    return complete_graph(hc, nodes * degree // 2, derive_rng(seed, "bench-graph")), hc


def zkp_bench(
    rounds: int,
    trials: int,
    *,
    strategy: BenchStrategy | str = BenchStrategy.COIN_FLIP,
    nodes: int = 10,
    seed: int = 1,
) -> ZkpBenchResult:
    """Acceptance rate of ``trials`` independent sessions of ``rounds`` rounds.

    Raises:
        ConfigError: fewer than 4 nodes or no trials
    """
    if trials < 1:
        raise ConfigError(
            f"zkp-bench needs at least 1 trial, got {trials}",
            diagnostics={"trials": "must be at least 1"},
        )
    if nodes < 4:
        # Every vertex ordering of a triangle is a Hamiltonian cycle; blind provers cannot fail.
        raise ConfigError(
            f"zkp-bench needs at least 4 nodes, got {nodes}",
            diagnostics={"nodes": "must be at least 4"},
        )
    strategy = BenchStrategy(strategy)
    g, hc = bench_secret(nodes, seed)
    rng = derive_rng(seed, f"bench-{strategy.value}")
    honest = strategy is BenchStrategy.HONEST
    cheat = CheatStrategy.COIN_FLIP if honest else CheatStrategy(strategy.value)
    accepted = 0
    for _ in range(trials):
        transcript = run_protocol(
            (g, hc) if honest else None, g, rounds, rng, strategy=cheat, stop_on_failure=True
        )
        accepted += transcript.accepted
    result = ZkpBenchResult(strategy, rounds, trials, accepted)
    logger.info("zkp_bench", strategy=strategy.value, rounds=rounds, rate=round(result.rate, 6))
    return result
