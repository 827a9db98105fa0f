from __future__ import annotations

import numpy as np
import pytest

from core.broadcast import flood_gather, gri_broadcast
from core.engine import Engine
from core.experiments import bench_secret
from core.graph import Permutation, complete_graph, generate_initial_cycle, verify_cycle
from core.radio import RadioModel, connected_placement
from core.serialization import canonical_graph_bytes
from core.summary import summarize
from core.zkp import commit, run_protocol

RADIO = RadioModel(range=150.0, width=600.0, height=600.0)


@pytest.fixture(scope="session")
def secret50():
    return bench_secret(50, 4)


@pytest.fixture(scope="session")
def layout40():
    return connected_placement(list(range(1, 41)), RADIO, np.random.default_rng(9))


@pytest.mark.benchmark(group="graph")
def test_complete_graph_100(benchmark):
    vertices = range(1, 101)
    hc = generate_initial_cycle([Permutation.random(vertices, np.random.default_rng(1))])

    g = benchmark(lambda: complete_graph(hc, 300, np.random.default_rng(2)))
    assert verify_cycle(g, hc)
    assert g.m == 300


@pytest.mark.benchmark(group="zkp")
def test_commit_graph(benchmark, secret50):
    g, _ = secret50
    payload = canonical_graph_bytes(g)
    digest = benchmark(commit, payload, bytes(16))
    assert digest == commit(payload, bytes(16))


@pytest.mark.benchmark(group="zkp")
def test_protocol_20_rounds(benchmark, secret50):
    g, hc = secret50
    transcript = benchmark(lambda: run_protocol((g, hc), g, 20, np.random.default_rng(0)))
    assert transcript.accepted


@pytest.mark.benchmark(group="broadcast")
def test_gri_40_nodes(benchmark, layout40):
    result = benchmark(lambda: gri_broadcast(Engine(RADIO, layout40, np.random.default_rng(0)), 1))
    assert result.roster == frozenset(range(2, 41))


@pytest.mark.benchmark(group="broadcast")
def test_flood_gather_40_nodes(benchmark, layout40):
    result = benchmark(lambda: flood_gather(Engine(RADIO, layout40, np.random.default_rng(0)), 1))
    assert result.roster == frozenset(range(2, 41))


@pytest.mark.benchmark(group="summary")
def test_summarize_trace(benchmark, layout40):
    engine = Engine(RADIO, layout40, np.random.default_rng(0))
    for initiator in range(1, 11):
        gri_broadcast(engine, initiator)
    lines = [record.to_line() for record in engine.trace]

    summary = benchmark(summarize, lines)
    assert summary.generated > 0
