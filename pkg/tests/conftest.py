"""Shared test fixtures and configuration."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from config.models import ScenarioConfig
from core.engine import Engine
from core.graph import (
    HamiltonianCycle,
    NetworkGraph,
    Permutation,
    complete_graph,
    generate_initial_cycle,
)
from core.lifecycle import LifeCycleManager
from core.radio import RadioModel


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests")
    config.addinivalue_line("markers", "integration: Integration tests")
    config.addinivalue_line("markers", "property: Property-based tests")
    config.addinivalue_line("markers", "slow: Slow running tests")
    config.addinivalue_line("markers", "benchmark: Performance benchmarks")


@pytest.fixture
def rng():
    """Fresh seeded generator per test."""
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    """Triangle graph with its only cycle."""
    g = NetworkGraph(vertices=frozenset({1, 2, 3}), edges=frozenset({(1, 2), (2, 3), (1, 3)}))
    return g, HamiltonianCycle((1, 2, 3))


@pytest.fixture
def square():
    """4-cycle 1-2-3-4."""
    g = NetworkGraph(
        vertices=frozenset({1, 2, 3, 4}), edges=frozenset({(1, 2), (2, 3), (3, 4), (1, 4)})
    )
    return g, HamiltonianCycle((1, 2, 3, 4))


@pytest.fixture
def secret10():
    """6-regular graph on 10 vertices around a planted cycle."""
    hc = generate_initial_cycle([Permutation.random(range(1, 11), np.random.default_rng(7))])
    return complete_graph(hc, 30, np.random.default_rng(8)), hc


@pytest.fixture
def small_config():
    """Ten static nodes, no churn, short run."""
    return ScenarioConfig(
        nodes=10,
        arena=(300.0, 300.0),
        duration=30.0,
        insert_prob=0.0,
        delete_prob=0.0,
        speed_range=(0.0, 0.0),
        radio_range=150.0,
        seed=3,
    )


@pytest.fixture
def manager(small_config):
    """Bootstrapped life-cycle manager over devices 1..10."""
    return LifeCycleManager.bootstrap(small_config)


@pytest.fixture
def line_engine():
    """Three devices on a line, each reaching only its direct neighbours."""
    radio = RadioModel(range=150.0, width=400.0, height=100.0)
    positions = {1: (0.0, 50.0), 2: (100.0, 50.0), 3: (200.0, 50.0)}
    return Engine(radio, positions, np.random.default_rng(0))


@pytest.fixture
def config_dir(tmp_path: Path) -> Path:
    """Temporary directory for scenario files."""
    directory = tmp_path / "config"
    directory.mkdir()
    return directory
