"""Unit tests for configuration models."""

from __future__ import annotations

import pytest

from config.models import BroadcastMode, MessageSizes, ScenarioConfig
from config.validators import parse_node_range, parse_pair


class TestMessageSizes:
    """Test MessageSizes validation."""

    def test_defaults(self):
        """Test default byte sizes."""
        sizes = MessageSizes()
        assert sizes.header == 32
        assert sizes.proof_entry == 40
        assert sizes.salt == 16

    def test_negative_size_raises(self):
        """Test negative sizes raise error."""
        with pytest.raises(ValueError, match="sizes.edge"):
            MessageSizes(edge=-1)

    def test_immutable(self):
        """Test sizes cannot be mutated."""
        sizes = MessageSizes()
        with pytest.raises(AttributeError):
            sizes.header = 64  # type: ignore[misc]


class TestScenarioConfig:
    """Test ScenarioConfig validation."""

    def test_defaults(self):
        """Test default scenario."""
        cfg = ScenarioConfig()
        assert cfg.nodes == 20
        assert cfg.broadcast_mode is BroadcastMode.GRI
        assert cfg.zkp_rounds == 20
        assert cfg.initial_threshold == pytest.approx(30.0)

    def test_mode_from_string(self):
        """Test broadcast mode given as plain text."""
        cfg = ScenarioConfig(broadcast_mode="flood")  # type: ignore[arg-type]
        assert cfg.broadcast_mode is BroadcastMode.FLOOD

    def test_lists_become_tuples(self):
        """Test arena and speed range normalise to float tuples."""
        cfg = ScenarioConfig(arena=[400, 300], speed_range=[0, 5])  # type: ignore[arg-type]
        assert cfg.arena == (400.0, 300.0)
        assert cfg.speed_range == (0.0, 5.0)

    @pytest.mark.parametrize(
        ("kwargs", "field"),
        [
            ({"nodes": 4}, "nodes"),
            ({"nodes": 501}, "nodes"),
            ({"insert_prob": 1.5}, "insert_prob"),
            ({"speed_range": (5.0, 2.0)}, "speed_range"),
            ({"radio_range": 0.0}, "radio_range"),
            ({"zkp_rounds": 0}, "zkp_rounds"),
            ({"epsilon": 0.0}, "epsilon"),
            ({"n_min": 2}, "n_min"),
            ({"nodes": 6, "n_min": 7}, "n_min"),
            ({"pol_period": 0.0}, "pol_period"),
            ({"clock_skew": -1.0}, "clock_skew"),
        ],
    )
    def test_invalid_field_raises(self, kwargs, field):
        """Test each invalid field is named in the error."""
        with pytest.raises(ValueError, match=field):
            ScenarioConfig(**kwargs)

    def test_all_problems_reported(self):
        """Test several problems are reported together."""
        with pytest.raises(ValueError) as exc_info:
            ScenarioConfig(nodes=2, duration=-1.0)
        assert "nodes" in str(exc_info.value)
        assert "duration" in str(exc_info.value)

    @pytest.mark.parametrize(("nodes", "edges"), [(10, 30), (7, 21), (5, 10), (9, 27)])
    def test_initial_edges(self, nodes, edges):
        """Test edge count of the founding graph."""
        assert ScenarioConfig(nodes=nodes, n_min=5).initial_edges == edges

    def test_initial_edges_odd_product(self):
        """Test group size drops by one when n*k is odd."""
        assert ScenarioConfig(nodes=9, group_size=5, n_min=5).initial_edges == 18

    def test_scaled_keeps_density(self):
        """Test scaling keeps nodes per square meter."""
        base = ScenarioConfig(nodes=20, arena=(500.0, 500.0))
        bigger = base.scaled(80)
        assert bigger.nodes == 80
        assert bigger.arena == pytest.approx((1000.0, 1000.0))
        density = base.nodes / (base.arena[0] * base.arena[1])
        assert bigger.nodes / (bigger.arena[0] * bigger.arena[1]) == pytest.approx(density)


class TestValidators:
    """Test text parsers."""

    @pytest.mark.parametrize("text", ["500,400", "500 x 400", " 500 , 400 "])
    def test_parse_pair(self, text):
        """Test accepted pair spellings."""
        assert parse_pair(text) == (500.0, 400.0)

    def test_parse_pair_rejects_three(self):
        """Test three numbers are rejected."""
        with pytest.raises(ValueError):
            parse_pair("1,2,3")

    def test_node_range(self):
        """Test stepped node ranges."""
        assert parse_node_range("10..50:10") == [10, 20, 30, 40, 50]
        assert parse_node_range("3..5") == [3, 4, 5]

    @pytest.mark.parametrize("text", ["50..10", "10-50", "10..50:0"])
    def test_bad_node_range(self, text):
        """Test malformed ranges."""
        with pytest.raises(ValueError):
            parse_node_range(text)
