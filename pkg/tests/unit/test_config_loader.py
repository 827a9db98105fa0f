"""Unit tests for scenario loading."""

from __future__ import annotations

from pathlib import Path

import pytest

from config.loader import SCENARIO_KEYS, load_scenario, parse_flat, scenario_from_mapping
from config.models import BroadcastMode
from core.exceptions import ConfigError


@pytest.mark.unit
class TestParseFlat:
    """Test the key = value reader."""

    def test_comments_and_blanks(self):
        text = "# scenario\n\nnodes = 30  # thirty\nseed=4\n"
        assert parse_flat(text) == {"nodes": "30", "seed": "4"}

    def test_missing_equals_reports_line(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_flat("nodes = 30\nseed 4\n")
        assert exc_info.value.context.line == 2
        assert "line 2" in exc_info.value.diagnostics


@pytest.mark.unit
class TestScenarioFromMapping:
    """Test coercion and diagnostics."""

    def test_coerces_strings(self):
        cfg = scenario_from_mapping(
            {"nodes": "12", "arena": "300,200", "broadcast_mode": "FLOOD", "duration": "60"}
        )
        assert cfg.nodes == 12
        assert cfg.arena == (300.0, 200.0)
        assert cfg.broadcast_mode is BroadcastMode.FLOOD
        assert cfg.duration == 60.0

    def test_nested_sizes(self):
        cfg = scenario_from_mapping({"sizes": {"header": 40, "salt": 32}})
        assert cfg.sizes.header == 40
        assert cfg.sizes.salt == 32
        assert cfg.sizes.edge == 4

    def test_dotted_sizes(self):
        assert scenario_from_mapping({"sizes.edge": "8"}).sizes.edge == 8

    def test_unknown_and_bad_keys_collected(self):
        with pytest.raises(ConfigError) as exc_info:
            scenario_from_mapping(
                {"nodez": 10, "nodes": "ten", "broadcast_mode": "carrier-pigeon"}
            )
        diagnostics = exc_info.value.diagnostics
        assert diagnostics["nodez"] == "unknown key"
        assert set(diagnostics) == {"nodez", "nodes", "broadcast_mode"}

    def test_fractional_integer_rejected(self):
        with pytest.raises(ConfigError) as exc_info:
            scenario_from_mapping({"nodes": 10.5})
        assert "nodes" in exc_info.value.diagnostics

    def test_range_problems_become_diagnostics(self):
        with pytest.raises(ConfigError) as exc_info:
            scenario_from_mapping({"nodes": 3, "radio_range": 0})
        diagnostics = exc_info.value.diagnostics
        assert "nodes" in diagnostics
        assert "radio_range" in diagnostics
        assert isinstance(exc_info.value.__cause__, ValueError)

    def test_every_field_is_a_key(self):
        assert {"nodes", "broadcast_mode", "clock_skew", "sizes.header"} <= SCENARIO_KEYS
        assert "sizes" not in SCENARIO_KEYS


@pytest.mark.unit
class TestLoadScenario:
    """Test loading from disk."""

    def test_flat_file(self, config_dir):
        path = config_dir / "small.cfg"
        path.write_text("nodes = 8\nseed = 2\nspeed_range = 0,0\n")
        cfg = load_scenario(path)
        assert (cfg.nodes, cfg.seed, cfg.speed_range) == (8, 2, (0.0, 0.0))

    def test_yaml_file(self, config_dir):
        path = config_dir / "s.yaml"
        path.write_text("nodes: 40\narena: [700, 700]\nsizes:\n  header: 20\n")
        cfg = load_scenario(path)
        assert cfg.nodes == 40
        assert cfg.arena == (700.0, 700.0)
        assert cfg.sizes.header == 20

    def test_empty_yaml_gives_defaults(self, config_dir):
        path = config_dir / "empty.yml"
        path.write_text("")
        assert load_scenario(path).nodes == 20

    def test_yaml_list_rejected(self, config_dir):
        path = config_dir / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_scenario(path)

    def test_broken_yaml(self, config_dir):
        path = config_dir / "broken.yaml"
        path.write_text("nodes: [1, 2\n")
        with pytest.raises(ConfigError) as exc_info:
            load_scenario(path)
        assert "yaml" in exc_info.value.diagnostics

    def test_missing_file(self, config_dir):
        with pytest.raises(ConfigError) as exc_info:
            load_scenario(config_dir / "absent.cfg")
        assert "path" in exc_info.value.diagnostics

    @pytest.mark.parametrize("name", ["default.cfg", "compare20.cfg", "steady100.yaml"])
    def test_shipped_scenarios_load(self, name):
        path = Path(__file__).resolve().parents[2] / "config" / "scenarios" / name
        assert load_scenario(path).nodes in (20, 100)
