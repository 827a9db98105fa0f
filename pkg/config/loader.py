"""Scenario loading from flat ``key = value`` files or YAML."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import fields
from pathlib import Path
from typing import Any

import structlog
import yaml

from config.models import BroadcastMode, MessageSizes, ScenarioConfig
from config.validators import parse_pair
from core.exceptions import ConfigError, ErrorContext

__all__ = ["SCENARIO_KEYS", "load_scenario", "parse_flat", "scenario_from_mapping"]

logger = structlog.get_logger(__name__)

_INT_KEYS = frozenset({"nodes", "zkp_rounds", "seed", "n_min", "group_size"})
_PAIR_KEYS = frozenset({"arena", "speed_range"})
_SIZE_KEYS = frozenset(f.name for f in fields(MessageSizes))

SCENARIO_KEYS = frozenset(f.name for f in fields(ScenarioConfig) if f.name != "sizes") | {
    f"sizes.{k}" for k in _SIZE_KEYS
}


def _to_pair(value: Any) -> tuple[float, float]:
    if isinstance(value, str):
        return parse_pair(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return float(value[0]), float(value[1])
    raise ValueError(f"expected two numbers, got {value!r}")


def _to_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _coercer(key: str) -> Callable[[Any], Any]:
    if key in _INT_KEYS or key.startswith("sizes."):
        return _to_int
    if key in _PAIR_KEYS:
        return _to_pair
    if key == "broadcast_mode":
        return lambda v: BroadcastMode(str(v).strip().lower())
    return float


def parse_flat(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped.

    Raises:
        ConfigError: a line without ``=``, with its 1-based number
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(
                f"Line {lineno}: expected key = value",
                context=ErrorContext(line=lineno),
                diagnostics={f"line {lineno}": raw.strip()},
            )
        values[key.strip()] = value.strip()
    return values


def _flatten(data: Mapping[str, Any]) -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in data.items():
        if key == "sizes" and isinstance(value, Mapping):
            flat.update({f"sizes.{k}": v for k, v in value.items()})
        else:
            flat[str(key)] = value
    return flat


def scenario_from_mapping(data: Mapping[str, Any]) -> ScenarioConfig:
    """Build a validated scenario, collecting every problem before failing.

    Raises:
        ConfigError: unknown keys or bad values; ``diagnostics`` maps each
            offending field to its message
    """
    diagnostics: dict[str, str] = {}
    top: dict[str, Any] = {}
    sizes: dict[str, Any] = {}
    for key, raw in sorted(_flatten(data).items()):
        if key not in SCENARIO_KEYS:
            diagnostics[key] = "unknown key"
            continue
        try:
            value = _coercer(key)(raw)
        except (TypeError, ValueError) as e:
            diagnostics[key] = str(e)
            continue
        if key.startswith("sizes."):
            sizes[key.removeprefix("sizes.")] = value
        else:
            top[key] = value
    if diagnostics:
        raise ConfigError(_summary(diagnostics), diagnostics=diagnostics)

    try:
        return ScenarioConfig(**top, sizes=MessageSizes(**sizes))
    except ValueError as e:
        diagnostics = _split_problems(str(e))
        raise ConfigError(_summary(diagnostics), diagnostics=diagnostics) from e


def _split_problems(message: str) -> dict[str, str]:
    problems: dict[str, str] = {}
    for part in message.split("; "):
        key, sep, text = part.partition(": ")
        problems[key if sep else "config"] = text if sep else part
    return problems


def _summary(diagnostics: Mapping[str, str]) -> str:
    return "Invalid scenario: " + "; ".join(f"{k}: {v}" for k, v in sorted(diagnostics.items()))


def load_scenario(path: Path) -> ScenarioConfig:
    """Load a scenario file; ``.yaml``/``.yml`` are YAML, anything else is flat text.

    Raises:
        ConfigError: unreadable file, bad syntax or invalid values
    """
    try:
        content = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(
            f"Failed to read config from {path}", diagnostics={"path": str(e)}
        ) from e

    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(content)
        except yaml.YAMLError as e:
            raise ConfigError(
                f"Failed to parse YAML in {path}", diagnostics={"yaml": str(e)}
            ) from e
        if data is None:
            data = {}
        if not isinstance(data, Mapping):
            raise ConfigError(
                "Scenario YAML must be a mapping", diagnostics={"yaml": type(data).__name__}
            )
    else:
        data = parse_flat(content)

    cfg = scenario_from_mapping(data)
    logger.debug("scenario_loaded", path=str(path), nodes=cfg.nodes, seed=cfg.seed)
    return cfg
