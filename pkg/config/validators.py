"""Input validation utilities."""

from __future__ import annotations

import re
from typing import Any

__all__ = ["parse_node_range", "parse_pair", "scenario_problems"]

_NODE_RANGE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*(?::\s*(\d+)\s*)?$")


def parse_pair(text: str) -> tuple[float, float]:
    """Parse ``"a,b"`` (or ``"a x b"``) into two floats."""
    parts = [p for p in re.split(r"[,x\s]+", text.strip()) if p]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def parse_node_range(text: str) -> list[int]:
    """Parse ``"10..100:10"`` into ``[10, 20, ..., 100]`` (step defaults to 1)."""
    match = _NODE_RANGE.match(text)
    if not match:
        raise ValueError(f"node range must look like 10..100:10, got {text!r}")
    start, stop = int(match.group(1)), int(match.group(2))
    step = int(match.group(3) or 1)
    if step < 1 or start > stop:
        raise ValueError(f"empty node range {text!r}")
    return list(range(start, stop + 1, step))


def _ordered(pair: tuple[float, float]) -> bool:
    return 0 <= pair[0] <= pair[1]


def scenario_problems(cfg: Any) -> dict[str, str]:
    """Field-by-field diagnostics for a scenario; empty when valid."""
    problems: dict[str, str] = {}

    if not 5 <= cfg.nodes <= 500:
        problems["nodes"] = f"must be in [5, 500], got {cfg.nodes}"
    if cfg.arena[0] <= 0 or cfg.arena[1] <= 0:
        problems["arena"] = f"width and height must be positive, got {cfg.arena}"
    if cfg.duration <= 0:
        problems["duration"] = "must be positive"
    for name in ("insert_prob", "delete_prob", "return_prob", "loss_prob"):
        value = getattr(cfg, name)
        if not 0.0 <= value <= 1.0:
            problems[name] = f"probability must be in [0, 1], got {value}"
    if not _ordered(cfg.speed_range):
        problems["speed_range"] = f"need 0 <= min <= max, got {cfg.speed_range}"
    if cfg.radio_range <= 0:
        problems["radio_range"] = "must be positive"
    if cfg.zkp_rounds < 1:
        problems["zkp_rounds"] = "need at least one round"
    if cfg.seed < 0:
        problems["seed"] = "must be non-negative"
    if cfg.epsilon <= 0:
        problems["epsilon"] = "must be positive"
    if cfg.n_min < 3:
        problems["n_min"] = "must be at least 3"
    elif cfg.nodes < cfg.n_min:
        problems["n_min"] = f"exceeds nodes ({cfg.nodes})"
    if cfg.group_size < 2:
        problems["group_size"] = "must be at least 2"
    for name in ("pol_period", "mean_offline", "mobility_step"):
        if getattr(cfg, name) <= 0:
            problems[name] = "must be positive"
    for name in ("hop_latency", "processing_delay", "proc_cost", "clock_skew"):
        if getattr(cfg, name) < 0:
            problems[name] = "cannot be negative"
    return problems
