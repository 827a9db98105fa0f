"""Scenario configuration."""

from config.loader import load_scenario
from config.models import BroadcastMode, MessageSizes, ScenarioConfig

__all__ = ["BroadcastMode", "MessageSizes", "ScenarioConfig", "load_scenario"]
