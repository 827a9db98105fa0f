"""Cooperative cancellation on SIGINT/SIGTERM."""

from __future__ import annotations

import signal
from threading import Event
from types import FrameType

import structlog

__all__ = ["setup_signal_handlers", "shutdown_event"]

logger = structlog.get_logger(__name__)

# Scenario loops poll this between mobility ticks; sweeps stop handing out work.
shutdown_event = Event()


def _request_shutdown(signum: int, frame: FrameType | None) -> None:
    if shutdown_event.is_set():
        # Second signal: give up on the partial trace.
        raise KeyboardInterrupt
    logger.warning("shutdown_requested", signal=signal.Signals(signum).name)
    shutdown_event.set()


def setup_signal_handlers() -> None:
    """Install the handlers; only valid from the main thread."""
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, _request_shutdown)
