"""Structured logging setup for the command line."""

from __future__ import annotations

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, cast

import structlog

from core.serialization import dumps, to_jsonable

__all__ = ["configure_logging", "scenario_context"]


def _render_json(event: Any, **_: Any) -> str:
    # Events carry vertex sets and numpy scalars; route them through the trace codec.
    return dumps(to_jsonable(event)).decode("utf-8")


def configure_logging(
    level: str = "INFO",
    log_file: Path | None = None,
    json_logs: bool = False,
) -> structlog.stdlib.BoundLogger:
    """Configure structlog on top of stdlib logging.

    Log lines go to stderr so reports printed on stdout stay parseable.

    Args:
        level: DEBUG, INFO, WARNING or ERROR
        log_file: Also write here
        json_logs: One JSON object per line
    """
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        format="%(message)s",
        level=getattr(logging, level.upper()),
        handlers=handlers,
        force=True,
    )

    renderer: structlog.types.Processor = (
        structlog.processors.JSONRenderer(serializer=_render_json)
        if json_logs
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
    return cast(structlog.stdlib.BoundLogger, structlog.get_logger("slcm"))


@contextmanager
def scenario_context(command: str, **fields: object) -> Iterator[None]:
    """Tag every log line emitted inside the block with the subcommand and ``fields``."""
    with structlog.contextvars.bound_contextvars(command=command, **fields):
        yield
