"""Bounded resampling policies for seeded rejection sampling."""

from __future__ import annotations

from typing import Callable

import structlog
from tenacity import RetryCallState, Retrying, retry_if_exception_type, stop_after_attempt

from core.metrics import Metrics

__all__ = ["RejectedSample", "resampling"]

logger = structlog.get_logger(__name__)


class RejectedSample(Exception):
    """A random draw violated its constraint and must be redrawn."""


def _record_resample(sampler: str) -> Callable[[RetryCallState], None]:
    """Build an ``after`` hook counting rejected draws for ``sampler``."""

    def _after(retry_state: RetryCallState) -> None:
        if retry_state.outcome and retry_state.outcome.failed:
            Metrics.resamples_total.labels(sampler=sampler).inc()
            logger.debug("draw_rejected", sampler=sampler, attempt=retry_state.attempt_number)

    return _after


def resampling(attempts: int, *, sampler: str) -> Retrying:
    """Retry a sampler up to ``attempts`` times on :class:`RejectedSample`.

    No waiting between attempts: the generator state carries over, so the
    sequence of draws stays deterministic under a fixed seed. The last
    ``RejectedSample`` is re-raised when attempts run out.
    """
    return Retrying(
        reraise=True,
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(RejectedSample),
        after=_record_resample(sampler),
    )
