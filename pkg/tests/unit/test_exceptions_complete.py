"""Unit tests for core.exceptions."""

import pytest

from core.exceptions import (
    ConfigError,
    ErrorContext,
    GraphError,
    IllegalTransitionError,
    InsufficientNonAdjacentCandidatesError,
    NetworkTooSmallError,
    ProtocolError,
    RoundCountError,
    SaltTooShortError,
    SlcmError,
    StaleBeyondFifoError,
    TraceCorruptError,
    ZkpError,
)


@pytest.mark.unit
class TestExceptions:
    def test_hierarchy(self):
        """Every domain error derives from SlcmError through its family."""
        assert issubclass(NetworkTooSmallError, GraphError)
        assert issubclass(SaltTooShortError, ZkpError)
        assert issubclass(RoundCountError, ZkpError)
        assert issubclass(StaleBeyondFifoError, ProtocolError)
        for cls in (GraphError, ZkpError, ProtocolError, ConfigError, TraceCorruptError):
            assert issubclass(cls, SlcmError)

    def test_default_context(self):
        err = SlcmError("boom")
        assert str(err) == "boom"
        assert err.context == ErrorContext()

    def test_context_is_kept(self):
        ctx = ErrorContext(stage=3, vertex=7, extra={"target": 5})
        err = StaleBeyondFifoError("gap", context=ctx)
        assert err.context.stage == 3
        assert err.context.extra == {"target": 5}

    def test_chaining(self):
        """Test chained causes survive."""
        try:
            cause = ValueError("Original cause")
            raise ConfigError("bad scenario") from cause
        except ConfigError as err:
            assert err.__cause__ is not None
            assert str(err.__cause__) == "Original cause"

    def test_extra_fields(self):
        assert NetworkTooSmallError("x", remaining=2, n_min=5).n_min == 5
        assert InsufficientNonAdjacentCandidatesError("x", attempts=100).attempts == 100
        err = IllegalTransitionError("x", from_state="off", to_state="added")
        assert (err.from_state, err.to_state) == ("off", "added")

    def test_config_diagnostics_copied(self):
        diagnostics = {"nodes": "too small"}
        err = ConfigError("invalid", diagnostics=diagnostics)
        diagnostics.clear()
        assert err.diagnostics == {"nodes": "too small"}

    def test_trace_line(self):
        assert TraceCorruptError("bad", line=4).line == 4
        assert TraceCorruptError("bad").line is None
