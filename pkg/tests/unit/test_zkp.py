"""Unit tests for the cycle-knowledge proof."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from core.exceptions import (
    InvalidWitnessError,
    RoundCountError,
    SaltTooShortError,
    StateAlreadyConsumedError,
    VariantMismatchError,
)
from core.graph import HamiltonianCycle, Permutation
from core.zkp import (
    Challenge,
    CheatStrategy,
    CycleReveal,
    IsomorphismReveal,
    commit,
    make_cheater,
    prover_commit,
    prover_respond,
    run_protocol,
    verifier_check,
)


@pytest.mark.unit
class TestCommit:
    """Test salted hash commitments."""

    def test_deterministic(self):
        salt = b"s" * 16
        assert commit(b"payload", salt) == commit(b"payload", salt)

    def test_salt_changes_digest(self):
        assert commit(b"payload", b"a" * 16) != commit(b"payload", b"b" * 16)

    def test_short_salt_raises(self):
        with pytest.raises(SaltTooShortError):
            commit(b"payload", b"x" * 8)

    def test_hex_is_64_chars(self):
        assert len(commit(b"", b"z" * 16).hex) == 64


@pytest.mark.unit
class TestRound:
    """Test single commit/challenge/response rounds."""

    def test_honest_isomorphism_branch(self, secret10, rng):
        g, hc = secret10
        state, pair = prover_commit(g, hc, rng)
        resp = prover_respond(state, Challenge.REVEAL_ISOMORPHISM)
        assert isinstance(resp, IsomorphismReveal)
        assert verifier_check(g, pair, Challenge.REVEAL_ISOMORPHISM, resp)

    def test_honest_cycle_branch(self, secret10, rng):
        g, hc = secret10
        state, pair = prover_commit(g, hc, rng)
        resp = prover_respond(state, Challenge.REVEAL_CYCLE)
        assert isinstance(resp, CycleReveal)
        assert not hasattr(resp, "permutation")
        assert verifier_check(g, pair, Challenge.REVEAL_CYCLE, resp)

    def test_state_answers_once(self, secret10, rng):
        g, hc = secret10
        state, _ = prover_commit(g, hc, rng)
        prover_respond(state, Challenge.REVEAL_CYCLE)
        with pytest.raises(StateAlreadyConsumedError):
            prover_respond(state, Challenge.REVEAL_ISOMORPHISM)

    def test_invalid_witness_refused(self, square, rng):
        g, _ = square
        with pytest.raises(InvalidWitnessError):
            prover_commit(g, HamiltonianCycle((1, 3, 2, 4)), rng)

    def test_tampered_permutation_rejected(self, secret10, rng):
        g, hc = secret10
        state, pair = prover_commit(g, hc, rng)
        resp = prover_respond(state, Challenge.REVEAL_ISOMORPHISM)
        other = Permutation.random(g.vertices, np.random.default_rng(99))
        forged = IsomorphismReveal(permutation=other, salt_graph=resp.salt_graph)
        assert not verifier_check(g, pair, Challenge.REVEAL_ISOMORPHISM, forged)

    def test_tampered_salt_rejected(self, secret10, rng):
        g, hc = secret10
        state, pair = prover_commit(g, hc, rng)
        resp = prover_respond(state, Challenge.REVEAL_CYCLE)
        forged = replace(resp, salt_cycle=bytes(16))
        assert not verifier_check(g, pair, Challenge.REVEAL_CYCLE, forged)

    def test_short_revealed_salt_is_a_failure(self, secret10, rng):
        g, hc = secret10
        state, pair = prover_commit(g, hc, rng)
        resp = prover_respond(state, Challenge.REVEAL_ISOMORPHISM)
        forged = IsomorphismReveal(permutation=resp.permutation, salt_graph=b"x")
        assert not verifier_check(g, pair, Challenge.REVEAL_ISOMORPHISM, forged)

    def test_wrong_variant_raises(self, secret10, rng):
        g, hc = secret10
        state, pair = prover_commit(g, hc, rng)
        resp = prover_respond(state, Challenge.REVEAL_CYCLE)
        with pytest.raises(VariantMismatchError):
            verifier_check(g, pair, Challenge.REVEAL_ISOMORPHISM, resp)


@pytest.mark.unit
class TestRunProtocol:
    """Test whole sessions."""

    def test_honest_always_accepted(self, secret10):
        g, hc = secret10
        for seed in range(5):
            transcript = run_protocol((g, hc), g, 20, np.random.default_rng(seed))
            assert transcript.accepted
            assert len(transcript.rounds) == 20

    def test_no_round_leaks_witness(self, secret10, rng):
        g, hc = secret10
        assert not run_protocol((g, hc), g, 20, rng).leaks_witness

    def test_cheater_fails_long_session(self, secret10, rng):
        g, _ = secret10
        transcript = run_protocol(None, g, 20, rng, strategy=CheatStrategy.COIN_FLIP)
        assert not transcript.accepted

    def test_stop_on_failure_truncates(self, secret10, rng):
        g, _ = secret10
        transcript = run_protocol(
            None, g, 20, rng, strategy=CheatStrategy.FAKE_GRAPH, stop_on_failure=True
        )
        assert not transcript.rounds[-1].verdict
        assert all(r.verdict for r in transcript.rounds[:-1])

    def test_zero_rounds_rejected(self, secret10, rng):
        g, hc = secret10
        with pytest.raises(RoundCountError, match="at least 1"):
            run_protocol((g, hc), g, 0, rng)

    def test_transcript_text(self, triangle, rng):
        g, hc = triangle
        text = run_protocol((g, hc), g, 3, rng).to_text()
        assert text.count("round ") == 3
        assert text.endswith("verdict: accepted\n")

    @pytest.mark.parametrize(
        ("strategy", "passing"),
        [
            (CheatStrategy.FAKE_GRAPH, Challenge.REVEAL_CYCLE),
            (CheatStrategy.ISOMORPH, Challenge.REVEAL_ISOMORPHISM),
        ],
    )
    def test_blind_strategy_passes_one_branch(self, secret10, rng, strategy, passing):
        g, _ = secret10
        prover = make_cheater(strategy, g)
        for c in Challenge:
            state, pair = prover.commit(rng)
            verdict = verifier_check(g, pair, c, prover.respond(state, c))
            assert verdict is (c is passing)

    def test_isomorph_guess_always_holds_on_triangle(self, triangle, rng):
        g, _ = triangle
        transcript = run_protocol(None, g, 8, rng, strategy=CheatStrategy.ISOMORPH)
        assert transcript.accepted
