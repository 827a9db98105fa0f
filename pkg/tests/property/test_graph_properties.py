"""Property-based tests for the graph algebra and commitments."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from core.exceptions import NetworkTooSmallError
from core.graph import (
    Permutation,
    apply_permutation,
    complete_graph,
    delete_vertex,
    generate_initial_cycle,
    insert_vertex,
    verify_cycle,
)
from core.zkp import MIN_SALT_BYTES, commit, run_protocol

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=3, max_value=30)
salts = st.binary(min_size=MIN_SALT_BYTES, max_size=48)


def _planted(n: int, seed: int):
    rng = np.random.default_rng(seed)
    hc = generate_initial_cycle([Permutation.random(range(1, n + 1), rng)])
    return complete_graph(hc, n, rng), hc


@pytest.mark.property
class TestPermutationProperties:
    @given(n=sizes, seed=seeds)
    def test_inverse_round_trips(self, n, seed):
        p = Permutation.random(range(1, n + 1), np.random.default_rng(seed))
        assert p.then(p.inverse()) == Permutation.identity(range(1, n + 1))
        assert all(p.inverse()(p(v)) == v for v in p.domain)

    @given(n=sizes, seed=seeds)
    def test_is_a_bijection(self, n, seed):
        p = Permutation.random(range(1, n + 1), np.random.default_rng(seed))
        assert sorted(p(v) for v in p.domain) == list(range(1, n + 1))

    @given(n=sizes, seeds_=st.lists(seeds, min_size=1, max_size=4))
    def test_composition_always_yields_a_cycle(self, n, seeds_):
        perms = [Permutation.random(range(1, n + 1), np.random.default_rng(s)) for s in seeds_]
        hc = generate_initial_cycle(perms)
        assert sorted(hc.order) == list(range(1, n + 1))


@pytest.mark.property
class TestCycleInvariant:
    """The planted cycle survives every structural change."""

    @settings(deadline=None)
    @given(n=st.integers(min_value=6, max_value=16), seed=seeds)
    def test_regular_completion(self, n, seed):
        degree = 4 if n % 2 == 0 else 2
        rng = np.random.default_rng(seed)
        hc = generate_initial_cycle([Permutation.random(range(1, n + 1), rng)])
        g = complete_graph(hc, n * degree // 2, rng)
        assert verify_cycle(g, hc)
        assert all(g.degree(v) == degree for v in g.vertices)

    @given(n=sizes, seed=seeds, p_seed=seeds)
    def test_relabelling_preserves_verification(self, n, seed, p_seed):
        g, hc = _planted(n, seed)
        p = Permutation.random(g.vertices, np.random.default_rng(p_seed))
        g2, hc2 = apply_permutation(g, hc, p)
        assert verify_cycle(g2, hc2)
        assert g2.m == g.m

    @settings(max_examples=50, suppress_health_check=[HealthCheck.too_slow])
    @given(seed=seeds, ops=st.lists(st.booleans(), min_size=1, max_size=25))
    def test_random_churn(self, seed, ops):
        rng = np.random.default_rng(seed)
        g, hc = _planted(6, seed)
        next_id = 7
        for insert in ops:
            if insert:
                g, hc, group = insert_vertex(g, hc, next_id, rng, group_size=2)
                assert group.owner == next_id
                next_id += 1
            else:
                victim = hc.order[int(rng.integers(len(hc)))]
                try:
                    g, hc = delete_vertex(g, hc, victim)
                except NetworkTooSmallError:
                    assert g.n == 3
                    continue
            assert verify_cycle(g, hc)
            assert g.n >= 3


@pytest.mark.property
class TestCommitmentProperties:
    @given(payload=st.binary(max_size=256), salt=salts)
    def test_deterministic(self, payload, salt):
        assert commit(payload, salt) == commit(payload, salt)

    @given(payload=st.binary(min_size=1, max_size=64), salt=salts)
    def test_binding_on_payload(self, payload, salt):
        flipped = bytes([payload[0] ^ 1]) + payload[1:]
        assert commit(payload, salt) != commit(flipped, salt)


@pytest.mark.property
class TestProtocolProperties:
    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(min_value=3, max_value=12), seed=seeds, rounds=st.integers(1, 8))
    def test_completeness(self, n, seed, rounds):
        g, hc = _planted(n, seed)
        transcript = run_protocol((g, hc), g, rounds, np.random.default_rng(seed))
        assert transcript.accepted
        assert not transcript.leaks_witness
