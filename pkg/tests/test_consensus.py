import math

import numpy as np
import pytest
from hypothesis import given, settings

from lapmoments import generators as gen
from lapmoments.consensus import (
    NO_BENEFIT,
    AggregationProtocol,
    BestActionRecord,
    ConsensusError,
    DeletionCheckProtocol,
    ElectionProtocol,
    TokenVector,
    aggregate,
    aggregate_moments,
    elect_global_action,
    owned_edges,
    run_lockstep,
    verify_deletions,
)
from lapmoments.graph import Graph
from lapmoments.moments import moments_of
from lapmoments.oracle import safe_deletions

from conftest import connected_graphs, rgraph


def bfs_safe(g):
    return {i: frozenset((i, j) for j in g.neighbors(i) if j < i and g.remove_edge(i, j).is_connected())
            for i in g.nodes()}


class TestTokens:
    def test_monotone_merge(self):
        a, b = TokenVector(4, 0), TokenVector(4, 2)
        a.merge(b)
        assert a.bits.tolist() == [True, False, True, False]
        a.merge(TokenVector(4))
        assert a.bits.sum() == 2 and not a.full()
        for v in (1, 3):
            a.merge(TokenVector(4, v))
        assert a.full()

    def test_copy_is_independent(self):
        a = TokenVector(3, 1)
        b = a.copy()
        b.merge(TokenVector(3, 0))
        assert a.bits.sum() == 1


class TestAggregation:
    def test_star_moments_everywhere(self):
        g = gen.star(10)
        got = aggregate_moments(g)
        assert set(got) == set(range(10))
        assert all(m == moments_of(g) for m in got.values())
        assert got[3].as_tuple() == pytest.approx((1.8, 10.8, 100.8, 1000.8))

    def test_single_node(self):
        assert aggregate(Graph(1), {0: (5, 7)}) == {0: (5.0, 7.0)}

    def test_ring4_average(self):
        got = aggregate(gen.ring(4), {v: (v + 1,) for v in range(4)})
        assert all(x == (2.5,) for x in got.values())

    def test_float_values(self):
        got = aggregate(gen.chain(3), {0: (0.1,), 1: (0.2,), 2: (0.3,)})
        assert got[0][0] == pytest.approx(0.2)

    def test_rounds_bounded_by_diameter(self):
        g = gen.chain(12)
        protos = [AggregationProtocol(v, 12, (v,)) for v in g.nodes()]
        assert run_lockstep(g.adjacency, protos) == 11

    def test_absorb_after_done(self):
        p = AggregationProtocol(0, 1, (1,))
        with pytest.raises(ConsensusError):
            p.absorb({})

    def test_disconnected_never_finishes(self):
        g = Graph(4, [(0, 1), (2, 3)])
        protos = [AggregationProtocol(v, 4, (v,)) for v in g.nodes()]
        with pytest.raises(ConsensusError):
            run_lockstep(g.adjacency, protos)


class TestDeletionCheck:
    def test_chain_tree(self):
        assert all(not s for s in verify_deletions(gen.chain(3)).values())

    def test_triangle(self, k3):
        safe = verify_deletions(k3)
        assert safe[1] == {(1, 0)} and safe[2] == {(2, 0), (2, 1)}

    def test_star_plus_chord(self):
        g = gen.star(10).add_edge(3, 4)
        got = set().union(*verify_deletions(g).values())
        assert got == {(3, 0), (4, 0), (4, 3)}

    def test_ring_and_ring_minus_edge(self):
        r = gen.ring(20)
        assert verify_deletions(r)[19] == {(19, 0), (19, 18)}
        assert not set().union(*verify_deletions(r.remove_edge(0, 19)).values())

    def test_owned_edges(self, k4):
        assert owned_edges(k4, 2) == [0, 1]
        assert owned_edges(k4, 0) == []
        with pytest.raises(ConsensusError):
            DeletionCheckProtocol(1, 3, [2])

    @given(connected_graphs(max_n=16))
    @settings(max_examples=60, deadline=None)
    def test_matches_oracles(self, g):
        got = verify_deletions(g)
        assert got == bfs_safe(g)
        assert got == safe_deletions(g)

    def test_long_detour(self):
        # removing (9, 0) on a ring forces the entry around the whole cycle
        g = gen.ring(10)
        assert (9, 0) in verify_deletions(g)[9]

    def test_entries_non_decreasing(self):
        g = rgraph(2, 10)
        protos = [DeletionCheckProtocol(v, 10, owned_edges(g, v)) for v in g.nodes()]
        prev = [p.x.copy() for p in protos]
        while not all(p.done for p in protos):
            out = [p.payload() for p in protos]
            for v, p in enumerate(protos):
                if not p.done:
                    p.absorb({k: out[k] for k in g.neighbors(v)})
            for a, p in zip(prev, protos):
                assert np.all(p.x >= a)
            prev = [p.x.copy() for p in protos]
        assert max(p.step for p in protos) == 9


def rec(proposer, score, partner=0):
    return BestActionRecord(proposer, partner, score, 1 if math.isfinite(score) else 0)


class TestElection:
    def test_all_sentinels(self):
        g = gen.ring(6)
        got = elect_global_action(g, {v: BestActionRecord.sentinel(v) for v in g.nodes()})
        assert all(r.is_sentinel and r.score == NO_BENEFIT for r in got.values())
        assert {r.proposer for r in got.values()} == {5}

    def test_unique_minimum(self):
        g = rgraph(7, 12)
        records = {v: rec(v, 1.0 + v) if v != 7 else rec(7, 0.5) for v in g.nodes()}
        assert {r.proposer for r in elect_global_action(g, records).values()} == {7}

    def test_tie_goes_to_larger_proposer(self):
        g = gen.chain(12)
        records = {v: rec(v, 2.0) for v in g.nodes()}
        records[3] = rec(3, 0.25, 1)
        records[9] = rec(9, 0.25, 2)
        got = elect_global_action(g, records)
        assert all(r == records[9] for r in got.values())

    def test_agreement_and_argmin(self):
        rng = np.random.default_rng(5)
        for seed in range(10):
            g = rgraph(seed, 15)
            scores = rng.integers(0, 4, size=15).astype(float)
            records = {v: rec(v, float(scores[v])) for v in g.nodes()}
            got = elect_global_action(g, records)
            want = min(records.values(), key=BestActionRecord.key)
            assert all(r == want for r in got.values())

    def test_record_vector(self):
        r = BestActionRecord(4, 2, 0.5, 1)
        assert r.as_vector()[:3] == [4.0, 2.0, 0.5] and r.edge() == (4, 2)
        assert BestActionRecord.sentinel(3).is_sentinel

    def test_single_node_done(self):
        p = ElectionProtocol(0, 1, BestActionRecord.sentinel(0))
        assert p.done
