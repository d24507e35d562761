import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapmoments import generators as gen
from lapmoments.graph import Graph, GraphError, save_graph
from lapmoments.moments import (
    CentralMoments,
    MomentVector,
    centralize,
    cme,
    delta_m4,
    delta_m123,
    load_target,
    local_contribution,
    moment_delta,
    moments_of,
    predicted_cme,
    signed_root,
    target_to_json,
)
from lapmoments.oracle import eigenvalues, trace_moments

from conftest import connected_graphs, rgraph

# star-10 Laplacian spectrum {0, 1 x 8, 10}: m_k = (8 + 10**k) / 10
STAR10_RAW = (1.8, 10.8, 100.8, 1000.8)
STAR10_CENTRAL = (1.8, 7.56, 54.144, 453.4992)


def approx(seq, rel=1e-12, abs=1e-9):
    return pytest.approx(tuple(seq), rel=rel, abs=abs)


class TestContributions:
    def test_single_edge(self):
        view = Graph(2, [(0, 1)]).local_subgraph(0, 2)
        assert local_contribution(view) == (1, 2, 4, 8)

    def test_triangle(self, k3):
        assert local_contribution(k3.local_subgraph(2, 2)) == (2, 6, 18, 54)

    def test_isolated(self):
        assert local_contribution(Graph(3, [(1, 2)]).local_subgraph(0, 2)) == (0, 0, 0, 0)

    def test_needs_radius_two(self, k3):
        with pytest.raises(GraphError):
            local_contribution(k3.local_subgraph(0, 1))


class TestMoments:
    def test_star(self):
        assert moments_of(gen.star(10)).as_tuple() == approx(STAR10_RAW)
        assert moments_of(gen.star(10)).m1 == 1.8

    def test_empty(self):
        assert moments_of(Graph(0)).as_tuple() == (0, 0, 0, 0)
        assert moments_of(Graph(5)).as_tuple() == (0, 0, 0, 0)

    def test_centralize_star(self):
        assert centralize(moments_of(gen.star(10))).as_tuple() == approx(STAR10_CENTRAL)

    def test_centralize_constant_spectrum(self):
        c = centralize(moments_of(Graph(4)))
        assert (c.c2, c.c3, c.c4) == (0, 0, 0)

    def test_centralize_k2(self):
        assert centralize(MomentVector(1, 2, 4, 8)).as_tuple() == (1, 1, 0, 1)

    @given(connected_graphs(max_n=20))
    @settings(max_examples=80, deadline=None)
    def test_oracle_identity(self, g):
        got, want = moments_of(g).as_tuple(), trace_moments(g).as_tuple()
        assert got == approx(want, rel=1e-9, abs=0)
        assert got[0] == pytest.approx(2 * g.num_edges / g.n)

    @given(connected_graphs(max_n=16))
    @settings(max_examples=40, deadline=None)
    def test_centralize_matches_eigenvalues(self, g):
        lam = eigenvalues(g)
        mu = lam.mean()
        direct = (mu, *(np.mean((lam - mu) ** k) for k in (2, 3, 4)))
        c = centralize(moments_of(g))
        assert c.as_tuple() == pytest.approx(direct, abs=1e-6)
        assert c.c2 >= -1e-9 and c.c4 >= c.c2**2 - 1e-6
        m = moments_of(g)
        c1 = sum(math.comb(1, r) * (-1) ** (1 - r) * (1.0, m.m1)[r] * m.m1 ** (1 - r) for r in range(2))
        assert c1 == 0


class TestCME:
    def test_zero_on_equal(self):
        t = centralize(moments_of(gen.star(10)))
        assert cme(t, t) == 0.0

    def test_positive(self, path3, k3):
        assert cme(centralize(trace_moments(path3)), centralize(trace_moments(k3))) > 0

    def test_signed_root(self):
        assert signed_root(-8.0, 3) == pytest.approx(-2.0)
        assert signed_root(16.0, 4) == pytest.approx(2.0)
        assert signed_root(0.0, 3) == 0.0

    def test_formula(self):
        a, b = CentralMoments(1.0, 4.0, -8.0, 16.0), CentralMoments(2.0, 1.0, 1.0, 1.0)
        assert cme(a, b) == pytest.approx(1 + 1 + 9 + 1)

    @given(connected_graphs(max_n=10), connected_graphs(max_n=10))
    @settings(max_examples=30, deadline=None)
    def test_nonnegative(self, g, h):
        assert cme(centralize(moments_of(g)), centralize(moments_of(h))) >= 0


class TestDeltas:
    def test_close_path(self, path3):
        d1, d2, d3 = delta_m123(path3, 0, 2, 1)
        assert Fraction(d1).limit_denominator(100) == Fraction(2, 3)
        assert d3 == pytest.approx(26 / 3)
        # m4(K3) = 54, m4(path) = (1 + 81) / 3
        assert delta_m4(path3, 0, 2, 1) == pytest.approx(54 - 82 / 3)
        assert delta_m4(path3, 0, 2, 1) == pytest.approx(80 / 3)

    def test_addition_d1(self):
        g = rgraph(4, 17)
        i, j = next((i, j) for i in range(17) for j in range(i) if not g.has_edge(i, j))
        assert delta_m123(g, i, j, 1)[0] == pytest.approx(2 / 17)

    def test_chain4_long_chord(self):
        g = gen.chain(4)
        want = trace_moments(g.add_edge(0, 3)).m4 - trace_moments(g).m4
        assert delta_m4(g, 3, 0, 1) == pytest.approx(want)

    def test_involution(self, path3):
        k3 = path3.add_edge(0, 2)
        up = moment_delta(path3, 2, 0, 1).as_tuple()
        down = moment_delta(k3, 2, 0, -1).as_tuple()
        assert tuple(a + b for a, b in zip(up, down)) == approx((0, 0, 0, 0))

    def test_preconditions(self, path3):
        with pytest.raises(GraphError):
            delta_m123(path3, 0, 1, 1)
        with pytest.raises(GraphError):
            delta_m4(path3, 0, 2, -1)
        with pytest.raises(GraphError):
            moment_delta(path3, 1, 1, 1)
        with pytest.raises(GraphError):
            moment_delta(path3, 0, 2, 2)

    @given(connected_graphs(max_n=14), st.data())
    @settings(max_examples=80, deadline=None)
    def test_exact_increments(self, g, data):
        pairs = [(i, j) for i in range(g.n) for j in range(i)]
        i, j = data.draw(st.sampled_from(pairs))
        sign = -1 if g.has_edge(i, j) else 1
        after = g.toggle_edge(i, j)
        want = np.subtract(trace_moments(after).as_tuple(), trace_moments(g).as_tuple())
        got = moment_delta(g, i, j, sign).as_tuple()
        assert got == approx(want, rel=0, abs=1e-9)
        assert (moments_of(g) + moment_delta(g, i, j, sign)).as_tuple() == approx(moments_of(after).as_tuple())

    @given(connected_graphs(max_n=14), st.data())
    @settings(max_examples=40, deadline=None)
    def test_deltas_from_two_hop_knowledge(self, g, data):
        pairs = [(i, j) for i in range(g.n) for j in range(i)]
        i, j = data.draw(st.sampled_from(pairs))
        sign = -1 if g.has_edge(i, j) else 1
        views = [g.local_subgraph(i, 2), g.local_subgraph(j, 2)]
        local = Graph(g.n, views[0].edges | views[1].edges)
        assert moment_delta(local, i, j, sign) == moment_delta(g, i, j, sign)


class TestPrediction:
    def test_restoring_target(self, path3, k3):
        target = centralize(trace_moments(k3))
        score, after = predicted_cme(path3, moments_of(path3), target, 2, 0, 1)
        assert score == pytest.approx(0, abs=1e-20)
        assert after.as_tuple() == approx(moments_of(k3).as_tuple())

    def test_every_candidate_matches_oracle(self):
        g = rgraph(21, 12)
        target = centralize(moments_of(gen.star(12)))
        now = moments_of(g)
        before = now.as_tuple()
        cache = {}
        for i in range(12):
            for j in range(i):
                sign = -1 if g.has_edge(i, j) else 1
                score, after = predicted_cme(g, now, target, i, j, sign, cache)
                exact = trace_moments(g.toggle_edge(i, j))
                assert score == pytest.approx(cme(centralize(exact), target), rel=1e-9, abs=1e-12)
                d = moment_delta(g, i, j, sign)
                assert tuple(a - b for a, b in zip(after.as_tuple(), d.as_tuple())) == approx(before)
        assert moments_of(g) == now


class TestTargets:
    def test_moment_file(self, tmp_path):
        t = CentralMoments(1.8, 7.56, 54.144, 453.4992)
        path = tmp_path / "t.json"
        path.write_text(target_to_json(t))
        assert load_target(path) == t

    def test_graph_file_relative(self, tmp_path):
        (tmp_path / "sub").mkdir()
        save_graph(gen.star(10), tmp_path / "sub" / "star.txt")
        (tmp_path / "sub" / "t.json").write_text(json.dumps({"graph": "star.txt"}))
        assert load_target(tmp_path / "sub" / "t.json").as_tuple() == approx(STAR10_CENTRAL)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text('{"mean": 1}')
        with pytest.raises(ValueError):
            load_target(path)


def test_signed_root_continuity():
    xs = np.linspace(-1e-3, 1e-3, 11)
    ys = [signed_root(float(x), 3) for x in xs]
    assert all(a <= b for a, b in zip(ys, ys[1:]))
    assert math.isclose(signed_root(1e-9, 3), 1e-3)
