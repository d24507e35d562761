import numpy as np
import pytest
from hypothesis import given, settings

from lapmoments import generators as gen
from lapmoments.graph import Graph
from lapmoments.moments import MomentVector, centralize, cme, moments_of
from lapmoments.oracle import (
    MAX_ORDER,
    OracleError,
    cdf_sup_distance,
    cdf_value,
    connected,
    eigenvalues,
    exhaustive_best_action,
    jacobi_eigenvalues,
    laplacian,
    spectral_cdf,
    trace_moments,
)

from conftest import any_graphs, connected_graphs, rgraph


class TestTraces:
    def test_k2(self):
        assert trace_moments(Graph(2, [(0, 1)])) == MomentVector(1, 2, 4, 8)

    def test_star(self):
        assert trace_moments(gen.star(10)).as_tuple() == pytest.approx((1.8, 10.8, 100.8, 1000.8))

    def test_empty(self):
        assert trace_moments(Graph(0)).as_tuple() == (0, 0, 0, 0)

    def test_size_guard(self):
        with pytest.raises(OracleError):
            trace_moments(Graph(MAX_ORDER + 1))

    def test_laplacian_rows(self):
        lap = laplacian(rgraph(1, 12))
        assert np.array_equal(lap, lap.T) and not lap.sum(axis=1).any()


class TestSpectra:
    def test_star(self):
        lam = eigenvalues(gen.star(10))
        assert lam == pytest.approx([0] + [1] * 8 + [10], abs=1e-9)

    def test_ring4(self):
        assert eigenvalues(gen.ring(4)) == pytest.approx([0, 2, 2, 4], abs=1e-9)

    def test_single_node(self):
        assert eigenvalues(Graph(1)).tolist() == [0.0]

    def test_ring_circulant(self):
        n = 11
        want = sorted(2 - 2 * np.cos(2 * np.pi * np.arange(n) / n))
        assert eigenvalues(gen.ring(n)) == pytest.approx(want, abs=1e-9)

    def test_against_lapack(self):
        for seed in range(5):
            lap = laplacian(rgraph(seed, 25)).astype(float)
            assert jacobi_eigenvalues(lap) == pytest.approx(np.linalg.eigvalsh(lap), abs=1e-8)

    def test_rejects_asymmetric(self):
        with pytest.raises(OracleError):
            jacobi_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @given(connected_graphs(max_n=14))
    @settings(max_examples=40, deadline=None)
    def test_spectral_invariants(self, g):
        lam = eigenvalues(g)
        assert lam[0] == pytest.approx(0, abs=1e-8) and lam.min() >= -1e-8
        assert lam.sum() == pytest.approx(sum(g.degree_sequence()), abs=1e-8)
        powers = tuple(np.mean(lam**k) for k in (1, 2, 3, 4))
        assert powers == pytest.approx(trace_moments(g).as_tuple(), rel=1e-6, abs=1e-6)

    @given(any_graphs(max_n=10))
    @settings(max_examples=40, deadline=None)
    def test_zero_multiplicity_is_components(self, g):
        seen, comps = set(), 0
        for v in g.nodes():
            if v in seen:
                continue
            comps += 1
            stack = [v]
            while stack:
                u = stack.pop()
                if u not in seen:
                    seen.add(u)
                    stack.extend(g.neighbors(u))
        assert int(np.sum(np.abs(eigenvalues(g)) < 1e-8)) == comps
        assert connected(g) == (comps == 1)


class TestExhaustive:
    def test_optimal_graph(self):
        g = gen.star(8)
        assert exhaustive_best_action(g, centralize(moments_of(g))).is_sentinel

    def test_chain3_to_triangle(self, path3, k3):
        r = exhaustive_best_action(path3, centralize(moments_of(k3)))
        assert (r.proposer, r.partner, r.sign) == (2, 0, 1)

    def test_deletions_are_safe(self):
        g = rgraph(8, 10)
        r = exhaustive_best_action(g, centralize(moments_of(gen.chain(10))))
        if r.sign == -1:
            assert g.remove_edge(r.proposer, r.partner).is_connected()

    def test_argmin_affine_invariance(self):
        # scoring by a*CME+b with a > 0 selects the same action
        g = rgraph(12, 9)
        target = centralize(moments_of(gen.star(9)))
        best = exhaustive_best_action(g, target)
        scored = []
        for i in g.nodes():
            for j in range(i):
                if g.has_edge(i, j) and not g.remove_edge(i, j).is_connected():
                    continue
                if not g.has_edge(i, j) and j not in g.neighborhood(i, 2):
                    continue
                s = cme(centralize(trace_moments(g.toggle_edge(i, j))), target)
                scored.append((3.5 * s + 7.0, -i, -j))
        _, i, j = min(scored)
        assert (best.proposer, best.partner) == (-i, -j)


class TestCDF:
    def test_two_point(self):
        assert spectral_cdf([0, 2]) == [(0.0, 0.5), (2.0, 1.0)]

    def test_star_plateau(self):
        steps = spectral_cdf(eigenvalues(gen.star(10)))
        for x in (1.0, 3.0, 9.99):
            assert cdf_value(steps, x) == pytest.approx(0.9)
        assert cdf_value(steps, 10.0, 1e-9) == 1.0 and cdf_value(steps, -1) == 0.0

    def test_identical(self):
        lam = eigenvalues(rgraph(3, 12))
        assert cdf_sup_distance(lam, lam) == 0.0
        assert cdf_sup_distance([0, 1, 1], [0, 1 + 1e-12, 1]) == 0.0

    def test_distance(self):
        assert cdf_sup_distance([0, 1], [0, 2]) == 0.5
