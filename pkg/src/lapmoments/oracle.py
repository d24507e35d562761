"""Centralized ground truth for testing: dense traces, spectra and exhaustive search.

Nothing here is used by the node agents.  The routines are deliberately
direct (matrix powers, rotations, transitive closure) and limited to desk
scale.
"""
from __future__ import annotations

import math

import numpy as np

from .consensus import BestActionRecord
from .graph import Edge, Graph
from .moments import CentralMoments, MomentVector, centralize, cme
from .topology import IMPROVEMENT_TOL

MAX_ORDER = 200


class OracleError(RuntimeError):
    pass


def _guard(g: Graph) -> None:
    if g.n > MAX_ORDER:
        raise OracleError(f"oracle limited to n <= {MAX_ORDER}, got {g.n}")


def laplacian(g: Graph) -> np.ndarray:
    a = g.adjacency_matrix()
    return np.diag(a.sum(axis=1)) - a


def trace_moments(g: Graph) -> MomentVector:
    """``(1/n) tr L^k`` for ``k = 1..4`` with exact integer matrix powers."""
    _guard(g)
    if g.n == 0:
        return MomentVector(0.0, 0.0, 0.0, 0.0)
    lap = laplacian(g)
    p = np.eye(g.n, dtype=np.int64)
    out = []
    for _ in range(4):
        p = p @ lap
        out.append(int(np.trace(p)) / g.n)
    return MomentVector(*out)


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
    drops below ``tol``; returns the eigenvalues sorted ascending.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.array_equal(a, a.T):
        raise OracleError("jacobi_eigenvalues needs a square symmetric matrix")

    upper = np.triu_indices(n, 1)

    def off(m):
        return math.sqrt(2.0 * float((m[upper] ** 2).sum()))

    for _ in range(max_sweeps):
        if off(a) < tol:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
    raise OracleError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def eigenvalues(g: Graph) -> np.ndarray:
    _guard(g)
    if g.n == 0:
        return np.zeros(0)
    return jacobi_eigenvalues(laplacian(g))


def connected(g: Graph) -> bool:
    """Connectivity by boolean transitive closure of ``I + A``."""
    _guard(g)
    if g.n <= 1:
        return True
    reach = (np.eye(g.n, dtype=np.int64) + g.adjacency_matrix()) > 0
    steps = 1
    while steps < g.n:
        reach = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        steps *= 2
    return bool(reach.all())


def safe_deletions(g: Graph) -> dict[int, frozenset[Edge]]:
    """For every node ``i``, the edges ``(i, j)``, ``j < i``, whose removal keeps ``g`` connected."""
    out = {}
    for i in g.nodes():
        out[i] = frozenset((i, j) for j in g.neighbors(i) if j < i and connected(g.remove_edge(i, j)))
    return out


def exhaustive_best_action(g: Graph, target: CentralMoments) -> BestActionRecord:
    """Scan every legal toggle, score it by the exact post-action CME, apply both tie-breaks.

    Legal toggles are additions between nodes at distance two and deletions
    that keep the graph connected.  The best is the lexicographic minimum of
    ``(score, -proposer, -partner)``.
    """
    now = cme(centralize(trace_moments(g)), target)
    safe = safe_deletions(g)
    best = None
    for i in g.nodes():
        ball = g.neighborhood(i, 2)
        for j in range(i):
            if g.has_edge(i, j):
                if (i, j) not in safe[i]:
                    continue
                sign, h = -1, g.remove_edge(i, j)
            elif j in ball:
                sign, h = 1, g.add_edge(i, j)
            else:
                continue
            m = trace_moments(h)
            score = cme(centralize(m), target)
            if score >= now - IMPROVEMENT_TOL:
                continue
            key = (score, -i, -j)
            if best is None or key < best[0]:
                best = (key, BestActionRecord(i, j, score, sign, centralize(m), m))
    if best is None:
        return BestActionRecord.sentinel(g.n - 1)
    return best[1]


def greedy_reference(g: Graph, target: CentralMoments, max_actions: int = 1000) -> tuple[Graph, list[BestActionRecord]]:
    """Centralized greedy descent with exhaustive search at every step."""
    actions = []
    for _ in range(max_actions):
        rec = exhaustive_best_action(g, target)
        if rec.is_sentinel:
            break
        actions.append(rec)
        g = g.toggle_edge(rec.proposer, rec.partner)
    return g, actions


# -- spectral distributions ----------------------------------------------

def spectral_cdf(spectrum, tol: float = 1e-9) -> list[tuple[float, float]]:
    """Steps ``(lambda, fraction <= lambda)`` of the empirical eigenvalue CDF.

    Eigenvalues closer than ``tol`` are merged into one step.
    """
    lam = np.sort(np.asarray(spectrum, dtype=float))
    n = lam.size
    steps: list[tuple[float, float]] = []
    for k, x in enumerate(lam, start=1):
        if steps and abs(x - steps[-1][0]) <= tol:
            steps[-1] = (steps[-1][0], k / n)
        else:
            steps.append((float(x), k / n))
    return steps


def cdf_value(steps: list[tuple[float, float]], x: float, tol: float = 0.0) -> float:
    frac = 0.0
    for lam, f in steps:
        if lam <= x + tol:
            frac = f
        else:
            break
    return frac


def cdf_sup_distance(a, b, tol: float = 1e-9) -> float:
    """Kolmogorov distance between the empirical CDFs of two spectra."""
    sa, sb = spectral_cdf(a, tol), spectral_cdf(b, tol)
    points = sorted({x for x, _ in sa} | {x for x, _ in sb})
    # both CDFs are right-continuous step functions, so the sup is attained at a jump
    return max((abs(cdf_value(sa, x, tol) - cdf_value(sb, x, tol)) for x in points), default=0.0)
