"""Laplacian spectral moments from 2-hop local statistics.

Every node contributes four integers (degree, triangle and quadrangle
counts); the first four raw moments of the Laplacian spectrum are the
network averages of those contributions.  Increments for a single edge
toggle are computed exactly from the pre-action graph.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .graph import Graph, GraphError, LocalView, _quadrangles, _triangles, load_graph

Adjacency = Sequence[frozenset[int]]


@dataclass(frozen=True)
class MomentVector:
    """Raw moments ``m_k = (1/n) sum(lambda_i ** k)`` for ``k = 1..4``."""

    m1: float
    m2: float
    m3: float
    m4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.m1, self.m2, self.m3, self.m4)

    def __add__(self, delta: "MomentDelta") -> "MomentVector":
        return MomentVector(self.m1 + delta.d1, self.m2 + delta.d2,
                            self.m3 + delta.d3, self.m4 + delta.d4)


@dataclass(frozen=True)
class CentralMoments:
    """Spectral mean and the centralized moments of orders 2, 3 and 4."""

    mean: float
    c2: float
    c3: float
    c4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mean, self.c2, self.c3, self.c4)


@dataclass(frozen=True)
class MomentDelta:
    sign: int
    i: int
    j: int
    d1: float
    d2: float
    d3: float
    d4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.d1, self.d2, self.d3, self.d4)


ZERO = MomentVector(0.0, 0.0, 0.0, 0.0)


def _contribution(adj: Adjacency, v: int) -> tuple[int, int, int, int]:
    nbrs = adj[v]
    d = len(nbrs)
    if d == 0:
        return (0, 0, 0, 0)
    t = _triangles(adj, v)
    q = _quadrangles(adj, v)
    s = sum(len(adj[u]) for u in nbrs)
    return (
        d,
        d * d + d,
        d**3 + 3 * d * d - 2 * t,
        d**4 + 4 * d**3 + d * d - d + (2 * d + 1) * s - 8 * t * d + 2 * q,
    )


def local_contribution(view: LocalView) -> tuple[int, int, int, int]:
    """Per-node summands of the four moments, read from a radius-2 view.

    The terms are built from the centre's degree ``d``, its triangle count
    ``T``, quadrangle count ``Q`` and the degree sum of its neighbours.
    """
    if view.radius != 2:
        raise GraphError("local_contribution needs a radius-2 view")
    return _contribution(view._adj, view.center)


def _sums(adj: Adjacency) -> list[int]:
    totals = [0, 0, 0, 0]
    for v in range(len(adj)):
        for k, x in enumerate(_contribution(adj, v)):
            totals[k] += x
    return totals


def moments_of(g: Graph) -> MomentVector:
    if g.n == 0:
        return ZERO
    t = _sums(g.adjacency)
    return MomentVector(*(x / g.n for x in t))


def centralize(m: MomentVector) -> CentralMoments:
    """Binomial expansion ``c_k = sum_r C(k,r) (-1)^(k-r) m_r m1^(k-r)`` with ``m_0 = 1``."""
    raw = (1.0, m.m1, m.m2, m.m3, m.m4)
    mu = m.m1

    def central(k: int) -> float:
        return sum(math.comb(k, r) * (-1) ** (k - r) * raw[r] * mu ** (k - r) for r in range(k + 1))

    return CentralMoments(mu, central(2), central(3), central(4))


def signed_root(x: float, k: int) -> float:
    return math.copysign(abs(x) ** (1.0 / k), x)


def cme(current: CentralMoments, target: CentralMoments) -> float:
    """Squared distance between (mean, signed k-th roots of c2..c4) of the two spectra."""
    err = (current.mean - target.mean) ** 2
    for k, a, b in ((2, current.c2, target.c2), (3, current.c3, target.c3), (4, current.c4, target.c4)):
        err += (signed_root(a, k) - signed_root(b, k)) ** 2
    return err


# -- increments ----------------------------------------------------------

def _check_toggle(adj: Adjacency, i: int, j: int, sign: int) -> None:
    n = len(adj)
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise GraphError(f"invalid node pair ({i}, {j})")
    if sign not in (1, -1):
        raise GraphError(f"sign must be +1 or -1, got {sign}")
    present = j in adj[i]
    if sign == 1 and present:
        raise GraphError(f"cannot add existing edge ({i}, {j})")
    if sign == -1 and not present:
        raise GraphError(f"cannot delete missing edge ({i}, {j})")


def _delta123_ints(adj: Adjacency, i: int, j: int, sign: int) -> tuple[int, int, int]:
    # n times the increments; degrees and the shared-neighbour count are
    # taken from the pre-action graph
    di, dj = len(adj[i]), len(adj[j])
    c = len(adj[i] & adj[j])
    return (
        2 * sign,
        2 * (1 + sign * (di + dj + 1)),
        (3 + 6 * sign) * (di + dj) + sign * 3 * (di * di + dj * dj) + (6 + 2 * sign) - sign * 6 * c,
    )


def _toggled(adj: Adjacency, i: int, j: int) -> list[frozenset[int]]:
    post = list(adj)
    post[i] = adj[i] ^ {j}
    post[j] = adj[j] ^ {i}
    return post


def _delta4_int(adj: Adjacency, i: int, j: int, cache: dict[int, int] | None = None) -> int:
    # only nodes in {i, j} and their neighbourhoods (before or after) change
    # their fourth-moment summand
    post = _toggled(adj, i, j)
    affected = {i, j} | adj[i] | adj[j] | post[i] | post[j]
    total = 0
    for v in affected:
        if cache is not None and v in cache:
            before = cache[v]
        else:
            before = _contribution(adj, v)[3]
            if cache is not None:
                cache[v] = before
        total += _contribution(post, v)[3] - before
    return total


def delta_m123(g: Graph, i: int, j: int, sign: int) -> tuple[float, float, float]:
    """Closed-form change of ``m1..m3`` when edge ``(i, j)`` is added (+1) or deleted (-1)."""
    _check_toggle(g.adjacency, i, j, sign)
    return tuple(x / g.n for x in _delta123_ints(g.adjacency, i, j, sign))


def delta_m4(g: Graph, i: int, j: int, sign: int) -> float:
    """Change of ``m4`` by recomputing the summands of the nodes the toggle touches."""
    _check_toggle(g.adjacency, i, j, sign)
    return _delta4_int(g.adjacency, i, j) / g.n


def moment_delta(g: Graph, i: int, j: int, sign: int, cache: dict[int, int] | None = None) -> MomentDelta:
    adj = g.adjacency
    _check_toggle(adj, i, j, sign)
    d1, d2, d3 = _delta123_ints(adj, i, j, sign)
    d4 = _delta4_int(adj, i, j, cache)
    n = g.n
    return MomentDelta(sign, i, j, d1 / n, d2 / n, d3 / n, d4 / n)


def predicted_cme(
    g: Graph,
    current: MomentVector,
    target: CentralMoments,
    i: int,
    j: int,
    sign: int,
    cache: dict[int, int] | None = None,
) -> tuple[float, MomentVector]:
    """CME and raw moments after the hypothetical toggle; ``g`` is not modified.

    ``g`` may be any subgraph of the network holding every edge within two
    hops of ``i`` and of ``j``; the increments only depend on that region.
    ``cache`` memoises pre-action fourth-moment summands across calls on
    the same ``g``.
    """
    after = current + moment_delta(g, i, j, sign, cache)
    return cme(centralize(after), target), after


# -- target files ----------------------------------------------------------

def load_target(path: str | Path) -> CentralMoments:
    """Read ``{mean, c2, c3, c4}`` or ``{"graph": <edge-list path>}``.

    A relative graph path is resolved against the target file's directory.
    """
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if "graph" in doc:
        gpath = Path(doc["graph"])
        if not gpath.is_absolute():
            gpath = path.parent / gpath
        return centralize(moments_of(load_graph(gpath)))
    try:
        return CentralMoments(float(doc["mean"]), float(doc["c2"]), float(doc["c3"]), float(doc["c4"]))
    except KeyError as exc:
        raise ValueError(f"target file {path} lacks key {exc}") from exc


def target_to_json(t: CentralMoments) -> str:
    return json.dumps({"mean": t.mean, "c2": t.c2, "c3": t.c3, "c4": t.c4})
