"""Deterministic graph families used as targets and initial conditions."""
from __future__ import annotations

import math
from typing import Any, Mapping

import numpy as np

from .graph import Graph, GraphError

KINDS = ("star", "two_stars", "chain", "ring", "small_world", "random_connected")

# re-sampling until connected is cheap at desk scale; this only guards against
# parameter choices that can never produce a connected graph
_MAX_RESAMPLES = 10_000


def star(n: int) -> Graph:
    """Hub 0 joined to leaves ``1..n-1``."""
    return Graph(n, [(0, v) for v in range(1, n)])


def two_stars(n: int) -> Graph:
    """Two stars of ``n/2`` nodes with hubs ``0`` and ``n/2`` linked."""
    if n % 2 or n < 4:
        raise GraphError(f"two_stars needs an even n >= 4, got {n}")
    h = n // 2
    edges = [(0, v) for v in range(1, h)] + [(h, v) for v in range(h + 1, n)]
    return Graph(n, edges + [(0, h)])


def chain(n: int) -> Graph:
    return Graph(n, [(v, v + 1) for v in range(n - 1)])


def ring(n: int) -> Graph:
    if n < 3:
        raise GraphError(f"ring needs n >= 3, got {n}")
    return Graph(n, [(v, (v + 1) % n) for v in range(n)])


def ring_lattice(n: int, hops: int) -> Graph:
    """Ring where every node links to all nodes within ``hops`` steps."""
    if n <= 2 * hops:
        raise GraphError(f"ring lattice with {hops} hops needs n > {2 * hops}, got {n}")
    return Graph(n, [(v, (v + h) % n) for h in range(1, hops + 1) for v in range(n)])


def small_world(n: int, p: float, rng: np.random.Generator, hops: int = 3) -> Graph:
    """Watts-Strogatz rewiring of :func:`ring_lattice`, re-drawn until connected.

    Lattice edges ``(u, u+h)`` are visited for ``h = 1..hops`` and ``u = 0..n-1``.
    With probability ``p`` the far endpoint is replaced by a node drawn
    uniformly from the current non-neighbours of ``u``.
    """
    for _ in range(_MAX_RESAMPLES):
        adj = [set() for _ in range(n)]
        lattice = [(u, (u + h) % n) for h in range(1, hops + 1) for u in range(n)]
        for u, v in lattice:
            adj[u].add(v)
            adj[v].add(u)
        for u, v in lattice:
            if rng.random() >= p:
                continue
            free = [w for w in range(n) if w != u and w not in adj[u]]
            if not free:
                continue
            w = free[int(rng.integers(len(free)))]
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
        g = Graph(n, [(u, w) for u in range(n) for w in adj[u] if u < w])
        if g.is_connected():
            return g
    raise GraphError(f"no connected small-world graph found for n={n}, p={p}")


def random_connected(n: int, rng: np.random.Generator, p: float | None = None) -> Graph:
    """Erdos-Renyi ``G(n, p)`` re-sampled until connected; ``p`` defaults to 2 ln(n)/n."""
    if n == 1:
        return Graph(1)
    if p is None:
        p = min(1.0, 2.0 * math.log(n) / n)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(_MAX_RESAMPLES):
        keep = rng.random(iu.size) < p
        g = Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))
        if g.is_connected():
            return g
    raise GraphError(f"no connected G(n={n}, p={p}) sample found")


def generate(kind: str, n: int, params: Mapping[str, Any] | None = None, seed: int = 0) -> Graph:
    """Build a graph of the named family; identical arguments give identical graphs.

    ``params`` may hold ``p`` (rewiring or edge probability) and ``hops``
    (small-world lattice reach, default 3).  For ``small_world`` the default
    ``p`` is ``1/n``.
    """
    params = dict(params or {})
    if n < 2 and kind != "random_connected":
        raise GraphError(f"{kind} needs n >= 2, got {n}")
    if n < 1:
        raise GraphError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "star":
        return star(n)
    if kind == "two_stars":
        return two_stars(n)
    if kind == "chain":
        return chain(n)
    if kind == "ring":
        return ring(n)
    if kind == "small_world":
        return small_world(n, float(params.get("p", 1.0 / n)), rng, int(params.get("hops", 3)))
    if kind == "random_connected":
        p = params.get("p")
        return random_connected(n, rng, None if p is None else float(p))
    raise GraphError(f"unknown graph kind {kind!r}; expected one of {', '.join(KINDS)}")
