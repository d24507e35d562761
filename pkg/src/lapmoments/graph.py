"""Undirected simple graphs and the local statistics that feed the moment formulas.

Node labels are the dense integers ``0..n-1``.  A :class:`Graph` is an
immutable value: every mutating operation returns a new graph.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised on self-loops, duplicate or missing edges and unknown nodes."""


class GraphFormatError(GraphError):
    """Raised when an edge-list or JSON graph document cannot be parsed."""


def canonical(i: int, j: int) -> Edge:
    """Return the pair ordered as ``(larger, smaller)``, i.e. authority first."""
    return (i, j) if i > j else (j, i)


class Graph:
    __slots__ = ("n", "_adj")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise GraphError(f"node count must be non-negative, got {n}")
        adj: list[set[int]] = [set() for _ in range(n)]
        for e in edges:
            i, j = int(e[0]), int(e[1])
            _check_node(n, i)
            _check_node(n, j)
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if j in adj[i]:
                raise GraphError(f"duplicate edge ({i}, {j})")
            adj[i].add(j)
            adj[j].add(i)
        self.n = n
        self._adj = tuple(frozenset(s) for s in adj)

    @classmethod
    def _from_adj(cls, adj: Sequence[frozenset[int]]) -> "Graph":
        g = cls.__new__(cls)
        g.n = len(adj)
        g._adj = tuple(adj)
        return g

    # -- queries ---------------------------------------------------------
    @property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        return self._adj

    def nodes(self) -> range:
        return range(self.n)

    def edges(self) -> list[Edge]:
        """Sorted edge list with ``i < j`` in every pair."""
        return sorted((i, j) for i in range(self.n) for j in self._adj[i] if i < j)

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self._adj) // 2

    def neighbors(self, v: int) -> frozenset[int]:
        _check_node(self.n, v)
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def degree_sequence(self) -> list[int]:
        return sorted(len(s) for s in self._adj)

    def has_edge(self, i: int, j: int) -> bool:
        _check_node(self.n, i)
        _check_node(self.n, j)
        return j in self._adj[i]

    def neighborhood(self, v: int, k: int) -> frozenset[int]:
        """Nodes at distance at most ``k`` from ``v``, ``v`` included."""
        _check_node(self.n, v)
        if k not in (1, 2):
            raise GraphError(f"neighborhood radius must be 1 or 2, got {k}")
        return frozenset(_bfs_depths(self._adj, v, k))

    def local_subgraph(self, v: int, k: int) -> "LocalView":
        nodes = self.neighborhood(v, k)
        edges = frozenset(
            (a, b) for a in nodes for b in self._adj[a] if a < b and b in nodes
        )
        return LocalView(center=v, radius=k, nodes=nodes, edges=edges)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return len(_bfs_depths(self._adj, 0, self.n)) == self.n

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j in self.edges():
            a[i, j] = a[j, i] = 1
        return a

    # -- value-semantics mutation ---------------------------------------
    def add_edge(self, i: int, j: int) -> "Graph":
        if i == j:
            raise GraphError(f"self-loop at node {i}")
        if self.has_edge(i, j):
            raise GraphError(f"duplicate edge ({i}, {j})")
        return self._toggled(i, j)

    def remove_edge(self, i: int, j: int) -> "Graph":
        if i == j or not self.has_edge(i, j):
            raise GraphError(f"edge ({i}, {j}) is not present")
        return self._toggled(i, j)

    def toggle_edge(self, i: int, j: int) -> "Graph":
        return self.remove_edge(i, j) if self.has_edge(i, j) else self.add_edge(i, j)

    def _toggled(self, i: int, j: int) -> "Graph":
        adj = list(self._adj)
        adj[i] = adj[i] ^ {j}
        adj[j] = adj[j] ^ {i}
        return Graph._from_adj(adj)

    # -- dunder ----------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __hash__(self) -> int:
        return hash(self._adj)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edges()})"


@dataclass(frozen=True)
class LocalView:
    """Subgraph induced by the ball of radius 1 or 2 around ``center``."""

    center: int
    radius: int
    nodes: frozenset[int]
    edges: frozenset[Edge]
    _adj: dict[int, frozenset[int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: dict[int, set[int]] = {v: set() for v in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})

    def neighbors(self, v: int) -> frozenset[int]:
        try:
            return self._adj[v]
        except KeyError:
            raise GraphError(f"node {v} is outside the view of {self.center}") from None

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def to_graph(self, n: int) -> Graph:
        """Embed the view into an ``n``-node graph; nodes outside it are isolated."""
        return Graph(n, self.edges)


def union_graph(n: int, views: Iterable[LocalView]) -> Graph:
    """Graph whose edge set is the union of the views' edge sets."""
    edges: set[Edge] = set()
    for view in views:
        edges |= view.edges
    return Graph(n, edges)


def _check_node(n: int, v: int) -> None:
    if not 0 <= v < n:
        raise GraphError(f"unknown node {v} (graph has {n} nodes)")


def _bfs_depths(adj: Sequence[Iterable[int]], source: int, limit: int) -> dict[int, int]:
    depth = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if depth[u] == limit:
            continue
        for w in adj[u]:
            if w not in depth:
                depth[w] = depth[u] + 1
                queue.append(w)
    return depth


# -- local statistics ----------------------------------------------------
# The counting helpers accept a raw adjacency sequence so the delta code can
# evaluate hypothetical (toggled) graphs without building Graph objects.

def _triangles(adj: Sequence[frozenset[int]], v: int) -> int:
    nbrs = adj[v]
    return sum(len(adj[a] & nbrs) for a in nbrs) // 2


def _quadrangles(adj: Sequence[frozenset[int]], v: int) -> int:
    # every 4-cycle through v is fixed by its opposite node w and the pair of
    # common neighbours it uses
    shared: dict[int, int] = {}
    for a in adj[v]:
        for w in adj[a]:
            if w != v:
                shared[w] = shared.get(w, 0) + 1
    return sum(c * (c - 1) // 2 for c in shared.values())


def _adjacency_of(g: Graph | LocalView, v: int):
    if isinstance(g, Graph):
        _check_node(g.n, v)
        return g.adjacency
    g.neighbors(v)  # raises for nodes outside the view
    return g._adj


def triangles_at(g: Graph | LocalView, v: int) -> int:
    """Number of 3-cycles through ``v``; needs at least the radius-1 view."""
    return _triangles(_adjacency_of(g, v), v)


def quadrangles_at(g: Graph | LocalView, v: int) -> int:
    """Number of 4-cycles through ``v``; needs at least the radius-2 view."""
    return _quadrangles(_adjacency_of(g, v), v)


def common_neighbors(g: Graph | LocalView, i: int, j: int) -> int:
    if i == j:
        raise GraphError("common_neighbors needs two distinct nodes")
    return len((g.neighbors(i) & g.neighbors(j)) - {i, j})


# -- serialization -------------------------------------------------------

def to_edge_list(g: Graph) -> str:
    lines = [str(g.n)] + [f"{i} {j}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def from_edge_list(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise GraphFormatError("empty edge list")
    try:
        if len(rows[0]) != 1:
            raise ValueError("first line must hold the node count")
        n = int(rows[0][0])
        edges = []
        for r in rows[1:]:
            if len(r) != 2:
                raise ValueError(f"expected 'i j', got {' '.join(r)!r}")
            edges.append((int(r[0]), int(r[1])))
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc
    return Graph(n, edges)


def to_json(g: Graph) -> str:
    return json.dumps({"n": g.n, "edges": [list(e) for e in g.edges()]})


def from_json(text: str) -> Graph:
    try:
        doc = json.loads(text)
        return Graph(int(doc["n"]), [tuple(e) for e in doc["edges"]])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GraphError):
            raise
        raise GraphFormatError(f"invalid JSON graph: {exc}") from exc


def load_graph(path) -> Graph:
    """Read an edge-list file, or a JSON graph when the suffix is ``.json``."""
    text = open(path, encoding="utf-8").read()
    return from_json(text) if str(path).endswith(".json") else from_edge_list(text)


def save_graph(g: Graph, path) -> None:
    text = to_json(g) + "\n" if str(path).endswith(".json") else to_edge_list(g)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
