"""Finite-time gossip primitives executed by every node.

Each protocol is a per-node state machine advanced in exchange steps: at
step ``t`` a node publishes :meth:`payload`, and once it holds the step-``t``
payloads of all its neighbours it calls :meth:`absorb`.  A node that has
finished keeps publishing its final payload, which is a fixed point of the
update.  :func:`run_lockstep` drives a set of protocols synchronously; the
simulator in :mod:`lapmoments.engine` drives the same objects under skewed
schedules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import Edge, Graph, LocalView, canonical
from .moments import CentralMoments, MomentVector, local_contribution

NO_BENEFIT = math.inf


class ConsensusError(RuntimeError):
    """Raised when a protocol is driven outside its contract."""


class TokenVector:
    """One bit per node; bits are only ever set, all-ones signals convergence."""

    __slots__ = ("bits",)

    def __init__(self, n: int, own: int | None = None):
        self.bits = np.zeros(n, dtype=bool)
        if own is not None:
            self.bits[own] = True

    def merge(self, other: "TokenVector") -> None:
        self.bits |= other.bits

    def full(self) -> bool:
        return bool(self.bits.all())

    def copy(self) -> "TokenVector":
        t = TokenVector(0)
        t.bits = self.bits.copy()
        return t


@dataclass(frozen=True)
class BestActionRecord:
    """A node's most beneficial toggle ``(proposer, partner)`` and its predicted outcome.

    ``score`` is the predicted CME or :data:`NO_BENEFIT`.  ``sign`` is +1 for
    an addition and -1 for a deletion (0 for the sentinel).
    """

    proposer: int
    partner: int
    score: float
    sign: int = 0
    central: CentralMoments | None = None
    moments: MomentVector | None = None

    @classmethod
    def sentinel(cls, proposer: int) -> "BestActionRecord":
        return cls(proposer, -1, NO_BENEFIT)

    @property
    def is_sentinel(self) -> bool:
        return self.score == NO_BENEFIT

    def key(self) -> tuple[float, int]:
        # ascending score, then the largest proposer label
        return (self.score, -self.proposer)

    def edge(self) -> Edge:
        return canonical(self.proposer, self.partner)

    def as_vector(self) -> list[float]:
        c = self.central.as_tuple() if self.central else (math.nan,) * 4
        return [float(self.proposer), float(self.partner), self.score, *c]


class GossipProtocol:
    kind = ""

    def __init__(self, node: int, n: int):
        self.node = node
        self.n = n
        self.step = 0
        self.tokens = TokenVector(n, node)
        self.done = False

    def payload(self):
        raise NotImplementedError

    def absorb(self, inbox: Mapping[int, object]) -> None:
        if self.done:
            raise ConsensusError(f"{self.kind} at node {self.node} already converged")
        self._merge(inbox)
        self.step += 1
        self._check_done()

    def rounds_bound(self) -> int:
        return self.n

    def _merge(self, inbox):
        raise NotImplementedError

    def _check_done(self) -> None:
        if self.tokens.full():
            self.done = True


# -- exact aggregation ------------------------------------------------------

class AggregationProtocol(GossipProtocol):
    """Flooding of per-node vectors; every node ends with the exact network average.

    The token vector coincides with the set of origins heard from, so the
    average is taken once all ``n`` contributions are known.
    """

    kind = "AGG"

    def __init__(self, node: int, n: int, value: Sequence[float]):
        super().__init__(node, n)
        self.known: dict[int, tuple] = {node: tuple(value)}
        self.result: tuple[float, ...] | None = None
        self._check_done()

    def payload(self):
        return (dict(self.known), self.tokens.copy())

    def _merge(self, inbox):
        for known, tokens in inbox.values():
            self.known.update(known)
            self.tokens.merge(tokens)

    def _check_done(self) -> None:
        super()._check_done()
        if self.done and self.result is None:
            dims = len(self.known[self.node])
            ordered = [self.known[v] for v in sorted(self.known)]
            self.result = tuple(
                sum(r[k] for r in ordered) / self.n if all(isinstance(r[k], int) for r in ordered)
                else math.fsum(r[k] for r in ordered) / self.n
                for k in range(dims)
            )


# -- connectivity verification ---------------------------------------------

class DeletionCheckProtocol(GossipProtocol):
    """Max-consensus deciding, for each owned edge, whether its removal disconnects.

    Node ``i`` keeps an ``n x n`` table ``x`` whose row ``j`` is its copy of
    owner ``j``'s state vector; ``x[j, l]`` is the entry for edge ``(j, l)``
    with ``l < j``.  ``-inf`` marks entries not yet discovered.  Owners seed
    their entries with their own label and every other node with ``-1`` on
    discovery.  The entry of edge ``(j, l)`` is never exchanged across that
    edge, so after convergence the two endpoints agree on it iff the graph
    minus the edge is connected.

    Token vectors certify that every node has started, which takes up to
    ``diam(G)`` steps; an entry may have to travel around a removed edge, so
    the update runs for ``n - 1`` steps, any simple path's length bound.
    """

    kind = "DELCHK"

    def __init__(self, node: int, n: int, owned: Sequence[int]):
        super().__init__(node, n)
        self.owned = sorted(owned)
        if any(l >= node for l in self.owned):
            raise ConsensusError(f"node {node} can only own edges to smaller labels")
        self.x = np.full((n, n), -np.inf)
        self.x[node, self.owned] = float(node)
        self.horizon = n - 1
        self.safe: frozenset[Edge] | None = None
        self._check_done()

    def payload(self):
        return (self.x.copy(), self.tokens.copy())

    def absorb(self, inbox):
        if self.step == self.horizon and not self.done:
            self._decide(inbox)
            return
        super().absorb(inbox)

    def _merge(self, inbox):
        x = self.x
        for k, (xk, tokens) in inbox.items():
            fresh = np.isfinite(xk) & ~np.isfinite(x)
            x[fresh] = -1.0
            # the entry of the edge joining us to k is not taken across that edge
            owner, partner = canonical(self.node, k)
            hold = x[owner, partner]
            np.maximum(x, xk, out=x)
            x[owner, partner] = hold
            self.tokens.merge(tokens)

    def _check_done(self) -> None:
        # completion is decided by the step horizon, see _decide
        pass

    def _decide(self, inbox) -> None:
        if not self.tokens.full():
            raise ConsensusError(f"node {self.node}: tokens incomplete after {self.horizon} steps")
        safe = set()
        for l in self.owned:
            theirs = inbox[l][0][self.node, l]
            if theirs == self.x[self.node, l]:
                safe.add((self.node, l))
        self.safe = frozenset(safe)
        self.done = True

    def rounds_bound(self) -> int:
        return self.horizon + 1


# -- global action election ------------------------------------------------

class ElectionProtocol(GossipProtocol):
    """Min-consensus over best-action records, ties to the largest proposer."""

    kind = "ELECT"

    def __init__(self, node: int, n: int, record: BestActionRecord):
        super().__init__(node, n)
        self.record = record
        self._check_done()

    def payload(self):
        return (self.record, self.tokens.copy())

    def _merge(self, inbox):
        best = self.record
        for rec, tokens in inbox.values():
            if rec.key() < best.key():
                best = rec
            self.tokens.merge(tokens)
        self.record = best


# -- drivers ---------------------------------------------------------------

def run_lockstep(neighbors: Sequence[frozenset[int]], protocols: Sequence[GossipProtocol],
                 max_steps: int | None = None) -> int:
    """Synchronously advance ``protocols`` (one per node) until all are done.

    Returns the number of exchange rounds used.
    """
    n = len(protocols)
    limit = max_steps if max_steps is not None else 2 * n + 2
    rounds = 0
    while not all(p.done for p in protocols):
        if rounds >= limit:
            raise ConsensusError(f"protocol did not converge within {limit} rounds")
        out = [p.payload() for p in protocols]
        for v, p in enumerate(protocols):
            if not p.done:
                p.absorb({k: out[k] for k in neighbors[v]})
        rounds += 1
    return rounds


def aggregate(g: Graph, values: Mapping[int, Sequence[float]]) -> dict[int, tuple[float, ...]]:
    protos = [AggregationProtocol(v, g.n, values[v]) for v in g.nodes()]
    run_lockstep(g.adjacency, protos)
    return {v: p.result for v, p in enumerate(protos)}


def aggregate_moments(g: Graph) -> dict[int, MomentVector]:
    """Every node's copy of the network moments, from 2-hop local contributions."""
    contrib = {v: local_contribution(g.local_subgraph(v, 2)) for v in g.nodes()}
    return {v: MomentVector(*avg) for v, avg in aggregate(g, contrib).items()}


def owned_edges(adj_or_view, i: int) -> list[int]:
    """Partners ``l < i`` of the edges node ``i`` has authority to delete."""
    nbrs = adj_or_view.neighbors(i) if isinstance(adj_or_view, (Graph, LocalView)) else adj_or_view[i]
    return sorted(l for l in nbrs if l < i)


def verify_deletions(g: Graph) -> dict[int, frozenset[Edge]]:
    """Safe deletion set of every node, computed by the distributed max-consensus."""
    protos = [DeletionCheckProtocol(v, g.n, owned_edges(g, v)) for v in g.nodes()]
    run_lockstep(g.adjacency, protos)
    return {v: p.safe for v, p in enumerate(protos)}


def elect_global_action(g: Graph, records: Mapping[int, BestActionRecord]) -> dict[int, BestActionRecord]:
    protos = [ElectionProtocol(v, g.n, records[v]) for v in g.nodes()]
    run_lockstep(g.adjacency, protos)
    return {v: p.record for v, p in enumerate(protos)}
