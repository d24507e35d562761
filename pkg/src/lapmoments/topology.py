"""Per-node greedy topology control: legal actions, scoring and application."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from .consensus import BestActionRecord
from .graph import Edge, Graph, GraphError, LocalView
from .moments import CentralMoments, MomentVector, centralize, cme, predicted_cme

# A candidate must lower the CME by more than this to count as beneficial;
# guards the greedy loop against round-off sized "improvements".
IMPROVEMENT_TOL = 1e-12


class ProtocolError(RuntimeError):
    """An elected action is no longer legal on the graph it is applied to."""


@dataclass(frozen=True)
class ActionSets:
    deletable: frozenset[Edge]
    addable: frozenset[Edge]


def enumerate_actions(view: LocalView, i: int, safe: Iterable[Edge]) -> ActionSets:
    """Node ``i``'s legal toggles: safe owned deletions and 2-hop additions ``(i, j)``, ``j < i``."""
    if view.radius != 2 or view.center != i:
        raise GraphError(f"enumerate_actions needs node {i}'s radius-2 view")
    nbrs = view.neighbors(i)
    deletable = frozenset(e for e in safe if e[0] == i and e[1] in nbrs and e[1] < i)
    addable = frozenset((i, j) for j in view.nodes if j < i and j not in nbrs)
    return ActionSets(deletable, addable)


def local_best(
    knowledge: Graph,
    i: int,
    sets: ActionSets,
    current: MomentVector,
    target: CentralMoments,
) -> BestActionRecord:
    """Score every candidate and keep the one with the lowest predicted CME.

    ``knowledge`` is node ``i``'s picture of the network; it must contain
    every edge within two hops of ``i`` and of each candidate partner.
    Equal predicted CMEs go to the larger partner label.  Without a strict
    improver the sentinel record is returned.
    """
    now = cme(centralize(current), target)
    best: BestActionRecord | None = None
    cache: dict[int, int] = {}
    candidates = [(e, -1) for e in sets.deletable] + [(e, 1) for e in sets.addable]
    for (_, j), sign in sorted(candidates, key=lambda c: -c[0][1]):
        score, after = predicted_cme(knowledge, current, target, i, j, sign, cache)
        if score < now - IMPROVEMENT_TOL and (best is None or score < best.score):
            best = BestActionRecord(i, j, score, sign, centralize(after), after)
    return best if best is not None else BestActionRecord.sentinel(i)


@dataclass(frozen=True)
class ControllerState:
    s: int
    moments: MomentVector
    cme: float
    target: CentralMoments
    terminated: bool = False

    @classmethod
    def initial(cls, moments: MomentVector, target: CentralMoments) -> "ControllerState":
        return cls(0, moments, cme(centralize(moments), target), target)

    def after(self, record: BestActionRecord) -> "ControllerState":
        if record.is_sentinel:
            return replace(self, terminated=True)
        return replace(self, s=self.s + 1, moments=record.moments, cme=record.score)


def check_legal(g: Graph, record: BestActionRecord) -> None:
    i, j = record.proposer, record.partner
    if not (0 <= j < i < g.n):
        raise ProtocolError(f"record ({i}, {j}) violates edge authority")
    present = g.has_edge(i, j)
    if record.sign == -1 and not present:
        raise ProtocolError(f"elected deletion ({i}, {j}) is not an edge")
    if record.sign == 1:
        if present:
            raise ProtocolError(f"elected addition ({i}, {j}) already exists")
        if j not in g.neighborhood(i, 2):
            raise ProtocolError(f"elected addition ({i}, {j}) is more than two hops away")


def apply_action(g: Graph, record: BestActionRecord, state: ControllerState) -> tuple[Graph, ControllerState]:
    """Toggle the elected edge and adopt the record's predicted moments and CME."""
    if record.is_sentinel:
        return g, state.after(record)
    check_legal(g, record)
    i, j = record.proposer, record.partner
    g2 = g.add_edge(i, j) if record.sign == 1 else g.remove_edge(i, j)
    return g2, state.after(record)
