"""Deterministic round-based simulator hosting one agent per node.

Agents talk only to their current neighbours.  Every protocol message is
tagged with the sender's run label (1, 2, 3 cyclically), the protocol kind
and the exchange step, and an agent only combines step-``t`` messages of
its own run.  A fast agent therefore waits for slow neighbours, and the
outcome of a run does not depend on the schedule: lockstep and skewed
executions elect the same actions.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable

import numpy as np

from .consensus import (
    AggregationProtocol,
    BestActionRecord,
    ConsensusError,
    DeletionCheckProtocol,
    ElectionProtocol,
    GossipProtocol,
    owned_edges,
)
from .graph import Graph, GraphError, LocalView, union_graph
from .moments import CentralMoments, MomentVector, centralize, cme, local_contribution
from .topology import ControllerState, apply_action, enumerate_actions, local_best

RESYNC_EVERY = 100
RUN_LABELS = (1, 2, 3)


def next_label(r: int) -> int:
    return r % 3 + 1


def prev_label(r: int) -> int:
    return (r - 2) % 3 + 1


@dataclass(frozen=True)
class Schedule:
    """``lockstep`` ticks every agent each round; ``skewed`` lets agents sleep up to ``max_lag`` rounds."""

    mode: str = "lockstep"
    seed: int = 0
    max_lag: int = 0

    def __post_init__(self):
        if self.mode not in ("lockstep", "skewed"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.max_lag < 0 or (self.mode == "lockstep" and self.max_lag):
            raise ValueError("max_lag must be >= 0 and is only meaningful for skewed schedules")

    @classmethod
    def skewed(cls, max_lag: int, seed: int = 0) -> "Schedule":
        return cls("skewed", seed, max_lag)


@dataclass(frozen=True)
class Message:
    round: int
    src: int
    dst: int
    kind: str
    run: int
    step: int
    payload: Any
    final: bool = False

    def to_records(self) -> list[dict]:
        """Trace-log form: the protocol record(s) plus the TOKEN vector."""
        base = {"round": self.round, "src": self.src, "dst": self.dst, "run": self.run,
                "step": self.step, "final": self.final}
        body, tokens = self.payload
        out = []
        if self.kind == "AGG":
            flat = [float(x) for v in sorted(body) for x in (v, *body[v])]
            out.append({**base, "kind": "AGG", "owner": -1, "payload": flat})
        elif self.kind == "DELCHK":
            for owner in np.flatnonzero(np.isfinite(body).any(axis=1)):
                cols = np.flatnonzero(np.isfinite(body[owner]))
                flat = [float(x) for l in cols for x in (l, body[owner, l])]
                out.append({**base, "kind": "DELCHK", "owner": int(owner), "payload": flat})
        else:
            vec = [x if math.isfinite(x) else None for x in body.as_vector()]
            out.append({**base, "kind": "ELECT", "owner": body.proposer, "payload": vec})
        out.append({**base, "kind": "TOKEN", "owner": -1, "payload": [float(b) for b in tokens.bits]})
        return out


@dataclass(frozen=True)
class TrajectoryRow:
    s: int
    action: str  # "+", "-" or "" for the initial state
    i: int | None
    j: int | None
    cme: float
    m1: float
    c2: float
    c3: float
    c4: float


def _row(s: int, record: BestActionRecord | None, score: float, c: CentralMoments) -> TrajectoryRow:
    if record is None:
        return TrajectoryRow(s, "", None, None, score, *c.as_tuple())
    return TrajectoryRow(s, "+" if record.sign == 1 else "-", record.proposer, record.partner,
                         score, *c.as_tuple())


class _RunBuffer:
    """Messages of one run label, by protocol kind."""

    def __init__(self):
        self.steps: dict[str, dict[int, dict[int, Any]]] = {}
        self.finals: dict[str, dict[int, tuple[int, Any]]] = {}

    def put(self, msg: Message) -> None:
        if msg.final:
            self.finals.setdefault(msg.kind, {})[msg.src] = (msg.step, msg.payload)
        else:
            self.steps.setdefault(msg.kind, {}).setdefault(msg.src, {})[msg.step] = msg.payload

    def get(self, kind: str, src: int, step: int):
        p = self.steps.get(kind, {}).get(src, {}).get(step)
        if p is not None:
            return p
        fin = self.finals.get(kind, {}).get(src)
        if fin is not None and fin[0] <= step:
            return fin[1]
        return None


class NodeAgent:
    """State machine of one node: aggregate, verify deletions, propose, elect, apply."""

    def __init__(self, node: int, n: int, neighbors: Iterable[int], target: CentralMoments, world: "World"):
        self.node = node
        self.n = n
        self.neighbors = set(neighbors)
        self.target = target
        self.world = world
        self.label = 1
        self.label_history = [1]
        self.neighbor_label = {k: 1 for k in self.neighbors}
        self.state: ControllerState | None = None
        self.safe: frozenset = frozenset()
        self.view: LocalView | None = None
        self.protocol: GossipProtocol | None = None
        self.halted = False
        self.waiting = False
        self._phases: deque[str] = deque()
        self._buffers = {r: _RunBuffer() for r in RUN_LABELS}
        self._begin_epoch()

    # -- messaging -------------------------------------------------------
    def receive(self, msg: Message) -> None:
        if msg.run not in (self.label, next_label(self.label)):
            return  # stale message of a finished run
        self._buffers[msg.run].put(msg)
        self.neighbor_label[msg.src] = msg.run

    def _send(self, step: int, final: bool = False) -> None:
        p = self.protocol
        payload = p.payload()
        for k in sorted(self.neighbors):
            self.world.post(Message(self.world.round, self.node, k, p.kind, self.label, step, payload, final))

    # -- run labels --------------------------------------------------------
    def advance_run(self) -> int:
        """Enter the next run once no neighbour lags one run behind."""
        behind = prev_label(self.label)
        if any(self.neighbor_label.get(k) == behind for k in self.neighbors):
            return self.label
        new = next_label(self.label)
        self._buffers[next_label(new)] = _RunBuffer()  # the run two behind `new`
        self.label = new
        self.label_history.append(new)
        self.waiting = False
        self._begin_epoch()
        return new

    # -- epoch ---------------------------------------------------------------
    def _begin_epoch(self) -> None:
        self.view = self.world.view(self.node)
        self._phases.clear()
        if self.state is None or self.state.s % RESYNC_EVERY == 0:
            self._phases.append("AGG")
        self._phases.extend(("DELCHK", "ELECT"))
        self._start_phase()

    def _start_phase(self) -> None:
        kind = self._phases.popleft()
        if kind == "AGG":
            self.protocol = AggregationProtocol(self.node, self.n, local_contribution(self.view))
        elif kind == "DELCHK":
            self.protocol = DeletionCheckProtocol(self.node, self.n, owned_edges(self.view, self.node))
        else:
            self.protocol = ElectionProtocol(self.node, self.n, self._propose())
        self._send(0, final=self.protocol.done)

    def _propose(self) -> BestActionRecord:
        sets = enumerate_actions(self.view, self.node, self.safe)
        partners = sorted({j for _, j in sets.deletable | sets.addable})
        knowledge = union_graph(self.n, [self.view, *(self.world.view(j) for j in partners)])
        return local_best(knowledge, self.node, sets, self.state.moments, self.target)

    def _finish_phase(self) -> None:
        p = self.protocol
        if isinstance(p, AggregationProtocol):
            moments = MomentVector(*p.result)
            if self.state is None:
                self.state = ControllerState.initial(moments, self.target)
            else:
                self.state = replace(self.state, moments=moments,
                                     cme=cme(centralize(moments), self.target))
        elif isinstance(p, DeletionCheckProtocol):
            self.safe = p.safe
        else:
            self._apply(p.record)
            return
        self._start_phase()

    def _apply(self, record: BestActionRecord) -> None:
        self.world.commit(self.state, record)
        if not record.is_sentinel and self.node in (record.proposer, record.partner):
            other = record.partner if self.node == record.proposer else record.proposer
            if record.sign == 1:
                self.neighbors.add(other)
                self.neighbor_label[other] = self.label
            else:
                self.neighbors.discard(other)
                self.neighbor_label.pop(other, None)
        self.state = self.state.after(record)
        self.protocol = None
        if self.state.terminated or self.state.s >= self.world.max_actions:
            self.halted = True
        else:
            self.waiting = True

    # -- scheduling ------------------------------------------------------------
    def tick(self) -> None:
        while not self.halted and self._advance():
            pass

    def _advance(self) -> bool:
        if self.waiting:
            before = self.label
            return self.advance_run() != before
        p = self.protocol
        if p.done:
            self._finish_phase()
            return True
        buf = self._buffers[self.label]
        inbox = {}
        for k in self.neighbors:
            payload = buf.get(p.kind, k, p.step)
            if payload is None:
                return False
            inbox[k] = payload
        p.absorb(inbox)
        if p.done:
            if not isinstance(p, DeletionCheckProtocol):
                self._send(p.step, final=True)
        else:
            self._send(p.step)
        return True


class World:
    """Authoritative graph, message queues and the seeded scheduler."""

    def __init__(self, graph: Graph, target: CentralMoments, schedule: Schedule | None = None,
                 max_actions: int = 1000, trace: Callable[[dict], None] | None = None):
        if graph.n == 0 or not graph.is_connected():
            raise GraphError("the initial graph must be non-empty and connected")
        self.graph = graph
        self.initial_graph = graph
        self.target = target
        self.schedule = schedule or Schedule()
        self.max_actions = max_actions
        self.trace = trace
        self.rng = np.random.default_rng(self.schedule.seed)
        self.round = 0
        self.message_count = 0
        self.records: list[BestActionRecord] = []
        self.trajectory: list[TrajectoryRow] = []
        self.commit_rounds: list[int] = []
        self._views: dict[int, LocalView] = {}
        self._outbox: list[Message] = []
        self._asleep = [0] * graph.n
        self.agents = [NodeAgent(v, graph.n, graph.neighbors(v), target, self) for v in graph.nodes()]

    def view(self, v: int) -> LocalView:
        if v not in self._views:
            self._views[v] = self.graph.local_subgraph(v, 2)
        return self._views[v]

    def post(self, msg: Message) -> None:
        self._outbox.append(msg)
        self.message_count += 1
        if self.trace is not None:
            for rec in msg.to_records():
                self.trace(rec)

    def commit(self, state: ControllerState, record: BestActionRecord) -> None:
        """Apply the elected action once per epoch; later callers must agree with it."""
        s = state.s
        if s < len(self.records):
            if self.records[s] != record:
                raise ConsensusError(f"epoch {s}: agents disagree on the elected action")
            return
        if s != len(self.records):
            raise ConsensusError(f"epoch {s} committed out of order")
        if s == 0:
            self.trajectory.append(_row(0, None, state.cme, centralize(state.moments)))
        self.graph, after = apply_action(self.graph, record, state)
        self._views.clear()
        self.records.append(record)
        self.commit_rounds.append(self.round)
        if not record.is_sentinel:
            self.trajectory.append(_row(after.s, record, record.score, record.central))

    def _awake(self) -> list[bool]:
        if self.schedule.mode == "lockstep":
            return [True] * len(self.agents)
        awake = []
        for v in range(len(self.agents)):
            if self._asleep[v] < self.schedule.max_lag and self.rng.random() < 0.5:
                self._asleep[v] += 1
                awake.append(False)
            else:
                self._asleep[v] = 0
                awake.append(True)
        return awake

    def step(self) -> None:
        """One round: deliver last round's messages in seeded order, then tick awake agents."""
        self.round += 1
        batch, self._outbox = self._outbox, []
        for idx in self.rng.permutation(len(batch)):
            msg = batch[idx]
            self.agents[msg.dst].receive(msg)
        for agent, awake in zip(self.agents, self._awake()):
            if awake and not agent.halted:
                agent.tick()

    @property
    def done(self) -> bool:
        return all(a.halted for a in self.agents)

    def epoch_round_bound(self) -> int:
        """Rounds one epoch may take: three phases of at most ``n + 1`` exchanges each."""
        return 3 * (self.graph.n + 2) * (self.schedule.max_lag + 1)

    def run(self, max_rounds: int | None = None) -> "RunResult":
        if max_rounds is None:
            max_rounds = (self.max_actions + 1) * self.epoch_round_bound()
        while not self.done:
            if self.round >= max_rounds:
                raise ConsensusError(f"simulation exceeded {max_rounds} rounds")
            self.step()
        return RunResult(
            initial_graph=self.initial_graph,
            final_graph=self.graph,
            target=self.target,
            trajectory=list(self.trajectory),
            records=list(self.records),
            terminated=bool(self.records) and self.records[-1].is_sentinel,
            rounds=self.round,
            message_count=self.message_count,
            commit_rounds=list(self.commit_rounds),
            label_history={a.node: list(a.label_history) for a in self.agents},
        )


@dataclass
class RunResult:
    initial_graph: Graph
    final_graph: Graph
    target: CentralMoments
    trajectory: list[TrajectoryRow]
    records: list[BestActionRecord]
    terminated: bool
    rounds: int
    message_count: int
    commit_rounds: list[int] = field(default_factory=list)
    label_history: dict[int, list[int]] = field(default_factory=dict)

    @property
    def actions(self) -> list[BestActionRecord]:
        return [r for r in self.records if not r.is_sentinel]

    @property
    def final_cme(self) -> float:
        return self.trajectory[-1].cme

    def graphs(self):
        """Replay the topology sequence ``G(0), G(1), ...``."""
        g = self.initial_graph
        yield g
        for r in self.actions:
            g = g.add_edge(r.proposer, r.partner) if r.sign == 1 else g.remove_edge(r.proposer, r.partner)
            yield g


def run_to_convergence(g0: Graph, target: CentralMoments, schedule: Schedule | None = None,
                       max_actions: int = 1000, trace: Callable[[dict], None] | None = None) -> RunResult:
    """Run the distributed greedy controller from ``g0`` until no action helps."""
    return World(g0, target, schedule, max_actions, trace).run()
