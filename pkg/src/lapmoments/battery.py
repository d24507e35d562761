"""Cross-validation of the distributed computations against the oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .consensus import verify_deletions
from .engine import Schedule, run_to_convergence
from .generators import random_connected
from .graph import Graph
from .moments import MomentDelta, centralize, moment_delta, moments_of
from .oracle import exhaustive_best_action, safe_deletions, trace_moments

DeltaFn = Callable[[Graph, int, int, int], MomentDelta]
CHECKS = ("moments_identity", "delta_identity", "safe_set_vs_bfs", "election_vs_exhaustive")


@dataclass
class CheckResult:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failures: list[str] = field(default_factory=list)

    def record(self, ok: bool, what: str) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 10:
                self.failures.append(what)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "failed": self.failed, "skipped": self.skipped,
                "failures": list(self.failures)}


def close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def flipped_dm3(g: Graph, i: int, j: int, sign: int) -> MomentDelta:
    """Fault injection: the third increment with its sign reversed."""
    d = moment_delta(g, i, j, sign)
    return MomentDelta(d.sign, d.i, d.j, d.d1, d.d2, -d.d3, d.d4)


FAULTS: dict[str, DeltaFn] = {"flip-dm3": flipped_dm3}


def _toggles(g: Graph):
    for i in g.nodes():
        ball = g.neighborhood(i, 2)
        for j in range(i):
            if g.has_edge(i, j):
                yield i, j, -1
            elif j in ball:
                yield i, j, 1


def run_battery(n: int = 8, graphs: int = 10, seed: int = 1, delta_fn: DeltaFn = moment_delta,
                election_max_n: int = 12) -> dict[str, CheckResult]:
    rng = np.random.default_rng(seed)
    res = {name: CheckResult() for name in CHECKS}
    for k in range(graphs):
        g = random_connected(n, rng)
        tag = f"graph {k}"

        exact = trace_moments(g).as_tuple()
        res["moments_identity"].record(
            all(close(a, b) for a, b in zip(moments_of(g).as_tuple(), exact)), tag)

        before = np.array(exact)
        any_toggle = False
        for i, j, sign in _toggles(g):
            any_toggle = True
            after = np.array(trace_moments(g.toggle_edge(i, j)).as_tuple())
            got = delta_fn(g, i, j, sign).as_tuple()
            res["delta_identity"].record(
                all(close(x, y) for x, y in zip(got, after - before)), f"{tag} toggle {sign:+d}({i},{j})")
        if not any_toggle:
            res["delta_identity"].skipped += 1

        if g.num_edges == 0:
            res["safe_set_vs_bfs"].skipped += 1
        else:
            res["safe_set_vs_bfs"].record(verify_deletions(g) == safe_deletions(g), tag)

        if n > election_max_n:
            res["election_vs_exhaustive"].skipped += 1
            continue
        target = centralize(moments_of(random_connected(n, rng)))
        run = run_to_convergence(g, target, Schedule())
        for s, (gs, rec) in enumerate(zip(run.graphs(), run.records)):
            want = exhaustive_best_action(gs, target)
            same = (rec.proposer, rec.partner, rec.sign) == (want.proposer, want.partner, want.sign)
            same = same and (rec.is_sentinel and want.is_sentinel or close(rec.score, want.score))
            res["election_vs_exhaustive"].record(same, f"{tag} epoch {s}")
    return res


def battery_ok(res: dict[str, CheckResult]) -> bool:
    return all(r.failed == 0 for r in res.values())


def summary_line(name: str, r: CheckResult) -> str:
    status = "PASS" if r.failed == 0 else "FAIL"
    return f"{status} {name}: {r.passed} passed, {r.failed} failed, {r.skipped} skipped"

