"""Command line front end: ``moments``, ``run``, ``verify`` and ``generate``.

Exit codes: 0 success, 2 invalid input, 3 invariant failure, 4 ``max_actions``
reached before the controller terminated.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

from . import artifacts
from .battery import FAULTS, battery_ok, run_battery, summary_line
from .consensus import ConsensusError
from .engine import RunResult, Schedule, run_to_convergence
from .generators import KINDS, generate
from .graph import Graph, GraphError, load_graph, save_graph, to_edge_list, to_json
from .moments import CentralMoments, centralize, load_target, moments_of
from .oracle import OracleError, cdf_sup_distance, eigenvalues, spectral_cdf, trace_moments
from .topology import ProtocolError

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_MAX_ACTIONS = 0, 2, 3, 4


class InvariantError(RuntimeError):
    pass


def _preset(n: int, target: dict, max_actions: int = 1000) -> dict:
    return {
        "n": n,
        "target": target,
        "init": {"kind": "random_connected", "seed": 1},
        "schedule": {"mode": "lockstep", "seed": 0, "max_lag": 0},
        "max_actions": max_actions,
    }


PRESETS = {
    "star10": _preset(10, {"kind": "star"}),
    "twostars20": _preset(20, {"kind": "two_stars"}),
    "chain20": _preset(20, {"kind": "chain"}),
    "ring20": _preset(20, {"kind": "ring"}),
    "smallworld40": _preset(40, {"kind": "small_world", "params": {"p": 1 / 40}, "seed": 0}, 100),
}


# -- config resolution -------------------------------------------------------

def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def _graph_spec(spec: dict, n: int, base: Path) -> Graph:
    if "file" in spec or "graph" in spec:
        return load_graph(_resolve(base, spec.get("graph", spec.get("file"))))
    return generate(spec["kind"], int(spec.get("n", n)), spec.get("params"), int(spec.get("seed", 0)))


def build_experiment(config: dict, base: Path = Path(".")) -> tuple[Graph, CentralMoments, Graph | None]:
    """Initial graph, target moments and (when known) the target graph."""
    try:
        n = int(config["n"])
        tspec, ispec = config["target"], config["init"]
        if "file" in tspec:
            target_graph = None
            target = load_target(_resolve(base, tspec["file"]))
        else:
            target_graph = _graph_spec(tspec, n, base)
            target = centralize(moments_of(target_graph))
        g0 = _graph_spec(ispec, n, base)
    except KeyError as exc:
        raise ValueError(f"config lacks key {exc}") from exc
    if g0.n != n:
        raise ValueError(f"initial graph has {g0.n} nodes, config says n={n}")
    if not g0.is_connected():
        raise GraphError("initial graph is disconnected")
    return g0, target, target_graph


def _schedule(config: dict) -> Schedule:
    s = config.get("schedule", {})
    return Schedule(s.get("mode", "lockstep"), int(s.get("seed", 0)), int(s.get("max_lag", 0)))


def check_run(result: RunResult) -> None:
    """Connectivity after every action and strictly decreasing CME."""
    for s, g in enumerate(result.graphs()):
        if not g.is_connected():
            raise InvariantError(f"graph disconnected after action {s}")
    scores = [row.cme for row in result.trajectory]
    for s, (a, b) in enumerate(zip(scores, scores[1:]), start=1):
        if not b < a:
            raise InvariantError(f"CME did not decrease at action {s}: {a!r} -> {b!r}")


def write_run(result: RunResult, config: dict, out: Path, target_graph: Graph | None) -> dict:
    g = result.final_graph
    artifacts.write_text(out / "trajectory.csv", artifacts.trajectory_csv(result.trajectory))
    artifacts.write_text(out / "initial_graph.txt", to_edge_list(result.initial_graph))
    artifacts.write_text(out / "final_graph.txt", to_edge_list(g))
    result_spec = eigenvalues(g)
    artifacts.write_text(out / "cdf_result.csv", artifacts.cdf_csv(spectral_cdf(result_spec)))
    summary = {
        "n": g.n,
        "actions": len(result.actions),
        "terminated": result.terminated,
        "final_cme": result.final_cme,
        "final_degree_sequence": sorted(g.degree_sequence(), reverse=True),
        "rounds": result.rounds,
        "messages": result.message_count,
        "target": list(result.target.as_tuple()),
    }
    if target_graph is not None:
        target_spec = eigenvalues(target_graph)
        artifacts.write_text(out / "cdf_target.csv", artifacts.cdf_csv(spectral_cdf(target_spec)))
        summary["cdf_sup_distance"] = cdf_sup_distance(target_spec, result_spec)
    artifacts.write_text(out / "config.json", artifacts.dump_json(config))
    artifacts.write_text(out / "summary.json", artifacts.dump_json(summary))
    return summary


# -- subcommands ---------------------------------------------------------------

def cmd_moments(args) -> int:
    g = load_graph(args.graph)
    m = moments_of(g)
    c = centralize(m)
    exact = trace_moments(g)
    report = {
        "m": list(m.as_tuple()),
        "c": list(c.as_tuple()),
        "oracle": list(exact.as_tuple()),
        "max_abs_diff": max(abs(a - b) for a, b in zip(m.as_tuple(), exact.as_tuple())),
    }
    text = artifacts.dump_json(report)
    if args.out:
        artifacts.write_text(Path(args.out), text)
    sys.stdout.write(text)
    return EXIT_OK


def _load_config(args) -> tuple[dict, Path]:
    if args.preset and args.config:
        raise ValueError("give either --preset or --config, not both")
    if args.preset:
        if args.preset not in PRESETS:
            raise ValueError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}")
        config, base = copy.deepcopy(PRESETS[args.preset]), Path(".")
        config["preset"] = args.preset
    elif args.config:
        path = Path(args.config)
        config, base = json.loads(path.read_text(encoding="utf-8")), path.parent
    else:
        raise ValueError("run needs --preset or --config")
    if args.seed is not None:
        config.setdefault("init", {})["seed"] = args.seed
    if args.out:
        config["output_dir"] = args.out
    config.setdefault("output_dir", f"out/{config.get('preset', 'run')}")
    return config, base


def cmd_run(args) -> int:
    config, base = _load_config(args)
    g0, target, target_graph = build_experiment(config, base)
    out = Path(config["output_dir"])
    trace_fh = None
    trace = None
    if args.trace:
        out.mkdir(parents=True, exist_ok=True)
        trace_fh = open(out / "trace.jsonl", "w", encoding="utf-8")

        def trace(rec):
            trace_fh.write(json.dumps(rec, sort_keys=True) + "\n")
    try:
        result = run_to_convergence(g0, target, _schedule(config), int(config.get("max_actions", 1000)), trace)
    finally:
        if trace_fh is not None:
            trace_fh.close()
    check_run(result)
    summary = write_run(result, config, out, target_graph)
    print(f"actions={summary['actions']} final_cme={summary['final_cme']!r} terminated={summary['terminated']} out={out}")
    return EXIT_OK if result.terminated else EXIT_MAX_ACTIONS


def cmd_verify(args) -> int:
    config = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    n = int(args.n if args.n is not None else config.get("n", 8))
    graphs = int(args.graphs if args.graphs is not None else config.get("graphs", 10))
    seed = int(args.seed if args.seed is not None else config.get("seed", 1))
    if n < 1 or graphs < 1:
        raise ValueError("verify needs n >= 1 and graphs >= 1")
    kwargs = {"delta_fn": FAULTS[args.inject_fault]} if args.inject_fault else {}
    res = run_battery(n, graphs, seed, **kwargs)
    for name, r in res.items():
        print(summary_line(name, r))
    if args.out:
        doc = {"n": n, "graphs": graphs, "seed": seed, "fault": args.inject_fault,
               "checks": {k: r.as_dict() for k, r in res.items()}}
        artifacts.write_text(Path(args.out), artifacts.dump_json(doc))
    return EXIT_OK if battery_ok(res) else EXIT_INVARIANT


def cmd_generate(args) -> int:
    params = {}
    if args.p is not None:
        params["p"] = args.p
    if args.hops is not None:
        params["hops"] = args.hops
    g = generate(args.kind, args.n, params, args.seed if args.seed is not None else 0)
    if args.out:
        save_graph(g, args.out)
    else:
        sys.stdout.write(to_json(g) + "\n" if args.json else to_edge_list(g))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapmoments", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="spectral moments of a graph file, cross-checked by traces")
    p.add_argument("graph", help="edge-list or .json graph file")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("run", help="run the distributed controller on a preset or config")
    p.add_argument("--preset", help=f"one of {', '.join(PRESETS)}")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int, help="override the initial graph seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--trace", action="store_true", help="write every message to trace.jsonl")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="cross-validate distributed computations against the oracle")
    p.add_argument("--config", help="JSON with optional n, graphs, seed")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, help="graph order (default 8)")
    p.add_argument("--graphs", type=int, help="number of random graphs (default 10)")
    p.add_argument("--inject-fault", choices=sorted(FAULTS), help="mutation test of the battery")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write a graph of a standard family")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("n", type=int)
    p.add_argument("--p", type=float, help="rewiring or edge probability")
    p.add_argument("--hops", type=int, help="small-world lattice reach")
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true", help="print JSON instead of an edge list")
    p.add_argument("--out", help="output file (.json suffix selects JSON)")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvariantError, ConsensusError, ProtocolError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (GraphError, OracleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
