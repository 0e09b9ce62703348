"""Command line entry point: ``mgsearch run | gen-domain | report | induce``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .core import SearchError
from .bench import io as report_io
from .bench.config import ExperimentConfig, load_config
from .bench.runner import contract_quality_run, improvement_factor, run_experiment

log = logging.getLogger("mgsearch")


def _params(pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise SearchError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    changes = {}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seeds"] = tuple(range(args.seed, args.seed + len(cfg.seeds)))
    if changes:
        cfg = cfg.replace(**changes)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    if cfg.mode == "contract-quality":
        rep = contract_quality_run(cfg)
        text = report_io.quality_csv(rep) if args.format == "csv" else report_io.quality_json(rep)
    else:
        rep = run_experiment(cfg)
        text = report_io.report_csv(rep) if args.format == "csv" else report_io.report_json(rep)
    path = out / f"{stem}.{args.format}"
    path.write_text(text)
    log.info("wrote %s", path)
    print(path)
    return 0


def _explicit_from_space(space, roots, max_nodes: int):
    from .domains.graphfile import ExplicitGraph
    from .oracle import reachable_states

    states = reachable_states(space, roots, max_nodes)
    index = {s: k for k, s in enumerate(states)}
    succ = tuple(tuple(index[t] for t in space.successors(s)) for s in states)
    goals = np.array([bool(space.is_goal(s)) for s in states])
    feats = np.array([np.asarray(space.features(s), dtype=np.float64) for s in states])
    return ExplicitGraph(succ, goals, feats)


def cmd_gen_domain(args) -> int:
    from .bench.domains import _GRID, _make_grid
    from .domains import alignment, knight, queens, webgraph
    from .domains.graphfile import save_graph

    p = _params(args.set)
    kind = args.kind
    if kind == "grid":
        unknown = sorted(set(p) - set(_GRID))
        if unknown:
            raise SearchError(f"unknown grid parameters: {', '.join(unknown)}")
        world = _make_grid({**_GRID, **p}, args.seed)
        cells = world.passable_cells()
        graph = _explicit_from_space(world.space(), cells, len(cells))
        save_graph(graph, args.out)
    elif kind == "web":
        save_graph(webgraph.synthetic_web_graph(seed=args.seed, **p).graph, args.out)
    elif kind == "queens":
        prob = queens.nqueens_problem(int(p.get("n", 8)))
        save_graph(_explicit_from_space(prob.space, prob.initial_states, args.max_nodes), args.out)
    elif kind == "knight":
        prob = knight.knight_problem(int(p.get("n", 5)))
        save_graph(_explicit_from_space(prob.space, prob.initial_states, args.max_nodes), args.out)
    else:
        rng = np.random.default_rng(args.seed)
        count, length, alphabet = int(p.get("count", 3)), int(p.get("length", 6)), str(p.get("alphabet", "ACGT"))
        seqs = ["".join(rng.choice(list(alphabet), size=int(rng.integers(1, length + 1)))) for _ in range(count)]
        alignment.alignment_state_space(seqs)  # validates
        Path(args.out).write_text("".join(f">seq{k}\n{s}\n" for k, s in enumerate(seqs)))
    print(args.out)
    return 0


def cmd_report(args) -> int:
    a = report_io.load_report(args.baseline)
    b = report_io.load_report(args.candidate)
    factors = improvement_factor(b, a)
    Path(args.out).write_text(report_io.comparison_csv(a, b, factors))
    print(args.out)
    return 0


def cmd_induce(args) -> int:
    from .domains.queens import queens_warm_models

    sizes = tuple(int(v) for v in args.sizes.split(","))
    models = queens_warm_models(sizes, args.depth, args.k)
    models.dump(args.out)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mgsearch", description="Multiple-goal heuristic search experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int, help="first seed; keeps the configured number of seeds")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.set_defaults(fn=cmd_run)

    g = sub.add_parser("gen-domain", help="write a generated domain to a file")
    g.add_argument("--kind", required=True, choices=("grid", "web", "queens", "knight", "msa"))
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--set", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    g.add_argument("--max-nodes", type=int, default=200000, help="size guard for queens and knight trees")
    g.set_defaults(fn=cmd_gen_domain)

    p = sub.add_parser("report", help="improvement factor of a candidate report over a baseline")
    p.add_argument("--baseline", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)

    m = sub.add_parser("induce", help="induce a warm-start model from exhaustive n-queens runs")
    m.add_argument("--sizes", default="5,6,7,8,9")
    m.add_argument("--depth", type=int, default=10)
    m.add_argument("--k", type=int, default=5)
    m.add_argument("--out", required=True)
    m.set_defaults(fn=cmd_induce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except (SearchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
