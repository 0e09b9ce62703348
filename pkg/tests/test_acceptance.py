"""Acceptance criteria, one test each.

Every test records a one-line verdict in ``RESULTS``; the lines are printed
in the terminal summary (see ``conftest.py``) and by running this file
directly.  Expensive runs shared by several criteria are cached.
"""

import functools
import os
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import dict_space, problem_of, random_dag, random_tree
from mgsearch.bench import ExperimentConfig, run_experiment
from mgsearch.bench.io import report_csv
from mgsearch.bench.runner import improvement_factor
from mgsearch.core import SearchProblem
from mgsearch.domains import alignment, grid as gridmod, queens
from mgsearch.oracle import exact_shortest_paths, exhaustive_goals, opt_membership
from mgsearch.search import BestFirstSearch, Scorer, StateScorer, astar_epsilon_multigoal, best_first_multigoal
from mgsearch.utility import MarginalUtility, SupportThreshold

RESULTS: dict = {}

pytestmark = pytest.mark.acceptance


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def verdict_lines() -> list:
    return [RESULTS[k] for k in sorted(RESULTS)]


# -- 1: counters equal a brute-force recount ------------------------------------------


def _recount(children, goal, i, D):
    N = np.zeros(D, dtype=int)
    G = np.zeros(D, dtype=int)
    dist = {i: 0}
    frontier = [i]
    for d in range(1, D + 1):
        nxt = []
        for u in frontier:
            for v in children[u]:
                if v not in dist:
                    dist[v] = d
                    nxt.append(v)
                    N[d - 1 :] += 1
                    G[d - 1 :] += goal[v]
        frontier = nxt
    return N, G


def test_criterion_01_counter_recount():
    t0 = time.perf_counter()
    rng = random.Random(1)
    bad = 0
    nodes = 0
    for _ in range(200):
        adj, goals = random_dag(rng, rng.randint(2, 500), max_in=4)
        out = best_first_multigoal(problem_of(adj, goals), depth_bound=4, track_counters=True)
        g = out.graph
        for i in range(len(g)):
            N, G = _recount(g.children, g.goal, i, 4)
            nodes += 1
            if not (np.array_equal(g.N[i], N) and np.array_equal(g.G[i], G)):
                bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 60
    record(1, ok, f"{nodes} nodes on 200 graphs, {bad} mismatches, {dt:.1f}s (limit 60s)")
    assert ok


# -- 2: MU equals subtree goal density on fully explored trees ------------------------------


def _subtree(adj, n):
    out = []
    stack = list(adj[n])
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(adj[v])
    return out


def test_criterion_02_mu_tree_equivalence():
    rng = random.Random(2)
    checked = bad = 0
    for _ in range(100):
        adj, goals = random_tree(rng, rng.randint(2, 300))
        height = max(1, _height(adj, 0))
        out = best_first_multigoal(problem_of(adj, goals), depth_bound=height, track_counters=True)
        g = out.graph
        mu = MarginalUtility(g, SupportThreshold(1))
        for i, s in enumerate(g.states):
            sub = _subtree(adj, s)
            if not sub:
                continue
            checked += 1
            if mu.mu_estimate(i, height) != sum(v in goals for v in sub) / len(sub):
                bad += 1
    record(2, bad == 0, f"{checked} internal nodes on 100 trees, {bad} mismatches")
    assert bad == 0


def _height(adj, n):
    return 1 + max((_height(adj, c) for c in adj[n]), default=-1)


# -- 3: the oracle-backed perfect scorer only expands optimal-forest roots -------------------


class PerfectScorer(Scorer):
    dynamic = True
    frontier_dependent = True

    def __init__(self, limit):
        self.limit = limit

    def score(self, ids):
        g = self.ctx.graph
        open_states = [g.states[i] for i in ids]
        explored = [s for s in g.states if s not in set(open_states)]
        collected = set(self.ctx.collector.goals)
        r = self.limit - self.ctx.meter.generated
        members = opt_membership(self.ctx.space, open_states, collected, r, explored)
        return np.array([0.0 if s in members else 1.0 for s in open_states])


def test_criterion_03_perfect_heuristic():
    t0 = time.perf_counter()
    rng = random.Random(3)
    bad = 0
    done = 0
    while done < 50:
        adj, goals = random_dag(rng, rng.randint(8, 16), max_in=2, goal_rate=0.3)
        roots = tuple(rng.sample(range(min(5, len(adj))), 3))
        # drop edges into the roots so they start as the open list
        adj = {k: [v for v in vs if v not in roots] for k, vs in adj.items()}
        R = rng.randint(2, 6)
        space = dict_space(adj, goals)
        members = opt_membership(space, list(roots), set(), R)
        if len(members) == len(roots):
            continue  # every ordering is optimal here
        search = BestFirstSearch(SearchProblem(space, roots, R), PerfectScorer(R))
        search.run()
        if not search.expansion_order:
            continue
        done += 1
        first = search.graph.states[search.expansion_order[0]]
        bad += first not in members
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 120
    record(3, ok, f"50 instances where some root is suboptimal, {bad} first expansions outside an optimal forest, {dt:.1f}s (limit 120s)")
    assert ok


# -- 4, 5, 6: distance heuristics on 50x50 grids --------------------------------------------

GRID_SEEDS = tuple(range(50))


@functools.lru_cache(maxsize=None)
def grid_mean(heuristic: str, placement: str = "scattered", disabling: bool = True):
    cfg = ExperimentConfig(
        domain="grid",
        domain_params={"width": 50, "height": 50, "goals": 20, "placement": placement},
        seeds=GRID_SEEDS,
        heuristic=heuristic,
        disabling=disabling,
        R_pct=20,
        checkpoint_pct=10,
    )
    t0 = time.perf_counter()
    rep = run_experiment(cfg)
    return rep.means[-1], time.perf_counter() - t0


def test_criterion_04_distance_ordering():
    m = {h: grid_mean(h) for h in ("bfs", "min_dist", "sum", "progress")}
    goals = {h: v[0] for h, v in m.items()}
    dt = sum(v[1] for v in m.values())
    top = goals["progress"] > max(goals["sum"], goals["min_dist"])
    floor = min(goals["progress"], goals["sum"], goals["min_dist"]) >= 1.5 * goals["bfs"]
    ok = top and floor and dt < 300
    shown = ", ".join(f"{h}={v:.2f}" for h, v in goals.items())
    record(4, ok, f"mean goals of 20 at 20% R: {shown}; progress on top: {top}; all >= 1.5x bfs: {floor}; {dt:.0f}s")
    assert ok


def test_criterion_05_clustered_progress():
    mean, dt = grid_mean("progress", "clustered")
    share = mean / 20
    ok = share >= 0.7 and dt < 300
    record(5, ok, f"progress collects {100 * share:.1f}% of clustered goals at 20% R (need 70%), {dt:.0f}s")
    assert ok


def test_criterion_06_disabling_helps():
    on, _ = grid_mean("sum", disabling=True)
    off, _ = grid_mean("sum", disabling=False)
    ok = on >= off
    record(6, ok, f"sum with disabling {on:.2f} vs without {off:.2f} mean goals")
    assert ok


# -- 7, 8, 12: synthetic web graphs ---------------------------------------------------------

WEB_SEEDS = tuple(range(5))


def web_config(heuristic: str, **kw) -> ExperimentConfig:
    base = dict(
        domain="web",
        domain_params={"n_nodes": 30000, "goal_rate": 0.01},
        seeds=WEB_SEEDS,
        trials=5,
        heuristic=heuristic,
        R_pct=20,
        checkpoint_pct=5,
        assumed_budget=20,
        refresh_interval=50,
    )
    base.update(kw)
    return ExperimentConfig(**base)


@functools.lru_cache(maxsize=None)
def web_run(heuristic: str, mode: str = "anytime", R_pct: float = 20):
    t0 = time.perf_counter()
    rep = run_experiment(web_config(heuristic, mode=mode, R_pct=R_pct))
    return rep, time.perf_counter() - t0


def test_criterion_07_mu_beats_distance():
    (dist, t1), (mu, t2) = web_run("distance"), web_run("mu")
    f = improvement_factor(mu, dist)
    final = f[-1]
    first = next(k for k, m in enumerate(dist.means) if m > 0)
    crosses = f[first] < 1 < final
    dt = t1 + t2
    ok = final >= 1.3 and crosses and dt < 600
    curve = " ".join(f"{v:.2f}" for v in f[first::4])
    record(7, ok, f"MU/distance at 20%: {final:.2f} (need 1.3); curve from below 1 to above: {crosses} [{curve}]; {dt:.0f}s")
    assert ok


def _pairs(rep):
    return {(r.seed, r.trial): r for r in rep.results}


def test_criterion_08_combined_dominance():
    dist, mu, comb = (_pairs(web_run(h)[0]) for h in ("distance", "mu", "combined"))
    R = web_run("distance")[0].generated[-1]
    cuts = (R // 2, R)  # 10% and 20% of the graph
    wins = 0
    for key, c in comb.items():
        wins += all(c.goals_at(x) >= max(dist[key].goals_at(x), mu[key].goals_at(x)) for x in cuts)
    frac = wins / len(comb)
    ok = frac >= 0.7
    record(8, ok, f"combined >= max(distance, MU) at 10% and 20% in {wins}/{len(comb)} seed pairs ({100 * frac:.0f}%, need 70%)")
    assert ok


def test_criterion_12_contract_vs_anytime():
    contract, _ = web_run("mu", "contract-resources", 10)
    anytime, _ = web_run("mu")
    cut = anytime.generated[-1] // 2  # an anytime run cut at 10% of the graph
    wins = 0
    for s in WEB_SEEDS:
        c = np.mean([r.goals for r in contract.results if r.seed == s])
        a = np.mean([r.goals_at(cut) for r in anytime.results if r.seed == s])
        wins += c >= a
    frac = wins / len(WEB_SEEDS)
    ok = frac >= 0.6
    record(12, ok, f"contract >= anytime at 10% in {wins}/{len(WEB_SEEDS)} seeds ({100 * frac:.0f}%, need 60%)")
    assert ok


# -- 9: backtracking with MU on 10-queens ----------------------------------------------------


@pytest.fixture(scope="module")
def warm_model(tmp_path_factory):
    path = tmp_path_factory.mktemp("warm") / "queens.mgsm"
    queens.queens_warm_models((5, 6, 7, 8, 9), depth_bound=10).dump(path)
    return str(path)


def test_criterion_09_backtracking_mu(warm_model):
    t0 = time.perf_counter()
    space_goals = exhaustive_goals(queens.nqueens_space(10), [()])
    base = dict(domain="queens", domain_params={"n": 10}, algorithm="backtracking", R_pct=10, trials=20, depth_bound=10)
    lex = run_experiment(ExperimentConfig(heuristic="lexicographic", **base))
    mu = run_experiment(
        ExperimentConfig(heuristic="induction", mode="contract-resources", warm_start=warm_model, **base)
    )
    full = run_experiment(ExperimentConfig(heuristic="lexicographic", **dict(base, R_pct=100, trials=1)))
    dt = time.perf_counter() - t0
    ratio = mu.means[-1] / lex.means[-1]
    complete = len(space_goals) == 724 and full.means[-1] == 724
    ok = ratio >= 1.3 and complete and dt < 300
    record(
        9,
        ok,
        f"MU {mu.means[-1]:.1f} vs lexicographic {lex.means[-1]:.1f} goals at 10% ({ratio:.2f}x, need 1.3); "
        f"unlimited run finds {full.means[-1]:.0f} of {len(space_goals)}; {dt:.0f}s",
    )
    assert ok


# -- 10, 11: A* epsilon ---------------------------------------------------------------------


def _triples():
    rng = np.random.default_rng(10)
    return [
        ["".join(rng.choice(list("ACGT"), size=int(rng.integers(1, 7)))) for _ in range(3)] for _ in range(3)
    ]


def test_criterion_10_astar_alignment_set():
    t0 = time.perf_counter()
    bad = []
    sizes = []
    for seqs in _triples():
        out = alignment.alignment_space(seqs, 0.1).solve()
        got = {moves for _, moves in out.goals}
        want = set(alignment.enumerate_alignments(seqs, 0.1))
        sizes.append(len(want))
        if got != want:
            bad.append(seqs)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120
    record(10, ok, f"3 triples, oracle set sizes {sizes}, {len(bad)} mismatches, {dt:.1f}s (limit 120s)")
    assert ok


def test_criterion_11_epsilon_optimality():
    eps = 0.1
    checked = bad = 0
    for seqs in _triples():
        best = alignment.optimal_alignment_cost(seqs)
        for _, moves in alignment.alignment_space(seqs, eps).solve().goals:
            checked += 1
            bad += alignment.alignment_cost(seqs, moves) > (1 + eps) * best + 1e-9
    for seed in range(20):
        world = gridmod.place_goals(gridmod.generate_grid(20, 20, 0.2, 5, seed), 5, seed=seed)
        start = gridmod.random_start(world, seed)
        h = StateScorer(lambda s, gs=world.goals: min(gridmod.manhattan(s, g) for g in gs))
        out = astar_epsilon_multigoal(world.problem([start]), h, None, eps)
        dist = exact_shortest_paths(world.space(), [start])
        for d in out.discoveries:
            checked += 1
            bad += d.cost > (1 + eps) * dist[d.state] + 1e-9
    record(11, bad == 0, f"{checked} collected goals on 3 alignments and 20 grids, {bad} above (1+eps) x oracle")
    assert bad == 0


# -- 13: determinism ------------------------------------------------------------------------


def test_criterion_13_determinism(tmp_path):
    import json

    cfg = ExperimentConfig(
        domain="grid",
        domain_params={"width": 30, "height": 30, "goals": 10},
        seeds=(0, 1),
        trials=2,
        heuristic="combined",
        heuristic_params={"distance": "progress"},
        R_pct=20,
        clustering=True,
        diversification=True,
    )
    path = tmp_path / "det.json"
    path.write_text(json.dumps(cfg.to_dict()))
    outputs = []
    for hashseed in ("1", "2"):
        out = tmp_path / f"run{hashseed}"
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        subprocess.run(
            [sys.executable, "-m", "mgsearch.cli", "run", "--config", str(path), "--out", str(out)],
            env=env,
            check=True,
            capture_output=True,
        )
        outputs.append((out / "det.csv").read_bytes())
    in_process = report_csv(run_experiment(cfg)).encode()
    ok = outputs[0] == outputs[1] == in_process
    record(13, ok, f"CSV identical across 2 subprocess reruns (different hash seeds) and in-process: {ok}")
    assert ok


if __name__ == "__main__":
    pytest.main([__file__, "-q"])
