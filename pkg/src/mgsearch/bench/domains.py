"""Build trial instances and heuristics from an :class:`ExperimentConfig`."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import InvalidParameterError, SearchProblem
from ..distance import GoalList, ManhattanDistance, MinDistanceScorer, ProgressScorer, SumScorer
from ..induction import CombinedScorer, DepthModels, InductionScorer, SiblingSource
from ..oracle import exhaustive_goals
from ..search import Scorer
from ..utility import BudgetPolicy, MUScorer, SupportThreshold
from ..domains import alignment, grid as gridmod, knight, queens, robots, webgraph
from ..domains.graphfile import read_graph
from .config import ExperimentConfig


def trial_seed(seed: int, trial: int) -> int:
    return seed * 1000 + trial


@dataclass
class DomainInstance:
    """One generated domain (per seed) that hands out per-trial problems."""

    kind: str
    seed: int
    size: Optional[int]  # node count used by R_pct
    make_problem: Callable[[int, Optional[int]], object]
    goal_states: Optional[tuple] = None  # explicit goals for the grid distance heuristics
    exact_total: Optional[int] = None  # goal total independent of the start
    distance: Optional[Callable[[Optional[GoalList]], Scorer]] = None
    data: object = None

    def trial_seed(self, trial: int) -> int:
        return trial_seed(self.seed, trial)

    def problem(self, trial: int, limit: Optional[int]) -> SearchProblem:
        return self.make_problem(trial, limit)

    def robot_problem(self, trial: int, limit: Optional[int]):
        if self.kind != "robots":
            raise InvalidParameterError("multi_robot runs need the robots domain")
        return self.make_problem(trial, limit)

    def astar(self, limit: Optional[int]):
        if self.kind != "msa":
            raise InvalidParameterError("astar_epsilon runs need the msa domain")
        return self.data.solve(limit)

    def known_total(self, trial: int) -> Optional[int]:
        return self.exact_total

    def total_goals(self, trial: int) -> int:
        """Goals reachable from the trial's start states (enumerated if needed)."""
        if self.exact_total is not None:
            return self.exact_total
        if self.kind == "msa":
            return len(alignment.enumerate_alignments(self.data.sequences, self.data.epsilon))
        if self.kind == "knight":
            return knight.count_open_tours(self.data)
        p = self.problem(trial, None)
        return len(exhaustive_goals(p.space, p.initial_states))


def _take(params: dict, defaults: dict) -> dict:
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise InvalidParameterError(f"unknown domain parameters: {', '.join(unknown)}")
    return {**defaults, **params}


_GRID = dict(
    width=50,
    height=50,
    wall_density=0.16,
    max_wall_length=10,
    goals=20,
    placement="scattered",
    centers=3,
    spread=2.0,
    scattered_fraction=0.1,
    starts=1,
)


def _make_grid(params: dict, seed: int):
    g = gridmod.generate_grid(params["width"], params["height"], params["wall_density"], params["max_wall_length"], seed)
    placement = gridmod.GoalPlacement(
        params["placement"], params["centers"], params["spread"], params["scattered_fraction"]
    )
    return gridmod.place_goals(g, params["goals"], placement, seed)


def _grid_distance(goals: Optional[GoalList], name: str, disabling: bool) -> Scorer:
    cls = {"min_dist": MinDistanceScorer, "sum": SumScorer, "progress": ProgressScorer}[name]
    return cls(goals, ManhattanDistance(), disabling)


def build_domain(config: ExperimentConfig, seed: int) -> DomainInstance:
    kind = config.domain
    raw = dict(config.domain_params)
    if kind in ("grid", "robots"):
        defaults = dict(_GRID, robots=3) if kind == "robots" else _GRID
        p = _take(raw, defaults)
        world = _make_grid(p, seed)

        def make(trial, limit):
            ts = trial_seed(seed, trial)
            if kind == "robots":
                return robots.multi_robot_problem(world, p["robots"], ts, limit)
            return world.problem(gridmod.random_starts(world, p["starts"], ts), limit)

        return DomainInstance(kind, seed, world.n_passable, make, tuple(world.goals), len(world.goals), data=world)

    if kind == "web":
        starts = int(raw.pop("starts", 5))
        w = webgraph.synthetic_web_graph(seed=seed, **raw)

        def make(trial, limit):
            return w.problem(w.random_starts(starts, 100 + trial_seed(seed, trial)), limit)

        return DomainInstance(
            kind, seed, w.n, make, distance=lambda _g: webgraph.TopicDistanceScorer(w.params.goal_topic), data=w
        )

    if kind == "graph":
        p = _take(raw, dict(path=None, starts=None, n_starts=5, goal_topic=0))
        if p["path"] is None:
            raise InvalidParameterError("graph domain needs a path")
        g = read_graph(p["path"])

        def make(trial, limit):
            if p["starts"] is not None:
                roots = tuple(int(s) for s in p["starts"])
            else:
                rng = np.random.default_rng(trial_seed(seed, trial))
                pool = np.flatnonzero(~g.goals)
                roots = tuple(int(v) for v in rng.choice(pool, size=min(p["n_starts"], len(pool)), replace=False))
            return SearchProblem(g.space(), roots, limit)

        return DomainInstance(
            kind, seed, g.n, make, distance=lambda _g: webgraph.TopicDistanceScorer(p["goal_topic"]), data=g
        )

    if kind == "queens":
        p = _take(raw, dict(n=8))
        n = p["n"]
        return DomainInstance(
            kind,
            seed,
            queens.count_tree_nodes(n),
            lambda trial, limit: queens.nqueens_problem(n, limit),
            exact_total=queens.count_solutions(n),
            data=n,
        )

    if kind == "knight":
        p = _take(raw, dict(n=5))
        n = p["n"]
        return DomainInstance(kind, seed, None, lambda trial, limit: knight.knight_problem(n, limit), data=n)

    if kind == "msa":
        p = _take(raw, dict(sequences=None, count=3, length=6, alphabet="ACGT", epsilon=0.1, bound="length"))
        seqs = p["sequences"]
        if seqs is None:
            rng = np.random.default_rng(seed)
            seqs = [
                "".join(rng.choice(list(p["alphabet"]), size=int(rng.integers(1, p["length"] + 1))))
                for _ in range(p["count"])
            ]
        inst = alignment.alignment_space(seqs, p["epsilon"], p["bound"])
        size = int(np.prod([len(s) + 1 for s in inst.sequences]))
        return DomainInstance(kind, seed, size, lambda trial, limit: inst.problem.with_limit(limit), data=inst)

    raise InvalidParameterError(f"unknown domain {kind!r}")


def budget_policy(config: ExperimentConfig, domain: DomainInstance) -> BudgetPolicy:
    if config.mode == "contract-resources":
        return BudgetPolicy("contract")
    if config.mode == "contract-quality":
        return BudgetPolicy("anytime", config.assumed_budget if config.assumed_budget is not None else domain.size)
    return BudgetPolicy("anytime", config.assumed_budget)


def _utility_source(config: ExperimentConfig, domain: DomainInstance, name: str):
    hp = config.heuristic_params
    threshold = SupportThreshold(int(hp["sigma"])) if "sigma" in hp else SupportThreshold()
    budget = budget_policy(config, domain)
    if name == "induction":
        warm = DepthModels.load(config.warm_start) if config.warm_start else None
        return InductionScorer(
            threshold,
            budget,
            k=int(hp.get("k", 5)),
            prior=float(hp.get("prior", 0.0)),
            warm_start=warm,
            refresh_interval=config.refresh_interval,
        )
    return MUScorer(
        threshold,
        budget,
        clustering=config.clustering,
        tau=float(hp.get("tau", 0.5)),
        diversify=config.diversification,
        refresh_interval=config.refresh_interval,
    )


def _distance(config: ExperimentConfig, domain: DomainInstance, goals: Optional[GoalList]) -> Scorer:
    if domain.distance is not None:
        return domain.distance(goals)
    if goals is not None:
        name = config.heuristic_params.get("distance", "progress")
        return _grid_distance(goals, name, config.disabling)
    raise InvalidParameterError(f"the {config.domain} domain has no distance heuristic")


def make_scorer(config: ExperimentConfig, domain: DomainInstance, goals: Optional[GoalList]) -> Optional[Scorer]:
    name = config.heuristic
    if name in ("bfs", "lexicographic"):
        return None
    if name in ("min_dist", "sum", "progress"):
        if goals is None:
            raise InvalidParameterError(f"{name} needs a domain with explicit goals")
        return _grid_distance(goals, name, config.disabling)
    if name == "distance":
        return _distance(config, domain, goals)
    if name in ("mu", "induction"):
        return _utility_source(config, domain, name)
    source = config.heuristic_params.get("source", "mu")
    util = _utility_source(config, domain, source)
    if source == "mu":
        util = SiblingSource(util)
    return CombinedScorer(_distance(config, domain, goals), util, config.alpha, config.refresh_interval)
