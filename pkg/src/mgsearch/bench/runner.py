"""Repeated trials, anytime profiles and the derived reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import InvalidParameterError, SearchError, SearchOutcome
from ..distance import GoalList
from ..search import BestFirstSearch, backtracking_multigoal, hill_climbing_multigoal
from ..domains.robots import run_multi_robot
from .config import ExperimentConfig
from .domains import DomainInstance, build_domain, make_scorer


class ExperimentError(SearchError):
    """A trial failed; the message names the trial index and seed."""


@dataclass(frozen=True)
class TrialResult:
    seed: int
    trial: int
    generated: int
    goals: int
    trace: tuple  # ((generated, goals), ...)
    total_goals: Optional[int] = None

    def goals_at(self, generated: float) -> int:
        found = 0
        for g, n in self.trace:
            if g > generated:
                break
            found = n
        return found

    def generated_for(self, goals: int) -> Optional[int]:
        for g, n in self.trace:
            if n >= goals:
                return g
        return None


@dataclass(frozen=True)
class ProfileReport:
    checkpoint_pct: tuple
    generated: tuple
    means: tuple
    stds: tuple
    results: tuple  # TrialResult, ordered by trial index
    config: Optional[ExperimentConfig] = None

    @property
    def trials(self) -> int:
        return len(self.results)

    def matrix(self) -> np.ndarray:
        """Goals per trial (rows) and checkpoint (columns)."""
        return np.array([[r.goals_at(c) for c in self.generated] for r in self.results], dtype=np.float64)

    def mean_at_pct(self, pct: float) -> float:
        for p, m in zip(self.checkpoint_pct, self.means):
            if math.isclose(p, pct):
                return m
        raise InvalidParameterError(f"no checkpoint at {pct}%")

    def percent_means(self) -> tuple:
        """Mean percentage of each trial's total goals; needs the totals."""
        if any(r.total_goals is None for r in self.results):
            raise InvalidParameterError("percentages need a known goal total for every trial")
        m = self.matrix()
        totals = np.array([max(1, r.total_goals) for r in self.results], dtype=np.float64)
        return tuple(float(v) for v in (100.0 * m / totals[:, None]).mean(axis=0))


def checkpoint_grid(R: int, step_pct: float) -> tuple[tuple, tuple]:
    """Percent and generated-count grids from 0 to ``R`` inclusive."""
    k = int(math.floor(100.0 / step_pct + 1e-9))
    pct = [round(i * step_pct, 9) for i in range(k + 1)]
    if pct[-1] < 100.0:
        pct.append(100.0)
    return tuple(pct), tuple(int(round(R * p / 100.0)) for p in pct)


def aggregate(results, pct, generated, config=None) -> ProfileReport:
    results = tuple(results)
    m = np.array([[r.goals_at(c) for c in generated] for r in results], dtype=np.float64)
    return ProfileReport(
        checkpoint_pct=tuple(pct),
        generated=tuple(generated),
        means=tuple(float(v) for v in m.mean(axis=0)),
        stds=tuple(float(v) for v in m.std(axis=0)),
        results=results,
        config=config,
    )


def resolve_budget(config: ExperimentConfig, domain: DomainInstance) -> Optional[int]:
    if config.R is not None:
        return int(config.R)
    if config.R_pct is not None:
        if domain.size is None:
            raise InvalidParameterError(f"R_pct needs a domain with a known size; {config.domain} has none")
        return max(1, int(round(domain.size * config.R_pct / 100.0)))
    return None


def _stop_after(collector, count: int) -> None:
    def listener(_state):
        if len(collector.goals) >= count:
            collector.meter.limit = collector.meter.generated

    collector.listeners.append(listener)


def _search(config: ExperimentConfig, domain: DomainInstance, trial: int, limit: Optional[int], stop_at=None) -> SearchOutcome:
    seed = domain.trial_seed(trial)
    algo = config.algorithm
    if algo == "multi_robot":
        problem = domain.robot_problem(trial, limit)

        def factory(goals: GoalList):
            return make_scorer(config, domain, goals)

        return run_multi_robot(problem, factory)[0]
    if algo == "astar_epsilon":
        return domain.astar(limit)
    problem = domain.problem(trial, limit)
    goals = GoalList(domain.goal_states) if domain.goal_states is not None else None
    scorer = make_scorer(config, domain, goals)
    if algo == "best_first":
        search = BestFirstSearch(problem, scorer, depth_bound=config.depth_bound, seed=seed)
        if stop_at is not None:
            _stop_after(search.collector, stop_at)
        return search.run()
    if algo == "backtracking":
        return backtracking_multigoal(problem, scorer, depth_bound=config.depth_bound, seed=seed)
    walk = int(config.heuristic_params.get("walk_length", 10))
    return hill_climbing_multigoal(problem, scorer, walk, seed, depth_bound=config.depth_bound)


def _trial_plan(config: ExperimentConfig):
    k = 0
    for s in config.seeds:
        for t in range(config.trials):
            yield k, s, t
            k += 1


def _domains(config: ExperimentConfig):
    cache: dict = {}
    for k, s, t in _trial_plan(config):
        try:
            if s not in cache:
                cache.clear()
                cache[s] = build_domain(config, s)
            yield k, s, t, cache[s]
        except SearchError as exc:
            raise ExperimentError(f"trial {k} (seed {s}): {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ExperimentError(f"trial {k} (seed {s}): bad domain parameters: {exc}") from exc


def _result(s: int, t: int, out: SearchOutcome, total: Optional[int]) -> TrialResult:
    trace = tuple((p.generated, p.goals) for p in out.trace)
    return TrialResult(s, t, out.generated, len(out.goals), trace, total)


def run_experiment(config: ExperimentConfig) -> ProfileReport:
    """Run every trial and aggregate goals found on the checkpoint grid."""
    if config.mode == "contract-quality":
        raise InvalidParameterError("contract-quality runs report resources; use contract_quality_run")
    results = []
    grid = None
    for k, s, t, domain in _domains(config):
        R = resolve_budget(config, domain)
        g = checkpoint_grid(R, config.checkpoint_pct)
        if grid is None:
            grid = g
        elif g != grid:
            raise ExperimentError(f"trial {k} (seed {s}): domain size differs between seeds, so R does")
        try:
            out = _search(config, domain, t, R)
        except SearchError as exc:
            raise ExperimentError(f"trial {k} (seed {s}): {exc}") from exc
        results.append(_result(s, t, out, domain.known_total(t)))
    return aggregate(results, grid[0], grid[1], config)


def improvement_factor(a: ProfileReport, b: ProfileReport) -> tuple:
    """Per-checkpoint ratio of mean goals, ``a`` over ``b``.

    ``0/0`` counts as 1 and ``x/0`` for positive ``x`` as infinity.
    """
    if tuple(a.generated) != tuple(b.generated):
        raise InvalidParameterError("reports use different checkpoint grids")
    out = []
    for x, y in zip(a.means, b.means):
        if y == 0:
            out.append(1.0 if x == 0 else math.inf)
        else:
            out.append(x / y)
    return tuple(out)


@dataclass(frozen=True)
class QualityResult:
    seed: int
    trial: int
    target: int
    total_goals: int
    generated: int
    reached: bool


@dataclass(frozen=True)
class QualityReport:
    quality_target: float
    results: tuple

    @property
    def mean_generated(self) -> float:
        return float(np.mean([r.generated for r in self.results]))

    @property
    def reached_fraction(self) -> float:
        return float(np.mean([r.reached for r in self.results]))


def contract_quality_run(config: ExperimentConfig) -> QualityReport:
    """Generated nodes needed to collect ``ceil(q * total)`` goals per trial."""
    q = config.quality_target
    if q is None or not 0 < q <= 1:
        raise InvalidParameterError("quality_target must lie in (0, 1]")
    results = []
    for k, s, t, domain in _domains(config):
        total = domain.total_goals(t)
        target = math.ceil(q * total)
        cap = resolve_budget(config, domain)
        try:
            out = _search(config, domain, t, cap, stop_at=target)
        except SearchError as exc:
            raise ExperimentError(f"trial {k} (seed {s}): {exc}") from exc
        res = _result(s, t, out, total)
        at = res.generated_for(target)
        reached = at is not None
        results.append(QualityResult(s, t, target, total, at if reached else out.generated, reached))
    return QualityReport(float(q), tuple(results))
