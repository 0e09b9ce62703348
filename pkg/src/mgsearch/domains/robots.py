"""Several robots on one grid sharing a single generation budget.

Each robot runs its own best-first search; expansions are handed out
round-robin, and all robots share the meter, the goal collector and the goal
list, so an object picked up by one robot stops attracting the others.
Robots never collide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import InvalidParameterError, ResourceMeter, SearchOutcome
from ..distance import GoalList
from ..search import BestFirstSearch, GoalCollector, Scorer
from .grid import GridWorld


@dataclass(frozen=True)
class MultiRobotProblem:
    grid: GridWorld
    starts: tuple
    limit: Optional[int] = None

    @property
    def n_robots(self) -> int:
        return len(self.starts)


def multi_robot_problem(grid: GridWorld, n_robots: int, seed: int = 0, limit: Optional[int] = None) -> MultiRobotProblem:
    """Place ``n_robots`` uniformly at random on passable cells (objects are the grid goals)."""
    if n_robots < 1:
        raise InvalidParameterError("need at least one robot")
    cells = grid.passable_cells()
    rng = np.random.default_rng(seed)
    starts = tuple(cells[int(k)] for k in rng.integers(len(cells), size=n_robots))
    return MultiRobotProblem(grid, starts, limit)


def run_multi_robot(
    problem: MultiRobotProblem,
    make_scorer: Callable[[GoalList], Optional[Scorer]],
    record_paths: bool = False,
) -> tuple[SearchOutcome, list[BestFirstSearch]]:
    """Round-robin expansion over per-robot searches.

    ``make_scorer`` receives the shared goal list and returns one robot's
    scorer.  Robots whose open list is empty are skipped.
    """
    goals = GoalList(problem.grid.goals)
    meter = ResourceMeter(problem.limit)
    collector = GoalCollector(meter, record_paths)
    searches = []
    for start in problem.starts:
        sub = problem.grid.problem([start], problem.limit)
        searches.append(BestFirstSearch(sub, make_scorer(goals), meter=meter, collector=collector))
    for s in searches:
        s.start()
    active = list(searches)
    while active and not meter.exhausted:
        for s in list(active):
            if meter.exhausted:
                break
            if s.step() is None:
                active.remove(s)
    expanded = sum(s.expanded for s in searches)
    return collector.outcome(None, expanded), searches
