"""Distance-based multiple-goal heuristics: min-distance, sum, progress.

All of them need an explicit goal list and a pairwise distance estimator.
Collected goals can be switched off in the :class:`GoalList` so they stop
attracting the frontier; where only state features are available,
:class:`PenalizedScorer` pushes the search away from visited goals instead.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import InvalidParameterError, SearchError
from .search import Scorer

INF = float("inf")


class UnknownGoalError(SearchError):
    pass


class GoalList:
    """Explicit goal states with stable indices and per-goal visited flags."""

    def __init__(self, goals: Sequence[Hashable]):
        self.goals = tuple(goals)
        self.index = {g: k for k, g in enumerate(self.goals)}
        if len(self.index) != len(self.goals):
            raise InvalidParameterError("goal list contains duplicates")
        self.visited = np.zeros(len(self.goals), dtype=bool)
        self._version = 0

    def __len__(self):
        return len(self.goals)

    def __contains__(self, s):
        return s in self.index

    @property
    def active(self) -> np.ndarray:
        return ~self.visited

    @property
    def n_active(self) -> int:
        return int((~self.visited).sum())

    @property
    def version(self) -> int:
        return self._version

    def disable(self, g) -> None:
        k = self.index.get(g)
        if k is None:
            raise UnknownGoalError(f"{g!r} is not in the goal list")
        if not self.visited[k]:
            self.visited[k] = True
            self._version += 1


def disable_visited_goal(goals: GoalList, g) -> None:
    """Flag ``g`` as visited; later heuristic evaluations ignore it."""
    goals.disable(g)


class DistanceEstimator:
    """Pairwise distance estimate ``h_dist(s1, s2)``."""

    def __call__(self, a, b) -> float:
        raise NotImplementedError

    def matrix(self, states: Sequence, goals: Sequence) -> np.ndarray:
        out = np.empty((len(states), len(goals)))
        for i, s in enumerate(states):
            for j, g in enumerate(goals):
                out[i, j] = self(s, g)
        return out


class FunctionDistance(DistanceEstimator):
    def __init__(self, fn: Callable[[object, object], float]):
        self.fn = fn

    def __call__(self, a, b):
        return float(self.fn(a, b))


class ManhattanDistance(DistanceEstimator):
    """L1 distance between state coordinates (``coords(state)`` -> ints)."""

    def __init__(self, coords: Callable = lambda s: s):
        self.coords = coords
        self._goal_cache: dict = {}

    def __call__(self, a, b):
        return float(sum(abs(x - y) for x, y in zip(self.coords(a), self.coords(b))))

    def _goal_array(self, goals):
        # keep the goals object alive so its id cannot be reused by another sequence
        hit = self._goal_cache.get(id(goals))
        if hit is not None and hit[0] is goals and len(hit[1]) == len(goals):
            return hit[1]
        arr = np.array([self.coords(g) for g in goals], dtype=np.int64).reshape(len(goals), -1)
        self._goal_cache = {id(goals): (goals, arr)}
        return arr

    def matrix(self, states, goals):
        if len(states) == 0 or len(goals) == 0:
            return np.zeros((len(states), len(goals)))
        pts = np.array([self.coords(s) for s in states], dtype=np.int64).reshape(len(states), -1)
        return _kernels.manhattan_matrix(pts, self._goal_array(goals))


def _active_distances(states, goals: GoalList, dist: DistanceEstimator) -> np.ndarray:
    return dist.matrix(states, goals.goals)[:, goals.active]


def h_min_dist(s, goals: GoalList, dist: DistanceEstimator) -> float:
    """Distance to the nearest unvisited goal; ``inf`` when none is left."""
    d = _active_distances([s], goals, dist)
    return float(d.min()) if d.size else INF


def h_sum(s, goals: GoalList, dist: DistanceEstimator) -> float:
    """Sum of distances to all unvisited goals; ``inf`` when none is left."""
    d = _active_distances([s], goals, dist)
    return float(d.sum()) if d.size else INF


def h_progress(frontier: Sequence, goals: GoalList, dist: DistanceEstimator) -> np.ndarray:
    """Progress score of every frontier state, in frontier order.

    Each unvisited goal is assigned to the frontier state closest to it (the
    earliest one on ties).  A state's score is the mean distance to its
    assigned goals divided by their number; states with no assigned goal get
    ``inf``.
    """
    if len(frontier) == 0:
        return np.zeros(0)
    return _kernels.progress_scores(dist.matrix(frontier, goals.goals), goals.active)


def progress_assignment(frontier: Sequence, goals: GoalList, dist: DistanceEstimator) -> list[list[int]]:
    """Goal indices owned by each frontier state under the progress rule."""
    d = dist.matrix(frontier, goals.goals)
    owned: list[list[int]] = [[] for _ in frontier]
    for k in np.flatnonzero(goals.active):
        owned[int(np.argmin(d[:, k]))].append(int(k))
    return owned


@dataclass(frozen=True)
class PenaltyParams:
    c1: float = 1.0
    c2: float = 0.2

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise InvalidParameterError("penalty coefficients must be non-negative")


def feature_penalty(h, d_min, params: PenaltyParams = PenaltyParams()):
    """``h * (1 + c1 * exp(-c2 * d_min))``; works elementwise on arrays."""
    out = np.asarray(h, dtype=np.float64) * (1.0 + params.c1 * np.exp(-params.c2 * np.asarray(d_min, dtype=np.float64)))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# scorers
# ---------------------------------------------------------------------------


class _GoalListScorer(Scorer):
    dynamic = True

    def __init__(self, goals: GoalList, dist: DistanceEstimator, disabling: bool = True):
        self.goals = goals
        self.dist = dist
        self.disabling = disabling

    def version(self):
        return self.goals.version

    def on_goal(self, i):
        if self.disabling:
            s = self.ctx.graph.states[i]
            if s in self.goals:
                self.goals.disable(s)

    def _matrix(self, ids):
        states = self.ctx.graph.states
        return _active_distances([states[i] for i in ids], self.goals, self.dist)


class MinDistanceScorer(_GoalListScorer):
    """Single-goal style baseline: distance to the nearest goal."""

    def score(self, ids):
        d = self._matrix(ids)
        if d.shape[1] == 0:
            return np.full(len(ids), INF)
        return d.min(axis=1)


class SumScorer(_GoalListScorer):
    def score(self, ids):
        d = self._matrix(ids)
        if d.shape[1] == 0:
            return np.full(len(ids), INF)
        return d.sum(axis=1)


class ProgressScorer(_GoalListScorer):
    frontier_dependent = True

    def score(self, ids):
        states = self.ctx.graph.states
        return h_progress([states[i] for i in ids], self.goals, self.dist)


class FeatureGoalCache:
    """Feature vectors of visited goals, optionally capped to the most recent."""

    def __init__(self, cap: Optional[int] = None):
        self.cap = cap
        self._rows: deque = deque(maxlen=cap)
        self._arr: Optional[np.ndarray] = None

    def add(self, x: np.ndarray) -> None:
        self._rows.append(np.asarray(x, dtype=np.float64))
        self._arr = None

    def __len__(self):
        return len(self._rows)

    @property
    def array(self) -> np.ndarray:
        if self._arr is None:
            self._arr = np.array(self._rows) if self._rows else np.zeros((0, 0))
        return self._arr

    def min_distance(self, X: np.ndarray) -> np.ndarray:
        if not self._rows:
            return np.full(len(X), INF)
        return _kernels.min_distances(X, self.array)


class PenalizedScorer(Scorer):
    """Wraps a scorer with the exponential visited-goal penalty.

    The penalty uses Euclidean feature distance from a node to the nearest
    visited goal.  Base scores are shifted to be positive first so that the
    multiplicative penalty always makes a node look worse.
    """

    dynamic = True

    def __init__(self, base: Scorer, params: PenaltyParams = PenaltyParams(), cache_cap: Optional[int] = 1000, offset: float = 0.0):
        self.base = base
        self.params = params
        self.cache = FeatureGoalCache(cache_cap)
        self.offset = offset
        self._version = 0

    @property
    def frontier_dependent(self):
        return self.base.frontier_dependent

    @property
    def needs_counters(self):
        return self.base.needs_counters

    @property
    def refresh_interval(self):
        return self.base.refresh_interval

    def bind(self, ctx):
        super().bind(ctx)
        self.base.bind(ctx)

    def version(self):
        return (self._version, self.base.version())

    def on_goal(self, i):
        self.cache.add(self.ctx.features(i))
        self._version += 1
        self.base.on_goal(i)

    def on_expand(self, i):
        self.base.on_expand(i)

    def choose(self, ids, scores):
        return self.base.choose(ids, scores)

    def score(self, ids):
        h = np.asarray(self.base.score(ids), dtype=np.float64) + self.offset
        if len(self.cache) == 0 or len(ids) == 0:
            return h
        X = np.array([self.ctx.features(i) for i in ids])
        return feature_penalty(h, self.cache.min_distance(X), self.params)
