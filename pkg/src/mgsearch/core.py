"""Problem types, resource accounting and the explored search graph."""

from __future__ import annotations

import bisect
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Optional, Sequence

import numpy as np

State = Hashable


class SearchError(Exception):
    """Base class for errors raised by this package."""


class InvalidProblemError(SearchError):
    pass


class InvalidParameterError(SearchError):
    pass


class UndefinedStatisticsError(SearchError):
    """Raised when a ratio is requested for a node with no visited descendants."""


@dataclass(frozen=True)
class StateSpace:
    """Implicit state graph.

    ``successors`` must return a finite, deterministic sequence.  ``cost``
    defaults to unit edges; ``features`` maps a state to a fixed-length float
    vector and is only required by feature-based enhancements.
    """

    successors: Callable[[State], Sequence[State]]
    is_goal: Callable[[State], bool]
    cost: Optional[Callable[[State, State], float]] = None
    features: Optional[Callable[[State], np.ndarray]] = None
    name: str = "space"

    def edge_cost(self, a: State, b: State) -> float:
        return 1.0 if self.cost is None else float(self.cost(a, b))


@dataclass(frozen=True)
class SearchProblem:
    space: StateSpace
    initial_states: tuple
    limit: Optional[int] = None  # None means unbounded

    def __post_init__(self):
        init = tuple(self.initial_states)
        object.__setattr__(self, "initial_states", init)
        if not init:
            raise InvalidProblemError("a search problem needs at least one initial state")
        if len(set(init)) != len(init):
            raise InvalidProblemError("initial states must be distinct")
        if self.limit is not None and int(self.limit) < 1:
            raise InvalidProblemError(f"resource limit must be >= 1, got {self.limit}")

    def with_limit(self, limit: Optional[int]) -> "SearchProblem":
        return SearchProblem(self.space, self.initial_states, limit)


class ResourceMeter:
    """Counts generated nodes against the limit ``R``."""

    __slots__ = ("generated", "limit")

    def __init__(self, limit: Optional[int]):
        self.generated = 0
        self.limit = limit

    @property
    def exhausted(self) -> bool:
        return self.limit is not None and self.generated >= self.limit

    @property
    def remaining(self) -> float:
        return float("inf") if self.limit is None else self.limit - self.generated

    def charge(self) -> None:
        if self.exhausted:
            raise SearchError("resource limit exceeded")
        self.generated += 1


@dataclass(frozen=True)
class Checkpoint:
    generated: int
    goals: int
    wall: float


class AnytimeTrace:
    """Monotone (generated, goals) profile of one run."""

    def __init__(self):
        self._points: list[Checkpoint] = []
        self._t0 = time.perf_counter()

    def record(self, generated: int, goals: int) -> None:
        wall = time.perf_counter() - self._t0
        pts = self._points
        if pts and pts[-1].generated == generated:
            pts[-1] = Checkpoint(generated, goals, wall)
        else:
            if pts and (generated < pts[-1].generated or goals < pts[-1].goals):
                raise SearchError("anytime trace must be monotone")
            pts.append(Checkpoint(generated, goals, wall))

    @property
    def checkpoints(self) -> tuple[Checkpoint, ...]:
        return tuple(self._points)

    def goals_at(self, generated: float) -> int:
        """Goals collected once ``generated`` nodes had been generated."""
        keys = [p.generated for p in self._points]
        i = bisect.bisect_right(keys, generated)
        return self._points[i - 1].goals if i else 0

    def generated_for(self, goals: int) -> Optional[int]:
        for p in self._points:
            if p.goals >= goals:
                return p.generated
        return None

    def __len__(self):
        return len(self._points)

    def __iter__(self):
        return iter(self._points)


@dataclass(frozen=True)
class Discovery:
    state: Any
    generated: int
    cost: float = 0.0
    path: Optional[tuple] = None


@dataclass(frozen=True)
class SearchOutcome:
    goals: tuple
    discoveries: tuple[Discovery, ...]
    trace: AnytimeTrace
    generated: int
    expanded: int
    graph: Optional["SearchGraph"] = field(default=None, compare=False, repr=False)

    @property
    def goal_set(self) -> frozenset:
        return frozenset(self.goals)

    def goals_at(self, generated: float) -> int:
        return self.trace.goals_at(generated)


@dataclass(frozen=True)
class SearchNode:
    """Read-only snapshot of a node of the explored graph."""

    id: int
    state: Any
    parents: tuple[int, ...]
    depth: int
    g: float
    is_goal: bool
    N: Optional[np.ndarray] = None
    G: Optional[np.ndarray] = None


class SearchGraph:
    """The explored part of the state graph, owned by a single search.

    Nodes are numbered in generation order.  When ``track_counters`` is set,
    every node keeps two depth-indexed counters: ``N[n, i-1]`` is the number of
    visited nodes whose shortest distance from ``n`` is at most ``i`` and
    ``G[n, i-1]`` the same restricted to goals (``n`` itself excluded).  The
    counters are maintained exactly under edge insertions, including edges
    discovered later that shorten existing paths.
    """

    def __init__(self, depth_bound: int = 4, track_counters: bool = False):
        if depth_bound < 1:
            raise InvalidParameterError("depth bound D must be >= 1")
        self.D = int(depth_bound)
        self.track_counters = bool(track_counters)
        self.states: list = []
        self.index: dict = {}
        self.parents: list[list[int]] = []
        self.children: list[list[int]] = []
        self.depth: list[int] = []
        self.g: list[float] = []
        self.best_parent: list[int] = []
        self.goal: list[bool] = []
        self._cap = 0
        self.N = np.zeros((0, self.D), dtype=np.int64)
        self.G = np.zeros((0, self.D), dtype=np.int64)
        self.below: list[dict[int, int]] = []
        self.above: list[dict[int, int]] = []
        self.touched: set[int] = set()  # nodes whose counters changed; consumers clear it

    def __len__(self):
        return len(self.states)

    def __contains__(self, state):
        return state in self.index

    def _grow(self):
        n = len(self.states)
        if self.track_counters and n > self._cap:
            cap = max(64, 2 * self._cap)
            N = np.zeros((cap, self.D), dtype=np.int64)
            G = np.zeros((cap, self.D), dtype=np.int64)
            N[: self._cap] = self.N
            G[: self._cap] = self.G
            self.N, self.G, self._cap = N, G, cap

    def _new(self, state, parent: int, depth: int, g: float, is_goal: bool) -> int:
        i = len(self.states)
        self.states.append(state)
        self.index[state] = i
        self.parents.append([] if parent < 0 else [parent])
        self.children.append([])
        self.depth.append(depth)
        self.g.append(g)
        self.best_parent.append(parent)
        self.goal.append(bool(is_goal))
        if self.track_counters:
            self.below.append({})
            self.above.append({})
            self._grow()
        return i

    def add_root(self, state, is_goal: bool) -> int:
        if state in self.index:
            raise InvalidProblemError(f"duplicate root state {state!r}")
        return self._new(state, -1, 0, 0.0, is_goal)

    def add_child(self, parent: int, state, edge_cost: float, is_goal_fn) -> tuple[int, bool]:
        """Record the edge ``parent -> state``.

        Returns ``(id, is_new)``.  ``is_goal_fn`` is only called for new states.
        Re-reaching a known state adds the edge and may shorten depths, but
        never creates a second node.
        """
        j = self.index.get(state)
        if j is None:
            j = self._new(
                state,
                parent,
                self.depth[parent] + 1,
                self.g[parent] + edge_cost,
                is_goal_fn(state),
            )
            self.children[parent].append(j)
            if self.track_counters:
                self._link_counters(parent, j)
            return j, True
        if j == parent or j in self.children[parent]:
            return j, False
        self.children[parent].append(j)
        self.parents[j].append(parent)
        if self.depth[parent] + 1 < self.depth[j]:
            self._relax_depth(j, self.depth[parent] + 1)
        if self.track_counters:
            self._link_counters(parent, j)
        return j, False

    def _relax_depth(self, j: int, d: int) -> None:
        self.depth[j] = d
        stack = [j]
        while stack:
            u = stack.pop()
            du = self.depth[u] + 1
            for v in self.children[u]:
                if du < self.depth[v]:
                    self.depth[v] = du
                    stack.append(v)

    def _link_counters(self, p: int, c: int) -> None:
        D = self.D
        anc = [(p, 0)]
        anc.extend((q, d) for q, d in self.above[p].items() if d < D)
        desc = [(c, 0)]
        desc.extend((m, d) for m, d in self.below[c].items() if d < D)
        N, G, goal, below, above = self.N, self.G, self.goal, self.below, self.above
        for q, dq in anc:
            bq = below[q]
            for m, dm in desc:
                nd = dq + 1 + dm
                if nd > D or m == q:
                    continue
                old = bq.get(m)
                if old is not None and old <= nd:
                    continue
                hi = D if old is None else old - 1
                N[q, nd - 1 : hi] += 1
                if goal[m]:
                    G[q, nd - 1 : hi] += 1
                bq[m] = nd
                above[m][q] = nd
                self.touched.add(q)

    def ancestors(self, i: int) -> dict[int, int]:
        """Ancestors within distance ``D`` mapped to their shortest distance."""
        if self.track_counters:
            return dict(self.above[i])
        out: dict[int, int] = {}
        frontier = [i]
        for d in range(1, self.D + 1):
            nxt = []
            for u in frontier:
                for p in self.parents[u]:
                    if p != i and p not in out:
                        out[p] = d
                        nxt.append(p)
            frontier = nxt
        return out

    def node(self, i: int) -> SearchNode:
        return SearchNode(
            id=i,
            state=self.states[i],
            parents=tuple(self.parents[i]),
            depth=self.depth[i],
            g=self.g[i],
            is_goal=self.goal[i],
            N=self.N[i].copy() if self.track_counters else None,
            G=self.G[i].copy() if self.track_counters else None,
        )

    def path_to(self, i: int) -> tuple:
        out = []
        while i >= 0:
            out.append(self.states[i])
            i = self.best_parent[i]
        return tuple(reversed(out))

    def recount(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Brute-force counters for node ``i`` by BFS over the explored graph."""
        N = np.zeros(self.D, dtype=np.int64)
        G = np.zeros(self.D, dtype=np.int64)
        seen = {i}
        frontier = [i]
        for d in range(1, self.D + 1):
            nxt = []
            for u in frontier:
                for v in self.children[u]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
                        N[d - 1 :] += 1
                        if self.goal[v]:
                            G[d - 1 :] += 1
            frontier = nxt
        return N, G
