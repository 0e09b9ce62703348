"""Multiple-goal search algorithms: best-first, A*-epsilon, backtracking, hill-climbing.

All four collect goals instead of stopping at the first one and run until the
generation budget is spent (or the space is exhausted).  Heuristics are
:class:`Scorer` objects returning lower-is-better scores for batches of node
ids of the explored :class:`~mgsearch.core.SearchGraph`.
"""

from __future__ import annotations

import heapq
import math
import random
from typing import Optional, Sequence

import numpy as np

from .core import (
    AnytimeTrace,
    Discovery,
    InvalidParameterError,
    InvalidProblemError,
    ResourceMeter,
    SearchGraph,
    SearchOutcome,
    SearchProblem,
)

INF = math.inf


class Scorer:
    """Base class for node scorers (lower is better).

    ``dynamic`` scorers may change their opinion about already-open nodes and
    are re-evaluated by the search; ``frontier_dependent`` ones must always be
    evaluated on the whole open list at once.  ``refresh_interval`` bounds how
    many selections may pass between full re-evaluations of a dynamic scorer
    whose :meth:`version` did not change.
    """

    dynamic = False
    frontier_dependent = False
    needs_counters = False
    refresh_interval: Optional[int] = None

    def bind(self, ctx: "SearchContext") -> None:
        self.ctx = ctx

    def score(self, ids: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def version(self) -> int:
        return 0

    def on_goal(self, i: int) -> None:
        pass

    def on_expand(self, i: int) -> None:
        pass

    def choose(self, ids: np.ndarray, scores: np.ndarray) -> Optional[int]:
        """Optionally override argmin selection; return a position into ``ids``."""
        return None

    def take_stale(self) -> set:
        """Node ids whose score changed since the last call (rescored between refreshes)."""
        return set()


class ConstantScorer(Scorer):
    """Every node scores the same; best-first degenerates to breadth-first."""

    def score(self, ids):
        return np.zeros(len(ids))


class StateScorer(Scorer):
    """Static scorer from a plain ``state -> float`` function."""

    def __init__(self, fn):
        self.fn = fn

    def score(self, ids):
        states = self.ctx.graph.states
        return np.array([float(self.fn(states[i])) for i in ids], dtype=np.float64)


class GoalCollector:
    """Goals found so far plus the anytime trace; shareable between searches."""

    def __init__(self, meter: ResourceMeter, record_paths: bool = False):
        self.meter = meter
        self.record_paths = record_paths
        self.found: set = set()
        self.goals: list = []
        self.discoveries: list[Discovery] = []
        self.trace = AnytimeTrace()
        self.trace.record(0, 0)
        self.listeners: list = []

    def collect(self, graph: SearchGraph, i: int, cost: Optional[float] = None) -> bool:
        state = graph.states[i]
        if state in self.found:
            return False
        self.found.add(state)
        self.goals.append(state)
        path = graph.path_to(i) if self.record_paths else None
        self.discoveries.append(
            Discovery(state, self.meter.generated, graph.g[i] if cost is None else cost, path)
        )
        self.trace.record(self.meter.generated, len(self.goals))
        for fn in self.listeners:
            fn(state)
        return True

    def outcome(self, graph: Optional[SearchGraph], expanded: int) -> SearchOutcome:
        self.trace.record(self.meter.generated, len(self.goals))
        return SearchOutcome(
            goals=tuple(self.goals),
            discoveries=tuple(self.discoveries),
            trace=self.trace,
            generated=self.meter.generated,
            expanded=expanded,
            graph=graph,
        )


class SearchContext:
    """State of one running search that scorers may read."""

    def __init__(
        self,
        problem: SearchProblem,
        graph: SearchGraph,
        meter: ResourceMeter,
        collector: GoalCollector,
        rng: Optional[random.Random] = None,
    ):
        self.problem = problem
        self.space = problem.space
        self.graph = graph
        self.meter = meter
        self.collector = collector
        self.rng = rng or random.Random(0)
        self.expanded = 0
        self._open_fn = lambda: np.zeros(0, dtype=np.int64)

    def open_ids(self) -> np.ndarray:
        return self._open_fn()

    def features(self, i: int) -> np.ndarray:
        fx = self.space.features
        if fx is None:
            raise InvalidProblemError(f"space {self.space.name!r} has no feature extractor")
        return np.asarray(fx(self.graph.states[i]), dtype=np.float64)


def _new_graph(scorers: Sequence[Optional[Scorer]], depth_bound: int, track_counters: bool) -> SearchGraph:
    need = track_counters or any(s is not None and s.needs_counters for s in scorers)
    return SearchGraph(depth_bound=depth_bound, track_counters=need)


class _OpenArray:
    """Insertion-ordered open list with lazily refreshed scores."""

    def __init__(self):
        self.ids = np.zeros(64, dtype=np.int64)
        self.scores = np.zeros(64)
        self.alive = np.zeros(64, dtype=bool)
        self.where: dict[int, int] = {}
        self.n = 0
        self.count = 0

    def push(self, i: int, s: float) -> None:
        if self.n == len(self.ids):
            self._compact_or_grow()
        self.ids[self.n] = i
        self.scores[self.n] = s
        self.alive[self.n] = True
        self.where[i] = self.n
        self.n += 1
        self.count += 1

    def _compact_or_grow(self):
        keep = self.alive[: self.n]
        if keep.sum() < self.n // 2:
            k = int(keep.sum())
            self.ids[:k] = self.ids[: self.n][keep]
            self.scores[:k] = self.scores[: self.n][keep]
            self.alive[:k] = True
            self.alive[k:] = False
            self.n = k
            self.where = {int(i): pos for pos, i in enumerate(self.ids[:k])}
        if self.n == len(self.ids):
            size = 2 * len(self.ids)
            for name in ("ids", "scores", "alive"):
                old = getattr(self, name)
                new = np.zeros(size, dtype=old.dtype)
                new[: self.n] = old[: self.n]
                setattr(self, name, new)

    def live(self) -> np.ndarray:
        return np.flatnonzero(self.alive[: self.n])

    def open_ids(self) -> np.ndarray:
        return self.ids[: self.n][self.alive[: self.n]]

    def pop_at(self, pos: int) -> int:
        self.alive[pos] = False
        self.count -= 1
        i = int(self.ids[pos])
        del self.where[i]
        return i

    def positions(self, ids) -> np.ndarray:
        return np.array([self.where[i] for i in ids if i in self.where], dtype=np.int64)


class BestFirstSearch:
    """Multiple-goal greedy best-first search that can be advanced step by step.

    Duplicate states are detected through the graph's state index.  Goals are
    tested when generated.  Ties between equal scores go to the node inserted
    first.
    """

    def __init__(
        self,
        problem: SearchProblem,
        scorer: Optional[Scorer] = None,
        *,
        meter: Optional[ResourceMeter] = None,
        collector: Optional[GoalCollector] = None,
        depth_bound: int = 4,
        track_counters: bool = False,
        record_paths: bool = False,
        seed: int = 0,
    ):
        self.problem = problem
        self.scorer = scorer or ConstantScorer()
        self.meter = meter or ResourceMeter(problem.limit)
        self.collector = collector or GoalCollector(self.meter, record_paths)
        self.graph = _new_graph([self.scorer], depth_bound, track_counters)
        self.ctx = SearchContext(problem, self.graph, self.meter, self.collector, random.Random(seed))
        self.expanded = 0
        self._heap: list = []
        self._open = _OpenArray()
        self._seq = 0
        self._since_refresh = 0
        self._version = None
        self._started = False
        self.expansion_order: list[int] = []

    # -- open list ---------------------------------------------------------
    @property
    def open_size(self) -> int:
        return self._open.count if self.scorer.dynamic else len(self._heap)

    def _open_ids(self) -> np.ndarray:
        if self.scorer.dynamic:
            return self._open.open_ids()
        return np.array(sorted(i for _, _, i in self._heap), dtype=np.int64)

    def _push(self, ids: list[int]) -> None:
        if not ids:
            return
        sc = self.scorer
        if sc.dynamic:
            if sc.frontier_dependent:
                vals = np.zeros(len(ids))
            else:
                vals = sc.score(np.asarray(ids, dtype=np.int64))
            for i, v in zip(ids, vals):
                self._open.push(i, float(v))
        else:
            vals = sc.score(np.asarray(ids, dtype=np.int64))
            for i, v in zip(ids, vals):
                heapq.heappush(self._heap, (float(v), self._seq, i))
                self._seq += 1

    def _select(self) -> int:
        sc = self.scorer
        if not sc.dynamic:
            return heapq.heappop(self._heap)[2]
        op = self._open
        live = op.live()
        ver = sc.version()
        refresh = (
            sc.frontier_dependent
            or ver != self._version
            or (sc.refresh_interval is not None and self._since_refresh >= sc.refresh_interval)
        )
        stale = sc.take_stale()
        if refresh:
            op.scores[live] = sc.score(op.ids[live])
            self._version = ver
            self._since_refresh = 0
        elif stale:
            pos = op.positions(stale)
            if len(pos):
                op.scores[pos] = sc.score(op.ids[pos])
        self._since_refresh += 1
        ids = op.ids[live]
        scores = op.scores[live]
        pos = sc.choose(ids, scores)
        if pos is None:
            pos = _argmin_first(scores)
        return op.pop_at(int(live[pos]))

    # -- main loop -----------------------------------------------------------
    def start(self) -> None:
        if self._started:
            return
        self._started = True
        self.scorer.bind(self.ctx)
        self.ctx._open_fn = self._open_ids
        space = self.problem.space
        roots = []
        for s in self.problem.initial_states:
            i = self.graph.add_root(s, space.is_goal(s))
            roots.append(i)
            if self.graph.goal[i]:
                self._collect(i)
        self._push(roots)

    def _collect(self, i: int) -> None:
        if self.collector.collect(self.graph, i):
            self.scorer.on_goal(i)

    @property
    def done(self) -> bool:
        return self.meter.exhausted or self.open_size == 0

    def step(self) -> Optional[int]:
        """Expand one node; returns its id, or None when the search is over."""
        if not self._started:
            self.start()
        if self.done:
            return None
        i = self._select()
        self.expansion_order.append(i)
        self.expand(i)
        return i

    def expand(self, i: int) -> None:
        graph, meter, space = self.graph, self.meter, self.problem.space
        state = graph.states[i]
        new: list[int] = []
        for s in space.successors(state):
            if meter.exhausted:
                break
            j, is_new = graph.add_child(i, s, space.edge_cost(state, s), space.is_goal)
            if is_new:
                meter.charge()
                new.append(j)
                if graph.goal[j]:
                    self._collect(j)
        self.expanded += 1
        self.ctx.expanded = self.expanded
        self.scorer.on_expand(i)
        self._push(new)

    def run(self) -> SearchOutcome:
        self.start()
        while self.step() is not None:
            pass
        return self.outcome()

    def outcome(self) -> SearchOutcome:
        return self.collector.outcome(self.graph, self.expanded)


def _argmin_first(a: np.ndarray) -> int:
    return int(np.argmin(a))


def best_first_multigoal(
    problem: SearchProblem,
    heuristic: Optional[Scorer] = None,
    *,
    depth_bound: int = 4,
    track_counters: bool = False,
    record_paths: bool = False,
    seed: int = 0,
) -> SearchOutcome:
    """Greedy best-first search that keeps collecting goals until ``R`` nodes are generated."""
    return BestFirstSearch(
        problem,
        heuristic,
        depth_bound=depth_bound,
        track_counters=track_counters,
        record_paths=record_paths,
        seed=seed,
    ).run()


def astar_epsilon_multigoal(
    problem: SearchProblem,
    admissible: Scorer,
    focal: Optional[Scorer] = None,
    epsilon: float = 0.0,
    *,
    cutoff: bool = True,
    depth_bound: int = 4,
    track_counters: bool = False,
    record_paths: bool = False,
    seed: int = 0,
) -> SearchOutcome:
    """A*-epsilon that collects every goal selected from its focal list.

    The focal list holds open nodes with ``f <= (1 + epsilon) * f_min``; the
    ``focal`` scorer picks among them (ties to the earliest inserted).  A goal
    is collected when selected, provided its cost is within ``1 + epsilon`` of
    both ``f_min`` and the cheapest goal collected so far (``g_min``), so
    every collected goal is epsilon-optimal.  With ``cutoff`` the search stops
    once every open node has ``f > (1 + epsilon) * g_min``.  Shorter paths to
    known states reopen them.
    """
    if epsilon < 0:
        raise InvalidParameterError(f"epsilon must be >= 0, got {epsilon}")
    focal = focal if focal is not None else admissible
    meter = ResourceMeter(problem.limit)
    collector = GoalCollector(meter, record_paths)
    graph = _new_graph([admissible, focal], depth_bound, track_counters)
    ctx = SearchContext(problem, graph, meter, collector, random.Random(seed))
    space = problem.space
    op = _FocalOpen()
    closed: set[int] = set()
    g_min = INF
    bound = 1.0 + epsilon
    tol = 1e-9

    ctx._open_fn = op.open_ids
    admissible.bind(ctx)
    if focal is not admissible:
        focal.bind(ctx)

    def push(ids: list[int]) -> None:
        if ids:
            arr = np.asarray(ids, dtype=np.int64)
            op.push(ids, [graph.g[i] for i in ids], admissible.score(arr))

    for s in problem.initial_states:
        graph.add_root(s, space.is_goal(s))
    push(list(range(len(graph))))
    version = admissible.version()
    expanded = 0
    while op.count and not meter.exhausted:
        live = op.live()
        if admissible.version() != version:
            version = admissible.version()
            op.h[live] = admissible.score(op.ids[live])
        f = op.g[live] + op.h[live]
        f_min = float(f.min())
        if cutoff and g_min < INF and f_min > bound * g_min + tol:
            break
        in_focal = live[f <= bound * f_min + tol]
        fids = op.ids[in_focal]
        fscores = op.h[in_focal] if focal is admissible else focal.score(fids)
        pos = focal.choose(fids, fscores)
        if pos is None:
            pos = _argmin_first(fscores)
        p = int(in_focal[pos])
        i = op.pop_at(p)
        f_i = graph.g[i] + float(op.h[p])
        closed.add(i)
        if cutoff and g_min < INF and f_i > bound * g_min + tol:
            continue
        if graph.goal[i] and graph.states[i] not in collector.found:
            if graph.g[i] <= bound * min(f_min, g_min) + tol:
                collector.collect(graph, i)
                g_min = min(g_min, graph.g[i])
                admissible.on_goal(i)
                if focal is not admissible:
                    focal.on_goal(i)
        state = graph.states[i]
        fresh: list[int] = []
        for s in space.successors(state):
            if meter.exhausted:
                break
            c = space.edge_cost(state, s)
            j, is_new = graph.add_child(i, s, c, space.is_goal)
            if is_new:
                meter.charge()
                fresh.append(j)
                continue
            ng = graph.g[i] + c
            if ng < graph.g[j] - tol:
                graph.g[j] = ng
                graph.best_parent[j] = i
                # reopen a closed node, or replace the stale open entry
                if j in closed:
                    closed.discard(j)
                else:
                    op.discard(j)
                fresh.append(j)
        expanded += 1
        ctx.expanded = expanded
        admissible.on_expand(i)
        if focal is not admissible:
            focal.on_expand(i)
        push(fresh)
    return collector.outcome(graph, expanded)


class _FocalOpen:
    """Append-only open list storing each entry's g and admissible estimate."""

    def __init__(self):
        self.ids = np.zeros(64, dtype=np.int64)
        self.g = np.zeros(64)
        self.h = np.zeros(64)
        self.alive = np.zeros(64, dtype=bool)
        self.where: dict[int, int] = {}
        self.n = 0
        self.count = 0

    def push(self, ids, gs, hs) -> None:
        k = len(ids)
        while self.n + k > len(self.ids):
            size = 2 * len(self.ids)
            self.ids = np.resize(self.ids, size)
            self.g = np.resize(self.g, size)
            self.h = np.resize(self.h, size)
            alive = np.zeros(size, dtype=bool)
            alive[: self.n] = self.alive[: self.n]
            self.alive = alive
        self.ids[self.n : self.n + k] = ids
        self.g[self.n : self.n + k] = gs
        self.h[self.n : self.n + k] = hs
        self.alive[self.n : self.n + k] = True
        for off, i in enumerate(ids):
            self.where[int(i)] = self.n + off
        self.n += k
        self.count += k

    def live(self) -> np.ndarray:
        return np.flatnonzero(self.alive[: self.n])

    def open_ids(self) -> np.ndarray:
        return self.ids[: self.n][self.alive[: self.n]]

    def pop_at(self, pos: int) -> int:
        self.alive[pos] = False
        self.count -= 1
        i = int(self.ids[pos])
        del self.where[i]
        return i

    def discard(self, i: int) -> None:
        pos = self.where.get(i)
        if pos is not None:
            self.pop_at(pos)


def backtracking_multigoal(
    problem: SearchProblem,
    orderer: Optional[Scorer] = None,
    *,
    dynamic_order: bool = True,
    depth_bound: int = 4,
    track_counters: bool = False,
    record_paths: bool = False,
    seed: int = 0,
) -> SearchOutcome:
    """Depth-first search that treats every goal as a failure and keeps going.

    A node's children are all generated (and goal-tested) when it is
    entered; they are then visited in ascending ``orderer`` score.  With
    ``dynamic_order`` the remaining siblings are re-scored before each pick,
    so statistics gathered in earlier subtrees influence later choices.
    """
    orderer = orderer or ConstantScorer()
    meter = ResourceMeter(problem.limit)
    collector = GoalCollector(meter, record_paths)
    graph = _new_graph([orderer], depth_bound, track_counters)
    ctx = SearchContext(problem, graph, meter, collector, random.Random(seed))
    space = problem.space
    orderer.bind(ctx)
    stack: list[list[int]] = []
    pending: list[int] = []

    def open_ids():
        if not stack:
            return np.asarray(pending, dtype=np.int64)
        return np.asarray([j for frame in stack for j in frame], dtype=np.int64)

    ctx._open_fn = open_ids

    def collect(i):
        if collector.collect(graph, i):
            orderer.on_goal(i)

    expanded = 0

    def enter(i: int) -> list[int]:
        nonlocal expanded
        state = graph.states[i]
        kids: list[int] = []
        for s in space.successors(state):
            if meter.exhausted:
                break
            j, is_new = graph.add_child(i, s, space.edge_cost(state, s), space.is_goal)
            if not is_new:
                continue
            meter.charge()
            kids.append(j)
            if graph.goal[j]:
                collect(j)
        expanded += 1
        ctx.expanded = expanded
        orderer.on_expand(i)
        return kids

    roots = []
    for s in problem.initial_states:
        i = graph.add_root(s, space.is_goal(s))
        roots.append(i)
        if graph.goal[i]:
            collect(i)
    stack.append(roots)
    static_scores: dict[int, float] = {}

    while stack and not meter.exhausted:
        frame = stack[-1]
        if not frame:
            stack.pop()
            continue
        ids = np.asarray(frame, dtype=np.int64)
        if dynamic_order or orderer.dynamic:
            sc = orderer.score(ids)
        else:
            missing = [j for j in frame if j not in static_scores]
            if missing:
                for j, v in zip(missing, orderer.score(np.asarray(missing, dtype=np.int64))):
                    static_scores[j] = float(v)
            sc = np.array([static_scores[j] for j in frame])
        pos = orderer.choose(ids, sc)
        if pos is None:
            pos = _argmin_first(sc)
        child = frame.pop(int(pos))
        stack.append(enter(child))
    return collector.outcome(graph, expanded)


def hill_climbing_multigoal(
    problem: SearchProblem,
    heuristic: Optional[Scorer] = None,
    walk_length: int = 10,
    seed: int = 0,
    *,
    depth_bound: int = 4,
    track_counters: bool = False,
    record_paths: bool = False,
) -> SearchOutcome:
    """Hill-climbing that restarts with a random walk after every goal.

    Every materialized successor costs one generation, including states seen
    before (the climber keeps no closed list).  Walk steps are charged and
    goal-tested like any other generation.  A dead end restarts the climb
    from a uniformly chosen initial state.
    """
    if walk_length < 1:
        raise InvalidParameterError("walk length must be >= 1")
    heuristic = heuristic or ConstantScorer()
    rng = random.Random(seed)
    meter = ResourceMeter(problem.limit)
    collector = GoalCollector(meter, record_paths)
    graph = _new_graph([heuristic], depth_bound, track_counters)
    ctx = SearchContext(problem, graph, meter, collector, rng)
    space = problem.space
    heuristic.bind(ctx)
    ctx._open_fn = lambda: np.zeros(0, dtype=np.int64)

    roots = []
    for s in problem.initial_states:
        i = graph.add_root(s, space.is_goal(s))
        roots.append(i)

    def visit(i: int) -> bool:
        if graph.goal[i] and collector.collect(graph, i):
            heuristic.on_goal(i)
            return True
        return False

    def materialize(i: int, s) -> int:
        meter.charge()
        j, _ = graph.add_child(i, s, space.edge_cost(graph.states[i], s), space.is_goal)
        return j

    cur = roots[0]
    found = visit(cur)
    for r in roots[1:]:
        visit(r)
    expanded = 0
    idle_restarts = 0
    while not meter.exhausted:
        if found:
            found = False
            for _ in range(walk_length):
                if meter.exhausted:
                    break
                succ = list(space.successors(graph.states[cur]))
                if not succ:
                    break
                cur = materialize(cur, succ[rng.randrange(len(succ))])
                visit(cur)
            continue
        succ = list(space.successors(graph.states[cur]))
        if not succ:
            idle_restarts += 1
            if idle_restarts > 10 * len(roots) + 10:
                break  # every restart point is a dead end
            cur = roots[rng.randrange(len(roots))]
            continue
        idle_restarts = 0
        kids: list[int] = []
        for s in succ:
            if meter.exhausted:
                break
            j = materialize(cur, s)
            kids.append(j)
            if visit(j):
                found = True
        expanded += 1
        ctx.expanded = expanded
        heuristic.on_expand(cur)
        if not kids:
            break
        if found:
            cur = next(j for j in reversed(kids) if graph.goal[j])
            continue
        ids = np.asarray(kids, dtype=np.int64)
        sc = heuristic.score(ids)
        cur = kids[_argmin_first(sc)]
    return collector.outcome(graph, expanded)
