"""Brute-force ground truth for tests on tiny instances.

Nothing here is meant for production search: the optimal-forest computations
enumerate every forest and are exponential in the budget.
"""

from __future__ import annotations

import heapq
from typing import Iterable

from .core import SearchError, StateSpace

MAX_FOREST_BUDGET = 12
MAX_REACHABLE = 50


class InstanceTooLargeError(SearchError):
    pass


def reachable_states(space: StateSpace, roots: Iterable, limit: int | None = None) -> list:
    """States reachable from ``roots`` (roots included), in BFS order."""
    order = []
    seen = set()
    frontier = []
    for r in roots:
        if r not in seen:
            seen.add(r)
            order.append(r)
            frontier.append(r)
    k = 0
    while k < len(frontier):
        s = frontier[k]
        k += 1
        for t in space.successors(s):
            if t not in seen:
                seen.add(t)
                order.append(t)
                frontier.append(t)
                if limit is not None and len(order) > limit:
                    raise InstanceTooLargeError(f"more than {limit} reachable states")
    return order


def _forests(space: StateSpace, open_set, explored, r: int):
    """Every set of ``r`` unexplored states that can hang as a forest below ``open_set``.

    Yields frozensets; each set is closed under "has a predecessor in the
    set or in ``open_set``".
    """
    open_set = list(open_set)
    blocked = set(explored) | set(open_set)
    level = {frozenset()}
    for _ in range(r):
        nxt = set()
        for f in level:
            sources = open_set + list(f)
            for s in sources:
                for t in space.successors(s):
                    if t not in blocked and t not in f:
                        nxt.add(f | {t})
        if not nxt:
            return
        level = nxt
    yield from level


def _guard(space, open_set, explored, r):
    if r > MAX_FOREST_BUDGET:
        raise InstanceTooLargeError(f"budget {r} exceeds the oracle guard of {MAX_FOREST_BUDGET}")
    reachable_states(space, list(open_set) + list(explored), MAX_REACHABLE)


def optimal_forest_goal_count(space: StateSpace, open_set, collected, r: int, explored=()) -> int:
    """Maximum number of new goals any forest of ``r`` generations can contain.

    ``explored`` lists states already generated besides the open ones; they
    cannot be generated again.  When fewer than ``r`` states remain, the
    largest forests are used instead.
    """
    _guard(space, open_set, explored, r)
    if r == 0:
        return 0
    best = 0
    for f in _forests_upto(space, open_set, explored, r):
        best = max(best, sum(1 for s in f if space.is_goal(s) and s not in collected))
    return best


def _forests_upto(space, open_set, explored, r):
    for size in range(r, 0, -1):
        found = list(_forests(space, open_set, explored, size))
        if found:
            return found
    return []


def opt_membership(space: StateSpace, open_set, collected, r: int, explored=()) -> set:
    """Open states that root part of some optimal forest."""
    _guard(space, open_set, explored, r)
    forests = _forests_upto(space, open_set, explored, r)
    if not forests:
        return set()
    value = {f: sum(1 for s in f if space.is_goal(s) and s not in collected) for f in forests}
    best = max(value.values())
    members = set()
    for f, v in value.items():
        if v != best:
            continue
        for s in open_set:
            if s not in members and any(t in f for t in space.successors(s)):
                members.add(s)
    return members


def exhaustive_goals(space: StateSpace, roots) -> set:
    """Every goal reachable from ``roots`` by a full traversal."""
    return {s for s in reachable_states(space, roots) if space.is_goal(s)}


def exact_shortest_paths(space: StateSpace, sources) -> dict:
    """Dijkstra distances from the nearest source to every reachable state."""
    dist: dict = {}
    heap = []
    tie = 0
    for s in sources:
        dist[s] = 0.0
        heap.append((0.0, tie, s))
        tie += 1
    heapq.heapify(heap)
    done = set()
    while heap:
        d, _, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        for t in space.successors(s):
            nd = d + space.edge_cost(s, t)
            if nd < dist.get(t, float("inf")):
                dist[t] = nd
                tie += 1
                heapq.heappush(heap, (nd, tie, t))
    return dist


def distance(dist_map: dict, state) -> float:
    """Look up a state in an :func:`exact_shortest_paths` map (``inf`` if unreachable)."""
    return dist_map.get(state, float("inf"))
