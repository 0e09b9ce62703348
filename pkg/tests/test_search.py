import random
from collections import deque

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import dict_space, problem_of, random_dag
from mgsearch.core import AnytimeTrace, InvalidParameterError, InvalidProblemError, ResourceMeter, SearchError, SearchProblem
from mgsearch.domains import grid as gridmod, queens
from mgsearch.oracle import exact_shortest_paths, exhaustive_goals
from mgsearch.search import (
    BestFirstSearch,
    ConstantScorer,
    StateScorer,
    astar_epsilon_multigoal,
    backtracking_multigoal,
    best_first_multigoal,
    hill_climbing_multigoal,
)


def test_chain_collects_both_goals(chain):
    adj, goals = chain
    out = best_first_multigoal(problem_of(adj, goals, ("s0",), 3), ConstantScorer())
    assert out.goal_set == {"g1", "g2"}


def test_single_generation_collects_goal():
    out = best_first_multigoal(problem_of({"s0": ["g"]}, {"g"}, ("s0",), 1))
    assert out.goals == ("g",)
    assert out.generated == 1


def test_empty_initial_states_rejected():
    with pytest.raises(InvalidProblemError):
        SearchProblem(dict_space({}), ())


def test_duplicate_initial_states_rejected():
    with pytest.raises(InvalidProblemError):
        SearchProblem(dict_space({}), (1, 1))


def test_meter_refuses_past_limit():
    m = ResourceMeter(1)
    m.charge()
    with pytest.raises(SearchError):
        m.charge()


def test_trace_rejects_regression():
    t = AnytimeTrace()
    t.record(3, 2)
    with pytest.raises(SearchError):
        t.record(4, 1)


def _bfs_order(adj, roots):
    seen = set(roots)
    q = deque(roots)
    order = []
    while q:
        s = q.popleft()
        order.append(s)
        for t in adj[s]:
            if t not in seen:
                seen.add(t)
                q.append(t)
    return order


@given(st.integers(0, 10_000), st.integers(2, 60))
def test_constant_scorer_is_breadth_first(seed, n):
    rng = random.Random(seed)
    adj, goals = random_dag(rng, n)
    search = BestFirstSearch(problem_of(adj, goals), ConstantScorer())
    out = search.run()
    expanded = [out.graph.states[i] for i in search.expansion_order]
    assert expanded == _bfs_order(adj, [0])[: len(expanded)]


@given(st.integers(0, 10_000), st.integers(2, 60), st.integers(1, 80))
def test_resource_cap_and_soundness(seed, n, R):
    rng = random.Random(seed)
    adj, goals = random_dag(rng, n)
    p = problem_of(adj, goals, limit=R)
    out = best_first_multigoal(p)
    reachable = len(_bfs_order(adj, [0])) - 1
    assert out.generated == min(R, reachable)
    assert len(set(out.goals)) == len(out.goals)
    assert all(g in goals for g in out.goals)
    pts = out.trace.checkpoints
    assert all(a.generated < b.generated and a.goals <= b.goals for a, b in zip(pts, pts[1:]))
    assert all(pt.generated <= R for pt in pts)
    assert pts[-1].goals == len(out.goals)


def test_discovery_counts_match_trace():
    rng = random.Random(5)
    adj, goals = random_dag(rng, 40)
    out = best_first_multigoal(problem_of(adj, goals), record_paths=True)
    for k, d in enumerate(out.discoveries):
        assert out.goals_at(d.generated) >= k + 1
        assert d.path[0] == 0 and d.path[-1] == d.state


def test_static_scorer_guides_order():
    adj = {0: [1, 2], 1: [3], 2: [4], 3: [], 4: []}
    out = best_first_multigoal(problem_of(adj, {4}, limit=3), StateScorer(lambda s: -s))
    assert out.goals == (4,)


# -- A* epsilon ---------------------------------------------------------------


def _grid_astar(world, start, eps, limit=None):
    goals = world.goals

    def h(s):
        return min(gridmod.manhattan(s, g) for g in goals)

    return astar_epsilon_multigoal(world.problem([start], limit), StateScorer(h), StateScorer(h), eps, record_paths=True)


def test_astar_zero_epsilon_finds_optimal_goal_first():
    world = gridmod.place_goals(gridmod.generate_grid(8, 8, 0.15, 3, 2), 1, seed=2)
    start = gridmod.random_start(world, 3)
    out = _grid_astar(world, start, 0.0)
    dist = exact_shortest_paths(world.space(), [start])
    assert out.goals[0] == world.goals[0]
    assert out.discoveries[0].cost == dist[world.goals[0]]


def test_astar_epsilon_bound_on_empty_grid():
    world = gridmod.GridWorld(5, 5, np.zeros((5, 5), dtype=bool), ((4, 4), (0, 3)))
    out = _grid_astar(world, (0, 0), 0.1)
    dist = exact_shortest_paths(world.space(), [(0, 0)])
    assert out.goals
    for d in out.discoveries:
        assert d.cost <= 1.1 * dist[d.state] + 1e-9


def test_astar_cutoff_stops_search():
    # goals at cost 4 and 10 along a line, plus an expensive side branch
    adj = {k: [k + 1] for k in range(10)}
    adj[10] = []
    adj[0].append("x")
    adj["x"] = ["y"]
    adj["y"] = []
    space = dict_space(adj, {4, 10})
    cost = lambda a, b: 20.0 if b == "x" else 1.0
    space = type(space)(space.successors, space.is_goal, cost)

    def h(s):
        return 0.0 if isinstance(s, str) else float(max(0, 4 - s) if s <= 4 else 10 - s)

    out = astar_epsilon_multigoal(SearchProblem(space, (0,)), StateScorer(h), None, 0.1)
    assert set(out.goals) == {4}
    # the expensive branch is never expanded past its first node
    assert "y" not in out.graph


def test_astar_negative_epsilon():
    with pytest.raises(InvalidParameterError):
        astar_epsilon_multigoal(problem_of({0: []}, set()), ConstantScorer(), None, -0.1)


# -- backtracking and hill-climbing --------------------------------------------


@pytest.mark.parametrize("n,count", [(1, 1), (4, 2), (5, 10), (6, 4)])
def test_backtracking_queens_complete(n, count):
    out = backtracking_multigoal(queens.nqueens_problem(n))
    assert len(out.goals) == count
    p = queens.nqueens_problem(n)
    assert out.goal_set == exhaustive_goals(p.space, p.initial_states)


def test_backtracking_goal_free_space():
    adj = {0: [1, 2], 1: [3], 2: [], 3: []}
    out = backtracking_multigoal(problem_of(adj, set()))
    assert out.goals == () and out.generated == 3


@given(st.integers(0, 10_000), st.integers(1, 40))
def test_backtracking_respects_budget(seed, R):
    rng = random.Random(seed)
    adj, goals = random_dag(rng, 30)
    out = backtracking_multigoal(problem_of(adj, goals, limit=R))
    assert out.generated <= R
    assert all(g in goals for g in out.goals)


def test_hill_climbing_initial_goal():
    out = hill_climbing_multigoal(problem_of({0: [1], 1: [0]}, {0}, limit=5), None, 1, seed=0)
    assert out.discoveries[0].state == 0 and out.discoveries[0].generated == 0


def test_hill_climbing_corridor_and_determinism():
    adj = {k: [k + 1, max(0, k - 1)] for k in range(10)}
    adj[10] = [9]
    p = problem_of(adj, {10}, limit=200)
    score = StateScorer(lambda s: 10 - s)
    a = hill_climbing_multigoal(p, score, 1, seed=4)
    b = hill_climbing_multigoal(p, StateScorer(lambda s: 10 - s), 1, seed=4)
    assert len(a.goals) >= 1
    assert a.goals == b.goals and a.generated == b.generated
    assert [d.generated for d in a.discoveries] == [d.generated for d in b.discoveries]


def test_hill_climbing_dead_end_restarts():
    adj = {0: [1], 1: [], 2: [3], 3: []}
    out = hill_climbing_multigoal(problem_of(adj, {3}, roots=(0, 2), limit=40), None, 1, seed=1)
    assert out.generated == 40
    assert out.goals == (3,)


def test_hill_climbing_walk_length_validated():
    with pytest.raises(InvalidParameterError):
        hill_climbing_multigoal(problem_of({0: []}, set(), limit=2), None, 0)
