import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import dict_space, random_dag
from mgsearch.domains import grid as gridmod, queens
from mgsearch.oracle import (
    InstanceTooLargeError,
    distance,
    exact_shortest_paths,
    exhaustive_goals,
    opt_membership,
    optimal_forest_goal_count,
    reachable_states,
)

# open = {A, B}; nothing useful within two generations under A, two goals under B
AB = {"A": ["a1"], "a1": ["a2"], "a2": [], "B": ["g1"], "g1": ["g2"], "g2": [], "r": ["A", "B"]}
AB_GOALS = {"g1", "g2"}


def test_forest_count_examples():
    space = dict_space(AB, AB_GOALS)
    assert optimal_forest_goal_count(space, ["A", "B"], set(), 0, explored=["r"]) == 0
    assert optimal_forest_goal_count(space, ["A", "B"], set(), 2, explored=["r"]) == 2
    allgoal = dict_space({0: [1, 2], 1: [3], 2: [], 3: []}, {1, 2, 3})
    assert optimal_forest_goal_count(allgoal, [0], set(), 3) == 3


def test_membership_examples():
    space = dict_space(AB, AB_GOALS)
    assert opt_membership(space, ["A", "B"], set(), 2, explored=["r"]) == {"B"}
    assert opt_membership(space, ["A"], set(), 1, explored=["r"]) == {"A"}
    assert opt_membership(space, ["A", "B"], set(), 6, explored=["r"]) == {"A", "B"}


def test_collected_goals_do_not_count():
    space = dict_space(AB, AB_GOALS)
    assert optimal_forest_goal_count(space, ["A", "B"], {"g1"}, 2, explored=["r"]) == 1


def test_guard():
    space = dict_space({0: [1], 1: []})
    with pytest.raises(InstanceTooLargeError):
        optimal_forest_goal_count(space, [0], set(), 13)
    big = dict_space({k: [k + 1] for k in range(100)})
    with pytest.raises(InstanceTooLargeError):
        opt_membership(big, [0], set(), 2)


@given(st.integers(0, 10**6), st.integers(3, 14))
def test_forest_count_monotone_and_membership(seed, n):
    rng = random.Random(seed)
    adj, goals = random_dag(rng, n, max_in=2, goal_rate=0.3)
    space = dict_space(adj, goals)
    open_set = [0]
    counts = [optimal_forest_goal_count(space, open_set, set(), r) for r in range(0, 6)]
    assert counts == sorted(counts)
    members = opt_membership(space, open_set, set(), 4)
    assert members <= set(open_set)
    if counts[4] > 0:
        assert members


def test_exhaustive_goals_examples():
    for n, count in ((4, 2), (5, 10)):
        p = queens.nqueens_problem(n)
        assert len(exhaustive_goals(p.space, p.initial_states)) == count
    assert exhaustive_goals(dict_space({0: [1], 1: []}), [0]) == set()


def test_shortest_path_examples():
    world = gridmod.GridWorld(3, 3, np.zeros((3, 3), dtype=bool))
    dist = exact_shortest_paths(world.space(), [(0, 0)])
    assert dist[(2, 2)] == 4 and dist[(0, 0)] == 0
    assert distance(dist, (9, 9)) == math.inf


def test_reachable_limit():
    with pytest.raises(InstanceTooLargeError):
        reachable_states(dict_space({k: [k + 1] for k in range(20)}), [0], 5)


@pytest.mark.parametrize("seed", range(20))
def test_manhattan_is_lower_bound(seed):
    world = gridmod.generate_grid(20, 20, 0.2, 5, seed)
    start = gridmod.random_start(world, seed)
    dist = exact_shortest_paths(world.space(), [start])
    for cell, d in dist.items():
        assert gridmod.manhattan(start, cell) <= d
