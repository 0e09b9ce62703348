import random

import pytest
from hypothesis import settings

from mgsearch.core import SearchProblem, StateSpace

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def dict_space(adj: dict, goals=(), features=None) -> StateSpace:
    """State space over the keys of an adjacency dict."""
    goal_set = frozenset(goals)
    return StateSpace(
        successors=lambda s: tuple(adj.get(s, ())),
        is_goal=goal_set.__contains__,
        features=features,
    )


def random_dag(rng: random.Random, n: int, max_in: int = 4, goal_rate: float = 0.2):
    """Random graph on 0..n-1 where node k > 0 has 1..max_in parents among earlier nodes."""
    adj = {k: [] for k in range(n)}
    for k in range(1, n):
        for p in rng.sample(range(k), min(k, rng.randint(1, max_in))):
            adj[p].append(k)
    goals = {k for k in range(1, n) if rng.random() < goal_rate}
    return adj, goals


def random_tree(rng: random.Random, n: int, goal_rate: float = 0.3):
    adj = {k: [] for k in range(n)}
    for k in range(1, n):
        adj[rng.randrange(k)].append(k)
    goals = {k for k in range(1, n) if rng.random() < goal_rate}
    return adj, goals


def problem_of(adj, goals, roots=(0,), limit=None) -> SearchProblem:
    return SearchProblem(dict_space(adj, goals), tuple(roots), limit)


@pytest.fixture
def chain():
    # s0 -> g1 -> g2
    return {"s0": ["g1"], "g1": ["g2"], "g2": []}, {"g1", "g2"}


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.verdict_lines():
        terminalreporter.write_line(line)
