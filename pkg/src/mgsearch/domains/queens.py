"""N-queens as a row-by-row placement space; every full placement is a goal."""

from __future__ import annotations

import numpy as np

from ..core import InvalidParameterError, SearchProblem, StateSpace


def _free_columns(n: int, placed: tuple) -> list[int]:
    r = len(placed)
    out = []
    for c in range(n):
        for rr, cc in enumerate(placed):
            if cc == c or abs(cc - c) == r - rr:
                break
        else:
            out.append(c)
    return out


def queens_features(n: int, placed: tuple) -> np.ndarray:
    """Depth, centrality of the last queen, and how constrained the remaining rows are."""
    r = len(placed)
    rows_left = n - r
    if rows_left == 0:
        free_frac, min_free = 0.0, 0.0
    else:
        counts = []
        for row in range(r, n):
            k = 0
            for c in range(n):
                for rr, cc in enumerate(placed):
                    if cc == c or abs(cc - c) == row - rr:
                        break
                else:
                    k += 1
            counts.append(k)
        free_frac = sum(counts) / (rows_left * n)
        min_free = min(counts) / n
    half = (n - 1) / 2 or 1.0
    centrality = 1.0 - abs(placed[-1] - (n - 1) / 2) / half if placed else 0.0
    return np.array([r / n, centrality, free_frac, min_free])


def nqueens_space(n: int) -> StateSpace:
    if n < 1:
        raise InvalidParameterError("n must be >= 1")

    def successors(placed):
        if len(placed) == n:
            return []
        return [placed + (c,) for c in _free_columns(n, placed)]

    return StateSpace(
        successors=successors,
        is_goal=lambda placed: len(placed) == n,
        features=lambda placed: queens_features(n, placed),
        name=f"queens{n}",
    )


def nqueens_problem(n: int, limit=None) -> SearchProblem:
    return SearchProblem(nqueens_space(n), ((),), limit)


def is_valid_solution(n: int, placed) -> bool:
    if len(placed) != n or sorted(placed) != list(range(n)):
        return False
    return len({r + c for r, c in enumerate(placed)}) == n and len({r - c for r, c in enumerate(placed)}) == n


def count_solutions(n: int) -> int:
    """Bitmask enumeration, independent of the state-space code."""
    full = (1 << n) - 1

    def go(cols, d1, d2):
        if cols == full:
            return 1
        total = 0
        avail = full & ~(cols | d1 | d2)
        while avail:
            bit = avail & -avail
            avail ^= bit
            total += go(cols | bit, ((d1 | bit) << 1) & full, (d2 | bit) >> 1)
        return total

    return go(0, 0, 0)


def count_tree_nodes(n: int) -> int:
    """Consistent partial placements (excluding the empty board)."""
    full = (1 << n) - 1

    def go(cols, d1, d2):
        total = 0
        avail = full & ~(cols | d1 | d2)
        while avail:
            bit = avail & -avail
            avail ^= bit
            total += 1 + go(cols | bit, ((d1 | bit) << 1) & full, (d2 | bit) >> 1)
        return total

    return go(0, 0, 0)



def queens_warm_models(sizes=(5, 6, 7, 8, 9), depth_bound: int = 10, k: int = 5, sigma: int = 8):
    """Per-depth models induced from exhaustive backtracking on smaller boards.

    The features are scale free, so the examples transfer to larger ``n``.
    """
    from ..induction import DepthModels, induce_models
    from ..search import backtracking_multigoal
    from ..utility import SupportThreshold

    models = DepthModels(depth_bound, k)
    for m in sizes:
        out = backtracking_multigoal(nqueens_problem(m), None, depth_bound=depth_bound, track_counters=True)
        induce_models(out.graph, lambda placed, m=m: queens_features(m, placed), models, SupportThreshold(sigma), tag=m)
    return models
