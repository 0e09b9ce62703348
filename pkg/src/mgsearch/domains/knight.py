"""Open knight tours: states are partial paths, goals are complete tours."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..core import InvalidParameterError, SearchProblem, StateSpace

JUMPS = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))


def knight_moves(n: int) -> list[list[int]]:
    out = []
    for sq in range(n * n):
        r, c = divmod(sq, n)
        out.append([(r + dr) * n + (c + dc) for dr, dc in JUMPS if 0 <= r + dr < n and 0 <= c + dc < n])
    return out


def knight_tour_space(n: int) -> StateSpace:
    """Paths are tuples of square indices ``row * n + col``."""
    if n < 3:
        raise InvalidParameterError("board size must be >= 3")
    moves = knight_moves(n)
    size = n * n
    half = (n - 1) / 2

    def successors(path):
        if len(path) == size:
            return []
        seen = set(path)
        return [path + (t,) for t in moves[path[-1]] if t not in seen]

    def features(path):
        seen = set(path)
        cur = path[-1]
        onward = sum(1 for t in moves[cur] if t not in seen)
        r, c = divmod(cur, n)
        centre = 1.0 - (abs(r - half) + abs(c - half)) / (2 * half)
        return np.array([len(path) / size, onward / 8.0, centre])

    return StateSpace(
        successors=successors,
        is_goal=lambda path: len(path) == size,
        features=features,
        name=f"knight{n}",
    )


def knight_problem(n: int, limit=None) -> SearchProblem:
    return SearchProblem(knight_tour_space(n), tuple((sq,) for sq in range(n * n)), limit)


def is_valid_tour(n: int, path) -> bool:
    if len(path) != n * n or len(set(path)) != n * n:
        return False
    for a, b in zip(path, path[1:]):
        (r1, c1), (r2, c2) = divmod(a, n), divmod(b, n)
        if sorted((abs(r1 - r2), abs(c1 - c2))) != [1, 2]:
            return False
    return True


def count_open_tours(n: int) -> int:
    """Directed open tours from every start square, by bitmask backtracking."""
    adj = [0] * (n * n)
    for sq in range(n * n):
        r, c = divmod(sq, n)
        for dr, dc in JUMPS:
            if 0 <= r + dr < n and 0 <= c + dc < n:
                adj[sq] |= 1 << ((r + dr) * n + c + dc)
    full = (1 << (n * n)) - 1

    @lru_cache(maxsize=None)
    def go(cur, visited):
        if visited == full:
            return 1
        total = 0
        avail = adj[cur] & ~visited
        while avail:
            bit = avail & -avail
            avail ^= bit
            total += go(bit.bit_length() - 1, visited | bit)
        return total

    return sum(go(sq, 1 << sq) for sq in range(n * n))
