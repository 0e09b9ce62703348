"""4-connected grid worlds with random walls and scattered or clustered goals."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .. import _kernels
from ..core import InvalidParameterError, SearchError, SearchProblem, StateSpace

MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


class GridGenerationError(SearchError):
    pass


@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    walls: np.ndarray = field(repr=False)  # bool, shape (height, width)
    goals: tuple = ()

    @property
    def passable(self) -> np.ndarray:
        return ~self.walls

    def is_passable(self, cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width and not self.walls[r, c]

    def passable_cells(self) -> list[tuple[int, int]]:
        rs, cs = np.nonzero(~self.walls)
        return [(int(r), int(c)) for r, c in zip(rs, cs)]

    @property
    def n_passable(self) -> int:
        return int((~self.walls).sum())

    def neighbors(self, cell):
        r, c = cell
        out = []
        for dr, dc in MOVES:
            rr, cc = r + dr, c + dc
            if 0 <= rr < self.height and 0 <= cc < self.width and not self.walls[rr, cc]:
                out.append((rr, cc))
        return out

    def space(self, goals: Optional[tuple] = None) -> StateSpace:
        goal_set = frozenset(self.goals if goals is None else goals)
        w, h = self.width, self.height
        return StateSpace(
            successors=self.neighbors,
            is_goal=goal_set.__contains__,
            features=lambda s: np.array([s[0] / h, s[1] / w]),
            name=f"grid{w}x{h}",
        )

    def problem(self, starts, limit: Optional[int] = None) -> SearchProblem:
        return SearchProblem(self.space(), tuple(starts), limit)

    def connected(self) -> bool:
        cells = np.argwhere(~self.walls)
        if len(cells) == 0:
            return True
        return _kernels.flood_count(~self.walls, cells[0]) == len(cells)


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def generate_grid(
    width: int,
    height: int,
    wall_density: float = 0.0,
    max_wall_length: int = 10,
    seed: int = 0,
) -> GridWorld:
    """Random straight walls while keeping the passable region connected.

    A wall that would disconnect the grid is rejected and redrawn.  After
    ten times the expected number of walls in attempts the generator gives
    up with :class:`GridGenerationError`.
    """
    if not 0.0 <= wall_density < 1.0:
        raise InvalidParameterError("wall density must lie in [0, 1)")
    if width < 1 or height < 1 or max_wall_length < 1:
        raise InvalidParameterError("grid dimensions and wall length must be positive")
    rng = np.random.default_rng(seed)
    walls = np.zeros((height, width), dtype=bool)
    target = int(round(wall_density * width * height))
    if target == 0:
        return GridWorld(width, height, walls)
    expected_walls = max(1, math.ceil(target / ((1 + max_wall_length) / 2)))
    attempts = 10 * expected_walls
    placed = 0
    for _ in range(attempts):
        if placed >= target:
            break
        r = int(rng.integers(height))
        c = int(rng.integers(width))
        length = int(rng.integers(1, max_wall_length + 1))
        horizontal = bool(rng.integers(2))
        cells = []
        for k in range(length):
            rr, cc = (r, c + k) if horizontal else (r + k, c)
            if rr >= height or cc >= width:
                break
            if not walls[rr, cc]:
                cells.append((rr, cc))
            if placed + len(cells) >= target:
                break
        if not cells:
            continue
        trial = walls.copy()
        for rr, cc in cells:
            trial[rr, cc] = True
        free = np.argwhere(~trial)
        if len(free) == 0:
            continue
        if _kernels.flood_count(~trial, free[0]) != len(free):
            continue
        walls = trial
        placed += len(cells)
    if placed < target:
        raise GridGenerationError(
            f"placed {placed} of {target} wall cells in {attempts} attempts while keeping the grid connected"
        )
    return GridWorld(width, height, walls)


@dataclass(frozen=True)
class GoalPlacement:
    mode: str = "scattered"  # or "clustered"
    centers: int = 3
    spread: float = 2.0
    scattered_fraction: float = 0.1

    def __post_init__(self):
        if self.mode not in ("scattered", "clustered"):
            raise InvalidParameterError(f"unknown goal placement {self.mode!r}")
        if self.centers < 1 or self.spread < 0:
            raise InvalidParameterError("need at least one center and a non-negative spread")


def _nearest_free(grid: GridWorld, cell, taken: set):
    r = min(max(cell[0], 0), grid.height - 1)
    c = min(max(cell[1], 0), grid.width - 1)
    seen = {(r, c)}
    q = deque([(r, c)])
    while q:
        cur = q.popleft()
        if not grid.walls[cur] and cur not in taken:
            return cur
        for dr, dc in MOVES:
            nxt = (cur[0] + dr, cur[1] + dc)
            if 0 <= nxt[0] < grid.height and 0 <= nxt[1] < grid.width and nxt not in seen:
                seen.add(nxt)
                q.append(nxt)
    return None


def place_goals(grid: GridWorld, count: int, placement: GoalPlacement = GoalPlacement(), seed: int = 0) -> GridWorld:
    """Return a copy of ``grid`` with ``count`` distinct goal cells."""
    cells = grid.passable_cells()
    if count > len(cells):
        raise InvalidParameterError(f"cannot place {count} goals on {len(cells)} passable cells")
    rng = np.random.default_rng(seed)
    if placement.mode == "scattered":
        pick = rng.choice(len(cells), size=count, replace=False)
        return replace(grid, goals=tuple(cells[int(k)] for k in pick))
    n_scatter = int(round(placement.scattered_fraction * count))
    pick = rng.choice(len(cells), size=n_scatter, replace=False)
    goals = [cells[int(k)] for k in pick]
    taken = set(goals)
    centers = [cells[int(k)] for k in rng.choice(len(cells), size=placement.centers, replace=True)]
    for _ in range(count - n_scatter):
        cr, cc = centers[int(rng.integers(len(centers)))]
        cell = None
        for _ in range(100):
            dr, dc = rng.normal(0.0, placement.spread, size=2)
            cand = (int(round(cr + dr)), int(round(cc + dc)))
            if grid.is_passable(cand) and cand not in taken:
                cell = cand
                break
        if cell is None:
            cell = _nearest_free(grid, (int(round(cr + dr)), int(round(cc + dc))), taken)
        goals.append(cell)
        taken.add(cell)
    return replace(grid, goals=tuple(goals))


def random_start(grid: GridWorld, seed: int = 0, avoid_goals: bool = True):
    return random_starts(grid, 1, seed, avoid_goals)[0]


def random_starts(grid: GridWorld, count: int, seed: int = 0, avoid_goals: bool = True) -> list:
    """``count`` distinct passable cells; the first equals ``random_start`` for the same seed."""
    rng = np.random.default_rng(seed)
    goal_set = set(grid.goals) if avoid_goals else set()
    cells = [c for c in grid.passable_cells() if c not in goal_set]
    if not 1 <= count <= len(cells):
        raise InvalidParameterError(f"cannot draw {count} distinct start cells from {len(cells)}")
    first = int(rng.integers(len(cells)))
    rest = [k for k in rng.permutation(len(cells)).tolist() if k != first][: count - 1]
    return [cells[first]] + [cells[k] for k in rest]
