"""Small multiple-sequence alignment as a path space for A*-epsilon.

A state is ``(pos, moves)``: the prefix lengths consumed so far and the
column moves that led there.  Keeping the moves makes every distinct
alignment a distinct goal state, so a multiple-goal search collects
alignments rather than lattice corners.  Columns are scored sum-of-pairs
with unit mismatch and gap costs (gap against gap is free).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..core import InvalidParameterError, SearchOutcome, SearchProblem, StateSpace
from ..search import Scorer, astar_epsilon_multigoal

MAX_SEQUENCES = 3
MAX_LENGTH = 8
GAP = "-"


def _column_moves(k: int) -> list[tuple[int, ...]]:
    return [m for m in itertools.product((0, 1), repeat=k) if any(m)]


def column_cost(chars) -> int:
    """Sum-of-pairs cost of one column; ``None`` or ``'-'`` marks a gap."""
    cost = 0
    for a, b in itertools.combinations(chars, 2):
        a_gap, b_gap = a in (None, GAP), b in (None, GAP)
        if a_gap and b_gap:
            continue
        if a_gap or b_gap or a != b:
            cost += 1
    return cost


def _step_cost(seqs, pos, move) -> int:
    return column_cost([seqs[i][pos[i]] if move[i] else None for i in range(len(seqs))])


def pairwise_suffix_costs(a: str, b: str) -> np.ndarray:
    """``D[i, j]`` = optimal unit-cost alignment of ``a[i:]`` with ``b[j:]``."""
    n, m = len(a), len(b)
    D = np.zeros((n + 1, m + 1))
    D[n, :] = np.arange(m, -1, -1)
    D[:, m] = np.arange(n, -1, -1)
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            D[i, j] = min(D[i + 1, j + 1] + (a[i] != b[j]), D[i + 1, j] + 1, D[i, j + 1] + 1)
    return D


@dataclass(frozen=True)
class AlignmentInstance:
    sequences: tuple
    epsilon: float
    problem: SearchProblem
    heuristic: Scorer

    def solve(self, limit: Optional[int] = None, record_paths: bool = False) -> SearchOutcome:
        problem = self.problem if limit is None else self.problem.with_limit(limit)
        return astar_epsilon_multigoal(problem, self.heuristic, epsilon=self.epsilon, record_paths=record_paths)


class AlignmentHeuristic(Scorer):
    """Sum over sequence pairs of a lower bound on the remaining cost.

    ``"length"`` uses the difference of remaining lengths (each surplus
    character must face a gap); ``"pairwise"`` uses exact pairwise suffix
    alignments, which is tighter and still admissible.
    """

    def __init__(self, sequences, kind: str = "length"):
        if kind not in ("length", "pairwise"):
            raise InvalidParameterError(f"unknown alignment bound {kind!r}")
        self.sequences = tuple(sequences)
        self.kind = kind
        self.pairs = list(itertools.combinations(range(len(self.sequences)), 2))
        if kind == "pairwise":
            self.tables = {(i, j): pairwise_suffix_costs(self.sequences[i], self.sequences[j]) for i, j in self.pairs}

    def state_value(self, state) -> float:
        pos = state[0]
        if self.kind == "length":
            rem = [len(s) - p for s, p in zip(self.sequences, pos)]
            return float(sum(abs(rem[i] - rem[j]) for i, j in self.pairs))
        return float(sum(self.tables[i, j][pos[i], pos[j]] for i, j in self.pairs))

    def score(self, ids):
        states = self.ctx.graph.states
        return np.array([self.state_value(states[i]) for i in ids], dtype=np.float64)


def _validate(sequences):
    seqs = tuple(str(s) for s in sequences)
    if not 2 <= len(seqs) <= MAX_SEQUENCES:
        raise InvalidParameterError("alignment needs 2 or 3 sequences")
    if any(len(s) > MAX_LENGTH for s in seqs):
        raise InvalidParameterError(f"sequences must have length <= {MAX_LENGTH}")
    if any(GAP in s for s in seqs):
        raise InvalidParameterError(f"sequences may not contain the gap symbol {GAP!r}")
    return seqs


def alignment_state_space(sequences) -> StateSpace:
    seqs = _validate(sequences)
    k = len(seqs)
    end = tuple(len(s) for s in seqs)
    moves = _column_moves(k)

    def successors(state):
        pos, path = state
        out = []
        for m in moves:
            nxt = tuple(p + d for p, d in zip(pos, m))
            if all(p <= e for p, e in zip(nxt, end)):
                out.append((nxt, path + (m,)))
        return out

    def cost(a, b):
        return float(_step_cost(seqs, a[0], b[1][-1]))

    return StateSpace(
        successors=successors,
        is_goal=lambda state: state[0] == end,
        cost=cost,
        name="msa",
    )


def alignment_space(sequences, epsilon: float = 0.1, bound: str = "length", limit: Optional[int] = None) -> AlignmentInstance:
    """Alignment problem plus the admissible heuristic for :func:`astar_epsilon_multigoal`."""
    if epsilon < 0:
        raise InvalidParameterError("epsilon must be >= 0")
    seqs = _validate(sequences)
    space = alignment_state_space(seqs)
    root = (tuple(0 for _ in seqs), ())
    return AlignmentInstance(seqs, float(epsilon), SearchProblem(space, (root,), limit), AlignmentHeuristic(seqs, bound))


def alignment_cost(sequences, moves) -> int:
    pos = [0] * len(sequences)
    total = 0
    for m in moves:
        total += _step_cost(sequences, pos, m)
        pos = [p + d for p, d in zip(pos, m)]
    if tuple(pos) != tuple(len(s) for s in sequences):
        raise InvalidParameterError("moves do not consume every sequence")
    return total


def render(sequences, moves) -> tuple[str, ...]:
    """Gapped rows of an alignment given by its column moves."""
    rows = [[] for _ in sequences]
    pos = [0] * len(sequences)
    for m in moves:
        for i, d in enumerate(m):
            rows[i].append(sequences[i][pos[i]] if d else GAP)
            pos[i] += d
    return tuple("".join(r) for r in rows)


def optimal_alignment_cost(sequences) -> int:
    seqs = _validate(sequences)
    return int(_suffix_table(seqs)(tuple(0 for _ in seqs)))


def _suffix_table(seqs):
    end = tuple(len(s) for s in seqs)
    moves = _column_moves(len(seqs))

    @lru_cache(maxsize=None)
    def best(pos):
        if pos == end:
            return 0
        out = None
        for m in moves:
            nxt = tuple(p + d for p, d in zip(pos, m))
            if all(p <= e for p, e in zip(nxt, end)):
                v = _step_cost(seqs, pos, m) + best(nxt)
                out = v if out is None else min(out, v)
        return out

    return best


def enumerate_alignments(sequences, epsilon: float) -> dict[tuple, int]:
    """Every alignment with cost <= (1 + epsilon) * optimum, mapped to its cost.

    Dynamic programming over the prefix lattice gives the exact cost to go;
    a depth-first walk then keeps only prefixes that can still finish within
    the bound.
    """
    seqs = _validate(sequences)
    best = _suffix_table(seqs)
    start = tuple(0 for _ in seqs)
    end = tuple(len(s) for s in seqs)
    limit = (1.0 + epsilon) * best(start) + 1e-9
    moves = _column_moves(len(seqs))
    out: dict[tuple, int] = {}

    def walk(pos, g, path):
        if pos == end:
            out[path] = g
            return
        for m in moves:
            nxt = tuple(p + d for p, d in zip(pos, m))
            if all(p <= e for p, e in zip(nxt, end)):
                ng = g + _step_cost(seqs, pos, m)
                if ng + best(nxt) <= limit:
                    walk(nxt, ng, path + (m,))

    walk(start, 0, ())
    return out
