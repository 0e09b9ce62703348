"""Line-oriented explicit graph files.

Header ``MGSG v1 <n-nodes> <feature-dim>``, then one line per node::

    <id> <goal:0|1> <f1,...,fk> <succ-id;succ-id;...>

Ids run consecutively from 0.  An empty feature vector or successor list is
written as ``-``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..core import SearchError, StateSpace

MAGIC = "MGSG"
VERSION = "v1"


class GraphFormatError(SearchError):
    """Malformed graph file; the message carries the line number."""


class GraphValidationError(SearchError):
    """Well-formed file describing an invalid graph (e.g. dangling ids)."""


@dataclass(frozen=True)
class ExplicitGraph:
    """Adjacency lists over integer states ``0..n-1``."""

    successors: tuple  # tuple of tuples of ints
    goals: np.ndarray  # bool (n,)
    features: np.ndarray  # float (n, dim)

    @property
    def n(self) -> int:
        return len(self.successors)

    @property
    def mean_out_degree(self) -> float:
        return sum(len(s) for s in self.successors) / max(1, self.n)

    def space(self, name: str = "graph") -> StateSpace:
        succ, goals, feats = self.successors, self.goals, self.features
        return StateSpace(
            successors=succ.__getitem__,
            is_goal=lambda s: bool(goals[s]),
            features=feats.__getitem__,
            name=name,
        )


def _fmt(v: float) -> str:
    return repr(float(v))


def save_graph(graph: ExplicitGraph, path) -> None:
    dim = graph.features.shape[1] if graph.features.ndim == 2 else 0
    with open(path, "w") as fh:
        fh.write(f"{MAGIC} {VERSION} {graph.n} {dim}\n")
        for i in range(graph.n):
            feats = ",".join(_fmt(v) for v in graph.features[i]) if dim else "-"
            succ = ";".join(str(j) for j in graph.successors[i]) or "-"
            fh.write(f"{i} {int(bool(graph.goals[i]))} {feats} {succ}\n")


def read_graph(path) -> ExplicitGraph:
    where = os.fspath(path)
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != MAGIC or header[1] != VERSION:
            raise GraphFormatError(f"{where}:1: expected header '{MAGIC} {VERSION} <n-nodes> <feature-dim>'")
        try:
            n, dim = int(header[2]), int(header[3])
        except ValueError:
            raise GraphFormatError(f"{where}:1: node count and feature dimension must be integers") from None
        if n < 0 or dim < 0:
            raise GraphFormatError(f"{where}:1: negative node count or dimension")
        succ: list = []
        goals = np.zeros(n, dtype=bool)
        feats = np.zeros((n, dim))
        lineno = 1
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split()
            try:
                if len(parts) != 4:
                    raise ValueError(f"expected 4 fields, got {len(parts)}")
                i = int(parts[0])
                if i != len(succ):
                    raise ValueError(f"expected node id {len(succ)}, got {i}")
                if i >= n:
                    raise ValueError(f"more node lines than the declared {n}")
                if parts[1] not in ("0", "1"):
                    raise ValueError(f"goal flag must be 0 or 1, got {parts[1]!r}")
                goals[i] = parts[1] == "1"
                f = [] if parts[2] == "-" else [float(v) for v in parts[2].split(",")]
                if len(f) != dim:
                    raise ValueError(f"expected {dim} features, got {len(f)}")
                feats[i] = f
                succ.append(() if parts[3] == "-" else tuple(int(v) for v in parts[3].split(";")))
            except ValueError as exc:
                raise GraphFormatError(f"{where}:{lineno}: {exc}") from None
        if len(succ) != n:
            raise GraphFormatError(f"{where}:{lineno}: declared {n} nodes, found {len(succ)}")
    for i, row in enumerate(succ):
        for j in row:
            if not 0 <= j < n:
                raise GraphValidationError(f"{where}: node {i} links to unknown node {j}")
    return ExplicitGraph(tuple(succ), goals, feats)


def load_graph_file(path, name: str = "graph") -> StateSpace:
    return read_graph(path).space(name)
