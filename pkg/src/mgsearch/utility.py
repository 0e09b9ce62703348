"""Marginal-utility inference from partial subtree statistics.

The explored graph keeps, per node, how many nodes and goals were visited
within each depth ``1..D`` below it (see :class:`~mgsearch.core.SearchGraph`).
A node whose statistics at depth ``d`` are large enough is *supported*; the
utility of an unsupported node is borrowed from its supported siblings, or
recursively from its parents.  Siblings can optionally be grouped into
feature clusters, each represented by a virtual node that sits between the
parent and the cluster members.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .core import InvalidParameterError, SearchGraph, UndefinedStatisticsError
from .search import Scorer


def partial_mu(graph: SearchGraph, n: int, d: int) -> float:
    """Goals over visited nodes within depth ``d`` below ``n``."""
    N = graph.N[n, d - 1]
    if N == 0:
        raise UndefinedStatisticsError(f"node {n} has no visited descendants within depth {d}")
    return float(graph.G[n, d - 1] / N)


@dataclass(frozen=True)
class SupportThreshold:
    sigma: int = 8

    def __post_init__(self):
        if self.sigma < 1:
            raise InvalidParameterError("support threshold must be >= 1")


@dataclass(frozen=True)
class VirtualClusterNode:
    id: int  # negative, distinct from real node ids
    parent: int
    members: tuple[int, ...]
    centroid: np.ndarray


class ClusterIndex:
    """Virtual nodes spliced between parents and clusters of their children."""

    def __init__(self):
        self.nodes: list[VirtualClusterNode] = []
        self.by_edge: dict[tuple[int, int], int] = {}
        self.of_parent: dict[int, list[int]] = {}

    def __len__(self):
        return len(self.nodes)

    def add(self, parent: int, members: Sequence[int], centroid) -> VirtualClusterNode:
        vid = -(len(self.nodes) + 1)
        v = VirtualClusterNode(vid, parent, tuple(members), np.asarray(centroid, dtype=np.float64))
        self.nodes.append(v)
        for m in members:
            self.by_edge[(parent, m)] = vid
        self.of_parent.setdefault(parent, []).append(vid)
        return v

    def get(self, vid: int) -> VirtualClusterNode:
        return self.nodes[-vid - 1]


def cluster_siblings(features, tau: float) -> list[list[int]]:
    """Single-link clusters of sibling feature vectors, as lists of positions.

    Features are min-max normalized per column over the sibling set (constant
    columns become 0).  Two siblings end up together when a chain of pairs
    closer than ``tau`` (Euclidean) connects them.  Clusters are ordered by
    their first member.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if n == 0:
        return []
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    Z = (X - lo) / span
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    d = np.sqrt(((Z[:, None, :] - Z[None, :, :]) ** 2).sum(axis=2))
    for a in range(n):
        for b in range(a + 1, n):
            if d[a, b] < tau:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return sorted(groups.values(), key=lambda g: g[0])


class DiversityBuffer:
    """Feature vectors of the most recently expanded nodes."""

    def __init__(self, size: int = 50):
        self.size = size
        self._rows: deque = deque(maxlen=size)

    def add(self, x) -> None:
        self._rows.append(np.asarray(x, dtype=np.float64))

    def __len__(self):
        return len(self._rows)

    @property
    def array(self) -> np.ndarray:
        return np.array(self._rows)


def diversify_select(candidate_features, scores, buffer: DiversityBuffer) -> int:
    """Position of the candidate farthest (on average) from the buffer.

    With an empty buffer the best-scored candidate wins.  Ties keep the
    earlier candidate.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) == 1:
        return 0
    if len(buffer) == 0:
        return int(np.argmin(scores))
    md = _kernels.mean_distances(np.asarray(candidate_features, dtype=np.float64), buffer.array)
    return int(np.argmax(md))


class MarginalUtility:
    """Sibling-based estimates over a graph and an optional cluster overlay.

    Results are memoized inside a batch (:meth:`begin_batch`); call it again
    whenever the counters may have changed.
    """

    def __init__(
        self,
        graph: SearchGraph,
        threshold: SupportThreshold = SupportThreshold(),
        clusters: Optional[ClusterIndex] = None,
    ):
        self.graph = graph
        self.D = graph.D
        self.sigma = threshold.sigma
        self.clusters = clusters
        self._mu: dict = {}
        self._ts: dict = {}
        self._sibs: dict = {}
        self._kids: dict = {}

    def begin_batch(self) -> None:
        self._mu.clear()
        self._ts.clear()
        self._sibs.clear()
        self._kids.clear()

    # -- counters for real and virtual nodes --------------------------------
    def N(self, x: int, d: int) -> int:
        if x >= 0:
            return int(self.graph.N[x, d - 1])
        g = self.graph
        return sum(1 + (int(g.N[m, d - 2]) if d > 1 else 0) for m in self.clusters.get(x).members)

    def G(self, x: int, d: int) -> int:
        if x >= 0:
            return int(self.graph.G[x, d - 1])
        g = self.graph
        return sum(int(g.goal[m]) + (int(g.G[m, d - 2]) if d > 1 else 0) for m in self.clusters.get(x).members)

    def supported(self, x: int, d: int) -> bool:
        return self.N(x, d) >= self.sigma

    def ratio(self, x: int, d: int) -> float:
        n = self.N(x, d)
        if n == 0:
            raise UndefinedStatisticsError(f"node {x} has no visited descendants within depth {d}")
        return self.G(x, d) / n

    def parents(self, x: int) -> list[int]:
        if x < 0:
            return [self.clusters.get(x).parent]
        ps = self.graph.parents[x]
        if self.clusters is None or not self.clusters.by_edge:
            return list(ps)
        be = self.clusters.by_edge
        return [be.get((p, x), p) for p in ps]

    def children(self, x: int) -> list[int]:
        if x < 0:
            return list(self.clusters.get(x).members)
        kids = self.graph.children[x]
        if self.clusters is None or x not in self.clusters.of_parent:
            return list(kids)
        be = self.clusters.by_edge
        return list(self.clusters.of_parent[x]) + [c for c in kids if (x, c) not in be]

    def _supported_children(self, p: int, d: int) -> dict:
        """``{child: (ratio, N_d)}`` over the supported children of ``p``."""
        key = (p, d)
        hit = self._kids.get(key)
        if hit is None:
            kids = self.children(p)
            if kids and min(kids) >= 0:
                arr = np.asarray(kids, dtype=np.int64)
                n = self.graph.N[arr, d - 1]
                sup = n >= self.sigma
                hit = {}
                if sup.any():
                    g = self.graph.G[arr[sup], d - 1]
                    for c, gg, nn in zip(arr[sup].tolist(), g.tolist(), n[sup].tolist()):
                        hit[c] = (gg / nn, nn)
            else:
                hit = {c: (self.ratio(c, d), self.N(c, d)) for c in kids if self.supported(c, d)}
            self._kids[key] = hit
        return hit

    def _sibling_stats(self, ps: Sequence[int], d: int) -> Optional[tuple[float, float]]:
        """Mean ratio and mean ``N_d`` over the supported children of ``ps`` (None if none)."""
        key = (tuple(ps), d)
        if key in self._sibs:
            return self._sibs[key]
        if len(ps) == 1:
            merged = self._supported_children(ps[0], d)
        else:
            merged = {}
            for p in ps:
                merged.update(self._supported_children(p, d))
        out = None
        if merged:
            k = len(merged)
            out = (sum(v[0] for v in merged.values()) / k, sum(v[1] for v in merged.values()) / k)
        self._sibs[key] = out
        return out

    def _n_children(self, p: int) -> int:
        if p >= 0 and (self.clusters is None or p not in self.clusters.of_parent):
            return len(self.graph.children[p])
        return len(self.children(p))

    # -- Fig. 5 procedures ---------------------------------------------------
    def mu_estimate(self, x: int, d: int, _path: Optional[frozenset] = None) -> float:
        """Estimated utility of ``x`` searched to depth ``d``; always in [0, 1]."""
        if self.supported(x, d):
            return self.ratio(x, d)
        path = (_path or frozenset()) | {x}
        ps = sorted(p for p in self.parents(x) if p not in path)
        if not ps:
            return 0.0
        key = (tuple(ps), d)
        hit = self._mu.get(key)
        if hit is not None:
            return hit
        stats = self._sibling_stats(ps, d)
        if stats is not None:
            val = stats[0]
        else:
            dd = min(d + 1, self.D)
            val = sum(self.mu_estimate(p, dd, path) for p in ps) / len(ps)
        self._mu[key] = val
        return val

    def tree_size_estimate(self, x: int, d: int, _path: Optional[frozenset] = None) -> float:
        """Estimated number of nodes within depth ``d`` below ``x``."""
        path = (_path or frozenset()) | {x}
        ps = sorted(p for p in self.parents(x) if p not in path)
        if self.supported(x, d) or not ps:
            return float(self.N(x, d))
        key = (tuple(ps), d)
        hit = self._ts.get(key)
        if hit is not None:
            return hit
        stats = self._sibling_stats(ps, d)
        if stats is not None:
            val = stats[1]
        else:
            dd = min(d + 1, self.D)
            val = sum(self.tree_size_estimate(p, dd, path) / max(1, self._n_children(p)) for p in ps) / len(ps)
        self._ts[key] = val
        return val

    def search_depth(self, x: int, r: float) -> int:
        """Largest ``d <= D`` whose estimated tree size is below ``r`` (1 if none)."""
        best = 1
        for d in range(1, self.D + 1):
            if self.tree_size_estimate(x, d) < r:
                best = d
        return best

    def get_marginal_utility(self, x: int, r: float) -> float:
        if r < 1:
            raise InvalidParameterError("remaining resources must be >= 1")
        return self.mu_estimate(x, self.search_depth(x, r))


def mu_score(mu: float) -> float:
    """Map a utility in [0, 1] onto the lower-is-better score scale."""
    return 1.0 - mu


class BudgetPolicy:
    """Resources assumed available below a node when estimating its utility.

    ``contract`` mode uses what is actually left of ``R``; ``anytime`` mode
    uses a fixed assumed budget.
    """

    def __init__(self, mode: str = "anytime", assumed: Optional[float] = None):
        if mode not in ("anytime", "contract"):
            raise InvalidParameterError(f"unknown budget mode {mode!r}")
        self.mode = mode
        self.assumed = assumed

    def remaining(self, ctx) -> float:
        if self.mode == "contract" and ctx.meter.limit is not None:
            return max(1.0, float(ctx.meter.remaining))
        if self.assumed is not None:
            return max(1.0, float(self.assumed))
        if ctx.meter.limit is not None:
            return max(1.0, float(ctx.meter.limit))
        return float("inf")


class MUScorer(Scorer):
    """Best-first scorer ``1 - MU`` with optional clustering and diversification.

    ``refresh_interval`` controls how many selections may reuse stale scores;
    new nodes are always scored on insertion.
    """

    dynamic = True
    needs_counters = True

    def __init__(
        self,
        threshold: SupportThreshold = SupportThreshold(),
        budget: Optional[BudgetPolicy] = None,
        clustering: bool = False,
        tau: float = 0.5,
        diversify: bool = False,
        top_k: int = 5,
        window: int = 50,
        refresh_interval: Optional[int] = 1,
    ):
        self.threshold = threshold
        self.budget = budget or BudgetPolicy()
        self.clustering = clustering
        self.tau = tau
        self.diversify = diversify
        self.top_k = top_k
        self.buffer = DiversityBuffer(window)
        self.refresh_interval = refresh_interval
        self._version = 0

    def bind(self, ctx):
        super().bind(ctx)
        self.clusters = ClusterIndex() if self.clustering else None
        self.mu = MarginalUtility(ctx.graph, self.threshold, self.clusters)
        self._stale: set = set()

    def version(self):
        return 0

    def utilities(self, ids) -> np.ndarray:
        self.mu.begin_batch()
        r = self.budget.remaining(self.ctx)
        return np.array([self.mu.get_marginal_utility(int(i), r) for i in ids], dtype=np.float64)

    def score(self, ids):
        if len(ids) == 0:
            return np.zeros(0)
        return 1.0 - self.utilities(ids)

    def take_stale(self):
        out, self._stale = self._stale, set()
        return out

    def on_expand(self, i):
        # siblings of an expanded node see new statistics
        g = self.ctx.graph
        for p in g.parents[i]:
            self._stale.update(g.children[p])
        if self.diversify:
            self.buffer.add(self.ctx.features(i))
        if self.clustering:
            kids = self.ctx.graph.children[i]
            if len(kids) >= 2:
                X = np.array([self.ctx.features(c) for c in kids])
                for grp in cluster_siblings(X, self.tau):
                    if len(grp) >= 2:
                        self.clusters.add(i, [kids[k] for k in grp], X[grp].mean(axis=0))

    def choose(self, ids, scores):
        if not self.diversify or len(ids) <= 1:
            return None
        k = min(self.top_k, len(ids))
        top = np.argsort(scores, kind="stable")[:k]
        X = np.array([self.ctx.features(int(i)) for i in ids[top]])
        return int(top[diversify_select(X, scores[top], self.buffer)])
