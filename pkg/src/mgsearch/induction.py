"""Feature-based induction of marginal utility and the combined heuristic.

Supported nodes become training examples (features -> partial utility at
depth ``d``); a lazy, incremental k-NN regressor per depth then predicts the
utility of fresh nodes from their features alone.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import InvalidParameterError, SearchError, SearchGraph
from .search import Scorer
from .utility import BudgetPolicy, MarginalUtility, SupportThreshold, partial_mu

MODEL_MAGIC = "MGSM"
MODEL_VERSION = "v1"


@dataclass(frozen=True)
class TrainingExample:
    node: int
    depth: int
    features: np.ndarray
    target: float


def collect_example(
    graph: SearchGraph, n: int, d: int, features, threshold: SupportThreshold = SupportThreshold()
) -> Optional[TrainingExample]:
    """An example for ``n`` at depth ``d`` if the node is supported, else None."""
    if graph.N[n, d - 1] < threshold.sigma:
        return None
    return TrainingExample(n, d, np.asarray(features, dtype=np.float64), partial_mu(graph, n, d))


class KNNRegressor:
    """Incremental inverse-distance k-NN regressor with outputs clamped to [0, 1].

    Examples are keyed; re-adding a key replaces its target.  Examples at the
    same feature point are merged into one point whose target is their mean,
    so duplicating examples never changes a prediction.
    """

    def __init__(self, k: int = 5, prior: float = 0.0):
        if k < 1:
            raise InvalidParameterError("k must be >= 1")
        self.k = k
        self.prior = prior
        self._by_key: dict = {}
        self._row_of: dict[tuple, int] = {}
        self._members: list[dict] = []  # per point: key -> target
        self._buf = np.zeros((0, 0))
        self._ybuf = np.zeros(0)
        self._dirty: set[int] = set()
        self._alive = 0
        self._X: Optional[np.ndarray] = None
        self._y: Optional[np.ndarray] = None

    def __len__(self):
        return len(self._by_key)

    @property
    def n_points(self) -> int:
        return self._alive

    def _row(self, pt: tuple) -> int:
        row = self._row_of.get(pt)
        if row is not None:
            return row
        row = len(self._members)
        if row == 0:
            self._buf = np.zeros((16, len(pt)))
            self._ybuf = np.zeros(16)
        elif row == len(self._buf):
            self._buf = np.concatenate([self._buf, np.zeros_like(self._buf)])
            self._ybuf = np.concatenate([self._ybuf, np.zeros_like(self._ybuf)])
        if len(pt) != self._buf.shape[1]:
            raise InvalidParameterError("feature dimension changed")
        self._buf[row] = pt
        self._members.append({})
        self._row_of[pt] = row
        return row

    def add(self, key, x, target: float) -> None:
        pt = tuple(float(v) for v in np.asarray(x, dtype=np.float64).ravel())
        old = self._by_key.get(key)
        if old is not None:
            r = self._row_of[old[0]]
            del self._members[r][key]
            if not self._members[r]:
                self._alive -= 1
            self._dirty.add(r)
        row = self._row(pt)
        if not self._members[row]:
            self._alive += 1
        self._by_key[key] = (pt, float(target))
        self._members[row][key] = float(target)
        self._dirty.add(row)
        self._X = None

    def _arrays(self):
        if self._X is None:
            for r in self._dirty:
                v = self._members[r]
                self._ybuf[r] = sum(v.values()) / len(v) if v else np.nan
            self._dirty.clear()
            m = len(self._members)
            if self._alive == 0:
                self._X, self._y = np.zeros((0, 0)), np.zeros(0)
            elif self._alive == m:
                self._X, self._y = self._buf[:m], self._ybuf[:m]
            else:
                keep = np.flatnonzero(~np.isnan(self._ybuf[:m]))
                self._X, self._y = self._buf[keep], self._ybuf[keep]
        return self._X, self._y

    def predict(self, Q) -> np.ndarray:
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        X, y = self._arrays()
        if len(y) == 0:
            return np.full(len(Q), float(self.prior))
        return np.clip(_kernels.knn_predict(X, y, Q, self.k, self.prior), 0.0, 1.0)

    def examples(self):
        """(features, target) of every merged point."""
        X, y = self._arrays()
        return X, y


class DepthModels:
    """One regressor per depth ``1..D``."""

    def __init__(self, D: int, k: int = 5, prior: float = 0.0):
        self.D = D
        self.k = k
        self.prior = prior
        self.models = {d: KNNRegressor(k, prior) for d in range(1, D + 1)}

    def __getitem__(self, d: int) -> KNNRegressor:
        return self.models[d]

    def add(self, ex: TrainingExample) -> None:
        self.models[ex.depth].add(ex.node, ex.features, ex.target)

    def dump(self, path) -> None:
        """Write every merged example as ``<depth> <target> <f1,...,fk>`` lines."""
        dim = 0
        for m in self.models.values():
            X, _ = m.examples()
            if len(X):
                dim = X.shape[1]
                break
        with open(path, "w") as fh:
            fh.write(f"{MODEL_MAGIC} {MODEL_VERSION} {self.D} {dim} {self.k} {float(self.prior)!r}\n")
            for d in range(1, self.D + 1):
                X, y = self.models[d].examples()
                for row, t in zip(X, y):
                    fh.write(f"{d} {float(t)!r} {','.join(repr(float(v)) for v in row)}\n")

    @classmethod
    def load(cls, path) -> "DepthModels":
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) != 6 or header[0] != MODEL_MAGIC or header[1] != MODEL_VERSION:
                raise SearchError(f"{os.fspath(path)}: not a {MODEL_MAGIC} {MODEL_VERSION} model file")
            D, dim, k, prior = int(header[2]), int(header[3]), int(header[4]), float(header[5])
            out = cls(D, k, prior)
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    d_s, t_s, f_s = line.split()
                    x = np.array([float(v) for v in f_s.split(",")])
                    d, t = int(d_s), float(t_s)
                    if len(x) != dim or not 1 <= d <= D:
                        raise ValueError("dimension or depth mismatch")
                except ValueError as exc:
                    raise SearchError(f"{os.fspath(path)}:{lineno}: {exc}") from None
                out.models[d].add(("loaded", lineno), x, t)
        return out


def induce_models(
    graph: SearchGraph,
    features,
    models: DepthModels,
    threshold: SupportThreshold = SupportThreshold(),
    tag=None,
) -> int:
    """Add an example for every supported (node, depth) of a searched graph.

    ``features`` maps a state to its feature vector.  Examples are keyed by
    ``(tag, node)`` so several graphs can feed one model.  Returns the number
    of examples added.
    """
    added = 0
    for n, state in enumerate(graph.states):
        x = None
        for d in range(1, min(graph.D, models.D) + 1):
            if graph.N[n, d - 1] < threshold.sigma:
                continue
            if x is None:
                x = np.asarray(features(state), dtype=np.float64)
            models.add(TrainingExample((tag, n), d, x, partial_mu(graph, n, d)))
            added += 1
    return added


def predict_mu(features, d: int, models: DepthModels) -> float:
    return float(models[d].predict(features)[0])


def combined_score(dist_scores, mu_pred, alpha: float) -> np.ndarray:
    """``alpha * minmax(dist) + (1 - alpha) * (1 - mu)`` over one open list.

    The min-max range is taken over the finite distances; infinite ones
    normalize to 1.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError("alpha must lie in [0, 1]")
    d = np.asarray(dist_scores, dtype=np.float64)
    mu = np.asarray(mu_pred, dtype=np.float64)
    if d.size == 0:
        return np.zeros(0)
    finite = np.isfinite(d)
    norm = np.ones_like(d)  # infinite distances rank last
    if finite.any():
        lo, hi = d[finite].min(), d[finite].max()
        norm[finite] = (d[finite] - lo) / (hi - lo) if hi > lo else 0.0
    return alpha * norm + (1.0 - alpha) * (1.0 - mu)


class _UtilitySource(Scorer):
    """Scorer that can also report raw utilities for the combined heuristic."""

    def utilities(self, ids) -> np.ndarray:
        raise NotImplementedError

    def score(self, ids):
        if len(ids) == 0:
            return np.zeros(0)
        return 1.0 - self.utilities(ids)


class InductionScorer(_UtilitySource):
    """``1 - predicted MU`` from per-depth k-NN models trained during the search.

    The prediction depth for a node is the one the sibling estimator would
    choose for the remaining budget.  ``warm_start`` preloads examples.
    """

    dynamic = True
    needs_counters = True

    def __init__(
        self,
        threshold: SupportThreshold = SupportThreshold(),
        budget: Optional[BudgetPolicy] = None,
        k: int = 5,
        prior: float = 0.0,
        warm_start: Optional[DepthModels] = None,
        refresh_interval: Optional[int] = 1,
    ):
        self.threshold = threshold
        self.budget = budget or BudgetPolicy()
        self.k = k
        self.prior = prior
        self.warm_start = warm_start
        self.refresh_interval = refresh_interval
        self.examples_added = 0

    def bind(self, ctx):
        super().bind(ctx)
        D = ctx.graph.D
        if self.warm_start is not None:
            if self.warm_start.D != D:
                raise InvalidParameterError("warm-start model depth differs from the search depth bound")
            self.models = self.warm_start
        else:
            self.models = DepthModels(D, self.k, self.prior)
        self.mu = MarginalUtility(ctx.graph, self.threshold)
        self._feat: dict[int, np.ndarray] = {}

    def _features(self, i: int) -> np.ndarray:
        x = self._feat.get(i)
        if x is None:
            x = self._feat[i] = self.ctx.features(i)
        return x

    def harvest(self) -> None:
        g = self.ctx.graph
        touched, g.touched = g.touched, set()
        for n in sorted(touched):
            for d in range(1, g.D + 1):
                ex = collect_example(g, n, d, self._features(n), self.threshold)
                if ex is not None:
                    self.models.add(ex)
                    self.examples_added += 1

    def utilities(self, ids):
        self.harvest()
        self.mu.begin_batch()
        r = self.budget.remaining(self.ctx)
        depths = np.array([self.mu.search_depth(int(i), r) for i in ids])
        out = np.empty(len(ids))
        for d in np.unique(depths):
            sel = np.flatnonzero(depths == d)
            Q = np.array([self._features(int(ids[k])) for k in sel])
            out[sel] = self.models[int(d)].predict(Q)
        return out


class SiblingSource(_UtilitySource):
    """Adapter exposing :class:`~mgsearch.utility.MUScorer` utilities."""

    def __init__(self, scorer):
        self.inner = scorer
        self.dynamic = True
        self.needs_counters = True
        self.refresh_interval = scorer.refresh_interval

    def bind(self, ctx):
        super().bind(ctx)
        self.inner.bind(ctx)

    def utilities(self, ids):
        return self.inner.utilities(ids)

    def on_expand(self, i):
        self.inner.on_expand(i)

    def take_stale(self):
        return self.inner.take_stale()

    def choose(self, ids, scores):
        return self.inner.choose(ids, scores)


class CombinedScorer(Scorer):
    """Linear mix of a normalized distance score and ``1 - MU``.

    Distance scores are computed once per node; utilities are cached and
    recomputed for the whole open list every ``refresh_interval`` selections.
    """

    dynamic = True
    frontier_dependent = True
    needs_counters = True

    def __init__(self, distance: Scorer, utility, alpha: float = 0.3, refresh_interval: int = 1):
        if not 0.0 <= alpha <= 1.0:
            raise InvalidParameterError("alpha must lie in [0, 1]")
        self.distance = distance
        self.utility = utility
        self.alpha = alpha
        self.refresh_every = max(1, int(refresh_interval))
        self._dist = np.full(0, np.nan)
        self._mu = np.full(0, np.nan)
        self._calls = 0

    def bind(self, ctx):
        super().bind(ctx)
        self.distance.bind(ctx)
        self.utility.bind(ctx)

    def version(self):
        return self.distance.version()

    def on_goal(self, i):
        self.distance.on_goal(i)
        self.utility.on_goal(i)

    def on_expand(self, i):
        self.distance.on_expand(i)
        self.utility.on_expand(i)
        stale = np.fromiter(self.utility.take_stale(), dtype=np.int64)
        stale = stale[stale < len(self._mu)]
        self._mu[stale] = np.nan

    def choose(self, ids, scores):
        return self.utility.choose(ids, scores)

    @staticmethod
    def _fit(cache: np.ndarray, top: int) -> np.ndarray:
        if top < len(cache):
            return cache
        out = np.full(max(2 * len(cache), top + 1, 64), np.nan)
        out[: len(cache)] = cache
        return out

    def _fill(self, cache: np.ndarray, ids: np.ndarray, fn) -> np.ndarray:
        cache = self._fit(cache, int(ids.max()))
        missing = ids[np.isnan(cache[ids])]
        if len(missing):
            cache[missing] = fn(missing)
        return cache

    def score(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        if len(ids) == 0:
            return np.zeros(0)
        if self.distance.dynamic:
            dist = np.asarray(self.distance.score(ids), dtype=np.float64)
        else:
            self._dist = self._fill(self._dist, ids, self.distance.score)
            dist = self._dist[ids]
        self._calls += 1
        if self._calls >= self.refresh_every:
            self._calls = 0
            self._mu = self._fit(self._mu, int(ids.max()))
            self._mu[ids] = self.utility.utilities(ids)
        else:
            self._mu = self._fill(self._mu, ids, self.utility.utilities)
        return combined_score(dist, self._mu[ids], self.alpha)
