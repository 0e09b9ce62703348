"""Numeric inner loops used by the heuristics, learners and generators.

Every kernel has two implementations with identical signatures: a numba
``@njit`` version and a pure-numpy version.  The numba path is used when numba
imports cleanly and ``MGSEARCH_DISABLE_NUMBA`` is unset (or ``0``).  Both paths
are exercised by the test-suite, see ``tests/test_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "manhattan_matrix",
    "progress_scores",
    "knn_predict",
    "min_distances",
    "mean_distances",
    "flood_count",
    "numpy_impl",
    "numba_impl",
]


def _numba_requested() -> bool:
    flag = os.environ.get("MGSEARCH_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# numpy reference kernels
# ---------------------------------------------------------------------------


def _manhattan_matrix_np(points: np.ndarray, goals: np.ndarray) -> np.ndarray:
    diff = np.abs(points[:, None, :] - goals[None, :, :])
    return diff.sum(axis=2).astype(np.float64)


def _progress_scores_np(dist: np.ndarray, active: np.ndarray) -> np.ndarray:
    n = dist.shape[0]
    out = np.full(n, np.inf)
    cols = np.flatnonzero(active)
    if n == 0 or cols.size == 0:
        return out
    sub = dist[:, cols]
    # argmin returns the first row attaining the minimum -> lowest insertion order
    owner = np.argmin(sub, axis=0)
    best = sub[owner, np.arange(cols.size)]
    counts = np.bincount(owner, minlength=n).astype(np.float64)
    sums = np.bincount(owner, weights=best, minlength=n)
    has = counts > 0
    out[has] = (sums[has] / counts[has]) / counts[has]
    return out


def _knn_predict_np(
    X: np.ndarray, y: np.ndarray, Q: np.ndarray, k: int, prior: float
) -> np.ndarray:
    m = X.shape[0]
    out = np.full(Q.shape[0], prior)
    if m == 0 or Q.shape[0] == 0:
        return out
    d = np.sqrt(((Q[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    kk = min(k, m)
    # stable sort keeps the earliest-stored example first among equal distances
    idx = np.argsort(d, axis=1, kind="stable")[:, :kk]
    nd = np.take_along_axis(d, idx, axis=1)
    ny = y[idx]
    for i in range(Q.shape[0]):
        zero = nd[i] == 0.0
        if zero.any():
            out[i] = ny[i][zero].mean()
        else:
            w = 1.0 / nd[i]
            out[i] = (w * ny[i]).sum() / w.sum()
    return out


def _min_distances_np(Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    if R.shape[0] == 0:
        return np.full(Q.shape[0], np.inf)
    d = np.sqrt(((Q[:, None, :] - R[None, :, :]) ** 2).sum(axis=2))
    return d.min(axis=1)


def _mean_distances_np(Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    if R.shape[0] == 0:
        return np.zeros(Q.shape[0])
    d = np.sqrt(((Q[:, None, :] - R[None, :, :]) ** 2).sum(axis=2))
    return d.mean(axis=1)


def _flood_count_np(passable: np.ndarray, sr: int, sc: int) -> int:
    h, w = passable.shape
    if not passable[sr, sc]:
        return 0
    seen = np.zeros_like(passable, dtype=bool)
    seen[sr, sc] = True
    stack = [(sr, sc)]
    count = 0
    while stack:
        r, c = stack.pop()
        count += 1
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and passable[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                stack.append((rr, cc))
    return count


numpy_impl = {
    "manhattan_matrix": _manhattan_matrix_np,
    "progress_scores": _progress_scores_np,
    "knn_predict": _knn_predict_np,
    "min_distances": _min_distances_np,
    "mean_distances": _mean_distances_np,
    "flood_count": _flood_count_np,
}

# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

numba_impl: dict = {}

try:
    if not _numba_requested():
        raise ImportError("numba disabled by MGSEARCH_DISABLE_NUMBA")
    from numba import njit
except ImportError:
    njit = None

if njit is not None:

    @njit(cache=True)
    def _manhattan_matrix_nb(points, goals):
        n = points.shape[0]
        k = goals.shape[0]
        out = np.empty((n, k), dtype=np.float64)
        for i in range(n):
            for j in range(k):
                s = 0
                for a in range(points.shape[1]):
                    s += abs(points[i, a] - goals[j, a])
                out[i, j] = s
        return out

    @njit(cache=True)
    def _progress_scores_nb(dist, active):
        n = dist.shape[0]
        k = dist.shape[1]
        out = np.full(n, np.inf)
        counts = np.zeros(n)
        sums = np.zeros(n)
        for j in range(k):
            if not active[j]:
                continue
            best = np.inf
            owner = -1
            for i in range(n):
                if dist[i, j] < best:
                    best = dist[i, j]
                    owner = i
            if owner >= 0:
                counts[owner] += 1.0
                sums[owner] += best
        for i in range(n):
            if counts[i] > 0:
                out[i] = (sums[i] / counts[i]) / counts[i]
        return out

    @njit(cache=True)
    def _knn_predict_nb(X, y, Q, k, prior):
        m = X.shape[0]
        p = Q.shape[0]
        out = np.full(p, prior)
        if m == 0:
            return out
        kk = min(k, m)
        d = np.empty(m)
        for i in range(p):
            for j in range(m):
                s = 0.0
                for a in range(X.shape[1]):
                    t = Q[i, a] - X[j, a]
                    s += t * t
                d[j] = np.sqrt(s)
            idx = np.argsort(d, kind="mergesort")[:kk]
            nzero = 0
            zsum = 0.0
            for t in range(kk):
                if d[idx[t]] == 0.0:
                    nzero += 1
                    zsum += y[idx[t]]
            if nzero > 0:
                out[i] = zsum / nzero
            else:
                num = 0.0
                den = 0.0
                for t in range(kk):
                    w = 1.0 / d[idx[t]]
                    num += w * y[idx[t]]
                    den += w
                out[i] = num / den
        return out

    @njit(cache=True)
    def _min_distances_nb(Q, R):
        p = Q.shape[0]
        out = np.full(p, np.inf)
        for i in range(p):
            for j in range(R.shape[0]):
                s = 0.0
                for a in range(Q.shape[1]):
                    t = Q[i, a] - R[j, a]
                    s += t * t
                s = np.sqrt(s)
                if s < out[i]:
                    out[i] = s
        return out

    @njit(cache=True)
    def _mean_distances_nb(Q, R):
        p = Q.shape[0]
        m = R.shape[0]
        out = np.zeros(p)
        if m == 0:
            return out
        for i in range(p):
            acc = 0.0
            for j in range(m):
                s = 0.0
                for a in range(Q.shape[1]):
                    t = Q[i, a] - R[j, a]
                    s += t * t
                acc += np.sqrt(s)
            out[i] = acc / m
        return out

    @njit(cache=True)
    def _flood_count_nb(passable, sr, sc):
        h, w = passable.shape
        if not passable[sr, sc]:
            return 0
        seen = np.zeros((h, w), dtype=np.bool_)
        stack = np.empty(h * w, dtype=np.int64)
        top = 0
        stack[top] = sr * w + sc
        top += 1
        seen[sr, sc] = True
        count = 0
        while top > 0:
            top -= 1
            cell = stack[top]
            r = cell // w
            c = cell % w
            count += 1
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr = r + dr
                cc = c + dc
                if rr >= 0 and rr < h and cc >= 0 and cc < w:
                    if passable[rr, cc] and not seen[rr, cc]:
                        seen[rr, cc] = True
                        stack[top] = rr * w + cc
                        top += 1
        return count

    numba_impl = {
        "manhattan_matrix": _manhattan_matrix_nb,
        "progress_scores": _progress_scores_nb,
        "knn_predict": _knn_predict_nb,
        "min_distances": _min_distances_nb,
        "mean_distances": _mean_distances_nb,
        "flood_count": _flood_count_nb,
    }

USING_NUMBA = bool(numba_impl)
_active = numba_impl if USING_NUMBA else numpy_impl


def manhattan_matrix(points, goals) -> np.ndarray:
    """Pairwise L1 distances, shape ``(len(points), len(goals))``."""
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.int64)
    goals = np.ascontiguousarray(np.atleast_2d(goals), dtype=np.int64)
    if points.shape[0] == 0 or goals.shape[0] == 0:
        return np.zeros((points.shape[0], goals.shape[0]))
    return _active["manhattan_matrix"](points, goals)


def progress_scores(dist, active) -> np.ndarray:
    """Per-row progress score for a frontier x goals distance matrix.

    Each active goal column is owned by the first row attaining its minimum.
    A row's score is its mean distance to owned goals divided by how many it
    owns; rows owning nothing get ``inf``.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    active = np.ascontiguousarray(active, dtype=np.bool_)
    return _active["progress_scores"](dist, active)


def knn_predict(X, y, Q, k: int, prior: float = 0.0) -> np.ndarray:
    """Inverse-distance weighted k-NN regression; exact matches dominate."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    if X.shape[0] == 0:
        return np.full(Q.shape[0], float(prior))
    return _active["knn_predict"](X, y, Q, int(k), float(prior))


def min_distances(Q, R) -> np.ndarray:
    """Euclidean distance from each row of ``Q`` to its nearest row of ``R``."""
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    R = np.ascontiguousarray(R, dtype=np.float64)
    if R.shape[0] == 0:
        return np.full(Q.shape[0], np.inf)
    return _active["min_distances"](Q, R)


def mean_distances(Q, R) -> np.ndarray:
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    R = np.ascontiguousarray(R, dtype=np.float64)
    if R.shape[0] == 0:
        return np.zeros(Q.shape[0])
    return _active["mean_distances"](Q, R)


def flood_count(passable, start) -> int:
    """Number of 4-connected passable cells reachable from ``start``."""
    passable = np.ascontiguousarray(passable, dtype=np.bool_)
    return int(_active["flood_count"](passable, int(start[0]), int(start[1])))
