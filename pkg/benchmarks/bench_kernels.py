"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Inputs are sized like the ones the searches produce: a frontier of a few
hundred grid cells against 20 goals, and a k-NN model with a few thousand
examples queried in batches.
"""

import argparse
import timeit

import numpy as np

from mgsearch import _kernels


def cases(rng):
    pts = rng.integers(0, 100, size=(400, 2)).astype(np.int64)
    goals = rng.integers(0, 100, size=(20, 2)).astype(np.int64)
    dist = np.abs(pts[:, None, :] - goals[None, :, :]).sum(axis=2).astype(np.float64)
    active = rng.random(20) < 0.8
    X = rng.random((3000, 6))
    y = rng.random(3000)
    Q = rng.random((50, 6))
    feats = rng.random((500, 8))
    grid = rng.random((100, 100)) > 0.2
    grid[0, 0] = True
    return {
        "manhattan_matrix": (pts, goals),
        "progress_scores": (dist, active),
        "knn_predict": (X, y, Q, 5, 0.0),
        "min_distances": (feats[:100], feats[100:]),
        "mean_distances": (feats[:100], feats[100:]),
        "flood_count": (grid, 0, 0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if not _kernels.numba_impl:
        print("numba is not available; nothing to compare")
        return 1
    inputs = cases(np.random.default_rng(0))
    print(f"{'kernel':<18}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, call_args in inputs.items():
        nb, npy = _kernels.numba_impl[name], _kernels.numpy_impl[name]
        nb(*call_args)  # compile outside the timing
        t_np = min(timeit.repeat(lambda: npy(*call_args), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: nb(*call_args), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<18}{t_np:>10.3f}{t_nb:>10.3f}{t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
