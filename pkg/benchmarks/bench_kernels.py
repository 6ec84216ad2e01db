"""Time the compiled tree kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--n 800] [--d 50] [--trees 100] [--repeat 5]

Both backends must give identical forests; the script checks that before timing.
"""
import argparse
import statistics
import time
from contextlib import contextmanager

import numpy as np

from bpdetect import _kernels
from bpdetect._kernels import _tree_py
from bpdetect.ml import Hyperparams, train_forest

try:
    from bpdetect._kernels import _tree_c
except ImportError:
    _tree_c = None


@contextmanager
def backend(mod):
    old = _kernels.best_split, _kernels.apply_tree
    _kernels.best_split, _kernels.apply_tree = mod.best_split, mod.apply_tree
    try:
        yield
    finally:
        _kernels.best_split, _kernels.apply_tree = old


def clock(fn, repeat):
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return statistics.median(ts)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=800)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--trees", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    if _tree_c is None:
        print("compiled kernels not built; nothing to compare (run pip install -e . --no-build-isolation)")
        return 1

    rng = np.random.default_rng(a.seed)
    X = rng.normal(size=(a.n, a.d))
    y = (X[:, 0] + 0.5 * rng.normal(size=a.n) > 0).astype(np.int8)
    XT = np.ascontiguousarray(X.T)
    idx = np.arange(a.n, dtype=np.intp)
    w = np.ones(a.n)
    feats = np.arange(a.d, dtype=np.intp)
    t1 = float(y.sum())
    t0 = a.n - t1
    hp = Hyperparams("rf", n_trees=a.trees)

    rows = []
    for name, mod in (("cython", _tree_c), ("python", _tree_py)):
        split = mod.best_split(XT, idx, y, w, feats, t0, t1)
        t_split = clock(lambda: mod.best_split(XT, idx, y, w, feats, t0, t1), a.repeat)
        with backend(mod):
            forest = train_forest(X, y, hp, seed=a.seed)
            t_forest = clock(lambda: train_forest(X, y, hp, seed=a.seed), max(1, a.repeat // 2))
            pred = forest.predict(X)
            t_pred = clock(lambda: forest.predict(X), a.repeat)
        rows.append((name, split, pred, t_split, t_forest, t_pred))

    (_, s_c, p_c, *tc), (_, s_p, p_p, *tp) = rows
    agree = s_c == s_p and np.array_equal(p_c, p_p)
    print(f"n={a.n} d={a.d} trees={a.trees}; backends agree: {agree}")
    print(f"{'kernel':<28}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for label, c, p in zip(("best_split (all features)", f"train_forest ({a.trees} trees)", "forest predict"), tc, tp):
        print(f"{label:<28}{c:>12.4f}{p:>12.4f}{p / c:>9.1f}x")
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
