"""Random forest of CART trees with Gini splits.

Each tree draws a bootstrap sample and a stream of random numbers from
``default_rng([seed, tree_index])`` only, so the fitted forest does not
depend on how trees are scheduled across threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import _kernels
from ..errors import DataError
from .base import Hyperparams, class_weights


@dataclass
class Tree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray  # go left when x <= threshold
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # weighted fraction of class 1 at the node

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return _kernels.apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.value[self.apply(X)] > 0.5).astype(np.int8)

    def to_json(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_json(cls, obj: dict) -> "Tree":
        return cls(np.asarray(obj["feature"], dtype=np.intp), np.asarray(obj["threshold"], dtype=float),
                   np.asarray(obj["left"], dtype=np.intp), np.asarray(obj["right"], dtype=np.intp),
                   np.asarray(obj["value"], dtype=float))


def n_candidate_features(rule, d: int) -> int:
    if rule == "sqrt":
        return max(1, int(math.sqrt(d)))
    if rule == "log2":
        return max(1, int(math.log2(d))) if d > 1 else 1
    if rule in ("all", None):
        return d
    if isinstance(rule, float) and 0 < rule <= 1:
        return max(1, int(rule * d))
    if isinstance(rule, int) and rule >= 1:
        return min(rule, d)
    raise DataError(f"bad max_features rule {rule!r}")


def _class_totals(idx, w0, w1):
    return float(w0[idx].sum()), float(w1[idx].sum())


def build_tree(X: np.ndarray, y: np.ndarray, w: np.ndarray, root: np.ndarray,
               max_depth: int | None, m_try: int, rng: np.random.Generator) -> Tree:
    """Grow one CART tree on the rows ``root`` with per-row weights ``w``."""
    d = X.shape[1]
    XT = np.ascontiguousarray(X.T)
    w0 = np.where(y == 0, w, 0.0)
    w1 = np.where(y == 1, w, 0.0)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(new_node(), root, 0)]
    while stack:
        node, idx, depth = stack.pop()
        t0, t1 = _class_totals(idx, w0, w1)
        value[node] = t1 / (t0 + t1)
        if (max_depth is not None and depth >= max_depth) or t0 == 0.0 or t1 == 0.0 or len(idx) < 2:
            continue
        perm = rng.permutation(d)
        best = (-1, 0.0, 0.0)
        for start in range(0, d, m_try):
            feats = np.sort(perm[start:start + m_try]).astype(np.intp)
            best = _kernels.best_split(XT, idx, y, w, feats, t0, t1)
            if best[0] >= 0:
                break
        f, thr, _ = best
        if f < 0:
            continue
        go_left = XT[f, idx] <= thr
        li, ri = new_node(), new_node()
        feature[node], threshold[node], left[node], right[node] = f, thr, li, ri
        stack.append((ri, idx[~go_left], depth + 1))
        stack.append((li, idx[go_left], depth + 1))
    return Tree(np.asarray(feature, dtype=np.intp), np.asarray(threshold, dtype=float),
                np.asarray(left, dtype=np.intp), np.asarray(right, dtype=np.intp),
                np.asarray(value, dtype=float))


@dataclass
class Forest:
    trees: list[Tree]
    n_features: int
    hyperparams: Hyperparams
    seed: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def max_depth(self):
        return self.hyperparams.max_depth

    def _dense(self, X) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise DataError(f"forest expects {self.n_features} features, got {X.shape[1]}")
        return as_dense(X)

    def vote_fraction(self, X) -> np.ndarray:
        Xd = self._dense(X)
        votes = np.zeros(Xd.shape[0])
        for tree in self.trees:
            votes += tree.predict(Xd)
        return votes / len(self.trees)

    def predict(self, X) -> np.ndarray:
        Xd = self._dense(X)
        votes = np.zeros(Xd.shape[0], dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict(Xd)
        # ties go to class 0
        return (2 * votes > len(self.trees)).astype(np.int8)

    def to_json(self) -> dict:
        return {"type": "forest", "n_features": self.n_features, "seed": self.seed,
                "hyperparams": self.hyperparams.to_json(), "trees": [t.to_json() for t in self.trees]}

    @classmethod
    def from_json(cls, obj: dict) -> "Forest":
        return cls([Tree.from_json(t) for t in obj["trees"]], obj["n_features"],
                   Hyperparams.from_json(obj["hyperparams"]), obj["seed"])


def as_dense(X) -> np.ndarray:
    if sp.issparse(X):
        X = X.toarray()
    return np.ascontiguousarray(X, dtype=np.float64)


def train_forest(X, y, hp: Hyperparams, seed: int = 0, threads: int = 1) -> Forest:
    y = np.asarray(y).astype(np.int8)
    if len(np.unique(y)) < 2:
        raise DataError("training labels need both classes")
    Xd = as_dense(X)
    if not np.all(np.isfinite(Xd)):
        raise DataError("feature matrix contains non-finite values")
    n, d = Xd.shape
    cw = class_weights(y) if hp.class_weighted else {0: 1.0, 1: 1.0}
    base_w = np.where(y == 1, cw[1], cw[0])
    m_try = n_candidate_features(hp.max_features, d)

    def grow(t: int) -> Tree:
        rng = np.random.default_rng([seed, t])
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
        w = counts * base_w
        root = np.flatnonzero(counts).astype(np.intp)
        return build_tree(Xd, y, w, root, hp.max_depth, m_try, rng)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(grow, range(hp.n_trees)))
    else:
        trees = [grow(t) for t in range(hp.n_trees)]
    return Forest(trees, d, hp, seed)


def gini(labels, weights=None) -> float:
    y = np.asarray(labels)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    if total == 0:
        return 0.0
    p1 = float(np.dot(w, y == 1)) / total
    return 1.0 - p1 * p1 - (1 - p1) * (1 - p1)


def split_impurity(left_labels, right_labels) -> float:
    """Size-weighted Gini impurity of a two-way split."""
    nl, nr = len(left_labels), len(right_labels)
    return (nl * gini(left_labels) + nr * gini(right_labels)) / (nl + nr)
