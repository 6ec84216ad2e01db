"""Stratified folds, nested cross-validation, baselines and fold-paired significance."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import ml
from .errors import ConfigError, DataError
from .ml.base import (Hyperparams, Metrics, baseline_mcc, baseline_random, binomial_3sigma,
                      metrics, random_baseline_expected_accuracy)
from .stats import paired_ttest

SIGNIFICANCE = 0.001

DEFAULT_GRIDS = {
    "logreg": {"C": [0.01, 0.1, 1.0, 10.0]},
    "svm": {"C": [0.01, 0.1, 1.0, 10.0]},
    "rf": {"n_trees": [100, 200], "max_depth": [8, 16, None]},
}


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for a (seed, keys...) path; independent of call order."""
    return int(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(1)[0])


def stratified_kfold(labels, k: int, seed: int) -> list[np.ndarray]:
    """Shuffle each class with a seeded RNG, then deal round-robin into ``k`` folds.

    The dealing counter runs on across classes, so fold sizes differ by at
    most one overall as well as per class.
    """
    y = np.asarray(labels)
    if k < 2:
        raise DataError("k must be at least 2")
    rng = np.random.default_rng(seed)
    order = []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if len(members) < k:
            raise DataError(f"class {c!r} has {len(members)} members, fewer than k={k}")
        order.append(rng.permutation(members))
    order = np.concatenate(order)
    slot = np.arange(len(order)) % k
    return [np.sort(order[slot == f]) for f in range(k)]


def expand_grid(kind: str, grid=None, class_weighted: bool = False) -> list[Hyperparams]:
    """Cartesian product of a ``{param: [values]}`` grid in key order, or a list of points."""
    if grid is None:
        grid = DEFAULT_GRIDS[kind]
    if isinstance(grid, Mapping):
        keys = list(grid)
        for key in keys:
            if not isinstance(grid[key], (list, tuple)) or not grid[key]:
                raise ConfigError(f"grid entry {key!r} must be a non-empty list")
        points = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    else:
        points = [dict(p) for p in grid]
    if not points:
        raise ConfigError("hyperparameter grid is empty")
    out = []
    for p in points:
        p.pop("kind", None)
        p.setdefault("class_weighted", class_weighted)
        try:
            out.append(Hyperparams(kind, **p))
        except TypeError as exc:
            raise ConfigError(f"bad grid point {p}: {exc}") from None
        except DataError as exc:
            raise ConfigError(f"bad grid point {p}: {exc}") from None
    return out


def _rows(X, idx):
    return X[idx] if not sp.issparse(X) else X.tocsr()[idx]


def _fit_score(X, y, tr, te, hp, seed, sparse_mask) -> float:
    model = ml.train(_rows(X, tr), y[tr], hp, seed=seed, sparse_mask=sparse_mask)
    return float(np.mean(model.predict(_rows(X, te)) == y[te]))


def select_hyperparams(X, y, points: Sequence[Hyperparams], k: int, seed: int,
                       sparse_mask=None) -> tuple[int, list[float]]:
    """Inner CV on (X, y); returns the index of the best point and all mean accuracies.

    Ties go to the earliest point.
    """
    folds = stratified_kfold(y, k, derive_seed(seed, 0))
    n = len(y)
    scores = []
    for g, hp in enumerate(points):
        accs = []
        for j, te in enumerate(folds):
            tr = np.setdiff1d(np.arange(n), te, assume_unique=True)
            accs.append(_fit_score(X, y, tr, te, hp, derive_seed(seed, 1, j), sparse_mask))
        scores.append(float(np.mean(accs)))
    best = 0
    for g in range(1, len(scores)):
        if scores[g] > scores[best]:
            best = g
    return best, scores


@dataclass
class FoldResult:
    test_index: np.ndarray
    hyperparams: Hyperparams
    inner_scores: list[float] | None
    metrics: Metrics
    mcc_accuracy: float
    random_accuracy: float
    random_expected: float


@dataclass
class CVReport:
    model_kind: str
    seed: int
    outer_fold_metrics: list[Metrics]
    chosen_hyperparams: list[Hyperparams]
    inner_scores: list
    mcc_fold_accuracy: list[float]
    random_fold_accuracy: list[float]
    random_fold_expected: list[float]
    k_outer: int = 10
    k_inner: int = 5
    fold_sizes: list[int] = field(default_factory=list)

    @property
    def fold_accuracy(self) -> list[float]:
        return [m.accuracy for m in self.outer_fold_metrics]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracy))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.fold_accuracy, ddof=1)) if len(self.fold_accuracy) > 1 else 0.0

    @property
    def mean_f1(self) -> float:
        return float(np.mean([m.f1 for m in self.outer_fold_metrics]))

    @property
    def mcc_mean_accuracy(self) -> float:
        return float(np.mean(self.mcc_fold_accuracy))

    @property
    def random_mean_accuracy(self) -> float:
        return float(np.mean(self.random_fold_accuracy))

    @property
    def p_vs_mcc(self) -> float:
        return compare_significance(self.fold_accuracy, self.mcc_fold_accuracy)

    @property
    def p_vs_random(self) -> float:
        return compare_significance(self.fold_accuracy, self.random_fold_accuracy)

    def to_json(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "seed": self.seed,
            "k_outer": self.k_outer,
            "k_inner": self.k_inner,
            "fold_sizes": self.fold_sizes,
            "outer_fold_metrics": [m.to_json() for m in self.outer_fold_metrics],
            "chosen_hyperparams": [h.to_json() for h in self.chosen_hyperparams],
            "inner_scores": self.inner_scores,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_f1": self.mean_f1,
            "baselines": {
                "mcc": {"fold_accuracy": self.mcc_fold_accuracy, "mean_accuracy": self.mcc_mean_accuracy,
                        "p_model_vs_mcc": self.p_vs_mcc},
                "random": {"fold_accuracy": self.random_fold_accuracy,
                           "fold_expected": self.random_fold_expected,
                           "mean_accuracy": self.random_mean_accuracy,
                           "mean_expected": float(np.mean(self.random_fold_expected)),
                           "p_model_vs_random": self.p_vs_random},
            },
        }


def nested_cv(X, y, model_kind: str, grid=None, k_outer: int = 10, k_inner: int = 5, seed: int = 0,
              sparse_mask=None, class_weighted: bool = False, threads: int = 1,
              outer_folds=None) -> CVReport:
    """Outer k-fold evaluation with inner k-fold grid selection on each outer-train split.

    With a single grid point the inner loop cannot change the choice and is
    skipped. Outer folds may run on ``threads`` workers; every fold's
    randomness comes from ``derive_seed(seed, ...)`` so the report does not
    depend on the worker count. ``outer_folds`` overrides the stratified
    outer split (a list of test index arrays partitioning the rows).
    """
    y = np.asarray(y).astype(np.int8)
    if X.shape[0] != len(y):
        raise DataError("feature rows and labels differ in length")
    points = expand_grid(model_kind, grid, class_weighted)
    if sp.issparse(X):
        X = X.tocsr()
    n = len(y)
    if outer_folds is None:
        outer = stratified_kfold(y, k_outer, derive_seed(seed, 0))
    else:
        outer = [np.sort(np.asarray(f, dtype=np.intp)) for f in outer_folds]
        if not np.array_equal(np.sort(np.concatenate(outer)), np.arange(n)):
            raise DataError("outer folds must partition the rows")
        k_outer = len(outer)

    def run_fold(i: int) -> FoldResult:
        te = outer[i]
        tr = np.setdiff1d(np.arange(n), te, assume_unique=True)
        Xtr, ytr = _rows(X, tr), y[tr]
        try:
            if len(points) == 1:
                best, inner = 0, None
            else:
                best, inner = select_hyperparams(Xtr, ytr, points, k_inner, derive_seed(seed, 1, i),
                                                 sparse_mask)
            hp = points[best]
            model = ml.train(Xtr, ytr, hp, seed=derive_seed(seed, 2, i), sparse_mask=sparse_mask)
            pred = model.predict(_rows(X, te))
        except DataError as exc:
            raise DataError(f"outer fold {i}: {exc}") from exc
        yte = y[te]
        mcc = baseline_mcc(ytr).predict(te)
        rnd = baseline_random(ytr, derive_seed(seed, 3, i))
        return FoldResult(te, hp, inner, metrics(yte, pred), float(np.mean(mcc == yte)),
                          float(np.mean(rnd.predict(te) == yte)),
                          rnd.expected_accuracy(float(np.mean(yte == 1))))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            folds = list(pool.map(run_fold, range(k_outer)))
    else:
        folds = [run_fold(i) for i in range(k_outer)]
    return CVReport(model_kind, seed, [f.metrics for f in folds], [f.hyperparams for f in folds],
                    [f.inner_scores for f in folds], [f.mcc_accuracy for f in folds],
                    [f.random_accuracy for f in folds], [f.random_expected for f in folds],
                    k_outer, k_inner, [len(f.test_index) for f in folds])


def compare_significance(scores_a: Sequence[float], scores_b: Sequence[float]) -> float:
    """Paired two-sided t-test over folds."""
    if len(scores_a) != len(scores_b):
        raise DataError("score vectors must be paired by fold")
    return paired_ttest(scores_a, scores_b).p


# --- baselines on label counts --------------------------------------------

@dataclass
class BaselineReport:
    n_pos: int
    n_neg: int
    mcc_accuracy: float
    random_expected: float
    random_empirical: float
    random_3sigma: tuple[float, float]
    seed: int

    @property
    def random_within_3sigma(self) -> bool:
        lo, hi = self.random_3sigma
        return lo <= self.random_empirical <= hi

    def to_json(self) -> dict:
        return {"n_pos": self.n_pos, "n_neg": self.n_neg, "mcc_accuracy": self.mcc_accuracy,
                "random_expected": self.random_expected, "random_empirical": self.random_empirical,
                "random_3sigma": list(self.random_3sigma),
                "random_within_3sigma": self.random_within_3sigma, "seed": self.seed}


def baseline_report(n_pos: int, n_neg: int, seed: int = 0) -> BaselineReport:
    """Majority and prior-sampling baselines scored on a label vector with these counts."""
    if n_pos < 0 or n_neg < 0 or n_pos + n_neg == 0:
        raise DataError("need a non-empty label vector")
    y = np.concatenate([np.zeros(n_neg, dtype=np.int8), np.ones(n_pos, dtype=np.int8)])
    mcc = float(np.mean(baseline_mcc(y).predict(y) == y))
    rnd = baseline_random(y, seed)
    emp = float(np.mean(rnd.predict(y) == y))
    expected = random_baseline_expected_accuracy(n_pos, n_neg)
    return BaselineReport(n_pos, n_neg, mcc, expected, emp, binomial_3sigma(expected, len(y)), seed)


# --- per-category evaluation ----------------------------------------------

@dataclass
class CategoryResult:
    category: str
    n_users: int
    n_pos: int
    report: CVReport | None = None
    skipped: str | None = None

    @property
    def mcc_accuracy(self) -> float | None:
        if not self.n_users:
            return None
        return max(self.n_pos, self.n_users - self.n_pos) / self.n_users

    @property
    def p_value(self) -> float | None:
        return None if self.report is None else self.report.p_vs_mcc

    @property
    def significant(self) -> bool:
        return self.report is not None and self.report.mean_accuracy > self.report.mcc_mean_accuracy \
            and self.p_value < SIGNIFICANCE

    def to_json(self) -> dict:
        return {"category": self.category, "n_users": self.n_users, "n_pos": self.n_pos,
                "mcc_accuracy": self.mcc_accuracy, "skipped": self.skipped,
                "p_vs_mcc": self.p_value, "significant": self.significant,
                "report": self.report.to_json() if self.report else None}


def per_category_eval(matrices: Mapping, model_kind: str, grid=None, seed: int = 0,
                      k_outer: int = 10, k_inner: int = 5, threads: int = 1) -> dict[str, CategoryResult]:
    """Nested CV with class weighting for each category matrix; small categories are skipped."""
    out = {}
    for i, cat in enumerate(sorted(matrices)):
        fm = matrices[cat]
        y = np.asarray(fm.labels)
        n_pos = int(np.sum(y == 1))
        res = CategoryResult(cat, len(y), n_pos)
        smallest = min(n_pos, len(y) - n_pos)
        if smallest < k_outer:
            res.skipped = f"smallest class has {smallest} users, need {k_outer}"
        else:
            try:
                res.report = nested_cv(fm.X, y, model_kind, grid, k_outer, k_inner,
                                       derive_seed(seed, 7, i), fm.sparse_mask, True, threads)
            except DataError as exc:
                res.skipped = str(exc)
        out[cat] = res
    return out


def category_matrices(users, category_map: Mapping, build: Callable) -> dict:
    """Feature matrices per topic category.

    Each category keeps the users assigned to it, with their comments
    restricted to that category's subreddits; ``build(users)`` turns the
    restricted users into a FeatureMatrix.
    """
    out = {}
    for cat, subs in category_map.items():
        subs = {s.lower() for s in subs}
        members = []
        for u in users:
            if cat not in u.categories:
                continue
            comments = [c for c in u.comments if c.subreddit.lower() in subs]
            if comments:
                members.append(replace(u, comments=comments))
        if members:
            out[cat] = build(members)
    return out

