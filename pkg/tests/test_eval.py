import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpdetect.analysis import t_sf_numeric
from bpdetect.errors import ConfigError, DataError
from bpdetect.eval import (baseline_report, compare_significance, derive_seed, expand_grid, nested_cv,
                           per_category_eval, stratified_kfold)
from bpdetect.userfeat import FeatureMatrix

DIFFS = [0.02, 0.01, 0.03, 0.02, 0.02, 0.01, 0.03, 0.02, 0.01, 0.03]
# one-sample t on DIFFS and its two-sided p, frozen from an independent t implementation
DIFFS_T = 7.745966692414834
DIFFS_P = 2.8617645011719976e-05


def test_kfold_examples():
    y = np.array([0, 1] * 50)
    folds = stratified_kfold(y, 10, 0)
    assert [len(f) for f in folds] == [10] * 10
    assert all(y[f].sum() == 5 for f in folds)
    y = np.array([1] * 3488 + [0] * 3931)
    folds = stratified_kfold(y, 10, 0)
    assert {len(f) for f in folds} == {741, 742}
    assert {int(y[f].sum()) for f in folds} <= {348, 349}
    with pytest.raises(DataError):
        stratified_kfold(np.array([0] * 10 + [1] * 30), 11, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 40), st.integers(0, 40), st.integers(0, 2**31))
def test_kfold_partition(k, extra0, extra1, seed):
    y = np.array([0] * (k + extra0) + [1] * (k + extra1))
    folds = stratified_kfold(y, k, seed)
    allidx = np.concatenate(folds)
    assert sorted(allidx.tolist()) == list(range(len(y)))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    for c in (0, 1):
        counts = [int(np.sum(y[f] == c)) for f in folds]
        assert max(counts) - min(counts) <= 1
    assert all(np.array_equal(a, b) for a, b in zip(folds, stratified_kfold(y, k, seed)))


def test_derive_seed():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)


def test_grid_expansion():
    pts = expand_grid("rf", {"n_trees": [10, 20], "max_depth": [2, None]})
    assert [(p.n_trees, p.max_depth) for p in pts] == [(10, 2), (10, None), (20, 2), (20, None)]
    assert len(expand_grid("logreg")) == 4
    with pytest.raises(ConfigError):
        expand_grid("svm", {"C": []})
    with pytest.raises(ConfigError):
        expand_grid("svm", {"gamma": [1]})
    with pytest.raises(ConfigError):
        expand_grid("svm", {"C": [-1]})


def _data(n=120, d=5, seed=0, signal=0.0):
    rng = np.random.default_rng(seed)
    y = (np.arange(n) % 2).astype(np.int8)
    X = rng.normal(size=(n, d))
    X[:, 0] += signal * (2 * y - 1)
    return X, y


def test_label_feature_gives_perfect_accuracy():
    X, y = _data()
    X[:, 0] = y
    for kind in ("logreg", "svm", "rf"):
        rep = nested_cv(X, y, kind, {"C": [1.0]} if kind != "rf" else {"n_trees": [5]}, seed=1)
        assert rep.mean_accuracy == 1.0


def test_noise_near_chance():
    X, y = _data(200, 10, 5)
    rep = nested_cv(X, y, "logreg", {"C": [0.1, 1.0]}, seed=2)
    assert 0.40 <= rep.mean_accuracy <= 0.60


def test_single_point_and_reproducible():
    X, y = _data(80, 4, 1, signal=1.0)
    a = nested_cv(X, y, "svm", {"C": [0.5]}, seed=3)
    assert len({(h.C, h.kind) for h in a.chosen_hyperparams}) == 1
    b = nested_cv(X, y, "svm", {"C": [0.5]}, seed=3, threads=4)
    assert a.to_json() == b.to_json()


def test_threads_equal_with_inner_loop():
    X, y = _data(80, 4, 1, signal=0.5)
    g = {"n_trees": [5, 10], "max_depth": [2, None]}
    assert nested_cv(X, y, "rf", g, seed=9).to_json() == nested_cv(X, y, "rf", g, seed=9, threads=3).to_json()


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 1000), st.integers(0, 4))
def test_poisoned_test_labels_do_not_move_selection(seed, fold):
    X, y = _data(60, 3, seed, signal=0.7)
    folds = stratified_kfold(y, 5, seed)
    grid = {"C": [0.01, 1.0, 100.0]}
    clean = nested_cv(X, y, "logreg", grid, k_inner=3, seed=seed, outer_folds=folds)
    yp = y.copy()
    yp[folds[fold]] = 1 - yp[folds[fold]]
    dirty = nested_cv(X, yp, "logreg", grid, k_inner=3, seed=seed, outer_folds=folds)
    assert clean.chosen_hyperparams[fold] == dirty.chosen_hyperparams[fold]
    assert clean.inner_scores[fold] == dirty.inner_scores[fold]


def test_outer_folds_validated():
    X, y = _data(20, 2)
    with pytest.raises(DataError):
        nested_cv(X, y, "logreg", {"C": [1.0]}, outer_folds=[np.arange(5), np.arange(5)])


def test_compare_significance():
    assert compare_significance([0.7] * 10, [0.7] * 10) == 1.0
    assert compare_significance([0.9] * 10, [0.5] * 10) == 0.0
    b = [0.5] * 10
    a = [0.5 + d for d in DIFFS]
    p = compare_significance(a, b)
    assert abs(p - DIFFS_P) < 1e-9
    assert abs(p - t_sf_numeric(DIFFS_T, 9)) < 1e-8


def test_baseline_report():
    rep = baseline_report(3488, 3931, seed=0)
    assert abs(rep.mcc_accuracy - 0.5299) <= 0.0005
    assert abs(rep.random_expected - 0.5017827346866125) < 1e-12
    assert rep.random_within_3sigma


def _fm(n, n_pos, signal, seed):
    rng = np.random.default_rng(seed)
    y = np.array([1] * n_pos + [0] * (n - n_pos))
    X = rng.normal(size=(n, 3))
    X[:, 0] += signal * y
    return FeatureMatrix(["a", "b", "c"], X, y, [f"u{i:03d}" for i in range(n)])


def test_per_category():
    res = per_category_eval({"Big": _fm(60, 25, 4.0, 1), "Tiny": _fm(30, 6, 4.0, 2)}, "rf",
                            {"n_trees": [20]}, seed=0)
    big, tiny = res["Big"], res["Tiny"]
    assert tiny.report is None and "6" in tiny.skipped
    assert tiny.mcc_accuracy == 24 / 30 and big.mcc_accuracy == 35 / 60
    assert big.report.mean_accuracy > big.report.mcc_mean_accuracy and big.p_value < 0.001
    assert big.significant
