"""Hyperparameters, class weights, metrics and baseline classifiers."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DataError

MODEL_KINDS = ("logreg", "svm", "rf")


@dataclass(frozen=True)
class Hyperparams:
    kind: str
    C: float = 1.0
    n_trees: int = 100
    max_depth: int | None = None
    max_features: str | int = "sqrt"
    class_weighted: bool = False

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise DataError(f"unknown model kind {self.kind!r}")
        if not self.C > 0:
            raise DataError("C must be positive")
        if self.n_trees < 1:
            raise DataError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise DataError("max_depth must be >= 1 or None")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "Hyperparams":
        return cls(**obj)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    f1: float

    def to_json(self) -> dict:
        return {"accuracy": self.accuracy, "f1": self.f1}


def class_weights(labels) -> dict[int, float]:
    """Balanced weights ``n / (2 n_c)``."""
    y = np.asarray(labels)
    n = len(y)
    n1 = int(np.sum(y == 1))
    n0 = n - n1
    if n0 == 0 or n1 == 0:
        raise DataError("class weights need both classes present")
    return {0: n / (2.0 * n0), 1: n / (2.0 * n1)}


def sample_weights(y, weighted: bool) -> np.ndarray:
    y = np.asarray(y)
    if not weighted:
        return np.ones(len(y))
    cw = class_weights(y)
    return np.where(y == 1, cw[1], cw[0])


def metrics(y_true, y_pred) -> Metrics:
    """Accuracy and F1 of the positive (bipolar) class; F1 is 0 when P+R = 0."""
    yt = np.asarray(y_true).astype(int)
    yp = np.asarray(y_pred).astype(int)
    if len(yt) != len(yp):
        raise DataError("y_true and y_pred differ in length")
    if len(yt) == 0:
        raise DataError("metrics of an empty prediction")
    acc = float(np.mean(yt == yp))
    tp = int(np.sum((yt == 1) & (yp == 1)))
    fp = int(np.sum((yt == 0) & (yp == 1)))
    fn = int(np.sum((yt == 1) & (yp == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(acc, f1)


@dataclass(frozen=True)
class MajorityClassifier:
    label: int

    def predict(self, X) -> np.ndarray:
        return np.full(X.shape[0] if hasattr(X, "shape") else len(X), self.label, dtype=np.int8)


@dataclass(frozen=True)
class PriorClassifier:
    """Samples labels i.i.d. from the training prior."""
    p_positive: float
    seed: int

    def predict(self, X) -> np.ndarray:
        n = X.shape[0] if hasattr(X, "shape") else len(X)
        rng = np.random.default_rng(self.seed)
        return (rng.random(n) < self.p_positive).astype(np.int8)

    def expected_accuracy(self, p_test: float | None = None) -> float:
        q = self.p_positive if p_test is None else p_test
        return self.p_positive * q + (1 - self.p_positive) * (1 - q)


def baseline_mcc(y_train) -> MajorityClassifier:
    y = np.asarray(y_train)
    if len(y) == 0:
        raise DataError("baseline needs training labels")
    n1 = int(np.sum(y == 1))
    return MajorityClassifier(1 if n1 > len(y) - n1 else 0)


def baseline_random(y_train, seed: int) -> PriorClassifier:
    y = np.asarray(y_train)
    if len(y) == 0:
        raise DataError("baseline needs training labels")
    return PriorClassifier(float(np.mean(y == 1)), seed)


def random_baseline_expected_accuracy(n_pos: int, n_neg: int) -> float:
    p = n_pos / (n_pos + n_neg)
    return p * p + (1 - p) * (1 - p)


def binomial_3sigma(p: float, n: int) -> tuple[float, float]:
    sd = math.sqrt(p * (1 - p) / n)
    return p - 3 * sd, p + 3 * sd
