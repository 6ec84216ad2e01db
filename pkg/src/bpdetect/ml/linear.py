"""Logistic regression and linear SVM fitted by full-batch gradient descent.

Objective::

    J(w, b) = (1/n) sum_i c_i * loss(y_i, m_i) + ||w||^2 / (2C)

with ``m_i`` the margin on standardized features and ``c_i`` the class
weight. The bias is not regularized. Dense columns are standardized with
fit-time mean/std; columns flagged in ``sparse_mask`` (tf-idf) pass
through. Standardization is folded into the margin so sparse input is
never densified.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import DataError
from .base import Hyperparams, sample_weights

MAX_EPOCHS = 500
GRAD_TOL = 1e-6
ARMIJO = 1e-4
MAX_HALVINGS = 60
# hinge is not smooth, so its gradient norm need not vanish at the optimum;
# stop once the objective has stalled for STALL_EPOCHS consecutive epochs
STALL_TOL = 1e-7
STALL_EPOCHS = 10


def _check_finite(X):
    data = X.data if sp.issparse(X) else X
    if not np.all(np.isfinite(data)):
        raise DataError("feature matrix contains non-finite values")


@dataclass
class LinearModel:
    kind: str
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    hyperparams: Hyperparams | None = None
    seed: int = 0
    loss_history: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def decision_function(self, X) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise DataError(f"model expects {self.n_features} features, got {X.shape[1]}")
        return _margin(X, self.weights, self.bias, self.mean, self.std)

    def predict_proba(self, X) -> np.ndarray:
        m = self.decision_function(X)
        return 0.5 * (1.0 + np.tanh(0.5 * m))

    def predict(self, X) -> np.ndarray:
        m = self.decision_function(X)
        if self.kind == "logreg":
            return (self.predict_proba(X) > 0.5).astype(np.int8)
        return (m > 0).astype(np.int8)

    def to_json(self) -> dict:
        return {
            "type": "linear",
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "hyperparams": self.hyperparams.to_json() if self.hyperparams else None,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LinearModel":
        hp = Hyperparams.from_json(obj["hyperparams"]) if obj.get("hyperparams") else None
        return cls(obj["kind"], np.asarray(obj["weights"], dtype=float), float(obj["bias"]),
                   np.asarray(obj["mean"], dtype=float), np.asarray(obj["std"], dtype=float),
                   hp, obj.get("seed", 0))


def _margin(X, w, b, mean, std):
    ws = w / std
    return np.asarray(X @ ws).ravel() - float(np.dot(mean, ws)) + b


def standardization(X, sparse_mask=None):
    n, d = X.shape
    if sp.issparse(X):
        mean = np.asarray(X.mean(axis=0)).ravel()
        sq = np.asarray(X.multiply(X).mean(axis=0)).ravel()
        var = np.maximum(sq - mean * mean, 0.0)
    else:
        mean = X.mean(axis=0)
        var = X.var(axis=0)
    std = np.sqrt(var)
    std[std <= 1e-12 * np.maximum(1.0, np.abs(mean))] = 1.0
    if sparse_mask is not None:
        mask = np.asarray(sparse_mask, dtype=bool)
        mean = np.where(mask, 0.0, mean)
        std = np.where(mask, 1.0, std)
    return mean, std


class _Problem:
    """Objective and gradient in the standardized parameterization."""

    def __init__(self, X, y, c, C, kind, mean, std):
        self.X, self.c, self.C, self.kind = X, c, C, kind
        self.s = np.where(np.asarray(y) == 1, 1.0, -1.0)
        self.mean, self.std = mean, std
        self.n = X.shape[0]

    def margins(self, w, b):
        return _margin(self.X, w, b, self.mean, self.std)

    def value(self, w, b) -> float:
        z = self.s * self.margins(w, b)
        if self.kind == "logreg":
            losses = np.logaddexp(0.0, -z)
        else:
            losses = np.maximum(0.0, 1.0 - z)
        return float(np.dot(self.c, losses)) / self.n + float(np.dot(w, w)) / (2.0 * self.C)

    def grad(self, w, b):
        z = self.s * self.margins(w, b)
        if self.kind == "logreg":
            dl = -0.5 * (1.0 - np.tanh(0.5 * z))  # -sigmoid(-z)
        else:
            dl = np.where(z < 1.0, -1.0, 0.0)
        gm = self.c * dl * self.s / self.n
        xt = np.asarray(self.X.T @ gm).ravel()
        gw = (xt - self.mean * gm.sum()) / self.std + w / self.C
        return gw, float(gm.sum())


def objective(X, y, w, b, hp: Hyperparams, sparse_mask=None, mean=None, std=None) -> float:
    """Training objective at standardized weights ``w`` and bias ``b``."""
    if mean is None:
        mean, std = standardization(X, sparse_mask)
    c = sample_weights(y, hp.class_weighted)
    return _Problem(X, y, c, hp.C, hp.kind, mean, std).value(np.asarray(w, float), float(b))


def gradient(X, y, w, b, hp: Hyperparams, sparse_mask=None, mean=None, std=None):
    if mean is None:
        mean, std = standardization(X, sparse_mask)
    c = sample_weights(y, hp.class_weighted)
    return _Problem(X, y, c, hp.C, hp.kind, mean, std).grad(np.asarray(w, float), float(b))


def train_linear(X, y, hp: Hyperparams, seed: int = 0, sparse_mask=None,
                 max_epochs: int = MAX_EPOCHS) -> LinearModel:
    """Deterministic gradient descent with Barzilai-Borwein trial steps and backtracking."""
    if hp.kind not in ("logreg", "svm"):
        raise DataError(f"train_linear cannot fit {hp.kind!r}")
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise DataError("training labels need both classes")
    if sp.issparse(X):
        X = X.tocsr().astype(float)
    else:
        X = np.ascontiguousarray(X, dtype=float)
    _check_finite(X)
    mean, std = standardization(X, sparse_mask)
    prob = _Problem(X, y, sample_weights(y, hp.class_weighted), hp.C, hp.kind, mean, std)

    d = X.shape[1]
    w = np.zeros(d)
    b = 0.0
    J = prob.value(w, b)
    history = [J]
    gw, gb = prob.grad(w, b)
    step = 1.0
    prev = None
    stalled = 0
    for _ in range(max_epochs):
        gnorm2 = float(np.dot(gw, gw)) + gb * gb
        if gnorm2 ** 0.5 < GRAD_TOL:
            break
        if prev is not None:
            sw, sb, rw, rb = prev
            sr = float(np.dot(sw, rw)) + sb * rb
            ss = float(np.dot(sw, sw)) + sb * sb
            if sr > 1e-300 and ss > 0:
                step = ss / sr
        accepted = False
        for _ in range(MAX_HALVINGS):
            w_new = w - step * gw
            b_new = b - step * gb
            J_new = prob.value(w_new, b_new)
            if J_new <= J - ARMIJO * step * gnorm2 or (hp.kind == "svm" and J_new < J):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        gw_new, gb_new = prob.grad(w_new, b_new)
        prev = (w_new - w, b_new - b, gw_new - gw, gb_new - gb)
        stalled = stalled + 1 if J - J_new <= STALL_TOL * max(1.0, abs(J)) else 0
        w, b, J, gw, gb = w_new, b_new, J_new, gw_new, gb_new
        history.append(J)
        if stalled >= STALL_EPOCHS:
            break
    return LinearModel(hp.kind, w, b, mean, std, hp, seed, history)
