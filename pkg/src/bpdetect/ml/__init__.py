"""Classifiers, baselines and metrics."""
from __future__ import annotations

import json

from ..errors import DataError
from .base import (MODEL_KINDS, Hyperparams, MajorityClassifier, Metrics, PriorClassifier,
                   baseline_mcc, baseline_random, class_weights, metrics,
                   random_baseline_expected_accuracy)
from .forest import Forest, train_forest
from .linear import LinearModel, train_linear


def train(X, y, hp: Hyperparams, seed: int = 0, sparse_mask=None, threads: int = 1):
    if hp.kind == "rf":
        return train_forest(X, y, hp, seed=seed, threads=threads)
    return train_linear(X, y, hp, seed=seed, sparse_mask=sparse_mask)


def predict(model, X):
    return model.predict(X)


def model_to_json(model) -> dict:
    return model.to_json()


def model_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "linear":
        return LinearModel.from_json(obj)
    if kind == "forest":
        return Forest.from_json(obj)
    raise DataError(f"unknown model type {kind!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json(), fh)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


__all__ = [
    "MODEL_KINDS", "Hyperparams", "MajorityClassifier", "Metrics", "PriorClassifier",
    "baseline_mcc", "baseline_random", "class_weights", "metrics",
    "random_baseline_expected_accuracy", "Forest", "train_forest", "LinearModel",
    "train_linear", "train", "predict", "save_model", "load_model", "model_from_json",
]
