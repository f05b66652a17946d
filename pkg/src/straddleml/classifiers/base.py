"""Classifier specs, input validation, and the fit/predict dispatch surface.

Every model consumes a binary-labeled training set and exposes
predict_proba(X) -> P(label = 1) per row.  Trading decisions are taken by
thresholding those probabilities strictly (trade iff p > threshold).

Kinds and their tunable hyperparameters (defaults in KINDS):

    logistic           C, max_iter, tol
    knn                k, weights ("uniform"|"distance"), metric ("euclidean"|"cosine")
    random_forest      n_estimators, max_depth, min_samples_leaf
    gradient_boosting  n_estimators, learning_rate, max_depth
    adaboost           n_estimators
    svc                C, gamma ("scale" or float), tol, max_passes

Only random_forest draws randomness; everything else is fully determined by
the training data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

KINDS: dict[str, dict[str, Any]] = {
    "logistic": {"C": 1.0, "max_iter": 100, "tol": 1e-6},
    "knn": {"k": 13, "weights": "uniform", "metric": "euclidean"},
    "random_forest": {"n_estimators": 701, "max_depth": None, "min_samples_leaf": 1},
    "gradient_boosting": {"n_estimators": 701, "learning_rate": 0.5, "max_depth": 3},
    "adaboost": {"n_estimators": 50},
    "svc": {"C": 1.0, "gamma": "scale", "tol": 1e-3, "max_passes": 10000},
}

USES_SEED = frozenset({"random_forest"})


@dataclass(frozen=True)
class ClassifierSpec:
    """Declarative model description: kind, hyperparameters, and seed.

    seed may be an int or a tuple of ints (entropy sequence); only kinds in
    USES_SEED consume it.
    """

    kind: str
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    seed: int | tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        unknown = set(self.hyperparameters) - set(KINDS[self.kind])
        if unknown:
            raise ValueError(
                f"unknown hyperparameters for {self.kind}: {sorted(unknown)}"
            )

    def resolved(self) -> dict[str, Any]:
        """Defaults overlaid with explicit settings."""
        merged = dict(KINDS[self.kind])
        merged.update(self.hyperparameters)
        return merged


class Standardizer:
    """Column-wise zero-mean unit-variance scaling fitted on training data."""

    def __init__(self) -> None:
        self.mean: np.ndarray | None = None
        self.scale: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "Standardizer":
        self.mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0
        self.scale = std
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.mean is None or self.scale is None:
            raise ValueError("standardizer is not fitted")
        return (X - self.mean) / self.scale


def validate_training_set(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if len(X) != len(y):
        raise ValueError(f"X has {len(X)} rows but y has {len(y)}")
    if len(X) < 2:
        raise ValueError("need at least 2 training samples")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    classes = np.unique(y)
    if not np.isin(classes, (0, 1)).all():
        raise ValueError(f"labels must be 0/1, got {classes}")
    if len(classes) < 2:
        raise ValueError("training labels contain a single class")
    return X, y.astype(int)


def fit(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray, warm_start: Any = None):
    """Fit the model described by spec; returns an object with predict_proba.

    warm_start is only consulted by kinds that support it (logistic) and must
    be a previous fit of the same kind.
    """
    X, y = validate_training_set(X, y)
    params = spec.resolved()
    if spec.kind == "logistic":
        from .logistic import LogisticModel

        return LogisticModel.fit(X, y, warm_start=warm_start, **params)
    if spec.kind == "knn":
        from .knn import KNNModel

        return KNNModel.fit(X, y, **params)
    if spec.kind == "random_forest":
        from .forest import ForestModel

        return ForestModel.fit(X, y, seed=spec.seed, **params)
    if spec.kind == "gradient_boosting":
        from .boosting import GBMModel

        return GBMModel.fit(X, y, **params)
    if spec.kind == "adaboost":
        from .boosting import AdaBoostModel

        return AdaBoostModel.fit(X, y, **params)
    if spec.kind == "svc":
        from .svc import SVCModel

        return SVCModel.fit(X, y, **params)
    raise ValueError(f"unknown classifier kind {spec.kind!r}")  # pragma: no cover


def decide(probs: np.ndarray, threshold: float) -> np.ndarray:
    """Trade decision per sample: 1 iff probability strictly exceeds threshold."""
    probs = np.asarray(probs, dtype=float)
    return (probs > threshold).astype(int)
