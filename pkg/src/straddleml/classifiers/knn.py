"""k-nearest-neighbours classifier.

Euclidean mode standardizes features first; cosine mode works on raw
features since the angle between level vectors is the signal there.
Probability is the (optionally inverse-distance weighted) positive fraction
among the k nearest training rows.  Ties in distance resolve to the lower
training index, and k is capped at the training size.
"""

from __future__ import annotations

import numpy as np

from .base import Standardizer


def _euclidean(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = (A * A).sum(axis=1)[:, None]
    bb = (B * B).sum(axis=1)[None, :]
    d2 = aa + bb - 2.0 * (A @ B.T)
    return np.sqrt(np.maximum(d2, 0.0))


def _cosine(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    an = np.linalg.norm(A, axis=1)
    bn = np.linalg.norm(B, axis=1)
    sim = A @ B.T
    denom = an[:, None] * bn[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(denom > 0.0, sim / denom, 0.0)
    return 1.0 - sim


class KNNModel:
    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        k: int,
        weights: str,
        metric: str,
        standardizer: Standardizer | None,
    ) -> None:
        self.X = X
        self.y = y
        self.k = k
        self.weights = weights
        self.metric = metric
        self.standardizer = standardizer

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        k: int = 13,
        weights: str = "uniform",
        metric: str = "euclidean",
    ) -> "KNNModel":
        if weights not in ("uniform", "distance"):
            raise ValueError(f"unknown weighting {weights!r}")
        if metric not in ("euclidean", "cosine"):
            raise ValueError(f"unknown metric {metric!r}")
        if k < 1:
            raise ValueError("k must be positive")
        scaler = Standardizer().fit(X) if metric == "euclidean" else None
        stored = scaler.transform(X) if scaler is not None else np.asarray(X, dtype=float)
        return cls(
            X=stored,
            y=np.asarray(y, dtype=float),
            k=min(k, len(X)),
            weights=weights,
            metric=metric,
            standardizer=scaler,
        )

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        Q = np.asarray(X, dtype=float)
        if self.standardizer is not None:
            Q = self.standardizer.transform(Q)
        dist = _euclidean(Q, self.X) if self.metric == "euclidean" else _cosine(Q, self.X)
        order = np.argsort(dist, axis=1, kind="stable")[:, : self.k]
        rows = np.arange(len(Q))[:, None]
        nd = dist[rows, order]
        ny = self.y[order]
        if self.weights == "uniform":
            return ny.mean(axis=1)
        probs = np.empty(len(Q))
        for i in range(len(Q)):
            zero = nd[i] == 0.0
            if zero.any():
                # exact matches dominate: average their labels only
                probs[i] = ny[i][zero].mean()
            else:
                w = 1.0 / nd[i]
                probs[i] = float((w * ny[i]).sum() / w.sum())
        # inverse-distance sums can wander a few ulp outside [0, 1]
        return np.clip(probs, 0.0, 1.0)
