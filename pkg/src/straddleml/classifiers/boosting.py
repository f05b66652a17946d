"""Boosted tree ensembles: gradient boosting and adaptive boosting.

GBMModel: stagewise logistic-loss boosting.  Start from the training
log-odds, fit a small regression tree to the current residuals y - p each
stage, replace each leaf value with the Newton step sum(r) / sum(p * (1 - p))
over its training samples, and shrink by the learning rate.

AdaBoostModel: real-valued boosting of depth-1 stumps.  Each round reweights
samples by exp(-0.5 * s_i * log(p1 / p0)) with s_i = +-1 the signed label,
and the final score is the mean of the per-stump log-odds, squashed through
a sigmoid.  Stops early once a stump classifies the weighted sample exactly.
"""

from __future__ import annotations

import numpy as np

from ._trees import Tree, grow_tree
from .logistic import _sigmoid

_EPS = float(np.finfo(float).eps)


class GBMModel:
    def __init__(self, init_score: float, learning_rate: float, trees: list[Tree]) -> None:
        self.init_score = init_score
        self.learning_rate = learning_rate
        self.trees = trees

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        n_estimators: int = 701,
        learning_rate: float = 0.5,
        max_depth: int = 3,
    ) -> "GBMModel":
        if n_estimators < 1:
            raise ValueError("n_estimators must be positive")
        yf = np.asarray(y, dtype=float)
        p_bar = yf.mean()
        init = float(np.log(p_bar / (1.0 - p_bar)))
        F = np.full(len(X), init)
        trees: list[Tree] = []
        for _ in range(n_estimators):
            p = _sigmoid(F)
            residual = yf - p
            tree = grow_tree(X, residual, criterion="sse", max_depth=max_depth)
            leaves = tree.apply(X)
            hess = p * (1.0 - p)
            for leaf in np.unique(leaves):
                members = leaves == leaf
                denom = hess[members].sum()
                tree.value[leaf] = residual[members].sum() / max(denom, 1e-12)
            F += learning_rate * tree.value[leaves]
            trees.append(tree)
        return cls(init_score=init, learning_rate=learning_rate, trees=trees)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        F = np.full(len(X), self.init_score)
        for tree in self.trees:
            F += self.learning_rate * tree.predict(X)
        return F

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_function(X))


class AdaBoostModel:
    def __init__(self, stumps: list[Tree]) -> None:
        self.stumps = stumps

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, n_estimators: int = 50) -> "AdaBoostModel":
        if n_estimators < 1:
            raise ValueError("n_estimators must be positive")
        yf = np.asarray(y, dtype=float)
        signed = 2.0 * yf - 1.0
        n = len(X)
        w = np.full(n, 1.0 / n)
        stumps: list[Tree] = []
        for _ in range(n_estimators):
            stump = grow_tree(X, yf, weights=w, criterion="gini", max_depth=1)
            p1 = np.clip(stump.predict(X), _EPS, 1.0 - _EPS)
            stumps.append(stump)
            hard = (p1 > 0.5).astype(float)
            if float(w @ (hard != yf)) == 0.0:
                break
            w *= np.exp(-0.5 * signed * np.log(p1 / (1.0 - p1)))
            total = w.sum()
            if not np.isfinite(total) or total <= 0.0:
                break
            w /= total
        return cls(stumps=stumps)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        score = np.zeros(len(X))
        for stump in self.stumps:
            p1 = np.clip(stump.predict(X), _EPS, 1.0 - _EPS)
            score += np.log(p1 / (1.0 - p1))
        return score / len(self.stumps)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_function(X))
