"""Random forest of gini trees over bootstrap resamples.

Each tree trains on a bootstrap of the data expressed as per-sample counts
used as weights, splits exhaustively over all features, and predicts the
weighted positive frequency of its leaf.  The ensemble probability is the
plain mean over trees.  All randomness comes from the supplied seed.
"""

from __future__ import annotations

import numpy as np

from ._trees import Tree, grow_tree


class ForestModel:
    def __init__(self, trees: list[Tree], seed: "int | tuple[int, ...] | None") -> None:
        self.trees = trees
        self.seed = seed

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        n_estimators: int = 701,
        max_depth: int | None = None,
        min_samples_leaf: int = 1,
        seed: "int | tuple[int, ...] | None" = None,
    ) -> "ForestModel":
        if n_estimators < 1:
            raise ValueError("n_estimators must be positive")
        rng = np.random.default_rng(seed)
        n = len(X)
        trees = []
        for _ in range(n_estimators):
            counts = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(float)
            trees.append(
                grow_tree(
                    X,
                    y,
                    weights=counts,
                    criterion="gini",
                    max_depth=max_depth,
                    min_samples_leaf=min_samples_leaf,
                )
            )
        return cls(trees=trees, seed=seed)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        acc = np.zeros(len(X))
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)
