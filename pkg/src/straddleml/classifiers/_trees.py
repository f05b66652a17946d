"""Binary decision trees used by the forest and boosting models.

A tree is a set of flat parallel arrays (feature, threshold, left, right,
value) grown depth-first with an explicit stack.  Split search is exhaustive
over all features; candidate thresholds are midpoints between consecutive
distinct sorted values and a sample goes left when x <= threshold.

Two criteria: "gini" for weighted binary classification (leaf value is the
weighted positive-class frequency) and "sse" for weighted regression (leaf
value is the weighted mean target).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    threshold: np.ndarray = field(default_factory=lambda: np.empty(0))
    left: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    right: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    value: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for each row."""
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[node]
            internal = feat != _LEAF
            if not internal.any():
                return node
            idx = np.nonzero(internal)[0]
            cur = node[idx]
            go_left = X[idx, feat[idx]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def _best_split(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, criterion: str
) -> tuple[int, float] | None:
    """Exhaustive weighted split search; returns (feature, threshold) or None."""
    best_score = np.inf
    best: tuple[int, float] | None = None
    total_w = w.sum()
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        ws = w[order]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        cw = np.cumsum(ws)[:-1][valid]
        rw = total_w - cw
        wy = ws * ys
        cwy = np.cumsum(wy)[:-1][valid]
        rwy = wy.sum() - cwy
        if criterion == "gini":
            # weighted impurity of a binary node: 2 p (1 - p) per side
            pl = cwy / cw
            pr = rwy / rw
            score = cw * 2.0 * pl * (1.0 - pl) + rw * 2.0 * pr * (1.0 - pr)
        else:
            wy2 = ws * ys * ys
            cwy2 = np.cumsum(wy2)[:-1][valid]
            rwy2 = wy2.sum() - cwy2
            score = (cwy2 - cwy * cwy / cw) + (rwy2 - rwy * rwy / rw)
        i = int(np.argmin(score))
        if best is None or score[i] < best_score - 1e-12 * max(1.0, abs(best_score)):
            best_score = float(score[i])
            pos = np.nonzero(valid)[0][i]
            thr = 0.5 * (xs[pos] + xs[pos + 1])
            # midpoint can round onto the left value; x <= thr still separates
            best = (f, float(thr))
    return best


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray | None = None,
    criterion: str = "gini",
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
) -> Tree:
    """Grow one tree on (X, y) with optional sample weights."""
    if criterion not in ("gini", "sse"):
        raise ValueError(f"unknown criterion {criterion!r}")
    n = len(X)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def leaf_value(idx: np.ndarray) -> float:
        wi = w[idx]
        tw = wi.sum()
        if tw <= 0:
            return float(y[idx].mean())
        return float((wi * y[idx]).sum() / tw)

    def new_node(idx: np.ndarray) -> int:
        node = len(feature)
        feature.append(_LEAF)
        threshold.append(np.nan)
        left.append(_LEAF)
        right.append(_LEAF)
        value.append(leaf_value(idx))
        return node

    stack: list[tuple[int, np.ndarray, int]] = []
    active = np.nonzero(w > 0)[0]
    if len(active) == 0:
        active = np.arange(n)
    root = new_node(active)
    stack.append((root, active, 0))

    while stack:
        node, idx, depth = stack.pop()
        if len(idx) < min_samples_split:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        yn = y[idx]
        if np.all(yn == yn[0]):
            continue
        split = _best_split(X[idx], yn, w[idx], criterion)
        if split is None:
            continue
        f, thr = split
        mask = X[idx, f] <= thr
        li = idx[mask]
        ri = idx[~mask]
        if len(li) < min_samples_leaf or len(ri) < min_samples_leaf:
            continue
        feature[node] = f
        threshold[node] = thr
        lchild = new_node(li)
        rchild = new_node(ri)
        left[node] = lchild
        right[node] = rchild
        stack.append((lchild, li, depth + 1))
        stack.append((rchild, ri, depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
    )
