"""Versioned JSON persistence for fitted models.

Floats are serialized through json's repr-based formatting, so a saved and
reloaded model reproduces predictions bit for bit.  Leaf thresholds inside
trees are NaN in memory and stored as null to stay inside strict JSON.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from ._trees import Tree
from .base import Standardizer
from .boosting import AdaBoostModel, GBMModel
from .forest import ForestModel
from .knn import KNNModel
from .logistic import LogisticModel
from .svc import SVCModel

FORMAT = "straddleml-model"
VERSION = 1


def _tree_to_obj(tree: Tree) -> dict[str, Any]:
    return {
        "feature": tree.feature.tolist(),
        "threshold": [None if math.isnan(t) else t for t in tree.threshold.tolist()],
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
    }


def _tree_from_obj(obj: dict[str, Any]) -> Tree:
    return Tree(
        feature=np.array(obj["feature"], dtype=np.int64),
        threshold=np.array(
            [math.nan if t is None else t for t in obj["threshold"]], dtype=float
        ),
        left=np.array(obj["left"], dtype=np.int64),
        right=np.array(obj["right"], dtype=np.int64),
        value=np.array(obj["value"], dtype=float),
    )


def _scaler_to_obj(scaler: Standardizer | None) -> dict[str, Any] | None:
    if scaler is None:
        return None
    return {"mean": scaler.mean.tolist(), "scale": scaler.scale.tolist()}


def _scaler_from_obj(obj: dict[str, Any] | None) -> Standardizer | None:
    if obj is None:
        return None
    scaler = Standardizer()
    scaler.mean = np.array(obj["mean"], dtype=float)
    scaler.scale = np.array(obj["scale"], dtype=float)
    return scaler


def _state_of(model: Any) -> tuple[str, dict[str, Any]]:
    if isinstance(model, LogisticModel):
        return "logistic", {
            "scaler": _scaler_to_obj(model.standardizer),
            "w": model.w.tolist(),
            "c": model.c,
            "C": model.C,
            "obj_history": list(model.obj_history),
            "converged": model.converged,
        }
    if isinstance(model, KNNModel):
        return "knn", {
            "X": model.X.tolist(),
            "y": model.y.tolist(),
            "k": model.k,
            "weights": model.weights,
            "metric": model.metric,
            "scaler": _scaler_to_obj(model.standardizer),
        }
    if isinstance(model, ForestModel):
        return "random_forest", {
            "trees": [_tree_to_obj(t) for t in model.trees],
            "seed": model.seed,
        }
    if isinstance(model, GBMModel):
        return "gradient_boosting", {
            "init_score": model.init_score,
            "learning_rate": model.learning_rate,
            "trees": [_tree_to_obj(t) for t in model.trees],
        }
    if isinstance(model, AdaBoostModel):
        return "adaboost", {"stumps": [_tree_to_obj(t) for t in model.stumps]}
    if isinstance(model, SVCModel):
        return "svc", {
            "scaler": _scaler_to_obj(model.standardizer),
            "support_X": model.support_X.tolist(),
            "support_coef": model.support_coef.tolist(),
            "bias": model.bias,
            "gamma": model.gamma,
            "calib_A": model.calib_A,
            "calib_B": model.calib_B,
            "n_iter": model.n_iter,
        }
    raise TypeError(f"cannot persist {type(model).__name__}")


def save_model(model: Any, path: str) -> None:
    kind, state = _state_of(model)
    payload = {"format": FORMAT, "version": VERSION, "kind": kind, "state": state}
    with open(path, "w") as handle:
        json.dump(payload, handle, sort_keys=True)
        handle.write("\n")


def load_model(path: str) -> Any:
    with open(path) as handle:
        payload = json.load(handle)
    if payload.get("format") != FORMAT:
        raise ValueError(f"{path}: not a saved model")
    if payload.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported model version {payload.get('version')}")
    kind = payload["kind"]
    state = payload["state"]
    if kind == "logistic":
        return LogisticModel(
            standardizer=_scaler_from_obj(state["scaler"]),
            w=np.array(state["w"], dtype=float),
            c=float(state["c"]),
            C=float(state["C"]),
            obj_history=[float(v) for v in state["obj_history"]],
            converged=bool(state["converged"]),
        )
    if kind == "knn":
        return KNNModel(
            X=np.array(state["X"], dtype=float),
            y=np.array(state["y"], dtype=float),
            k=int(state["k"]),
            weights=state["weights"],
            metric=state["metric"],
            standardizer=_scaler_from_obj(state["scaler"]),
        )
    if kind == "random_forest":
        return ForestModel(
            trees=[_tree_from_obj(t) for t in state["trees"]],
            seed=state["seed"],
        )
    if kind == "gradient_boosting":
        return GBMModel(
            init_score=float(state["init_score"]),
            learning_rate=float(state["learning_rate"]),
            trees=[_tree_from_obj(t) for t in state["trees"]],
        )
    if kind == "adaboost":
        return AdaBoostModel(stumps=[_tree_from_obj(t) for t in state["stumps"]])
    if kind == "svc":
        sx = state["support_X"]
        return SVCModel(
            standardizer=_scaler_from_obj(state["scaler"]),
            support_X=np.array(sx, dtype=float) if sx else np.empty((0, 0)),
            support_coef=np.array(state["support_coef"], dtype=float),
            bias=float(state["bias"]),
            gamma=float(state["gamma"]),
            calib_A=float(state["calib_A"]),
            calib_B=float(state["calib_B"]),
            n_iter=int(state["n_iter"]),
        )
    raise ValueError(f"{path}: unknown model kind {kind!r}")
