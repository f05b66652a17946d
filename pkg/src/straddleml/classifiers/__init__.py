"""From-scratch classifiers sharing a common spec/fit/predict_proba surface."""

from .base import (
    KINDS,
    USES_SEED,
    ClassifierSpec,
    Standardizer,
    decide,
    fit,
)
from .persistence import load_model, save_model

__all__ = [
    "KINDS",
    "USES_SEED",
    "ClassifierSpec",
    "Standardizer",
    "decide",
    "fit",
    "load_model",
    "save_model",
]
