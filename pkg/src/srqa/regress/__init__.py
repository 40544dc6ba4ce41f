"""Two-stage regression: per-family forests combined by linear weights."""

from srqa.regress.forest import Forest, Tree, predict_forest, predict_forest_many, train_forest
from srqa.regress.model import (
    TwoStageModel,
    fit_lambda,
    load_model,
    predict_quality,
    save_model,
    train_two_stage,
)

__all__ = [
    "Tree",
    "Forest",
    "train_forest",
    "predict_forest",
    "predict_forest_many",
    "fit_lambda",
    "TwoStageModel",
    "train_two_stage",
    "predict_quality",
    "save_model",
    "load_model",
]
