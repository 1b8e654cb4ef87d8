from .ensemble import (
    ForestModel,
    ForestParams,
    fit_forest,
    load_model,
    predict,
    predict_per_tree,
    save_model,
)
from .linear import LinearModel, fit_linear, predict_linear
from .tree import Tree, fit_tree

__all__ = [
    "ForestModel",
    "ForestParams",
    "LinearModel",
    "Tree",
    "fit_forest",
    "fit_linear",
    "fit_tree",
    "load_model",
    "predict",
    "predict_linear",
    "predict_per_tree",
    "save_model",
]
