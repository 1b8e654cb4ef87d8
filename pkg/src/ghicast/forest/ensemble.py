"""Bagged regression-tree ensemble and its versioned JSON model file."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .. import _rng
from ..errors import ConfigError, SchemaMismatch, UnfittedModel, UnsupportedFormat
from ..features import FeatureMatrix, ScalerParams
from .tree import Tree, _bootstrap, fit_tree, tree_from_dict, tree_to_dict

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    mtry: int | None = None  # None: max(1, p // 3)
    min_leaf: int = 5
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise ConfigError("mtry must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0")

    def resolved_mtry(self, p: int) -> int:
        return max(1, p // 3) if self.mtry is None else min(self.mtry, p)


@dataclass
class ForestModel:
    trees: list
    feature_names: list
    importances: np.ndarray
    hyperparams: ForestParams
    scaler: ScalerParams | None = None
    embedding_ref: str | None = None
    _packed: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_features(self):
        return len(self.feature_names)

    def packed(self):
        if self._packed is None:
            offsets = np.cumsum([0] + [t.n_nodes for t in self.trees])[:-1]
            feature = np.concatenate([t.feature for t in self.trees])
            threshold = np.concatenate([t.threshold for t in self.trees])
            left = np.concatenate([np.where(t.left >= 0, t.left + o, -1) for t, o in zip(self.trees, offsets)])
            right = np.concatenate([np.where(t.right >= 0, t.right + o, -1) for t, o in zip(self.trees, offsets)])
            value = np.concatenate([t.value for t in self.trees])
            self._packed = (feature, threshold, left, right, value, offsets.astype(np.int64))
        return self._packed


def tree_seed(seed: int, tree_index: int) -> int:
    return (int(seed) ^ int(tree_index)) & 0xFFFFFFFFFFFFFFFF


def _fit_one(X, y, params: ForestParams, mtry: int, b: int) -> Tree:
    state = _rng.stream(tree_seed(params.seed, b), 0x7EE)
    sample = _bootstrap(X.shape[0], state) if params.bootstrap else None
    return fit_tree(X, y, state, mtry=mtry, min_leaf=params.min_leaf, max_depth=params.max_depth, sample_idx=sample)


def _normalised(v):
    total = v.sum()
    return v / total if total > 0 else np.zeros_like(v)


def fit_forest(X, y, params: ForestParams = ForestParams(), feature_names=None, threads=1) -> ForestModel:
    """Fit ``params.n_trees`` trees, each on its own bootstrap sample.

    Tree ``b`` draws all its randomness from the stream keyed by
    ``seed ^ b``, so the model does not depend on ``threads``.
    """
    if isinstance(X, FeatureMatrix):
        feature_names = list(X.columns)
        X = X.values
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if feature_names is None:
        feature_names = [f"x{k}" for k in range(X.shape[1])]
    mtry = params.resolved_mtry(X.shape[1])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(lambda b: _fit_one(X, y, params, mtry, b), range(params.n_trees)))
    else:
        trees = [_fit_one(X, y, params, mtry, b) for b in range(params.n_trees)]
    imp = _normalised(np.mean([_normalised(t.importance) for t in trees], axis=0))
    return ForestModel(trees, list(feature_names), imp, params)


@njit(cache=True, nogil=True)
def _predict_packed(feature, threshold, left, right, value, roots, X):
    out = np.zeros(X.shape[0])
    n_trees = roots.shape[0]
    for r in range(X.shape[0]):
        acc = 0.0
        for t in range(n_trees):
            node = roots[t]
            while feature[node] != -1:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            acc += value[node]
        out[r] = acc / n_trees
    return out


def _as_matrix(model, X):
    if isinstance(X, FeatureMatrix):
        if list(X.columns) != list(model.feature_names):
            raise SchemaMismatch("feature columns differ from the model's feature_names")
        X = X.values
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise SchemaMismatch(f"expected {model.n_features} feature columns, got {X.shape[-1]}")
    return X


def predict(model: ForestModel, X) -> np.ndarray:
    """Per-row mean of the tree predictions."""
    if not model.trees:
        raise UnfittedModel("forest has no trees")
    X = _as_matrix(model, X)
    return _predict_packed(*model.packed(), X)


def predict_per_tree(model: ForestModel, X) -> np.ndarray:
    X = _as_matrix(model, X)
    return np.stack([t.predict(X) for t in model.trees])


def model_to_dict(model: ForestModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "forest",
        "hyperparams": asdict(model.hyperparams),
        "feature_names": list(model.feature_names),
        "scaler": None if model.scaler is None else model.scaler.to_dict(),
        "embedding_ref": model.embedding_ref,
        "importances": [float(x) for x in model.importances],
        "trees": [tree_to_dict(t) for t in model.trees],
    }


def model_from_dict(d: dict) -> ForestModel:
    if d.get("format_version") != FORMAT_VERSION:
        raise UnsupportedFormat(f"unsupported model format_version {d.get('format_version')!r}")
    names = list(d["feature_names"])
    return ForestModel(
        trees=[tree_from_dict(t, len(names)) for t in d["trees"]],
        feature_names=names,
        importances=np.array(d["importances"], dtype=float),
        hyperparams=ForestParams(**d["hyperparams"]),
        scaler=None if d.get("scaler") is None else ScalerParams.from_dict(d["scaler"]),
        embedding_ref=d.get("embedding_ref"),
    )


def save_model(model, path) -> None:
    from .linear import LinearModel, linear_to_dict

    d = linear_to_dict(model) if isinstance(model, LinearModel) else model_to_dict(model)
    Path(path).write_text(json.dumps(d, separators=(",", ":")) + "\n", encoding="utf-8")


def load_model(path):
    from .linear import linear_from_dict

    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if d.get("format_version") != FORMAT_VERSION:
        raise UnsupportedFormat(f"unsupported model format_version {d.get('format_version')!r}")
    if d.get("kind") == "linear":
        return linear_from_dict(d)
    return model_from_dict(d)
