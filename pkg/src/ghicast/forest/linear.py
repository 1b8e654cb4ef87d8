"""Ordinary least squares and ridge baselines with an unpenalised intercept."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaMismatch, SingularSystem
from ..features import FeatureMatrix, ScalerParams


@dataclass
class LinearModel:
    coefficients: np.ndarray
    intercept: float
    ridge_lambda: float = 0.0
    feature_names: list = field(default_factory=list)
    scaler: ScalerParams | None = None
    embedding_ref: str | None = None


def fit_linear(X, y, ridge_lambda=0.0, feature_names=None) -> LinearModel:
    """Solve the centred normal equations ``(Xc'Xc + lam I) b = Xc'yc``."""
    if isinstance(X, FeatureMatrix):
        feature_names = list(X.columns)
        X = X.values
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be >= 0")
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    gram = Xc.T @ Xc
    if ridge_lambda == 0 and np.linalg.matrix_rank(gram) < X.shape[1]:
        raise SingularSystem("X is rank deficient; use ridge_lambda > 0")
    gram[np.diag_indices_from(gram)] += ridge_lambda
    try:
        beta = np.linalg.solve(gram, Xc.T @ (y - y_mean))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    names = list(feature_names) if feature_names is not None else [f"x{k}" for k in range(X.shape[1])]
    return LinearModel(beta, float(y_mean - x_mean @ beta), float(ridge_lambda), names)


def predict_linear(model: LinearModel, X) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        if model.feature_names and list(X.columns) != list(model.feature_names):
            raise SchemaMismatch("feature columns differ from the model's feature_names")
        X = X.values
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != len(model.coefficients):
        raise SchemaMismatch(f"expected {len(model.coefficients)} columns, got {X.shape[1]}")
    return X @ model.coefficients + model.intercept


def linear_to_dict(model: LinearModel) -> dict:
    from .ensemble import FORMAT_VERSION

    return {
        "format_version": FORMAT_VERSION,
        "kind": "linear",
        "ridge_lambda": model.ridge_lambda,
        "feature_names": list(model.feature_names),
        "scaler": None if model.scaler is None else model.scaler.to_dict(),
        "embedding_ref": model.embedding_ref,
        "coefficients": [float(c) for c in model.coefficients],
        "intercept": model.intercept,
    }


def linear_from_dict(d: dict) -> LinearModel:
    return LinearModel(
        np.array(d["coefficients"], dtype=float),
        float(d["intercept"]),
        float(d["ridge_lambda"]),
        list(d["feature_names"]),
        None if d.get("scaler") is None else ScalerParams.from_dict(d["scaler"]),
        d.get("embedding_ref"),
    )
