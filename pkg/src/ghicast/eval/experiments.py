"""Seasonal hold-out experiments, horizon sweeps, ablation sweeps and importance ranking."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from ..dataset import AblationSpec, SplitSpec, ablate, horizon_align, split
from ..errors import ConfigError, ConstantTruth, UnfittedModel
from ..features import DEFAULT_WEATHER_FEATURES, assemble
from ..forest import ForestParams, fit_forest, fit_linear, predict, predict_linear
from ..forest.linear import LinearModel
from .metrics import mae, r2, rmse
from .reports import EvalReport

log = logging.getLogger(__name__)

MODEL_KINDS = ("forest", "linear", "ridge")


@dataclass(frozen=True)
class ExperimentConfig:
    forest: ForestParams = ForestParams()
    ridge_lambda: float = 1.0
    weather_features: tuple = DEFAULT_WEATHER_FEATURES
    # cap on training rows, drawn before any ablation; None keeps all rows
    train_subsample: int | None = None
    subsample_seed: int = 0
    threads: int = 1


@dataclass
class ExperimentResult:
    report: EvalReport
    model: object
    y_true: np.ndarray = field(repr=False)
    y_pred: np.ndarray = field(repr=False)
    test_rows: pd.DataFrame = field(repr=False)


def _subsample(train: pd.DataFrame, cap, seed) -> pd.DataFrame:
    if cap is None or len(train) <= cap:
        return train
    rng = np.random.default_rng([seed, 0x5B5])
    keep = np.sort(rng.choice(len(train), size=cap, replace=False))
    return train.iloc[keep].reset_index(drop=True)


def _safe_r2(y, p):
    try:
        return r2(y, p)
    except ConstantTruth:
        return math.nan


def fit_model(kind, X, y, cfg: ExperimentConfig):
    if kind == "forest":
        return fit_forest(X, y, cfg.forest, threads=cfg.threads)
    if kind == "linear":
        return fit_linear(X, y, 0.0)
    if kind == "ridge":
        return fit_linear(X, y, cfg.ridge_lambda)
    raise ConfigError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def model_predict(model, X):
    if isinstance(model, LinearModel):
        return predict_linear(model, X)
    return predict(model, X)


def test_rows_for(measurements, forecasts, spec: SplitSpec, horizon):
    """Horizon-aligned test rows for the split's test months.

    With ``forecasts=None`` the measured weather is used as the feature source.
    """
    _, test_targets = split(measurements, spec)
    if forecasts is None:
        return test_targets, 0
    fc = forecasts[horizon] if isinstance(forecasts, dict) else forecasts
    return horizon_align(test_targets, fc, horizon)


def run_experiment(
    measurements: pd.DataFrame,
    forecasts,
    spec: SplitSpec,
    horizon: int,
    model_kind: str,
    cfg: ExperimentConfig,
    embedding,
    ablation: AblationSpec | None = None,
    test=None,
) -> ExperimentResult:
    """Train on the split's training months and score on its test months.

    ``forecasts`` maps horizon to forecast records (or is a single frame);
    ``test`` may carry precomputed ``(rows, n_excluded)`` to skip re-alignment.
    """
    t0 = time.perf_counter()
    train, _ = split(measurements, spec)
    train = _subsample(train, cfg.train_subsample, cfg.subsample_seed)
    if ablation is not None:
        train = ablate(train, ablation)
    test_rows, n_excluded = test if test is not None else test_rows_for(measurements, forecasts, spec, horizon)

    X_train, y_train, scaler = assemble(embedding, train, "fit", cfg.weather_features)
    X_test, y_test, _ = assemble(embedding, test_rows, scaler, cfg.weather_features)
    model = fit_model(model_kind, X_train, y_train, cfg)
    model.scaler = scaler
    y_pred = model_predict(model, X_test)

    report = EvalReport(
        model=model_kind,
        split=spec.name,
        horizon=horizon,
        r2=_safe_r2(y_test, y_pred),
        mae=mae(y_test, y_pred),
        rmse=rmse(y_test, y_pred),
        n_train=len(train),
        n_test=len(test_rows),
        ablation=None if ablation is None else ablation.label,
        runtime=time.perf_counter() - t0,
        r2_train_mean=_safe_r2(y_test, np.full(len(y_test), y_train.mean())),
        n_excluded=n_excluded,
        n_test_locations=int(test_rows["location_id"].nunique()),
    )
    log.info("%s %s h=%s r2=%.4f mae=%.2f rmse=%.2f", model_kind, spec.name, horizon, report.r2, report.mae, report.rmse)
    return ExperimentResult(report, model, y_test, y_pred, test_rows)


def mean_report(reports, model_kind, split_name) -> EvalReport:
    rows = [r for r in reports if r.split == split_name and r.model == model_kind and r.horizon is not None]
    return EvalReport(
        model=model_kind,
        split=split_name,
        horizon=None,
        r2=float(np.mean([r.r2 for r in rows])),
        mae=float(np.mean([r.mae for r in rows])),
        rmse=float(np.mean([r.rmse for r in rows])),
        n_train=int(round(np.mean([r.n_train for r in rows]))),
        n_test=int(round(np.mean([r.n_test for r in rows]))),
        runtime=float(np.sum([r.runtime for r in rows])),
    )


def horizon_sweep(measurements, forecasts, splits, horizons=(3, 6, 9), model_kind="forest",
                  cfg=ExperimentConfig(), embedding=None):
    """One report per (split, horizon) followed by one mean row per split."""
    reports = []
    for spec in splits:
        for h in horizons:
            reports.append(run_experiment(measurements, forecasts, spec, h, model_kind, cfg, embedding).report)
    means = [mean_report(reports, model_kind, spec.name) for spec in splits]
    return reports, means


def ablation_sweep(measurements, forecasts, spec: SplitSpec, horizon, ablations, model_kind="forest",
                   cfg=ExperimentConfig(), embedding=None):
    """Baseline report first, then one report per ablation with deltas to the baseline.

    The test rows are aligned once and shared, so every run scores the same test set.
    """
    test = test_rows_for(measurements, forecasts, spec, horizon)
    base = run_experiment(measurements, forecasts, spec, horizon, model_kind, cfg, embedding, test=test).report
    out = [base]
    for ab in ablations:
        rep = run_experiment(measurements, forecasts, spec, horizon, model_kind, cfg, embedding, ablation=ab, test=test).report
        out.append(replace(rep, delta_r2=rep.r2 - base.r2, delta_mae=rep.mae - base.mae, delta_rmse=rep.rmse - base.rmse))
    return out


def importance_report(model, top=None):
    """Features sorted by importance (descending), ties broken by name."""
    imp = getattr(model, "importances", None)
    if imp is None or not getattr(model, "trees", None):
        raise UnfittedModel("importance needs a fitted forest")
    ranked = sorted(zip(model.feature_names, (float(x) for x in imp)), key=lambda kv: (-kv[1], kv[0]))
    return ranked if top is None else ranked[:top]


def format_importance_table(ranked, top=15) -> str:
    lines = [f"{'rank':>4}  {'feature':<24}{'importance':>12}"]
    for i, (name, value) in enumerate(ranked[:top], start=1):
        lines.append(f"{i:>4}  {name:<24}{value:>12.6f}")
    return "\n".join(lines)
