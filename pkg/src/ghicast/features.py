"""Temporal embeddings, one-hot encoding, min-max scaling and feature assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

import numpy as np
import pandas as pd

from .errors import InvalidTimestamp, MissingEmbedding, SchemaMismatch, UnknownLocation

SEASONS = ("winter", "spring", "summer", "fall")
# (month, day) on which each non-winter season starts; winter wraps the year end
_SPRING, _SUMMER, _FALL, _WINTER = (3, 20), (6, 21), (9, 22), (12, 21)

DEFAULT_WEATHER_FEATURES = (
    "dew_point",
    "solar_zenith_angle",
    "wind_speed",
    "precipitable_water",
    "wind_direction",
    "relative_humidity",
    "temperature",
)
HOUR_COLUMNS = tuple(f"hour_{h}" for h in range(24))
SEASON_COLUMNS = tuple(f"season_{s}" for s in SEASONS)


@dataclass(frozen=True)
class TemporalEmbedding:
    hour: int
    season: str

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise InvalidTimestamp(f"hour {self.hour} out of range")
        if self.season not in SEASONS:
            raise InvalidTimestamp(f"unknown season {self.season!r}")


def season_of(month: int, day: int) -> str:
    md = (month, day)
    if _SPRING <= md < _SUMMER:
        return "spring"
    if _SUMMER <= md < _FALL:
        return "summer"
    if _FALL <= md < _WINTER:
        return "fall"
    return "winter"


def temporal_embed(timestamp) -> TemporalEmbedding:
    """Hour of the local clock reading and the astronomical season of its date."""
    if isinstance(timestamp, str):
        try:
            timestamp = datetime.fromisoformat(timestamp)
        except ValueError as exc:
            raise InvalidTimestamp(str(exc)) from exc
    if not isinstance(timestamp, datetime) or pd.isna(timestamp):
        raise InvalidTimestamp(f"not a timestamp: {timestamp!r}")
    return TemporalEmbedding(timestamp.hour, season_of(timestamp.month, timestamp.day))


def season_codes(timestamps) -> np.ndarray:
    """Vectorised season index (position in ``SEASONS``) for a datetime series."""
    ts = pd.DatetimeIndex(timestamps)
    md = ts.month.to_numpy() * 100 + ts.day.to_numpy()
    codes = np.zeros(len(ts), dtype=np.int64)
    codes[(md >= 320) & (md < 621)] = 1
    codes[(md >= 621) & (md < 922)] = 2
    codes[(md >= 922) & (md < 1221)] = 3
    return codes


def one_hot(t: TemporalEmbedding) -> np.ndarray:
    out = np.zeros(28)
    out[t.hour] = 1.0
    out[24 + SEASONS.index(t.season)] = 1.0
    return out


def one_hot_block(timestamps) -> np.ndarray:
    ts = pd.DatetimeIndex(timestamps)
    out = np.zeros((len(ts), 28))
    rows = np.arange(len(ts))
    out[rows, ts.hour.to_numpy()] = 1.0
    out[rows, 24 + season_codes(ts)] = 1.0
    return out


@dataclass
class FeatureMatrix:
    values: np.ndarray
    columns: list
    location_id: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    timestamp: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype="datetime64[ns]"))

    @property
    def rows(self):
        return self.values.shape[0]


@dataclass
class ScalerParams:
    columns: list
    min: np.ndarray
    max: np.ndarray
    fitted_on: int

    def to_dict(self):
        return {
            "columns": list(self.columns),
            "min": [float(x) for x in self.min],
            "max": [float(x) for x in self.max],
            "fitted_on": int(self.fitted_on),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(list(d["columns"]), np.array(d["min"], dtype=float), np.array(d["max"], dtype=float), int(d["fitted_on"]))


def scaler_fit(train: FeatureMatrix) -> ScalerParams:
    if train.rows < 1:
        raise SchemaMismatch("cannot fit a scaler on zero rows")
    return ScalerParams(list(train.columns), train.values.min(axis=0), train.values.max(axis=0), train.rows)


def scaler_apply(params: ScalerParams, m: FeatureMatrix) -> FeatureMatrix:
    """Map each column to ``(x - min) / (max - min)``; constant columns map to 0.

    Values outside the fitted range are left unclipped.
    """
    if list(m.columns) != list(params.columns):
        raise SchemaMismatch("column layout differs from the fitted scaler")
    span = params.max - params.min
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (m.values - params.min) / safe, 0.0)
    return FeatureMatrix(scaled, list(m.columns), m.location_id, m.timestamp)


def feature_columns(dims: int, weather=DEFAULT_WEATHER_FEATURES) -> list:
    return [f"e{k}" for k in range(dims)] + list(weather) + list(HOUR_COLUMNS) + list(SEASON_COLUMNS)


def assemble(embedding, records: pd.DataFrame, scaler="fit", weather=DEFAULT_WEATHER_FEATURES):
    """Build the model input for ``records``.

    Each row is ``[spatial vector of its location, weather values, hour and
    season one-hot]``. ``scaler`` is ``"fit"`` (fit on these rows), ``None``
    (leave unscaled) or fitted ``ScalerParams``. Returns ``(matrix, target,
    scaler_params)``; the target is ``None`` if records carry no ``ghi``.
    """
    matrix = getattr(embedding, "matrix", embedding)
    if matrix is None:
        raise MissingEmbedding("no embedding supplied")
    matrix = np.asarray(matrix, dtype=np.float64)
    columns = feature_columns(matrix.shape[1], weather)
    loc = records["location_id"].to_numpy(dtype=np.int64) if len(records) else np.zeros(0, dtype=np.int64)
    if len(loc) and (loc.min() < 0 or loc.max() >= matrix.shape[0]):
        bad = loc[(loc < 0) | (loc >= matrix.shape[0])][0]
        raise UnknownLocation(f"location {bad} has no embedding row")
    ts = records["timestamp"].to_numpy() if len(records) else np.zeros(0, dtype="datetime64[ns]")
    missing = [c for c in weather if c not in records.columns]
    if missing:
        raise SchemaMismatch(f"records lack weather columns {missing}")
    values = np.hstack(
        [
            matrix[loc],
            records[list(weather)].to_numpy(dtype=np.float64).reshape(len(records), len(weather)),
            one_hot_block(ts),
        ]
    )
    fm = FeatureMatrix(values, columns, loc, ts)
    target = records["ghi"].to_numpy(dtype=np.float64) if "ghi" in records.columns else None
    params = None
    if isinstance(scaler, ScalerParams):
        params = scaler
    elif scaler == "fit" and fm.rows:
        params = scaler_fit(fm)
    if params is not None:
        fm = scaler_apply(params, fm)
    return fm, target, params
