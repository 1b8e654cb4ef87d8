"""Weather/GHI record ingestion, horizon alignment, temporal splits and ablations.

Records are held as a pandas DataFrame with one row per (location, timestamp).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    EfficiencyAboveOne,
    EmptyFile,
    EmptySplit,
    MalformedHeader,
    NegativeInput,
    NoForecastData,
    ParameterOutOfRange,
    UnparseableRow,
)
from .features import DEFAULT_WEATHER_FEATURES, SEASONS, season_codes

log = logging.getLogger(__name__)

BASE_COLUMNS = ["location_id", "timestamp", *DEFAULT_WEATHER_FEATURES]
WEATHER_COLUMNS = [*DEFAULT_WEATHER_FEATURES, "pressure"]
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M"
LATTICE_MINUTES = 30
HORIZONS = (3, 6, 9, 12)

_BOUNDS = {
    "solar_zenith_angle": (0.0, 180.0),
    "relative_humidity": (0.0, 100.0),
    "ghi": (0.0, np.inf),
    "wind_speed": (0.0, np.inf),
    "wind_direction": (0.0, 360.0),
}


def allowed_headers():
    out = []
    for pressure in (False, True):
        cols = BASE_COLUMNS + (["pressure"] if pressure else [])
        out.append(cols + ["ghi"])
        out.append(cols + ["ghi", "issued_lead"])
        out.append(cols + ["issued_lead"])
    return out


@dataclass
class IngestResult:
    records: pd.DataFrame
    n_rows: int
    n_dropped: int

    @property
    def drop_fraction(self) -> float:
        return self.n_dropped / self.n_rows if self.n_rows else 0.0


def _parse_column(raw: pd.Series, name: str, integer=False) -> pd.Series:
    """Parse strings; empty cells become NaN, anything else unparseable raises."""
    empty = raw.str.strip() == ""
    parsed = pd.to_numeric(raw.where(~empty), errors="coerce")
    bad = parsed.isna() & ~empty
    if bad.any():
        i = int(np.flatnonzero(bad.to_numpy())[0])
        raise UnparseableRow(f"column {name}: cannot parse {raw.iloc[i]!r}", line=i + 2)
    if integer:
        frac = parsed.notna() & (parsed != np.floor(parsed))
        if frac.any():
            i = int(np.flatnonzero(frac.to_numpy())[0])
            raise UnparseableRow(f"column {name}: {raw.iloc[i]!r} is not an integer", line=i + 2)
    return parsed


def ingest(path) -> IngestResult:
    """Parse a weather CSV, dropping rows with any missing value.

    Measurement files carry ``ghi``; forecast files carry ``issued_lead`` and may
    omit ``ghi``. Bound violations raise ``UnparseableRow`` with the file line.
    """
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        raise EmptyFile(f"{path}: empty or missing file")
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False)
    header = [c.strip() for c in raw.columns]
    if header not in allowed_headers():
        raise MalformedHeader(f"{path}: unexpected header {','.join(header)}")
    raw.columns = header
    n_rows = len(raw)
    if n_rows == 0:
        raise EmptyFile(f"{path}: header only, no rows")

    df = pd.DataFrame(index=raw.index)
    df["location_id"] = _parse_column(raw["location_id"], "location_id", integer=True)
    ts_empty = raw["timestamp"].str.strip() == ""
    ts = pd.to_datetime(raw["timestamp"].where(~ts_empty), format=TIMESTAMP_FORMAT, errors="coerce")
    bad = ts.isna() & ~ts_empty
    if bad.any():
        i = int(np.flatnonzero(bad.to_numpy())[0])
        raise UnparseableRow(f"bad timestamp {raw['timestamp'].iloc[i]!r}", line=i + 2)
    off_lattice = ts.notna() & ((ts.dt.minute % LATTICE_MINUTES) != 0)
    if off_lattice.any():
        i = int(np.flatnonzero(off_lattice.to_numpy())[0])
        raise UnparseableRow(f"timestamp {raw['timestamp'].iloc[i]} is off the 30-minute lattice", line=i + 2)
    df["timestamp"] = ts
    for col in header[2:]:
        df[col] = _parse_column(raw[col], col, integer=(col == "issued_lead"))
        if col in _BOUNDS:
            lo, hi = _BOUNDS[col]
            out = df[col].notna() & ((df[col] < lo) | (df[col] > hi))
            if out.any():
                i = int(np.flatnonzero(out.to_numpy())[0])
                raise UnparseableRow(f"{col}={raw[col].iloc[i]} outside [{lo}, {hi}]", line=i + 2)
    complete = df.notna().all(axis=1)
    records = df[complete].reset_index(drop=True)
    records["location_id"] = records["location_id"].astype(np.int64)
    if "issued_lead" in records.columns:
        records["issued_lead"] = records["issued_lead"].astype(np.int64)
    n_dropped = int(n_rows - complete.sum())
    if n_dropped:
        log.info("%s: dropped %d of %d rows with missing values", path, n_dropped, n_rows)
    return IngestResult(records, n_rows, n_dropped)


def canonical_columns(df: pd.DataFrame) -> list:
    for cols in sorted(allowed_headers(), key=len, reverse=True):
        if all(c in df.columns for c in cols):
            return cols
    raise MalformedHeader(f"records do not match any schema: {list(df.columns)}")


def write_records(df: pd.DataFrame, path) -> None:
    """Write records in canonical form: schema column order, shortest float repr."""
    cols = canonical_columns(df)
    out = df[cols].copy()
    out["timestamp"] = pd.DatetimeIndex(out["timestamp"]).strftime(TIMESTAMP_FORMAT)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out.to_csv(fh, index=False, lineterminator="\n")


def horizon_align(measurements: pd.DataFrame, forecasts: pd.DataFrame, horizon: int):
    """Pair each target GHI at time t with the forecast issued ``horizon`` hours
    earlier for valid time t at the same location.

    Returns ``(rows, n_excluded)``: rows carry forecast weather features plus the
    measured ``ghi``; targets without a matching forecast are counted as excluded.
    """
    if horizon not in HORIZONS:
        raise ParameterOutOfRange(f"horizon {horizon} not in {HORIZONS}")
    if "issued_lead" not in forecasts.columns:
        raise NoForecastData("forecast records lack issued_lead")
    fc = forecasts[forecasts["issued_lead"] == horizon]
    if fc.empty:
        raise NoForecastData(f"no forecasts with lead {horizon} h")
    feature_cols = [c for c in WEATHER_COLUMNS if c in fc.columns]
    keys = ["location_id", "timestamp"]
    targets = measurements[keys + ["ghi"]]
    rows = targets.merge(fc[keys + feature_cols], on=keys, how="inner", validate="one_to_one")
    rows["issued_lead"] = np.int64(horizon)
    rows = rows[keys + feature_cols + ["ghi", "issued_lead"]]
    return rows, int(len(targets) - len(rows))


@dataclass(frozen=True)
class SplitSpec:
    name: str
    train_months: tuple
    test_months: tuple

    def __post_init__(self):
        if set(self.train_months) & set(self.test_months):
            raise ParameterOutOfRange(f"split {self.name}: train and test months overlap")
        if self.name not in ("winter", "summer", "global", "custom"):
            raise ParameterOutOfRange(f"unknown split name {self.name!r}")

    @classmethod
    def named(cls, name: str) -> "SplitSpec":
        if name == "winter":
            return cls("winter", (10, 11), (12,))
        if name == "summer":
            return cls("summer", (6, 7), (8,))
        if name == "global":
            return cls("global", tuple(m for m in range(1, 12) if m != 8), (8, 12))
        raise ParameterOutOfRange(f"no predefined split {name!r}")

    @classmethod
    def custom(cls, train_months, test_months) -> "SplitSpec":
        return cls("custom", tuple(train_months), tuple(test_months))


def split(records: pd.DataFrame, spec: SplitSpec):
    """Partition records by calendar month into ``(train, test)``."""
    month = pd.DatetimeIndex(records["timestamp"]).month.to_numpy()
    present = set(np.unique(month).tolist())
    absent = [m for m in (*spec.train_months, *spec.test_months) if m not in present]
    if absent:
        raise EmptySplit(f"split {spec.name}: months {absent} absent from data")
    train = records[np.isin(month, spec.train_months)].reset_index(drop=True)
    test = records[np.isin(month, spec.test_months)].reset_index(drop=True)
    return train, test


def months_of(records: pd.DataFrame, months) -> pd.DataFrame:
    month = pd.DatetimeIndex(records["timestamp"]).month.to_numpy()
    return records[np.isin(month, list(months))].reset_index(drop=True)


ABLATION_KINDS = ("random_rows", "drop_locations", "drop_season", "downsample")


@dataclass(frozen=True)
class AblationSpec:
    kind: str
    parameter: object
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ABLATION_KINDS:
            raise ParameterOutOfRange(f"unknown ablation kind {self.kind!r}")
        p = self.parameter
        if self.kind == "random_rows" and not (isinstance(p, (int, float)) and 0.0 <= p < 1.0):
            raise ParameterOutOfRange(f"random_rows fraction {p!r} not in [0, 1)")
        if self.kind == "drop_locations" and not (isinstance(p, int) and p >= 0):
            raise ParameterOutOfRange(f"drop_locations count {p!r} must be a non-negative int")
        if self.kind == "drop_season" and p not in SEASONS:
            raise ParameterOutOfRange(f"unknown season {p!r}")
        if self.kind == "downsample" and not (isinstance(p, int) and 1 <= p <= 24):
            raise ParameterOutOfRange(f"downsample resolution {p!r} must be 1..24 hours")

    @property
    def label(self) -> str:
        return f"{self.kind}={self.parameter}"

    def to_dict(self):
        return {"kind": self.kind, "parameter": self.parameter, "seed": self.seed}


def ablate(train: pd.DataFrame, spec: AblationSpec) -> pd.DataFrame:
    """Remove training rows according to ``spec``; never applied to test data."""
    rng = np.random.default_rng([spec.seed, 0xAB1A7E])
    if spec.kind == "random_rows":
        keep = rng.random(len(train)) >= spec.parameter
    elif spec.kind == "drop_locations":
        ids = np.unique(train["location_id"].to_numpy())
        if spec.parameter >= len(ids):
            raise ParameterOutOfRange(f"cannot drop {spec.parameter} of {len(ids)} locations")
        dropped = rng.choice(ids, size=spec.parameter, replace=False)
        keep = ~np.isin(train["location_id"].to_numpy(), dropped)
    elif spec.kind == "drop_season":
        keep = season_codes(train["timestamp"]) != SEASONS.index(spec.parameter)
    else:
        ts = pd.DatetimeIndex(train["timestamp"])
        keep = (ts.minute.to_numpy() == 0) & (ts.hour.to_numpy() % spec.parameter == 0)
    return train[keep].reset_index(drop=True)


def irradiance_to_power(ghi, area, efficiency):
    """Electrical power in watts from irradiance (W/m2), panel area (m2) and efficiency."""
    if np.any(np.asarray(ghi) < 0) or np.any(np.asarray(area) < 0) or np.any(np.asarray(efficiency) < 0):
        raise NegativeInput("irradiance, area and efficiency must be >= 0")
    if np.any(np.asarray(efficiency) > 1):
        raise EfficiencyAboveOne("efficiency must be <= 1")
    return ghi * area * efficiency


def correlation_table(records: pd.DataFrame, features=WEATHER_COLUMNS, target="ghi") -> dict:
    """Pearson r of each feature with the target, rounded to 3 decimals.

    Constant features (or a constant target) yield ``None``.
    """
    if len(records) < 2:
        raise ParameterOutOfRange("need at least two records")
    y = records[target].to_numpy(dtype=float)
    out = {}
    for name in features:
        if name not in records.columns:
            continue
        x = records[name].to_numpy(dtype=float)
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            out[name] = None
            continue
        out[name] = round(float(np.corrcoef(x, y)[0, 1]), 3)
    return out
