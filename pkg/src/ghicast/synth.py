"""Synthetic weather/GHI generator standing in for satellite-derived records.

Solar geometry is deterministic; clouds follow a seasonal AR(1) process that is
spatially smoothed so neighbouring sites share weather. Every other weather
field is derived from cloud cover, the clear-sky level and per-site noise.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from datetime import datetime

import numpy as np
import pandas as pd

from .dataset import BASE_COLUMNS, TIMESTAMP_FORMAT
from .errors import ConfigInvalid
from .features import SEASONS, season_codes
from .geo_graph import EARTH_RADIUS_KM, Location

KM_PER_DEG_LAT = EARTH_RADIUS_KM * np.pi / 180.0
CLOUD_AR = 0.95  # per 30-minute step
CLOUD_ATTENUATION = 0.75

# Typical spread of each forecastable field; forecast noise is a multiple of it.
FIELD_SCALE = {
    "dew_point": 5.0,
    "wind_speed": 2.0,
    "precipitable_water": 1.0,
    "wind_direction": 60.0,
    "relative_humidity": 15.0,
    "temperature": 5.0,
    "pressure": 5.0,
}


@dataclass(frozen=True)
class SynthConfig:
    rows: int = 12
    cols: int = 24
    origin_lat: float = 29.30
    origin_lon: float = -98.70
    spacing_km: float = 3.0
    start: str = "2017-01-01T00:00"
    end: str = "2018-01-01T00:00"
    step_minutes: int = 30
    cloud_volatility: dict = field(
        default_factory=lambda: {"winter": 0.18, "spring": 0.12, "summer": 0.08, "fall": 0.12}
    )
    forecast_noise_per_hour: float = 0.02
    horizons: tuple = (3, 6, 9)
    forecast_months: tuple = (8, 12)
    include_pressure: bool = True
    reference_lon: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigInvalid("grid needs at least one row and column")
        if not self.spacing_km > 0:
            raise ConfigInvalid("spacing_km must be > 0")
        if self.step_minutes not in (30, 60):
            raise ConfigInvalid("step_minutes must be 30 or 60 (records live on a 30-minute lattice)")
        if set(self.cloud_volatility) != set(SEASONS) or any(v < 0 for v in self.cloud_volatility.values()):
            raise ConfigInvalid(f"cloud_volatility needs non-negative values for {SEASONS}")
        if self.forecast_noise_per_hour < 0:
            raise ConfigInvalid("forecast_noise_per_hour must be >= 0")
        if self.start_dt >= self.end_dt:
            raise ConfigInvalid("start must precede end")
        if not all(h in (3, 6, 9, 12) for h in self.horizons):
            raise ConfigInvalid("horizons must be drawn from 3, 6, 9, 12")

    @property
    def start_dt(self):
        return datetime.strptime(self.start, TIMESTAMP_FORMAT)

    @property
    def end_dt(self):
        return datetime.strptime(self.end, TIMESTAMP_FORMAT)

    def to_dict(self):
        d = asdict(self)
        d["horizons"] = list(self.horizons)
        d["forecast_months"] = list(self.forecast_months)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("horizons", "forecast_months"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def grid_locations(cfg: SynthConfig) -> list:
    """Row-major grid starting at the south-west corner."""
    dlat = cfg.spacing_km / KM_PER_DEG_LAT
    dlon = cfg.spacing_km / (KM_PER_DEG_LAT * np.cos(np.radians(cfg.origin_lat)))
    return [
        Location(r * cfg.cols + c, cfg.origin_lat + r * dlat, cfg.origin_lon + c * dlon)
        for r in range(cfg.rows)
        for c in range(cfg.cols)
    ]


def declination(day_of_year):
    return -23.44 * np.cos(np.radians(360.0 / 365.0 * (np.asarray(day_of_year) + 10)))


def solar_zenith(lat, lon, t, reference_lon=None):
    """Solar zenith angle in degrees.

    ``t`` is the clock time on the reference meridian (defaults to ``lon``, i.e.
    local solar time). No equation-of-time correction is applied.
    """
    ts = pd.DatetimeIndex(np.atleast_1d(np.asarray(t, dtype="datetime64[ns]")))
    doy = ts.dayofyear.to_numpy()
    clock = ts.hour.to_numpy() + ts.minute.to_numpy() / 60.0
    ref = lon if reference_lon is None else reference_lon
    solar_time = clock + (np.asarray(lon) - ref) / 15.0
    hour_angle = np.radians(15.0 * (solar_time - 12.0))
    dec = np.radians(declination(doy))
    phi = np.radians(lat)
    cos_z = np.sin(phi) * np.sin(dec) + np.cos(phi) * np.cos(dec) * np.cos(hour_angle)
    sza = np.degrees(np.arccos(np.clip(cos_z, -1.0, 1.0)))
    sza = np.clip(sza, 0.0, 180.0)
    if np.ndim(lat) == 0 and np.ndim(lon) == 0 and np.ndim(t) == 0:
        return float(sza[0])
    return sza


def clear_sky_ghi(sza):
    """Haurwitz clear-sky GHI in W/m2; zero once the sun is at or below the horizon."""
    sza = np.asarray(sza, dtype=np.float64)
    cz = np.cos(np.radians(sza))
    safe = np.where(sza < 90.0, cz, 1.0)
    out = np.where(sza < 90.0, 1098.0 * safe * np.exp(-0.057 / safe), 0.0)
    return float(out) if out.ndim == 0 else out


def _smooth(field2d, rows, cols):
    """Mean over each site's 3x3 neighbourhood, rescaled to keep unit variance
    for independent inputs. ``field2d`` is ``(T, rows*cols)``."""
    grid = field2d.reshape(field2d.shape[0], rows, cols)
    total = np.zeros_like(grid)
    count = np.zeros((rows, cols))
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            r0, r1 = max(0, -dr), rows - max(0, dr)
            c0, c1 = max(0, -dc), cols - max(0, dc)
            total[:, r0:r1, c0:c1] += grid[:, r0 + dr:r1 + dr, c0 + dc:c1 + dc]
            count[r0:r1, c0:c1] += 1
    return (total / np.sqrt(count)).reshape(field2d.shape)


def _site_normals(cfg, n_sites, n_steps, k):
    """``(k, n_steps, n_sites)`` standard normals, one independent stream per site."""
    out = np.empty((k, n_steps, n_sites))
    for s in range(n_sites):
        out[:, :, s] = np.random.default_rng([cfg.seed, s, 0x5A17]).standard_normal((k, n_steps))
    return out


def cloud_field(cfg: SynthConfig, times: pd.DatetimeIndex, innovations) -> np.ndarray:
    """Cloud fraction in [0, 1], shape ``(len(times), n_sites)``."""
    n_steps, n_sites = innovations.shape
    phi = CLOUD_AR ** (cfg.step_minutes / 30.0)
    vol = np.array([cfg.cloud_volatility[s] for s in SEASONS])[season_codes(times)]
    vol = vol * np.sqrt((1 - phi**2) / (1 - CLOUD_AR**2))  # same stationary spread at any step
    smoothed = _smooth(innovations, cfg.rows, cfg.cols)
    z = np.zeros((n_steps, n_sites))
    prev = np.zeros(n_sites)
    for t in range(n_steps):
        prev = phi * prev + vol[t] * smoothed[t]
        z[t] = prev
    return np.clip(z, 0.0, 1.0)


def time_index(cfg: SynthConfig) -> pd.DatetimeIndex:
    return pd.date_range(cfg.start_dt, cfg.end_dt, freq=f"{cfg.step_minutes}min", inclusive="left")


def simulate_clouds(cfg: SynthConfig) -> np.ndarray:
    n_sites = cfg.rows * cfg.cols
    times = time_index(cfg)
    return cloud_field(cfg, times, _site_normals(cfg, n_sites, len(times), 8)[0])


def generate(cfg: SynthConfig = SynthConfig()):
    """Return ``(measurements, {horizon: forecasts})`` as record DataFrames.

    Rows are ordered by location id, then time. Forecast frames hold the
    measurement weather plus Gaussian noise of standard deviation
    ``forecast_noise_per_hour * horizon * field scale`` for timestamps in
    ``forecast_months``; they carry no GHI.
    """
    locs = grid_locations(cfg)
    n_sites = len(locs)
    times = time_index(cfg)
    n_steps = len(times)
    lat = np.array([loc.latitude for loc in locs])
    lon = np.array([loc.longitude for loc in locs])
    ref = float(np.mean(lon)) if cfg.reference_lon is None else cfg.reference_lon

    noise = _site_normals(cfg, n_sites, n_steps, 8)
    cloud = cloud_field(cfg, times, noise[0])

    doy = times.dayofyear.to_numpy()[:, None]
    hour = (times.hour.to_numpy() + times.minute.to_numpy() / 60.0)[:, None]
    sza = np.empty((n_steps, n_sites))
    for s in range(n_sites):
        sza[:, s] = solar_zenith(lat[s], lon[s], times.to_numpy(), reference_lon=ref)
    clear = clear_sky_ghi(sza)
    ghi = clear * (1.0 - CLOUD_ATTENUATION * cloud)
    sun = clear / 1000.0

    seasonal = -np.cos(2 * np.pi * (doy - 15) / 365.0)  # -1 mid-January, +1 mid-July
    diurnal = np.cos(2 * np.pi * (hour - 15.0) / 24.0)  # peaks mid-afternoon
    temperature = 20.0 + 9.0 * seasonal + 5.0 * diurnal - 3.0 * cloud + 2.0 * noise[1]
    rh = np.clip(60.0 + 30.0 * cloud - 12.0 * diurnal - 10.0 * sun + 10.0 * noise[2], 1.0, 100.0)
    dew_point = temperature - (100.0 - rh) / 5.0 + 0.5 * noise[3]
    pw = np.maximum(2.5 + 1.0 * seasonal + 1.5 * cloud + 0.6 * noise[4], 0.1)
    wind_speed = np.abs(3.0 + 2.0 * sun + 1.0 * noise[5])
    wind_direction = np.mod(160.0 + 40.0 * seasonal + 30.0 * noise[6] + 15.0 * cloud, 360.0)
    pressure = 1013.0 - 3.0 * seasonal - 4.0 * cloud + 2.5 * noise[7]

    fields = {
        "dew_point": dew_point,
        "solar_zenith_angle": sza,
        "wind_speed": wind_speed,
        "precipitable_water": pw,
        "wind_direction": wind_direction,
        "relative_humidity": rh,
        "temperature": temperature,
    }
    if cfg.include_pressure:
        fields["pressure"] = pressure

    def frame(arrays, tvals):
        # (T, S) arrays -> location-major rows
        df = pd.DataFrame(
            {
                "location_id": np.repeat(np.arange(n_sites, dtype=np.int64), len(tvals)),
                "timestamp": np.tile(tvals, n_sites),
            }
        )
        for name, a in arrays.items():
            df[name] = a.T.reshape(-1)
        return df

    measurements = frame({**fields, "ghi": ghi}, times.to_numpy())
    measurements = measurements[BASE_COLUMNS + (["pressure"] if cfg.include_pressure else []) + ["ghi"]]

    month_mask = np.isin(times.month.to_numpy(), list(cfg.forecast_months))
    forecasts = {}
    noisy = [k for k in fields if k in FIELD_SCALE]
    fc_noise = np.empty((len(noisy), n_steps, n_sites))
    for s in range(n_sites):
        fc_noise[:, :, s] = np.random.default_rng([cfg.seed, s, 0xF0CA]).standard_normal((len(noisy), n_steps))
    for h in cfg.horizons:
        sd = cfg.forecast_noise_per_hour * h
        fc = dict(fields)
        for j, name in enumerate(noisy):
            fc[name] = fields[name] + sd * FIELD_SCALE[name] * fc_noise[j]
        fc["relative_humidity"] = np.clip(fc["relative_humidity"], 0.0, 100.0)
        fc["wind_speed"] = np.abs(fc["wind_speed"])
        fc["wind_direction"] = np.mod(fc["wind_direction"], 360.0)
        df = frame({k: v[month_mask] for k, v in fc.items()}, times.to_numpy()[month_mask])
        df["issued_lead"] = np.int64(h)
        forecasts[h] = df
    return measurements, forecasts
