import numpy as np
import pandas as pd
import pytest

from ghicast.dataset import (
    AblationSpec,
    SplitSpec,
    ablate,
    correlation_table,
    horizon_align,
    ingest,
    irradiance_to_power,
    split,
    write_records,
)
from ghicast.errors import (
    EfficiencyAboveOne,
    EmptyFile,
    EmptySplit,
    MalformedHeader,
    NegativeInput,
    NoForecastData,
    ParameterOutOfRange,
    UnparseableRow,
)


def make_records(n_locs=3, start="2017-01-01", periods=48, freq="30min", seed=0):
    rng = np.random.default_rng(seed)
    ts = pd.date_range(start, periods=periods, freq=freq)
    df = pd.DataFrame({
        "location_id": np.repeat(np.arange(n_locs), len(ts)),
        "timestamp": np.tile(ts, n_locs),
    })
    n = len(df)
    df["dew_point"] = rng.uniform(-5, 20, n).round(3)
    df["solar_zenith_angle"] = rng.uniform(0, 150, n).round(3)
    df["wind_speed"] = rng.uniform(0, 10, n).round(3)
    df["precipitable_water"] = rng.uniform(0, 5, n).round(3)
    df["wind_direction"] = rng.uniform(0, 360, n).round(3)
    df["relative_humidity"] = rng.uniform(5, 100, n).round(3)
    df["temperature"] = rng.uniform(-5, 35, n).round(3)
    df["ghi"] = rng.uniform(0, 1000, n).round(3)
    return df


def year_records(n_locs=2):
    return make_records(n_locs, "2017-01-01", 365 * 24, "1h")


def test_ingest_roundtrip(tmp_path):
    df = make_records()
    write_records(df, tmp_path / "m.csv")
    res = ingest(tmp_path / "m.csv")
    assert res.n_dropped == 0 and res.drop_fraction == 0.0
    pd.testing.assert_frame_equal(res.records, df, check_dtype=False)


def test_ingest_drops_incomplete_rows(tmp_path):
    df = make_records(1, periods=100)
    write_records(df, tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    cells = lines[10].split(",")
    cells[2] = ""  # dew_point
    lines[10] = ",".join(cells)
    (tmp_path / "m.csv").write_text("\n".join(lines) + "\n")
    res = ingest(tmp_path / "m.csv")
    assert len(res.records) == 99 and res.n_dropped == 1


def write_with(tmp_path, row_edit):
    df = make_records(1, periods=5)
    row_edit(df)
    write_records(df, tmp_path / "m.csv")
    return tmp_path / "m.csv"


def test_ingest_bounds_violation_reports_line(tmp_path):
    def edit(df):
        df.loc[3, "relative_humidity"] = 150.0

    with pytest.raises(UnparseableRow) as exc:
        ingest(write_with(tmp_path, edit))
    assert exc.value.line == 5
    assert "line 5" in str(exc.value)


def test_ingest_garbage_and_lattice(tmp_path):
    path = tmp_path / "m.csv"
    write_records(make_records(1, periods=3), path)
    text = path.read_text().splitlines()
    bad = text[:]
    bad[2] = bad[2].replace(bad[2].split(",")[3], "abc", 1)
    path.write_text("\n".join(bad) + "\n")
    with pytest.raises(UnparseableRow):
        ingest(path)
    off = text[:]
    off[1] = off[1].replace("T00:00", "T00:10")
    path.write_text("\n".join(off) + "\n")
    with pytest.raises(UnparseableRow):
        ingest(path)


def test_ingest_header_and_empty(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("")
    with pytest.raises(EmptyFile):
        ingest(p)
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(MalformedHeader):
        ingest(p)


def forecasts_for(meas, horizon, frac=1.0):
    fc = meas.drop(columns=["ghi"]).copy()
    fc["issued_lead"] = horizon
    if frac < 1.0:
        fc = fc.iloc[: int(len(fc) * frac)]
    return fc


def test_horizon_align_full_and_half():
    meas = make_records()
    rows, excluded = horizon_align(meas, forecasts_for(meas, 3), 3)
    assert len(rows) == len(meas) and excluded == 0
    rows, excluded = horizon_align(meas, forecasts_for(meas, 3, 0.5), 3)
    assert len(rows) == len(meas) // 2 and excluded == len(meas) - len(meas) // 2


def test_horizon_align_uses_forecast_values():
    meas = make_records()
    fc = forecasts_for(meas, 6)
    fc["temperature"] = 99.0
    rows, _ = horizon_align(meas, fc, 6)
    assert (rows["temperature"] == 99.0).all()
    np.testing.assert_array_equal(rows["ghi"].to_numpy(), meas["ghi"].to_numpy())


def test_horizon_align_errors():
    meas = make_records()
    with pytest.raises(NoForecastData):
        horizon_align(meas, forecasts_for(meas, 3), 6)
    with pytest.raises(ParameterOutOfRange):
        horizon_align(meas, forecasts_for(meas, 3), 4)


def months(df):
    return set(pd.DatetimeIndex(df["timestamp"]).month)


def test_named_splits():
    df = year_records()
    tr, te = split(df, SplitSpec.named("summer"))
    assert months(tr) == {6, 7} and months(te) == {8}
    tr, te = split(df, SplitSpec.named("winter"))
    assert months(tr) == {10, 11} and months(te) == {12}
    tr, te = split(df, SplitSpec.named("global"))
    assert months(tr) == set(range(1, 12)) - {8} and months(te) == {8, 12}
    assert not set(map(tuple, tr[["location_id", "timestamp"]].values)) & set(
        map(tuple, te[["location_id", "timestamp"]].values)
    )


def test_split_errors():
    with pytest.raises(EmptySplit):
        split(make_records(), SplitSpec.named("summer"))
    with pytest.raises(ParameterOutOfRange):
        SplitSpec.custom([1, 2], [2])
    with pytest.raises(ParameterOutOfRange):
        SplitSpec.named("monsoon")


def test_ablations():
    df = make_records(n_locs=288, periods=4)
    pd.testing.assert_frame_equal(ablate(df, AblationSpec("random_rows", 0.0)), df)
    half = ablate(df, AblationSpec("random_rows", 0.5))
    assert abs(len(half) - len(df) / 2) < 0.05 * len(df)
    dropped = ablate(df, AblationSpec("drop_locations", 10))
    assert dropped["location_id"].nunique() == 278
    hourly = ablate(make_records(1, periods=48), AblationSpec("downsample", 1))
    assert len(hourly) == 24
    eight = ablate(make_records(1, periods=96), AblationSpec("downsample", 8))
    assert sorted(set(pd.DatetimeIndex(eight["timestamp"]).hour)) == [0, 8, 16]


def test_drop_season():
    df = year_records(1)
    out = ablate(df, AblationSpec("drop_season", "spring"))
    md = pd.DatetimeIndex(out["timestamp"])
    md = md.month * 100 + md.day
    assert not ((md >= 320) & (md < 621)).any()


def test_ablation_validation():
    with pytest.raises(ParameterOutOfRange):
        AblationSpec("random_rows", 1.0)
    with pytest.raises(ParameterOutOfRange):
        AblationSpec("drop_locations", -1)
    with pytest.raises(ParameterOutOfRange):
        AblationSpec("downsample", 0)
    with pytest.raises(ParameterOutOfRange):
        AblationSpec("nope", 1)


def test_irradiance_to_power():
    assert irradiance_to_power(0, 10, 0.2) == 0
    assert irradiance_to_power(1000, 1, 1) == 1000
    assert irradiance_to_power(850, 2.5, 0.18) == 850 * 2.5 * 0.18
    assert irradiance_to_power(850, 2.5, 0.18) == pytest.approx(382.5, abs=1e-12)
    with pytest.raises(NegativeInput):
        irradiance_to_power(-1, 1, 0.5)
    with pytest.raises(EfficiencyAboveOne):
        irradiance_to_power(1, 1, 1.5)


def test_correlation_table():
    df = make_records()
    df["temperature"] = df["ghi"]
    df["dew_point"] = -df["ghi"]
    df["wind_speed"] = 3.0
    t = correlation_table(df, features=["temperature", "dew_point", "wind_speed", "relative_humidity"])
    assert t["temperature"] == 1.0 and t["dew_point"] == -1.0
    assert t["wind_speed"] is None
    assert -1 <= t["relative_humidity"] <= 1
