"""Evaluation report records and their JSON / CSV serialisations."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

CSV_COLUMNS = ["model", "split", "horizon", "r2", "mae", "rmse", "n_train", "n_test", "ablation"]


@dataclass
class EvalReport:
    model: str
    split: str
    horizon: int | None  # None marks a per-split mean row
    r2: float
    mae: float
    rmse: float
    n_train: int
    n_test: int
    ablation: str | None = None
    runtime: float = 0.0
    r2_train_mean: float | None = None
    n_excluded: int = 0
    n_test_locations: int = 0
    delta_r2: float | None = None
    delta_mae: float | None = None
    delta_rmse: float | None = None

    def __post_init__(self):
        if not (self.rmse >= self.mae - 1e-9 * max(1.0, abs(self.mae)) and self.mae >= 0):
            raise ValueError(f"report violates rmse >= mae >= 0: mae={self.mae}, rmse={self.rmse}")
        if self.r2 is not None and not math.isnan(self.r2) and self.r2 > 1.0 + 1e-12:
            raise ValueError(f"r2 {self.r2} > 1")

    @property
    def label(self) -> str:
        return f"{self.split},{'mean' if self.horizon is None else self.horizon}"

    def to_dict(self) -> dict:
        return {k: _clean(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d) -> "EvalReport":
        names = {f.name for f in fields(cls)}
        kw = {k: v for k, v in d.items() if k in names}
        if kw.get("r2") is None:
            kw["r2"] = math.nan
        return cls(**kw)


def _clean(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def dumps_report(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def write_report_json(report: EvalReport, path) -> None:
    Path(path).write_text(dumps_report(report), encoding="utf-8")


def read_report_json(path) -> EvalReport:
    return EvalReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def write_reports_csv(reports, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            horizon = "mean" if r.horizon is None else r.horizon
            writer.writerow(
                [r.model, r.split, horizon, _fmt(r.r2), _fmt(r.mae), _fmt(r.rmse), r.n_train, r.n_test, r.ablation or ""]
            )


def report_filename(report: EvalReport) -> str:
    horizon = "mean" if report.horizon is None else f"h{report.horizon}"
    ablation = "" if not report.ablation else "_" + report.ablation.replace("=", "-")
    return f"report_{report.model}_{report.split}_{horizon}{ablation}.json"
