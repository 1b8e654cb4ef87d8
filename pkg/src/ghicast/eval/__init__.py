from .experiments import (
    ExperimentConfig,
    ablation_sweep,
    format_importance_table,
    horizon_sweep,
    importance_report,
    run_experiment,
)
from .metrics import mae, r2, rmse
from .reports import EvalReport, read_report_json, write_report_json, write_reports_csv

__all__ = [
    "EvalReport",
    "ExperimentConfig",
    "ablation_sweep",
    "format_importance_table",
    "horizon_sweep",
    "importance_report",
    "mae",
    "r2",
    "read_report_json",
    "rmse",
    "run_experiment",
    "write_report_json",
    "write_reports_csv",
]
