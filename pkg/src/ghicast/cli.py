"""Command-line entry point: ``ghicast <subcommand> [--config PATH] [flags]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import config as config_mod
from .dataset import ingest, split as split_records, write_records
from .embedding import embed_graph, read_embedding, write_embedding
from .errors import ConfigError, GhicastError, MissingArtifact
from .eval.experiments import (
    _safe_r2,
    _subsample,
    ablation_sweep,
    fit_model,
    format_importance_table,
    horizon_sweep,
    importance_report,
    model_predict,
    test_rows_for,
)
from .eval.metrics import mae, rmse
from .eval.reports import EvalReport, dumps_report, report_filename, write_reports_csv
from .features import assemble
from .forest import load_model, save_model
from .forest.linear import LinearModel
from .geo_graph import build_graph, read_graph, read_locations, write_graph, write_locations
from .synth import generate, grid_locations

log = logging.getLogger("ghicast")

SUBCOMMANDS = ("synth", "graph", "embed", "train", "eval", "ablate", "sweep", "importance")

EXIT_CODES = """exit codes:
  0  success
  1  other ghicast error
  2  configuration error (bad/unknown keys, bad values)
  3  missing artifact (run the prerequisite subcommand first)
  4  data error (malformed/unparseable input files, empty splits)
  5  graph error (duplicate coordinates, disconnected after pruning)
  6  embedding error
  7  model error (schema mismatch, unsupported model format)
  8  metric error
 70  unexpected internal error

errors are printed to stderr as one line: error code=<name> message=<text>"""


# ---------------------------------------------------------------- paths


def _out(cfg) -> Path:
    return Path(cfg["paths"]["out"])


def _path(cfg, key, default_name) -> Path:
    value = cfg["paths"][key]
    return Path(value) if value else _out(cfg) / default_name


def _forecast_path(cfg, horizon) -> Path:
    fc = cfg["paths"]["forecasts"]
    if fc:
        if str(horizon) not in fc:
            raise MissingArtifact(f"no forecast file configured for horizon {horizon}")
        return Path(fc[str(horizon)])
    return _out(cfg) / f"forecast_h{horizon}.csv"


def _model_path(cfg, split_name) -> Path:
    base = Path(cfg["paths"]["model_dir"]) if cfg["paths"]["model_dir"] else _out(cfg)
    return base / f"model_{split_name}.json"


def _reports_dir(cfg) -> Path:
    return Path(cfg["paths"]["reports"]) if cfg["paths"]["reports"] else _out(cfg) / "reports"


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise MissingArtifact(f"{path} not found; run `ghicast {hint}` first")
    return path


# ---------------------------------------------------------------- loaders


def _load_measurements(cfg):
    res = ingest(_require(_path(cfg, "measurements", "measurements.csv"), "synth"))
    log.info("measurements: %d rows, dropped %d (%.4f%%)", len(res.records), res.n_dropped, 100 * res.drop_fraction)
    return res.records


def _load_forecasts(cfg, horizons):
    out = {}
    for h in horizons:
        res = ingest(_require(_forecast_path(cfg, h), "synth"))
        out[h] = res.records
    return out


def _load_embedding(cfg):
    return read_embedding(_require(_path(cfg, "embedding", "embedding.csv"), "embed"))


def _write_reports(cfg, reports, csv_name="reports.csv"):
    rdir = _reports_dir(cfg)
    rdir.mkdir(parents=True, exist_ok=True)
    for r in reports:
        # runtimes go to the log only so reruns produce identical files
        log.info("%s runtime %.2fs", r.label, r.runtime)
        r.runtime = 0.0
        (rdir / report_filename(r)).write_text(dumps_report(r), encoding="utf-8")
    write_reports_csv(reports, _out(cfg) / csv_name)
    for r in reports:
        print(f"{r.model},{r.label},{r.ablation or ''},r2={r.r2:.4f},mae={r.mae:.3f},rmse={r.rmse:.3f}")


# ---------------------------------------------------------------- subcommands


def cmd_synth(cfg):
    scfg = config_mod.synth_config(cfg)
    out = _out(cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_locations(grid_locations(scfg), _path(cfg, "locations", "locations.csv"))
    measurements, forecasts = generate(scfg)
    write_records(measurements, _path(cfg, "measurements", "measurements.csv"))
    for h, df in forecasts.items():
        write_records(df, _forecast_path(cfg, h))
    print(f"wrote {len(measurements)} measurement rows and {len(forecasts)} forecast files to {out}")


def cmd_graph(cfg):
    locs = read_locations(_require(_path(cfg, "locations", "locations.csv"), "synth"))
    g = build_graph(locs, cfg["graph"]["kernel_sigma"], cfg["graph"]["prune_frac"])
    path = _path(cfg, "graph", "graph.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_graph(g, path)
    print(f"graph: {g.n} nodes, {g.n_edges} edges, sigma={g.sigma:.4f} km -> {path}")


def cmd_embed(cfg):
    g = read_graph(_require(_path(cfg, "graph", "graph.csv"), "graph"))
    emb = embed_graph(g, config_mod.walk_config(cfg), config_mod.train_config(cfg), threads=cfg["threads"])
    path = _path(cfg, "embedding", "embedding.csv")
    write_embedding(emb, path)
    print(f"embedding: {emb.n} x {emb.dims}, sha256={emb.checksum()} -> {path}")


def cmd_train(cfg):
    measurements = _load_measurements(cfg)
    emb = _load_embedding(cfg)
    ecfg = config_mod.experiment_config(cfg)
    kind = cfg["model"]["kind"]
    for spec in config_mod.splits(cfg):
        train, _ = split_records(measurements, spec)
        train = _subsample(train, ecfg.train_subsample, ecfg.subsample_seed)
        X, y, scaler = assemble(emb, train, "fit", ecfg.weather_features)
        model = fit_model(kind, X, y, ecfg)
        model.scaler = scaler
        model.embedding_ref = emb.checksum()
        path = _model_path(cfg, spec.name)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_model(model, path)
        print(f"model[{spec.name}]: {kind} on {len(train)} rows -> {path}")


def _model_kind(model) -> str:
    if isinstance(model, LinearModel):
        return "ridge" if model.ridge_lambda > 0 else "linear"
    return "forest"


def cmd_eval(cfg):
    measurements = _load_measurements(cfg)
    horizons = cfg["experiment"]["horizons"]
    forecasts = _load_forecasts(cfg, horizons)
    emb = _load_embedding(cfg)
    ecfg = config_mod.experiment_config(cfg)
    reports = []
    for spec in config_mod.splits(cfg):
        model = load_model(_require(_model_path(cfg, spec.name), "train"))
        if model.embedding_ref and model.embedding_ref != emb.checksum():
            raise MissingArtifact(f"model for {spec.name} was trained on a different embedding; rerun train")
        n_train = len(split_records(measurements, spec)[0])
        if ecfg.train_subsample is not None:
            n_train = min(n_train, ecfg.train_subsample)
        for h in horizons:
            rows, n_excluded = test_rows_for(measurements, forecasts, spec, h)
            X, y, _ = assemble(emb, rows, model.scaler, ecfg.weather_features)
            pred = model_predict(model, X)
            reports.append(
                EvalReport(
                    model=_model_kind(model),
                    split=spec.name,
                    horizon=h,
                    r2=_safe_r2(y, pred),
                    mae=mae(y, pred),
                    rmse=rmse(y, pred),
                    n_train=n_train,
                    n_test=len(rows),
                    n_excluded=n_excluded,
                    n_test_locations=int(rows["location_id"].nunique()),
                )
            )
    _write_reports(cfg, reports)


def cmd_ablate(cfg):
    measurements = _load_measurements(cfg)
    horizon = cfg["experiment"]["horizons"][0]
    forecasts = _load_forecasts(cfg, [horizon])
    emb = _load_embedding(cfg)
    specs = config_mod.ablations(cfg)
    if not specs:
        raise ConfigError("experiment.ablations is empty")
    reports = []
    for spec in config_mod.splits(cfg):
        reports += ablation_sweep(measurements, forecasts, spec, horizon, specs, cfg["model"]["kind"],
                                  config_mod.experiment_config(cfg), emb)
    _write_reports(cfg, reports, "ablation_reports.csv")


def cmd_sweep(cfg):
    measurements = _load_measurements(cfg)
    horizons = cfg["experiment"]["horizons"]
    forecasts = _load_forecasts(cfg, horizons)
    emb = _load_embedding(cfg)
    reports, means = horizon_sweep(measurements, forecasts, config_mod.splits(cfg), horizons,
                                   cfg["model"]["kind"], config_mod.experiment_config(cfg), emb)
    _write_reports(cfg, reports + means, "sweep_reports.csv")


def cmd_importance(cfg, model_path=None):
    if model_path is None:
        model_path = _model_path(cfg, config_mod.splits(cfg)[0].name)
    model = load_model(_require(Path(model_path), "train"))
    if isinstance(model, LinearModel):
        raise ConfigError("importance needs a forest model")
    ranked = importance_report(model)
    print(format_importance_table(ranked))
    out = _out(cfg)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "importance.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "feature", "importance"])
        for i, (name, value) in enumerate(ranked, start=1):
            writer.writerow([i, name, repr(value)])


COMMANDS = {
    "synth": cmd_synth,
    "graph": cmd_graph,
    "embed": cmd_embed,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------- entry


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ghicast",
        description="GHI forecasting from spatial graph embeddings, temporal embeddings and weather features.",
        epilog=EXIT_CODES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"ghicast {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (paths.out)")
    common.add_argument("--threads", type=int, metavar="N", help="worker threads")
    common.add_argument("--seed", type=int, metavar="K", help="set every named seed to K")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")
    helps = {
        "synth": "generate synthetic locations, measurements and forecast files",
        "graph": "build the weighted spatial graph from locations",
        "embed": "learn node embeddings from the graph",
        "train": "fit one model per configured split",
        "eval": "score trained models on horizon-aligned test rows",
        "ablate": "run the configured missing-data ablations",
        "sweep": "fit and score every (split, horizon) pair",
        "importance": "print the feature-importance ranking of a forest model",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name], epilog=EXIT_CODES,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        if name == "importance":
            p.add_argument("model", nargs="?", help="model file (defaults to the first split's model)")
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.out:
        out["paths"] = {"out": args.out}
    if args.threads is not None:
        out["threads"] = args.threads
    if args.seed is not None:
        out["seeds"] = {name: args.seed for name in config_mod.SEED_NAMES}
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        document = config_mod.load_config(args.config) if args.config else {}
        cfg = config_mod.resolve(document, _overrides(args))
        print(config_mod.dumps(cfg))
        if args.command == "importance":
            cmd_importance(cfg, args.model)
        else:
            COMMANDS[args.command](cfg)
    except GhicastError as exc:
        msg = " ".join(str(exc).split())
        print(f"error code={exc.code} message={json.dumps(msg)}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        msg = " ".join(f"{type(exc).__name__}: {exc}".split())
        print(f"error code=internal message={json.dumps(msg)}", file=sys.stderr)
        return 70
    return 0


if __name__ == "__main__":
    sys.exit(main())
