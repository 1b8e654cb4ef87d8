"""Run configuration: one JSON document, defaults filled in, unknown keys rejected."""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .dataset import AblationSpec, SplitSpec
from .embedding import TrainConfig, WalkConfig
from .errors import ConfigError, GhicastError
from .eval.experiments import MODEL_KINDS, ExperimentConfig
from .features import DEFAULT_WEATHER_FEATURES
from .forest import ForestParams
from .synth import SynthConfig

SEED_NAMES = ("synth", "walk", "train", "forest", "ablation", "subsample")

DEFAULTS = {
    "paths": {
        "out": "out",
        "locations": None,
        "measurements": None,
        "forecasts": None,
        "graph": None,
        "embedding": None,
        "model_dir": None,
        "reports": None,
    },
    "synth": {k: v for k, v in SynthConfig().to_dict().items() if k != "seed"},
    "graph": {"kernel_sigma": "median", "prune_frac": 0.0},
    "embedding": {
        "walk": {"p": 1.0, "q": 1.0, "walk_length": 80, "walks_per_node": 10, "weighted": True},
        "train": {"dims": 32, "window": 10, "negatives": 5, "epochs": 5, "lr_initial": 0.025, "lr_final": 0.0001},
    },
    "model": {
        "kind": "forest",
        "forest": {"n_trees": 100, "mtry": None, "min_leaf": 5, "max_depth": None, "bootstrap": True},
        "ridge_lambda": 1.0,
    },
    "experiment": {
        "splits": ["summer", "winter", "global"],
        "horizons": [3],
        "ablations": [],
        "weather_features": list(DEFAULT_WEATHER_FEATURES),
        "train_subsample": None,
    },
    "seeds": {name: 0 for name in SEED_NAMES},
    "threads": 1,
}

# keys whose values are free-form mappings rather than nested config sections
_OPAQUE = {("synth", "cloud_volatility")}


def _merge(base, override, path=()):
    out = copy.deepcopy(base)
    for key, value in override.items():
        here = path + (key,)
        if key not in base:
            raise ConfigError(f"unknown config key {'.'.join(here)}")
        if isinstance(base[key], dict) and here not in _OPAQUE:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {'.'.join(here)} must be an object")
            out[key] = _merge(base[key], value, here)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve(config=None, overrides=None) -> dict:
    """Defaults < config document < flag overrides."""
    resolved = _merge(DEFAULTS, config or {})
    if overrides:
        resolved = _merge(resolved, overrides)
    validate(resolved)
    return resolved


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def dumps(cfg: dict) -> str:
    return json.dumps(cfg, indent=2, sort_keys=True)


def validate(cfg: dict) -> None:
    try:
        synth_config(cfg)
        walk_config(cfg)
        train_config(cfg)
        experiment_config(cfg)
        splits(cfg)
        ablations(cfg)
    except GhicastError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    if cfg["model"]["kind"] not in MODEL_KINDS:
        raise ConfigError(f"model.kind must be one of {MODEL_KINDS}")
    if not 0.0 <= cfg["graph"]["prune_frac"] < 1.0:
        raise ConfigError("graph.prune_frac must lie in [0, 1)")
    sigma = cfg["graph"]["kernel_sigma"]
    if sigma != "median" and not (isinstance(sigma, (int, float)) and sigma > 0):
        raise ConfigError('graph.kernel_sigma must be "median" or a positive number')
    if not isinstance(cfg["threads"], int) or cfg["threads"] < 1:
        raise ConfigError("threads must be a positive integer")


def synth_config(cfg) -> SynthConfig:
    return SynthConfig.from_dict({**cfg["synth"], "seed": cfg["seeds"]["synth"]})


def walk_config(cfg) -> WalkConfig:
    return WalkConfig(**cfg["embedding"]["walk"], seed=cfg["seeds"]["walk"])


def train_config(cfg) -> TrainConfig:
    return TrainConfig(**cfg["embedding"]["train"], seed=cfg["seeds"]["train"])


def experiment_config(cfg) -> ExperimentConfig:
    exp = cfg["experiment"]
    return ExperimentConfig(
        forest=ForestParams(**cfg["model"]["forest"], seed=cfg["seeds"]["forest"]),
        ridge_lambda=float(cfg["model"]["ridge_lambda"]),
        weather_features=tuple(exp["weather_features"]),
        train_subsample=exp["train_subsample"],
        subsample_seed=cfg["seeds"]["subsample"],
        threads=cfg["threads"],
    )


def splits(cfg) -> list:
    out = []
    for s in cfg["experiment"]["splits"]:
        if isinstance(s, dict):
            out.append(SplitSpec.custom(s["train_months"], s["test_months"]))
        else:
            out.append(SplitSpec.named(s))
    return out


def ablations(cfg) -> list:
    out = []
    for a in cfg["experiment"]["ablations"]:
        extra = set(a) - {"kind", "parameter"}
        if extra:
            raise ConfigError(f"unknown ablation keys {sorted(extra)}")
        out.append(AblationSpec(a["kind"], a["parameter"], seed=cfg["seeds"]["ablation"]))
    return out
