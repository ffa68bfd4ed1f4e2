"""Flat key=value experiment configuration."""

from dataclasses import dataclass, fields

from .estimator import DCWR_FREQUENCIES, METHODS
from .variation import STANDARDIZERS

DATASETS = ("blobs", "idx")


class ConfigError(ValueError):
    """Raised for unreadable, unknown or invalid configuration values."""


@dataclass
class ExperimentConfig:
    """Everything a multi-seed experiment needs, one flat namespace.

    Matches the key=value config-file format one to one; see
    :func:`parse_config` for the file syntax.
    """

    dataset: str = "blobs"
    blobs_classes: int = 10
    blobs_dim: int = 20
    blobs_per_class: int = 1000
    blobs_spread: float = 2.75
    dataset_seed: int = 7
    idx_images: str = ""
    idx_labels: str = ""
    num_tasks: int = 5
    classes_per_task: int = 2
    batch_size: int = 10
    method: str = "PVBF"
    buffer_capacity: int = 50
    replay_size: int = -1  # -1 means "match batch_size"
    lr: float = 0.08
    alpha: float = 0.5
    beta: float = 2.0
    p: float = 0.9
    standardizer: str = "RR"
    dcwr_frequency: str = "per-batch"
    task_order: str = "ascending"
    hidden_sizes: tuple = (192, 256)
    activation: str = "tanh"
    seeds: tuple = (0, 1, 2)
    outdir: str = "runs/out"
    save_snapshots: bool = False

    def validate(self):
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if self.dataset == "idx" and not (self.idx_images and self.idx_labels):
            raise ConfigError("idx dataset requires idx_images and idx_labels paths")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {sorted(METHODS)}, got {self.method!r}")
        if self.standardizer not in STANDARDIZERS:
            raise ConfigError(f"standardizer must be one of {STANDARDIZERS}")
        if self.dcwr_frequency not in DCWR_FREQUENCIES:
            raise ConfigError(f"dcwr_frequency must be one of {DCWR_FREQUENCIES}")
        if not 0 < self.alpha <= self.beta:
            raise ConfigError("require 0 < alpha <= beta")
        if not 0 <= self.p <= 1:
            raise ConfigError("p must lie in [0, 1]")
        if self.buffer_capacity < 0:
            raise ConfigError("buffer_capacity must be >= 0")
        if self.lr < 0:
            raise ConfigError("lr must be >= 0")
        if self.num_tasks < 1 or self.classes_per_task < 1 or self.batch_size < 1:
            raise ConfigError("num_tasks, classes_per_task and batch_size must be positive")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.activation not in ("tanh", "relu"):
            raise ConfigError("activation must be tanh or relu")
        if self.task_order not in ("ascending", "shuffled"):
            raise ConfigError("task_order must be ascending or shuffled")
        return self

    def effective_replay_size(self):
        return self.batch_size if self.replay_size < 0 else self.replay_size

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def _parse_bool(text):
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_tuple(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part) for part in text.split(","))


_PARSERS = {
    "dataset": str,
    "blobs_classes": int,
    "blobs_dim": int,
    "blobs_per_class": int,
    "blobs_spread": float,
    "dataset_seed": int,
    "idx_images": str,
    "idx_labels": str,
    "num_tasks": int,
    "classes_per_task": int,
    "batch_size": int,
    "method": str,
    "buffer_capacity": int,
    "replay_size": int,
    "lr": float,
    "alpha": float,
    "beta": float,
    "p": float,
    "standardizer": str,
    "dcwr_frequency": str,
    "task_order": str,
    "hidden_sizes": _parse_int_tuple,
    "activation": str,
    "seeds": _parse_int_tuple,
    "outdir": str,
    "save_snapshots": _parse_bool,
}


def parse_value(key, text):
    """Convert one raw config value; unknown keys are rejected."""
    if key not in _PARSERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return _PARSERS[key](text.strip())
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


def parse_config(path):
    """Read a flat `key = value` file (# starts a comment) into a config."""
    overrides = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, text = (part.strip() for part in line.split("=", 1))
        if key in overrides:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        overrides[key] = parse_value(key, text)
    return ExperimentConfig(**overrides).validate()
