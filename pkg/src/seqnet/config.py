"""Pipeline configuration: defaults, INI config files, and override precedence.

Effective values resolve as CLI flag > config file > built-in default. The
file format is flat key=value pairs under the sections below; any unknown
section or key is rejected by name.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields, replace
from typing import Optional

from .errors import ConfigError

WORKERS_ENV = "SEQNET_WORKERS"


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.replace(" ", "").split(",") if part)
    except ValueError as exc:
        raise ConfigError(f"bad seed list {text!r}") from exc


def _parse_optional_int(text: str) -> Optional[int]:
    return None if text.strip().lower() in ("", "none") else int(text)


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


@dataclass(frozen=True)
class PipelineConfig:
    # core defaults: 3-mers, 20 neighbors, 200-dimensional embeddings
    k: int = 3
    K: int = 20
    dim: int = 200
    method: str = "node2vec"
    seed: int = 0
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    workers: int = 1
    strict: bool = False
    timings: bool = False
    # random walks / skip-gram
    p: float = 1.0
    q: float = 1.0
    walks_per_node: int = 10
    walk_length: int = 80
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    # clustering
    k_clusters: int = 4
    eps: float = 0.5
    min_pts: int = 5
    batch_size: Optional[int] = None
    gamma: Optional[float] = None
    var_floor: float = 1e-6
    linkage: str = "ward"
    pca_dim: Optional[int] = None
    # classification protocol
    test_fraction: float = 0.3
    num_folds: int = 5


CONFIG_SCHEMA = {
    "pipeline": {
        "k": int,
        "K": int,
        "dim": int,
        "method": str,
        "seed": int,
        "seeds": _parse_seeds,
        "workers": int,
        "strict": _parse_bool,
        "timings": _parse_bool,
    },
    "walks": {
        "p": float,
        "q": float,
        "walks_per_node": int,
        "walk_length": int,
        "window": int,
        "negatives": int,
        "epochs": int,
        "learning_rate": float,
    },
    "cluster": {
        "k_clusters": int,
        "eps": float,
        "min_pts": int,
        "batch_size": _parse_optional_int,
        "gamma": _parse_optional_float,
        "var_floor": float,
        "linkage": str,
        "pca_dim": _parse_optional_int,
    },
    "classify": {
        "test_fraction": float,
        "num_folds": int,
    },
}


def load_config(path=None) -> PipelineConfig:
    """Read an INI config file; an empty or absent file gives pure defaults."""
    config = PipelineConfig(workers=_default_workers())
    if path is None:
        return config
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep case: k (mer size) and K (neighbors) differ
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config file {path}: {exc}") from exc
    updates = {}
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            raise ConfigError(f"unknown config section [{section}] in {path}")
        schema = CONFIG_SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in schema:
                raise ConfigError(f"unknown config key {key!r} in [{section}] of {path}")
            try:
                updates[key] = schema[key](raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"bad value for {key!r} in {path}: {raw!r}") from exc
    return replace(config, **updates)


def apply_overrides(config: PipelineConfig, overrides: dict) -> PipelineConfig:
    """Apply non-None override values (CLI flags) on top of a config."""
    known = {f.name for f in fields(PipelineConfig)}
    updates = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown config field {key!r}")
        updates[key] = value
    return replace(config, **updates)


def config_items(config: PipelineConfig) -> list[tuple[str, str]]:
    """Stable (key, rendered value) pairs for sidecar echoing.

    ``workers`` is omitted: it caps execution parallelism and can never
    change results, so artifacts stay byte-identical across worker counts.
    """
    items = []
    for f in sorted(fields(PipelineConfig), key=lambda f: f.name):
        if f.name == "workers":
            continue
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            rendered = ",".join(str(v) for v in value)
        else:
            rendered = str(value)
        items.append((f.name, rendered))
    return items
