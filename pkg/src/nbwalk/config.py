"""Experiment configuration (schema ``nbwalk-config/1``) and seed splitting."""

from __future__ import annotations

import json
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = "nbwalk-config/1"


class ConfigError(ValueError):
    """Bad configuration; ``where`` is a field path or ``line N``."""

    def __init__(self, msg: str, where: str = ""):
        super().__init__(f"{where}: {msg}" if where else msg)
        self.where = where


@dataclass
class GraphSource:
    file: str | None = None
    generator: str | None = None
    params: dict = field(default_factory=dict)


@dataclass
class WalkSpec:
    kind: str = "nbrw"                # srw | nbrw | pbrw | knbrw
    k: int = 1
    mode: str = "edge"
    p: float | str | None = None


@dataclass
class Caps:
    states: int = 5_000_000
    trajectories: int = 2_000_000
    horizon: int = 10_000_000


@dataclass
class ExperimentConfig:
    graph: GraphSource = field(default_factory=GraphSource)
    walk: WalkSpec = field(default_factory=WalkSpec)
    suites: list[str] = field(default_factory=list)
    seed: int = 0
    caps: Caps = field(default_factory=Caps)
    output: str | None = None
    format: str = "json"
    schema: str = SCHEMA

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {"graph": GraphSource, "walk": WalkSpec, "caps": Caps}


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", where)
    known = {f for f in cls.__dataclass_fields__}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown field {key!r}", where)
    return cls(**data)


def parse_config(text: str, base_dir: str | Path = ".") -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, f"line {exc.lineno}") from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    schema = data.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ConfigError(f"unsupported schema {schema!r}, expected {SCHEMA!r}", "schema")
    kw = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kw[key] = _build(_SECTIONS[key], value, key)
        elif key in ExperimentConfig.__dataclass_fields__:
            kw[key] = value
        else:
            raise ConfigError(f"unknown field {key!r}", key)
    cfg = ExperimentConfig(**kw)
    validate(cfg, base_dir)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {path} not found")
    return parse_config(p.read_text(encoding="utf-8"), p.parent)


def validate(cfg: ExperimentConfig, base_dir: str | Path = ".") -> None:
    g = cfg.graph
    if (g.file is None) == (g.generator is None):
        raise ConfigError("give exactly one of file or generator", "graph")
    if g.file is not None and not (Path(base_dir) / g.file).exists():
        raise ConfigError(f"file {g.file} does not exist", "graph.file")
    if cfg.walk.kind not in ("srw", "nbrw", "pbrw", "knbrw"):
        raise ConfigError(f"unknown walk kind {cfg.walk.kind!r}", "walk.kind")
    if cfg.walk.mode not in ("edge", "vertex"):
        raise ConfigError("mode must be edge or vertex", "walk.mode")
    if not isinstance(cfg.walk.k, int) or cfg.walk.k < 1:
        raise ConfigError("k must be a positive integer", "walk.k")
    for name in ("states", "trajectories", "horizon"):
        v = getattr(cfg.caps, name)
        if not isinstance(v, int) or v <= 0:
            raise ConfigError("caps must be positive integers", f"caps.{name}")
    if not isinstance(cfg.seed, int) or cfg.seed < 0 or cfg.seed >= 1 << 64:
        raise ConfigError("seed must be a 64-bit unsigned integer", "seed")
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format must be json or csv", "format")


# ---------------------------------------------------------------- seeds


def seed_sequence(seed: int, subcommand: str) -> np.random.SeedSequence:
    """``SeedSequence([seed, crc32(subcommand)])``; replicas use ``.spawn(n)`` on it."""
    return np.random.SeedSequence([int(seed), zlib.crc32(subcommand.encode())])


def replica_rngs(seed: int, subcommand: str, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in seed_sequence(seed, subcommand).spawn(n)]
