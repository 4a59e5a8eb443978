"""Run configuration: dataclasses, TOML files, environment and CLI overrides.

Precedence, lowest to highest: built-in defaults < config file < environment
variables (``TUPLEMATCH_*``) < command-line flags.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from tuplematch.errors import InvalidParams

__all__ = ["EmbedderSpec", "IndexParams", "PipelineConfig", "load_config", "apply_env_overrides"]

ENV_PREFIX = "TUPLEMATCH_"


@dataclass
class EmbedderSpec:
    """How entity strings become vectors.

    ``kind`` is ``"hashing"`` (deterministic char n-gram feature hashing,
    offline) or ``"remote"`` (HTTP service; see :mod:`tuplematch.embedding`).
    """

    kind: str = "hashing"
    dim: int = 256
    ngram_lo: int = 2
    ngram_hi: int = 3
    endpoint: str | None = None
    batch_size: int = 64
    timeout: float = 10.0

    def validate(self) -> None:
        if self.kind not in ("hashing", "remote"):
            raise InvalidParams(f"embedder.kind must be 'hashing' or 'remote', got {self.kind!r}")
        if self.dim < 8:
            raise InvalidParams(f"embedder.dim must be >= 8, got {self.dim}")
        if not (1 <= self.ngram_lo <= self.ngram_hi):
            raise InvalidParams(
                f"need 1 <= ngram_lo <= ngram_hi, got ({self.ngram_lo}, {self.ngram_hi})"
            )
        if self.kind == "remote" and not self.endpoint:
            raise InvalidParams("embedder.kind='remote' requires embedder.endpoint")
        if self.batch_size < 1:
            raise InvalidParams(f"embedder.batch_size must be >= 1, got {self.batch_size}")
        if self.timeout <= 0:
            raise InvalidParams(f"embedder.timeout must be > 0, got {self.timeout}")


@dataclass
class IndexParams:
    """Nearest-neighbour index knobs.

    ``backend="exact"`` always brute-forces; ``backend="graph"`` uses the
    navigable-small-world graph index, except for sets of at most
    ``exact_cutover`` vectors where brute force is both faster and exact.
    ``ef_search=None`` means ``max(64, 4*k)`` at query time.
    """

    backend: str = "graph"
    graph_degree: int = 16
    ef_construction: int = 200
    ef_search: int | None = None
    exact_cutover: int = 1024

    def validate(self) -> None:
        if self.backend not in ("exact", "graph"):
            raise InvalidParams(f"index.backend must be 'exact' or 'graph', got {self.backend!r}")
        if self.graph_degree < 2:
            raise InvalidParams(f"index.graph_degree must be >= 2, got {self.graph_degree}")
        if self.ef_construction < 1:
            raise InvalidParams(f"index.ef_construction must be >= 1, got {self.ef_construction}")
        if self.ef_search is not None and self.ef_search < 1:
            raise InvalidParams(f"index.ef_search must be >= 1, got {self.ef_search}")
        if self.exact_cutover < 0:
            raise InvalidParams(f"index.exact_cutover must be >= 0, got {self.exact_cutover}")

    def effective_ef(self, k: int) -> int:
        ef = self.ef_search if self.ef_search is not None else max(64, 4 * k)
        return max(ef, k)


@dataclass
class PipelineConfig:
    """Everything a matching run depends on, in one place.

    Parameters
    ----------
    k : mutual top-k depth for the candidate join.
    m : cosine-distance ceiling for a matched pair (boundary inclusive).
    epsilon : Euclidean neighbourhood radius for density pruning.
    min_pts : neighbourhood size (self included) that makes a member core.
    gamma : attribute-selection threshold; attributes whose shuffled-column
        similarity stays at or above ``gamma`` carry no identity signal and
        are dropped.
    r : fraction of rows sampled for attribute selection.
    seed : master seed; every random choice derives from it.
    parallelism : worker threads for the embarrassingly parallel stages.
    """

    k: int = 1
    m: float = 0.35
    epsilon: float = 1.0
    min_pts: int = 2
    gamma: float = 0.9
    r: float = 0.2
    seed: int = 0
    parallelism: int = 1
    embedder: EmbedderSpec = field(default_factory=EmbedderSpec)
    index: IndexParams = field(default_factory=IndexParams)

    def validate(self) -> None:
        if self.k < 1:
            raise InvalidParams(f"k must be >= 1, got {self.k}")
        if not (0.0 <= self.m <= 2.0):
            raise InvalidParams(f"m must be in [0, 2], got {self.m}")
        if self.epsilon <= 0:
            raise InvalidParams(f"epsilon must be > 0, got {self.epsilon}")
        if self.min_pts < 1:
            raise InvalidParams(f"min_pts must be >= 1, got {self.min_pts}")
        if not (0.0 < self.gamma < 1.0):
            raise InvalidParams(f"gamma must be in (0, 1), got {self.gamma}")
        if not (0.0 < self.r <= 1.0):
            raise InvalidParams(f"r must be in (0, 1], got {self.r}")
        if self.parallelism < 1:
            raise InvalidParams(f"parallelism must be >= 1, got {self.parallelism}")
        self.embedder.validate()
        self.index.validate()

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _build(cls, data: dict[str, Any], where: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise InvalidParams(f"unknown {where} keys: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: dict[str, Any]) -> PipelineConfig:
    """Build a validated :class:`PipelineConfig` from nested plain dicts."""
    data = dict(data)
    emb = _build(EmbedderSpec, data.pop("embedder", {}), "embedder")
    idx = _build(IndexParams, data.pop("index", {}), "index")
    cfg = _build(PipelineConfig, {**data, "embedder": emb, "index": idx}, "pipeline")
    cfg.validate()
    return cfg


def load_config(path: str | Path | None) -> tuple[PipelineConfig, dict[str, Any]]:
    """Load a TOML config file.

    Returns ``(config, io_section)`` where ``io_section`` is the raw
    ``[io]`` table (file paths are not part of :class:`PipelineConfig`).
    A ``None`` path yields pure defaults.
    """
    if path is None:
        return config_from_dict({}), {}
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    io_section = raw.pop("io", {})
    pipeline = raw.pop("pipeline", {})
    for section in ("embedder", "index"):
        if section in raw:
            pipeline[section] = raw.pop(section)
    raw.pop("bench", None)  # bench settings live in the same file but are read elsewhere
    if raw:
        raise InvalidParams(f"unknown config sections: {sorted(raw)}")
    return config_from_dict(pipeline), io_section


_ENV_FIELDS: dict[str, tuple[str, type]] = {
    "K": ("k", int),
    "M": ("m", float),
    "EPSILON": ("epsilon", float),
    "MIN_PTS": ("min_pts", int),
    "GAMMA": ("gamma", float),
    "R": ("r", float),
    "SEED": ("seed", int),
    "PARALLELISM": ("parallelism", int),
}


def apply_env_overrides(cfg: PipelineConfig, env: dict[str, str] | None = None) -> PipelineConfig:
    """Overlay ``TUPLEMATCH_*`` environment variables onto ``cfg`` (in place)."""
    env = os.environ if env is None else env
    for suffix, (attr, cast) in _ENV_FIELDS.items():
        raw = env.get(ENV_PREFIX + suffix)
        if raw is not None:
            try:
                setattr(cfg, attr, cast(raw))
            except ValueError as exc:
                raise InvalidParams(f"bad {ENV_PREFIX}{suffix}={raw!r}: {exc}") from exc
    embedder_kind = env.get(ENV_PREFIX + "EMBEDDER")
    if embedder_kind:
        cfg.embedder.kind = embedder_kind
    cfg.validate()
    return cfg
