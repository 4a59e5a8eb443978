"""Entity serialization and embedding.

An entity is flattened to one lowercase whitespace-normalized string built
from its *selected* attribute values (attribute names are omitted — the
columns already line up across tables, the values carry the signal).  The
string is embedded either by the local hashing kernel or by a remote HTTP
service; either way rows come back L2-normalized, with the all-zero row
mapped to the first basis vector so every embedding is unit length.

Attribute selection estimates how much identity signal each column carries:
shuffle one column among sampled rows, re-embed, and compare.  A column whose
shuffle barely moves the vectors (mean cosine similarity >= gamma) is noise
and is dropped.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import requests
from joblib import Parallel, delayed

from tuplematch._kernels import ngram_count_matrix
from tuplematch.config import EmbedderSpec, PipelineConfig
from tuplematch.errors import DimensionMismatch, InvalidParams, RemoteUnavailable
from tuplematch.model import Dataset, Entity, EntityRef

logger = logging.getLogger(__name__)

__all__ = [
    "serialize_entity",
    "serialize_values",
    "embed_batch",
    "register_embedder",
    "EmbeddingStore",
    "embed_dataset",
    "AttributeScore",
    "AttributeReport",
    "select_attributes",
]

# seed-derivation tags (keep distinct across the package)
_SEED_SAMPLE = 101
_SEED_SHUFFLE = 102

_HASH_CHUNK = 2048


def serialize_values(values: Sequence[str], schema: Sequence[str],
                     selected: Sequence[str]) -> str:
    """Flatten one row to a string: selected values in schema order, lowercased,
    whitespace collapsed to single spaces."""
    keep = set(selected)
    parts: list[str] = []
    for name, value in zip(schema, values):
        if name in keep:
            parts.extend(value.lower().split())
    return " ".join(parts)


def serialize_entity(entity: Entity, schema: Sequence[str], selected: Sequence[str]) -> str:
    return serialize_values(entity.values, schema, selected)


# -- embedder registry ------------------------------------------------------

def _embed_hashing(texts: list[str], spec: EmbedderSpec) -> np.ndarray:
    return ngram_count_matrix(texts, spec.dim, spec.ngram_lo, spec.ngram_hi)


def _embed_remote(texts: list[str], spec: EmbedderSpec) -> np.ndarray:
    rows: list[list[float]] = []
    for start in range(0, len(texts), spec.batch_size):
        batch = texts[start:start + spec.batch_size]
        try:
            resp = requests.post(spec.endpoint, json={"texts": batch}, timeout=spec.timeout)
        except requests.RequestException as exc:
            raise RemoteUnavailable(f"embedding endpoint {spec.endpoint}: {exc}") from exc
        if resp.status_code != 200:
            raise RemoteUnavailable(
                f"embedding endpoint {spec.endpoint} returned HTTP {resp.status_code}"
            )
        try:
            embeddings = resp.json()["embeddings"]
        except (ValueError, KeyError) as exc:
            raise RemoteUnavailable(
                f"embedding endpoint {spec.endpoint}: malformed response ({exc})"
            ) from exc
        if len(embeddings) != len(batch):
            raise RemoteUnavailable(
                f"embedding endpoint returned {len(embeddings)} rows for {len(batch)} texts"
            )
        rows.extend(embeddings)
    try:
        mat = np.asarray(rows, dtype=np.float64)
    except ValueError as exc:
        raise DimensionMismatch(f"remote embeddings are ragged: {exc}") from exc
    if mat.size == 0:
        mat = mat.reshape(0, spec.dim)
    if mat.ndim != 2 or mat.shape[1] != spec.dim:
        raise DimensionMismatch(
            f"remote embeddings have dim {mat.shape[1] if mat.ndim == 2 else '?'}, "
            f"expected {spec.dim}"
        )
    return mat


_EMBEDDERS: dict[str, Callable[[list[str], EmbedderSpec], np.ndarray]] = {
    "hashing": _embed_hashing,
    "remote": _embed_remote,
}


def register_embedder(kind: str, fn: Callable[[list[str], EmbedderSpec], np.ndarray]) -> None:
    """Register a custom embedder; ``fn(texts, spec)`` returns raw (n, dim) rows."""
    _EMBEDDERS[kind] = fn


def _normalize_rows(mat: np.ndarray) -> np.ndarray:
    """L2-normalize in place; all-zero rows become the first basis vector."""
    norms = np.linalg.norm(mat, axis=1)
    zero = norms == 0.0
    if zero.any():
        mat[zero] = 0.0
        mat[zero, 0] = 1.0
        norms[zero] = 1.0
    mat /= norms[:, None]
    return mat


def embed_batch(texts: Sequence[str], spec: EmbedderSpec, parallelism: int = 1) -> np.ndarray:
    """Embed ``texts`` to unit rows of shape ``(len(texts), spec.dim)``.

    The hashing path is chunked and, for ``parallelism > 1``, mapped over a
    thread pool; chunk results are concatenated in order, so the output does
    not depend on the degree of parallelism.
    """
    texts = list(texts)
    fn = _EMBEDDERS.get(spec.kind)
    if fn is None:
        raise InvalidParams(f"unknown embedder kind {spec.kind!r}")
    if not texts:
        return np.zeros((0, spec.dim), dtype=np.float64)

    if spec.kind == "hashing" and parallelism > 1 and len(texts) > _HASH_CHUNK:
        chunks = [texts[i:i + _HASH_CHUNK] for i in range(0, len(texts), _HASH_CHUNK)]
        parts = Parallel(n_jobs=parallelism, prefer="threads")(
            delayed(fn)(chunk, spec) for chunk in chunks
        )
        mat = np.vstack(parts)
    else:
        mat = fn(texts, spec)

    mat = np.ascontiguousarray(mat, dtype=np.float64)
    if mat.shape != (len(texts), spec.dim):
        raise DimensionMismatch(
            f"embedder {spec.kind!r} produced shape {mat.shape}, "
            f"expected {(len(texts), spec.dim)}"
        )
    return _normalize_rows(mat)


# -- dataset-level embedding ------------------------------------------------

@dataclass
class EmbeddingStore:
    """Per-table entity embedding matrices; row ``r`` of ``matrices[s]`` is
    the embedding of entity ``(s, r)``."""

    matrices: list[np.ndarray]

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[1] if self.matrices else 0

    def vector(self, ref: EntityRef) -> np.ndarray:
        return self.matrices[ref.source_id][ref.row_id]

    def gather(self, refs: Sequence[EntityRef]) -> np.ndarray:
        return np.stack([self.vector(ref) for ref in refs])


def embed_dataset(dataset: Dataset, selected: Sequence[str], spec: EmbedderSpec,
                  parallelism: int = 1) -> EmbeddingStore:
    """Serialize every row with the selected attributes and embed all tables."""
    if not selected:
        raise InvalidParams("selected attribute list is empty")
    texts: list[str] = []
    sizes: list[int] = []
    for table in dataset.tables:
        sizes.append(len(table))
        for ent in table:
            texts.append(serialize_values(ent.values, dataset.schema, selected))
    flat = embed_batch(texts, spec, parallelism)
    matrices = []
    offset = 0
    for size in sizes:
        matrices.append(flat[offset:offset + size])
        offset += size
    return EmbeddingStore(matrices)


# -- attribute selection ----------------------------------------------------

@dataclass(frozen=True)
class AttributeScore:
    """One attribute's shuffle test: high similarity means the column carries
    no identity signal."""

    name: str
    shuffle_similarity: float
    selected: bool


@dataclass
class AttributeReport:
    """Outcome of attribute selection over one dataset."""

    scores: list[AttributeScore]
    sampled_rows: int
    fallback_all: bool = False

    @property
    def selected(self) -> list[str]:
        return [s.name for s in self.scores if s.selected]

    def to_dict(self) -> dict:
        return {
            "sampled_rows": self.sampled_rows,
            "fallback_all": self.fallback_all,
            "attributes": [
                {"name": s.name, "shuffle_similarity": s.shuffle_similarity,
                 "selected": s.selected}
                for s in self.scores
            ],
        }


def select_attributes(dataset: Dataset, cfg: PipelineConfig) -> AttributeReport:
    """Score each attribute by shuffling its column among sampled rows.

    Draws ``ceil(r * N)`` rows from the pooled tables, embeds them with all
    attributes, then for each attribute permutes that column across the sample
    (seeded per attribute), re-embeds, and records the mean cosine similarity
    between original and shuffled rows.  Attributes with similarity below
    ``gamma`` are selected; if nothing clears the bar, all attributes are kept
    so the pipeline always has something to embed.
    """
    schema = dataset.schema
    pool: list[tuple[str, ...]] = [ent.values for table in dataset.tables for ent in table]
    total = len(pool)
    sample_size = min(total, max(1, math.ceil(cfg.r * total)))

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _SEED_SAMPLE]))
    chosen = np.sort(rng.choice(total, size=sample_size, replace=False))
    sample = [pool[i] for i in chosen]

    base_texts = [serialize_values(values, schema, schema) for values in sample]
    base = embed_batch(base_texts, cfg.embedder, cfg.parallelism)

    scores: list[AttributeScore] = []
    for j, name in enumerate(schema):
        attr_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _SEED_SHUFFLE, j]))
        perm = attr_rng.permutation(sample_size)
        shuffled_rows = []
        for i, values in enumerate(sample):
            row = list(values)
            row[j] = sample[perm[i]][j]
            shuffled_rows.append(row)
        shuf_texts = [serialize_values(row, schema, schema) for row in shuffled_rows]
        shuf = embed_batch(shuf_texts, cfg.embedder, cfg.parallelism)
        sim = float(np.mean(np.sum(base * shuf, axis=1)))
        scores.append(AttributeScore(name, sim, sim < cfg.gamma))
        logger.debug("attribute %r: shuffle similarity %.4f", name, sim)

    report = AttributeReport(scores, sample_size)
    if not report.selected:
        logger.warning("no attribute scored below gamma=%.3f; keeping all", cfg.gamma)
        report.scores = [AttributeScore(s.name, s.shuffle_similarity, True) for s in scores]
        report.fallback_all = True
    return report
