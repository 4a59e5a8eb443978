"""Synthetic data: text tables for the full pipeline, planted embeddings for
the strategy benchmark.

The text generator plants duplicate groups across tables: group members share
long pseudo-word ``name``/``city`` strings (perturbed by character swaps and
drops at a configurable rate) while every row gets its own independent random
10-character ``id``.  The ``id`` column therefore carries no identity signal
at all — exactly the kind of column attribute selection must reject — and the
correlated columns are long enough that an id shuffle barely moves the
hashing embedding.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tuplematch.errors import InvalidParams
from tuplematch.io import write_table_csv, write_truth_jsonl
from tuplematch.merging import EntityGroup, WorkingTable
from tuplematch.model import EntityRef

__all__ = ["GenResult", "generate_synthetic", "make_bench_tables"]

_SEED_GEN = 301
_SEED_BENCH = 302

_ID_ALPHABET = np.array(list("abcdefghijklmnopqrstuvwxyz0123456789"))
_WORD_ALPHABET = np.array(list("abcdefghijklmnopqrstuvwxyz"))

SCHEMA = ("id", "name", "city")


def _rand_word(rng: np.random.Generator, lo: int = 4, hi: int = 8) -> str:
    length = int(rng.integers(lo, hi + 1))
    return "".join(rng.choice(_WORD_ALPHABET, size=length))


def _phrase(rng: np.random.Generator, words_lo: int, words_hi: int) -> str:
    count = int(rng.integers(words_lo, words_hi + 1))
    return " ".join(_rand_word(rng) for _ in range(count))


def _rand_id(rng: np.random.Generator) -> str:
    return "".join(rng.choice(_ID_ALPHABET, size=10))


def _perturb(rng: np.random.Generator, text: str, rate: float) -> str:
    """Character noise: swap with the next char or drop, each at ``rate``."""
    if rate <= 0.0:
        return text
    chars = list(text)
    out: list[str] = []
    i = 0
    while i < len(chars):
        if rng.random() < rate:
            if rng.random() < 0.5 and i + 1 < len(chars):
                out.append(chars[i + 1])
                out.append(chars[i])
                i += 2
            else:
                i += 1  # drop
            continue
        out.append(chars[i])
        i += 1
    return "".join(out)


@dataclass
class GenResult:
    """Where the generated dataset landed, plus its shape."""

    table_paths: list[str]
    truth_path: str
    num_tables: int
    rows: int
    clusters: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def generate_synthetic(out_dir: str | Path, num_tables: int, rows: int,
                       clusters: int, noise: float = 0.05, seed: int = 0) -> GenResult:
    """Write ``num_tables`` CSVs of ``rows`` rows each plus a truth file.

    ``clusters`` duplicate groups are planted, each spanning 2..``num_tables``
    distinct tables (at most one member per table).  Rows not in any group are
    unique.  Row order within each table is shuffled so group members sit at
    uncorrelated positions.
    """
    if num_tables < 2:
        raise InvalidParams(f"need at least 2 tables, got {num_tables}")
    if rows < 1:
        raise InvalidParams(f"rows must be >= 1, got {rows}")
    if clusters < 0 or not (0.0 <= noise < 1.0):
        raise InvalidParams(f"bad clusters={clusters} or noise={noise}")

    rng = np.random.default_rng(np.random.SeedSequence([seed, _SEED_GEN]))
    # rows staged per table as (cluster_id or None, id, name, city)
    staged: list[list[tuple[int | None, str, str, str]]] = [[] for _ in range(num_tables)]

    for cluster_id in range(clusters):
        size = int(rng.integers(2, num_tables + 1))
        open_tables = [t for t in range(num_tables) if len(staged[t]) < rows]
        if len(open_tables) < size:
            raise InvalidParams(
                f"cannot place cluster {cluster_id}: {size} members, "
                f"{len(open_tables)} tables with space (rows={rows} per table)"
            )
        picked = rng.choice(np.array(open_tables), size=size, replace=False)
        name = _phrase(rng, 12, 16)
        city = _phrase(rng, 5, 8)
        for t in sorted(int(x) for x in picked):
            staged[t].append((
                cluster_id,
                _rand_id(rng),
                _perturb(rng, name, noise),
                _perturb(rng, city, noise),
            ))

    for t in range(num_tables):
        while len(staged[t]) < rows:
            staged[t].append((None, _rand_id(rng), _phrase(rng, 12, 16), _phrase(rng, 5, 8)))

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cluster_members: dict[int, list[EntityRef]] = {}
    table_paths = []
    for t in range(num_tables):
        order = rng.permutation(len(staged[t]))
        table_rows = []
        for new_row, old_pos in enumerate(order):
            cluster_id, row_id, name, city = staged[t][int(old_pos)]
            table_rows.append((row_id, name, city))
            if cluster_id is not None:
                cluster_members.setdefault(cluster_id, []).append(EntityRef(t, new_row))
        path = out_dir / f"table_{t:02d}.csv"
        write_table_csv(path, SCHEMA, table_rows)
        table_paths.append(str(path))

    truth_path = out_dir / "truth.jsonl"
    write_truth_jsonl(truth_path, cluster_members.values())
    return GenResult(table_paths, str(truth_path), num_tables, rows, clusters)


def _unit_rows(mat: np.ndarray) -> np.ndarray:
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def make_bench_tables(num_tables: int, rows: int, dim: int = 128,
                      cluster_fraction: float = 0.8, seed: int = 0,
                      ) -> tuple[list[WorkingTable], list[frozenset[EntityRef]]]:
    """Planted-embedding tables for strategy benchmarks (no text, no noise).

    A ``cluster_fraction`` share of each table's rows belongs to full-span
    clusters — one member in *every* table, as tightly jittered copies of a
    random unit prototype — and the rest are independent random unit vectors.
    Full-span clusters make merged tables shrink geometrically relative to
    concatenation, which is the regime the merge-strategy comparison is
    about.  Returns level-0 working tables plus the planted truth.
    """
    if num_tables < 2 or rows < 1:
        raise InvalidParams(f"bad bench shape: tables={num_tables}, rows={rows}")
    if not (0.0 <= cluster_fraction <= 1.0):
        raise InvalidParams(f"cluster_fraction must be in [0, 1], got {cluster_fraction}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, _SEED_BENCH]))
    n_clusters = int(round(cluster_fraction * rows))
    protos = _unit_rows(rng.standard_normal((n_clusters, dim))) if n_clusters else \
        np.zeros((0, dim))

    tables = []
    for s in range(num_tables):
        members = _unit_rows(protos + 0.02 * rng.standard_normal((n_clusters, dim))) \
            if n_clusters else np.zeros((0, dim))
        singles = _unit_rows(rng.standard_normal((rows - n_clusters, dim))) \
            if rows > n_clusters else np.zeros((0, dim))
        mat = np.ascontiguousarray(np.vstack([members, singles]))
        groups = [
            EntityGroup(members=(EntityRef(s, r),), centroid=mat[r], raw=mat[r])
            for r in range(rows)
        ]
        tables.append(WorkingTable(groups=groups, level=0))

    truth = [
        frozenset(EntityRef(s, c) for s in range(num_tables))
        for c in range(n_clusters)
    ]
    return tables, truth
