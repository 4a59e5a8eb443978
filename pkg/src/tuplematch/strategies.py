"""Merge-strategy comparison: pairwise vs chain vs hierarchical.

Three ways to cover ``S`` tables with pairwise joins:

* ``pairwise`` — every table against every other, ``C(S, 2)`` jobs over
  original-size tables; work grows quadratically in ``S``.
* ``chain`` — fold tables left to right into one growing accumulator,
  ``S - 1`` jobs whose left side keeps growing.
* ``hierarchical`` — the seeded random pairing tree used by the pipeline,
  ``ceil(log2 S)`` levels of independent jobs over tables that stay small
  when duplicates collapse.

Each run reports wall time, the modeled ``distance_evals`` charge (see
:class:`tuplematch.index.SearchCounter`) and the matched tuples, so the
growth factors of the three strategies can be compared empirically.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import statistics
import time
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from tuplematch.config import IndexParams, PipelineConfig, config_from_dict
from tuplematch.errors import InvalidParams
from tuplematch.index import SearchCounter, mutual_topk
from tuplematch.merging import (WorkingTable, extract_candidate_tuples,
                                hierarchical_merge, merge_two_tables)
from tuplematch.model import EntityRef
from tuplematch.synth import make_bench_tables
from tuplematch.unionfind import UnionFind

logger = logging.getLogger(__name__)

__all__ = [
    "StrategyRun",
    "BenchConfig",
    "run_pairwise",
    "run_chain",
    "run_hierarchical",
    "scaling_report",
    "write_report_csv",
    "load_bench_config",
]

_SEED_PAIRWISE = 401
_SEED_CHAIN = 402

STRATEGIES = ("pairwise", "chain", "hierarchical")

CSV_HEADER = ["strategy", "S", "n", "median_seconds", "distance_evals", "pairs_found"]


@dataclass
class StrategyRun:
    """Outcome of one strategy over one set of working tables."""

    strategy: str
    num_tables: int
    rows_per_table: int
    seconds: float
    distance_evals: int
    pairs_found: int
    tuples: list[frozenset[EntityRef]]


def _group_tuples(table: WorkingTable) -> list[frozenset[EntityRef]]:
    return [frozenset(g.members) for g in extract_candidate_tuples(table)]


def run_pairwise(tables: list[WorkingTable], cfg: PipelineConfig) -> StrategyRun:
    """Mutual top-k join for every pair of tables; transitive closure at the end."""
    start = time.perf_counter()
    counter = SearchCounter()
    offsets = np.cumsum([0] + [len(t) for t in tables])
    uf = UnionFind(int(offsets[-1]))
    matrices = [t.centroid_matrix() for t in tables]
    for s, t in combinations(range(len(tables)), 2):
        seed = int(np.random.SeedSequence([cfg.seed, _SEED_PAIRWISE, s, t]).generate_state(1)[0])
        pairs = mutual_topk(matrices[s], matrices[t], cfg.k, cfg.m,
                            cfg.index, seed, counter)
        for i, j, _ in pairs:
            uf.union(int(offsets[s]) + i, int(offsets[t]) + j)
    tuples = []
    for members in uf.groups().values():
        if len(members) >= 2:
            refs = []
            for elem in members:
                s = int(np.searchsorted(offsets, elem, side="right")) - 1
                g = elem - int(offsets[s])
                refs.extend(tables[s].groups[g].members)
            tuples.append(frozenset(refs))
    tuples.sort(key=min)
    seconds = time.perf_counter() - start
    return StrategyRun("pairwise", len(tables), _rows_per_table(tables), seconds,
                       counter.distance_evals, counter.pairs_found, tuples)


def run_chain(tables: list[WorkingTable], cfg: PipelineConfig) -> StrategyRun:
    """Fold tables into one accumulator, left to right in input order."""
    start = time.perf_counter()
    counter = SearchCounter()
    base = tables[0]
    for step, nxt in enumerate(tables[1:]):
        seed = int(np.random.SeedSequence([cfg.seed, _SEED_CHAIN, step]).generate_state(1)[0])
        base = merge_two_tables(base, nxt, cfg, seed, counter)
    tuples = _group_tuples(base)
    seconds = time.perf_counter() - start
    return StrategyRun("chain", len(tables), _rows_per_table(tables), seconds,
                       counter.distance_evals, counter.pairs_found,
                       [frozenset(t) for t in tuples])


def run_hierarchical(tables: list[WorkingTable], cfg: PipelineConfig) -> StrategyRun:
    """The pipeline's own halving strategy, measured like the others."""
    start = time.perf_counter()
    counter = SearchCounter()
    final = hierarchical_merge(tables, cfg, counter)
    tuples = _group_tuples(final)
    seconds = time.perf_counter() - start
    return StrategyRun("hierarchical", len(tables), _rows_per_table(tables), seconds,
                       counter.distance_evals, counter.pairs_found,
                       [frozenset(t) for t in tuples])


_RUNNERS = {
    "pairwise": run_pairwise,
    "chain": run_chain,
    "hierarchical": run_hierarchical,
}


def _rows_per_table(tables: list[WorkingTable]) -> int:
    return len(tables[0]) if tables else 0


@dataclass
class BenchConfig:
    """Scaling-report settings (the ``[bench]`` section of a config file)."""

    strategies: list[str] = field(default_factory=lambda: list(STRATEGIES))
    table_counts: list[int] = field(default_factory=lambda: [4, 8, 16])
    rows: int = 500
    dim: int = 128
    cluster_fraction: float = 0.8
    repeats: int = 3
    seed: int = 0

    def validate(self) -> None:
        bad = [s for s in self.strategies if s not in _RUNNERS]
        if bad:
            raise InvalidParams(f"unknown strategies: {bad}")
        if self.repeats < 1:
            raise InvalidParams(f"repeats must be >= 1, got {self.repeats}")
        if any(s < 2 for s in self.table_counts):
            raise InvalidParams("every table count must be >= 2")


@dataclass
class ScalingRow:
    """One (strategy, table-count) cell of the scaling report."""

    strategy: str
    num_tables: int
    rows_per_table: int
    median_seconds: float
    distance_evals: int
    pairs_found: int

    def as_csv_row(self) -> list:
        return [self.strategy, self.num_tables, self.rows_per_table,
                f"{self.median_seconds:.6f}", self.distance_evals, self.pairs_found]


def scaling_report(bench: BenchConfig, cfg: PipelineConfig | None = None) -> list[ScalingRow]:
    """Time every requested strategy at every table count.

    Timed runs execute one at a time with ``parallelism=1`` so wall times
    measure strategy structure, not scheduling.  The modeled eval charge is
    deterministic, so repeats only reduce timing noise (the counter is
    asserted stable across repeats).
    """
    bench.validate()
    if cfg is None:
        cfg = PipelineConfig()
    # pin serial execution and the exact backend: timings then measure strategy
    # structure, and the modeled eval charge is backend-independent anyway
    cfg = dataclasses.replace(cfg, parallelism=1, index=IndexParams(backend="exact"))
    cfg.validate()

    rows: list[ScalingRow] = []
    for num_tables in bench.table_counts:
        tables, _ = make_bench_tables(num_tables, bench.rows, bench.dim,
                                      bench.cluster_fraction, bench.seed)
        for name in bench.strategies:
            runner = _RUNNERS[name]
            runs = [runner(tables, cfg) for _ in range(bench.repeats)]
            evals = {r.distance_evals for r in runs}
            if len(evals) != 1:
                raise AssertionError(f"{name}: eval counter unstable across repeats: {evals}")
            rows.append(ScalingRow(
                strategy=name,
                num_tables=num_tables,
                rows_per_table=bench.rows,
                median_seconds=statistics.median(r.seconds for r in runs),
                distance_evals=runs[0].distance_evals,
                pairs_found=runs[0].pairs_found,
            ))
            logger.info("bench %s S=%d: %.3fs, %d evals, %d pairs", name, num_tables,
                        rows[-1].median_seconds, rows[-1].distance_evals,
                        rows[-1].pairs_found)
    return rows


def write_report_csv(path: str | Path, rows: list[ScalingRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv_row())


def load_bench_config(path: str | Path) -> tuple[BenchConfig, PipelineConfig]:
    """Read a config file's ``[bench]`` section plus the shared pipeline settings."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    bench_raw = raw.get("bench", {})
    allowed = {f.name for f in dataclasses.fields(BenchConfig)}
    unknown = set(bench_raw) - allowed
    if unknown:
        raise InvalidParams(f"unknown bench keys: {sorted(unknown)}")
    bench = BenchConfig(**bench_raw)
    bench.validate()

    pipeline = raw.get("pipeline", {})
    for section in ("embedder", "index"):
        if section in raw:
            pipeline[section] = raw[section]
    cfg = config_from_dict(pipeline)
    return bench, cfg
