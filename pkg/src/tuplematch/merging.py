"""Hierarchical pairwise merging of working tables.

A working table holds groups of entities believed equivalent; merging two
tables joins their group centroids with a mutual top-k search and unites
matched groups transitively (one group may match several on the other side —
a union-find over the pair list realizes the closure).  Tables are merged in
seeded random pairs, halving the table count per level, so ``S`` tables take
``ceil(log2 S)`` levels and each table participates in about ``log2 S``
merges rather than ``S - 1``.

The entire pairing plan derives from the seed and the table count alone, so
results cannot depend on execution order or the degree of parallelism.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from tuplematch.config import PipelineConfig
from tuplematch.embedding import EmbeddingStore
from tuplematch.errors import InvalidParams
from tuplematch.index import SearchCounter, mutual_topk
from tuplematch.model import Dataset, EntityRef
from tuplematch.unionfind import UnionFind

logger = logging.getLogger(__name__)

__all__ = [
    "EntityGroup",
    "WorkingTable",
    "MergeStep",
    "MergePlan",
    "build_merge_plan",
    "init_working_tables",
    "merge_two_tables",
    "hierarchical_merge",
    "extract_candidate_tuples",
]

_SEED_PLAN = 201
_SEED_MERGE = 202


@dataclass(frozen=True)
class EntityGroup:
    """Entities currently believed equivalent.

    ``members`` is sorted; ``raw`` is the unnormalized sum of the members'
    embeddings and ``centroid`` its unit-norm direction, so centroids stay
    exact averages under repeated merging without revisiting members.
    """

    members: tuple[EntityRef, ...]
    centroid: np.ndarray
    raw: np.ndarray

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class WorkingTable:
    """A list of disjoint entity groups at some merge level."""

    groups: list[EntityGroup]
    level: int = 0

    def __len__(self) -> int:
        return len(self.groups)

    def centroid_matrix(self) -> np.ndarray:
        if not self.groups:
            return np.zeros((0, 0))
        return np.stack([g.centroid for g in self.groups])

    def all_refs(self) -> set[EntityRef]:
        refs: set[EntityRef] = set()
        for g in self.groups:
            refs.update(g.members)
        return refs

    def check_disjoint(self) -> None:
        total = sum(g.size for g in self.groups)
        if total != len(self.all_refs()):
            raise InvalidParams("working table has a ref in more than one group")


@dataclass(frozen=True)
class MergeStep:
    """One merge job: slots into the current table list, plus its seed."""

    level: int
    left: int
    right: int
    seed: int


@dataclass
class MergePlan:
    """Per-level merge steps; ``passthrough[level]`` is the slot carried over
    unmerged when the level has an odd table count (always the last slot)."""

    levels: list[list[MergeStep]] = field(default_factory=list)
    passthrough: list[int | None] = field(default_factory=list)


def build_merge_plan(num_tables: int, seed: int) -> MergePlan:
    """Seeded random pairing per level until one table remains."""
    plan = MergePlan()
    count = num_tables
    level = 0
    while count > 1:
        spare: int | None = None
        slots = list(range(count))
        if count % 2 == 1:
            spare = slots.pop()  # highest slot rides along to the next level
        rng = np.random.default_rng(np.random.SeedSequence([seed, _SEED_PLAN, level]))
        order = [slots[i] for i in rng.permutation(len(slots))]
        steps = []
        for pair_idx in range(0, len(order), 2):
            a, b = order[pair_idx], order[pair_idx + 1]
            if a > b:
                a, b = b, a
            step_seed = int(np.random.SeedSequence(
                [seed, _SEED_MERGE, level, pair_idx // 2]).generate_state(1)[0])
            steps.append(MergeStep(level, a, b, step_seed))
        plan.levels.append(steps)
        plan.passthrough.append(spare)
        count = len(steps) + (1 if spare is not None else 0)
        level += 1
    return plan


def init_working_tables(dataset: Dataset, store: EmbeddingStore) -> list[WorkingTable]:
    """Level-0 tables: one singleton group per entity, centroid = its embedding."""
    tables = []
    for s, table in enumerate(dataset.tables):
        mat = store.matrices[s]
        groups = [
            EntityGroup(members=(ent.ref,), centroid=mat[r], raw=mat[r])
            for r, ent in enumerate(table)
        ]
        tables.append(WorkingTable(groups=groups, level=0))
    return tables


def _combine(groups: list[EntityGroup]) -> EntityGroup:
    members = tuple(sorted(ref for g in groups for ref in g.members))
    raw = groups[0].raw.copy()
    for g in groups[1:]:
        raw += g.raw
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:  # exactly opposing members; keep the unit-norm invariant
        centroid = np.zeros_like(raw)
        centroid[0] = 1.0
    else:
        centroid = raw / norm
    return EntityGroup(members=members, centroid=centroid, raw=raw)


def merge_two_tables(left: WorkingTable, right: WorkingTable, cfg: PipelineConfig,
                     seed: int = 0, counter: SearchCounter | None = None) -> WorkingTable:
    """Join two working tables into one.

    Mutual top-k pairs between group centroids (distance at most ``m``) are
    united transitively; matched unions recompute their centroid from the
    summed member embeddings, unmatched groups pass through unchanged.  The
    result is sorted by each group's smallest member ref.
    """
    overlap = left.all_refs() & right.all_refs()
    if overlap:
        raise InvalidParams(f"tables share {len(overlap)} refs; first: {sorted(overlap)[:3]}")

    pairs = mutual_topk(left.centroid_matrix(), right.centroid_matrix(),
                        cfg.k, cfg.m, cfg.index, seed, counter)
    nl = len(left)
    uf = UnionFind(nl + len(right))
    for i, j, _ in pairs:
        uf.union(i, nl + j)

    source = left.groups + right.groups
    merged: list[EntityGroup] = []
    for _, elems in uf.groups().items():
        if len(elems) == 1:
            merged.append(source[elems[0]])
        else:
            merged.append(_combine([source[e] for e in elems]))
    merged.sort(key=lambda g: g.members[0])
    return WorkingTable(groups=merged, level=max(left.level, right.level) + 1)


def hierarchical_merge(tables: list[WorkingTable], cfg: PipelineConfig,
                       counter: SearchCounter | None = None,
                       trace: list[dict] | None = None) -> WorkingTable:
    """Run the full merge plan down to a single table.

    ``trace``, when given, receives one record per merge: level, the two slot
    indices, and how many mutual pairs matched.  Merges within a level are
    independent and run on a thread pool when ``cfg.parallelism > 1``; each
    job gets its own counter, folded in afterwards in plan order, so counts
    and results are identical at any parallelism.
    """
    if not tables:
        raise InvalidParams("no tables to merge")
    plan = build_merge_plan(len(tables), cfg.seed)
    current = list(tables)
    for level_idx, steps in enumerate(plan.levels):
        spare = plan.passthrough[level_idx]

        def _job(step: MergeStep) -> tuple[WorkingTable, SearchCounter]:
            local = SearchCounter()
            out = merge_two_tables(current[step.left], current[step.right], cfg,
                                   step.seed, local)
            return out, local

        if cfg.parallelism > 1 and len(steps) > 1:
            results = Parallel(n_jobs=cfg.parallelism, prefer="threads")(
                delayed(_job)(step) for step in steps
            )
        else:
            results = [_job(step) for step in steps]

        next_tables = []
        for step, (table, local) in zip(steps, results):
            next_tables.append(table)
            if counter is not None:
                counter.merge(local)
            if trace is not None:
                trace.append({
                    "level": step.level,
                    "left": step.left,
                    "right": step.right,
                    "matched_pairs": local.pairs_found,
                })
        if spare is not None:
            next_tables.append(current[spare])
        current = next_tables
        logger.debug("merge level %d done: %d tables remain", level_idx, len(current))
    return current[0]


def extract_candidate_tuples(table: WorkingTable) -> list[EntityGroup]:
    """Groups with at least two members — the candidate match tuples."""
    return [g for g in table.groups if g.size >= 2]
