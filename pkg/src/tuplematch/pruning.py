"""Density pruning of candidate tuples.

Merging is deliberately greedy, so a candidate tuple can pick up stragglers.
Within each tuple every member is classified by the density of its
neighbourhood among the tuple's own members (Euclidean distance between unit
embeddings): a member with at least ``min_pts`` members within ``epsilon``
(itself included) is *core*; a non-core member with some core member within
``epsilon`` is *reachable* (one hop, no closure); everything else is an
*outlier* and is dropped.  Tuples left with fewer than two members are
dropped whole.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from tuplematch.embedding import EmbeddingStore
from tuplematch.errors import TupleTooSmall
from tuplematch.merging import EntityGroup, _combine

__all__ = ["CORE", "REACHABLE", "OUTLIER", "PruneStats", "classify_entities", "prune_tuples"]

CORE = "core"
REACHABLE = "reachable"
OUTLIER = "outlier"


@dataclass
class PruneStats:
    """What pruning did: tuple and member counts in and out."""

    tuples_in: int = 0
    tuples_out: int = 0
    members_in: int = 0
    members_out: int = 0

    @property
    def members_dropped(self) -> int:
        return self.members_in - self.members_out

    @property
    def tuples_dropped(self) -> int:
        return self.tuples_in - self.tuples_out

    def to_dict(self) -> dict:
        return {
            "tuples_in": self.tuples_in,
            "tuples_out": self.tuples_out,
            "members_in": self.members_in,
            "members_out": self.members_out,
            "members_dropped": self.members_dropped,
            "tuples_dropped": self.tuples_dropped,
        }


def classify_entities(vectors: np.ndarray, epsilon: float, min_pts: int) -> list[str]:
    """Label each row of ``vectors`` as core / reachable / outlier.

    Distances are Euclidean between the rows; the epsilon-neighbourhood is
    boundary-inclusive and counts the point itself.
    """
    mat = np.ascontiguousarray(vectors, dtype=np.float64)
    gram = mat @ mat.T
    sq = np.diag(gram)
    d2 = sq[:, None] + sq[None, :] - 2.0 * gram
    np.maximum(d2, 0.0, out=d2)
    dist = np.sqrt(d2)
    within = dist <= epsilon
    counts = within.sum(axis=1)
    core = counts >= min_pts
    labels = []
    for i in range(mat.shape[0]):
        if core[i]:
            labels.append(CORE)
        elif bool(np.any(within[i] & core)):
            labels.append(REACHABLE)
        else:
            labels.append(OUTLIER)
    return labels


def _prune_one(group: EntityGroup, vectors: np.ndarray, epsilon: float,
               min_pts: int) -> tuple[EntityGroup | None, list[str]]:
    labels = classify_entities(vectors, epsilon, min_pts)
    keep = [i for i, lab in enumerate(labels) if lab != OUTLIER]
    if len(keep) < 2:
        return None, labels
    if len(keep) == group.size:
        return group, labels
    singles = [
        EntityGroup(members=(group.members[i],), centroid=vectors[i], raw=vectors[i])
        for i in keep
    ]
    return _combine(singles), labels


def prune_tuples(candidates: list[EntityGroup], store: EmbeddingStore,
                 epsilon: float, min_pts: int,
                 parallelism: int = 1) -> tuple[list[EntityGroup], PruneStats]:
    """Drop outlier members from each candidate tuple, then thin tuples.

    Each input tuple must have at least two members (raises
    :class:`TupleTooSmall` otherwise).  Surviving groups get their centroid
    recomputed from the remaining members' entity embeddings.  Output keeps
    the input's relative order; every kept tuple has at least two members.
    """
    for group in candidates:
        if group.size < 2:
            raise TupleTooSmall(f"candidate tuple {group.members} has fewer than 2 members")

    stats = PruneStats(tuples_in=len(candidates),
                       members_in=sum(g.size for g in candidates))

    def _job(group: EntityGroup) -> EntityGroup | None:
        vectors = store.gather(group.members)
        kept, _ = _prune_one(group, vectors, epsilon, min_pts)
        return kept

    if parallelism > 1 and len(candidates) > 1:
        results = Parallel(n_jobs=parallelism, prefer="threads")(
            delayed(_job)(g) for g in candidates
        )
    else:
        results = [_job(g) for g in candidates]

    pruned = [g for g in results if g is not None]
    stats.tuples_out = len(pruned)
    stats.members_out = sum(g.size for g in pruned)
    return pruned, stats
