"""Scoring predicted tuples against ground truth.

Two views of the same prediction: exact-tuple scoring (a predicted tuple is
correct only if some truth tuple has exactly the same member set) and pair
scoring (every tuple of size ``l`` expands to its ``C(l, 2)`` member pairs,
then precision/recall over the pair sets).  Pair scoring gives partial credit
where exact-tuple scoring gives none.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from tuplematch.io import read_truth_jsonl
from tuplematch.model import EntityRef

__all__ = [
    "PRF",
    "TruthSet",
    "ScoreReport",
    "tuples_to_pairs",
    "pairs_to_tuples",
    "score_tuples",
    "score_pairs",
    "evaluate",
]

Tuples = Sequence[frozenset[EntityRef]]


class PRF(NamedTuple):
    """Precision / recall / F1 with the usual 0/0 -> 0 conventions."""

    precision: float
    recall: float
    f1: float


def _prf(num_correct: int, num_pred: int, num_truth: int) -> PRF:
    precision = num_correct / num_pred if num_pred else 0.0
    recall = num_correct / num_truth if num_truth else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
    return PRF(precision, recall, f1)


@dataclass
class TruthSet:
    """Ground-truth tuples; member sets are pairwise disjoint (enforced at load)."""

    tuples: list[frozenset[EntityRef]]

    @classmethod
    def from_file(cls, path: str | Path) -> "TruthSet":
        return cls(read_truth_jsonl(path))

    def __len__(self) -> int:
        return len(self.tuples)


def tuples_to_pairs(tuples: Iterable[frozenset[EntityRef]]) -> set[tuple[EntityRef, EntityRef]]:
    """Expand tuples to their member pairs, each ordered ``(small, large)``."""
    pairs: set[tuple[EntityRef, EntityRef]] = set()
    for members in tuples:
        for a, b in combinations(sorted(members), 2):
            pairs.add((a, b))
    return pairs


def pairs_to_tuples(pairs: Iterable[tuple[EntityRef, EntityRef]]) -> list[frozenset[EntityRef]]:
    """Connected components of the pair graph, as tuples (all have size >= 2).

    Duplicate pairs collapse; components are returned sorted by their smallest
    member so equal inputs give identical output order.
    """
    parent: dict[EntityRef, EntityRef] = {}

    def find(x: EntityRef) -> EntityRef:
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    components: dict[EntityRef, set[EntityRef]] = {}
    for node in parent:
        components.setdefault(find(node), set()).add(node)
    return sorted((frozenset(c) for c in components.values()), key=lambda fs: min(fs))


def score_tuples(pred: Tuples, truth: Tuples) -> PRF:
    """Exact-tuple scoring: a hit is set equality with a truth tuple."""
    pred_sets = {frozenset(t) for t in pred}
    truth_sets = {frozenset(t) for t in truth}
    return _prf(len(pred_sets & truth_sets), len(pred_sets), len(truth_sets))


def score_pairs(pred: Tuples, truth: Tuples) -> PRF:
    """Pair scoring: both sides expand to member pairs first."""
    pred_pairs = tuples_to_pairs(pred)
    truth_pairs = tuples_to_pairs(truth)
    return _prf(len(pred_pairs & truth_pairs), len(pred_pairs), len(truth_pairs))


@dataclass
class ScoreReport:
    """Both scoring views plus the raw set sizes."""

    tuple_precision: float
    tuple_recall: float
    tuple_f1: float
    pair_precision: float
    pair_recall: float
    pair_f1: float
    num_pred_tuples: int
    num_truth_tuples: int
    num_pred_pairs: int
    num_truth_pairs: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def evaluate(pred: Tuples, truth: Tuples | TruthSet) -> ScoreReport:
    truth_tuples = truth.tuples if isinstance(truth, TruthSet) else list(truth)
    t = score_tuples(pred, truth_tuples)
    p = score_pairs(pred, truth_tuples)
    return ScoreReport(
        tuple_precision=t.precision, tuple_recall=t.recall, tuple_f1=t.f1,
        pair_precision=p.precision, pair_recall=p.recall, pair_f1=p.f1,
        num_pred_tuples=len(pred), num_truth_tuples=len(truth_tuples),
        num_pred_pairs=len(tuples_to_pairs(pred)),
        num_truth_pairs=len(tuples_to_pairs(truth_tuples)),
    )
