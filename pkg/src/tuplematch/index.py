"""Nearest-neighbour indexes and the mutual top-k candidate join.

Two backends behind one interface: brute force over a matmul (exact) and the
navigable-small-world graph (approximate, sub-linear queries).  Small sets
always go exact — below ``IndexParams.exact_cutover`` brute force is faster
than building a graph, and it is exact for free.

All distances are cosine distance ``1 - <u, v>`` on unit vectors, floored at
0 to absorb float noise; neighbour lists are sorted ascending by
``(dist, id)`` so ties always resolve to the smaller id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from tuplematch._kernels import HnswGraph
from tuplematch.config import IndexParams
from tuplematch.errors import DimensionMismatch, InvalidParams

__all__ = [
    "Neighbor",
    "SearchCounter",
    "ExactIndex",
    "GraphIndex",
    "build_index",
    "query_topk",
    "mutual_topk",
]


class Neighbor(NamedTuple):
    """One query hit: indexed row id and its cosine distance to the query."""

    id: int
    dist: float


@dataclass
class SearchCounter:
    """Tallies the modeled cost of top-k probes plus the pairs they yield.

    A top-k probe against an index of ``s`` vectors is charged
    ``k * max(1, ceil(log2 s))`` distance evaluations — the cost of a
    logarithmic search structure, which is the regime the strategy
    comparisons reason about.  The charge is independent of which backend
    actually executed, so strategy costs stay comparable across backends.
    """

    distance_evals: int = 0
    pairs_found: int = 0

    def charge_topk(self, num_queries: int, indexed_size: int, k: int) -> None:
        if num_queries <= 0 or indexed_size <= 0:
            return
        per_query = k * max(1, (indexed_size - 1).bit_length())
        self.distance_evals += num_queries * per_query

    def merge(self, other: "SearchCounter") -> None:
        self.distance_evals += other.distance_evals
        self.pairs_found += other.pairs_found


def _as_matrix(vectors: np.ndarray) -> np.ndarray:
    mat = np.ascontiguousarray(vectors, dtype=np.float64)
    if mat.ndim != 2:
        raise InvalidParams(f"expected a 2-D vector matrix, got shape {mat.shape}")
    return mat


class ExactIndex:
    """Brute-force index: one matmul, stable argsort, exact by construction."""

    backend_name = "exact"

    def __init__(self, vectors: np.ndarray) -> None:
        self._x = _as_matrix(vectors)

    @property
    def size(self) -> int:
        return self._x.shape[0]

    @property
    def dim(self) -> int:
        return self._x.shape[1]

    def query_batch(self, queries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Top-k ids and distances per query row, padded with -1/inf past ``size``."""
        queries = _as_matrix(queries)
        if queries.shape[1] != self.dim:
            raise DimensionMismatch(f"query dim {queries.shape[1]} != index dim {self.dim}")
        dist = 1.0 - queries @ self._x.T
        np.maximum(dist, 0.0, out=dist)
        keep = min(k, self.size)
        # stable sort on distances keeps ascending id among exact ties
        order = np.argsort(dist, axis=1, kind="stable")[:, :keep]
        top = np.take_along_axis(dist, order, axis=1)
        if keep < k:
            pad_ids = np.full((queries.shape[0], k - keep), -1, dtype=np.int64)
            pad_d = np.full((queries.shape[0], k - keep), np.inf)
            order = np.hstack([order.astype(np.int64), pad_ids])
            top = np.hstack([top, pad_d])
        return order.astype(np.int64), top


class GraphIndex:
    """Graph-backed index; approximate, deterministic for a fixed seed."""

    backend_name = "graph"

    def __init__(self, vectors: np.ndarray, params: IndexParams, seed: int = 0) -> None:
        mat = _as_matrix(vectors)
        self._dim = mat.shape[1]
        self._size = mat.shape[0]
        self._params = params
        self._graph = HnswGraph(mat, params.graph_degree, params.ef_construction, seed)

    @property
    def size(self) -> int:
        return self._size

    @property
    def dim(self) -> int:
        return self._dim

    def query_batch(self, queries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        queries = _as_matrix(queries)
        if queries.shape[1] != self.dim:
            raise DimensionMismatch(f"query dim {queries.shape[1]} != index dim {self.dim}")
        return self._graph.search_batch(queries, k, self._params.effective_ef(k))


def build_index(vectors: np.ndarray, params: IndexParams | None = None,
                seed: int = 0) -> ExactIndex | GraphIndex:
    """Build the right index for the set size: graph above ``exact_cutover``,
    brute force otherwise (or always, for ``backend="exact"``)."""
    params = params or IndexParams()
    mat = _as_matrix(vectors)
    if params.backend == "exact" or mat.shape[0] <= params.exact_cutover:
        return ExactIndex(mat)
    return GraphIndex(mat, params, seed)


def query_topk(index: ExactIndex | GraphIndex, query: np.ndarray, k: int) -> list[Neighbor]:
    """Top-k of a single query vector, ascending (dist, id)."""
    if k < 1:
        raise InvalidParams(f"k must be >= 1, got {k}")
    q = np.ascontiguousarray(query, dtype=np.float64).reshape(1, -1)
    ids, dists = index.query_batch(q, k)
    return [Neighbor(int(i), float(d)) for i, d in zip(ids[0], dists[0]) if i >= 0]


def mutual_topk(left: np.ndarray, right: np.ndarray, k: int, m: float,
                params: IndexParams | None = None, seed: int = 0,
                counter: SearchCounter | None = None) -> list[tuple[int, int, float]]:
    """Pairs ``(i, j, dist)`` where each side ranks the other in its top-k and
    the cosine distance is at most ``m`` (boundary inclusive).

    Output is sorted ascending by ``(i, j)``.  The same matrix may be passed
    on both sides (self-join); the pair ``(i, i)`` at distance 0 then
    satisfies the definition and is kept.
    """
    params = params or IndexParams()
    if k < 1:
        raise InvalidParams(f"k must be >= 1, got {k}")
    if not (0.0 <= m <= 2.0):
        raise InvalidParams(f"m must be in [0, 2], got {m}")
    lmat = _as_matrix(left)
    rmat = _as_matrix(right)
    if lmat.shape[1] != rmat.shape[1]:
        raise DimensionMismatch(f"dims differ: {lmat.shape[1]} vs {rmat.shape[1]}")
    nl, nr = lmat.shape[0], rmat.shape[0]
    if counter is not None:
        counter.charge_topk(nl, nr, k)
        counter.charge_topk(nr, nl, k)
    if nl == 0 or nr == 0:
        return []

    both_exact = params.backend == "exact" or (
        nl <= params.exact_cutover and nr <= params.exact_cutover
    )
    if both_exact:
        dist = 1.0 - lmat @ rmat.T
        np.maximum(dist, 0.0, out=dist)
        keep_r = min(k, nr)
        keep_l = min(k, nl)
        top_right = np.argsort(dist, axis=1, kind="stable")[:, :keep_r]
        top_left = np.argsort(dist.T, axis=1, kind="stable")[:, :keep_l]
        right_sets = [set(row.tolist()) for row in top_right]
        left_sets = [set(row.tolist()) for row in top_left]
        pairs = []
        for i in range(nl):
            for j in sorted(right_sets[i]):
                if i in left_sets[j] and dist[i, j] <= m:
                    pairs.append((i, int(j), float(dist[i, j])))
    else:
        right_index = build_index(rmat, params, seed)
        left_index = build_index(lmat, params, seed)
        r_ids, r_dists = right_index.query_batch(lmat, k)
        l_ids, _ = left_index.query_batch(rmat, k)
        left_sets = [set(int(x) for x in row if x >= 0) for row in l_ids]
        pairs = []
        for i in range(nl):
            hits = [(int(j), float(d)) for j, d in zip(r_ids[i], r_dists[i]) if j >= 0]
            for j, d in sorted(hits):
                if i in left_sets[j] and d <= m:
                    pairs.append((i, j, d))
    if counter is not None:
        counter.pairs_found += len(pairs)
    return pairs
