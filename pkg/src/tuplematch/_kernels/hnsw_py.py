"""Pure-Python twin of the navigable-small-world graph index.

Deterministic by construction: level draws come from a splitmix64 stream
seeded explicitly, and every comparison breaks distance ties on the smaller
node id.  The compiled twin (`_hnsw_c`) draws the same levels and follows the
same insertion logic, but its dot products sum in a different order, so the
two graphs can disagree at float-tie edges; cross-twin agreement is asserted
via recall against the exact index, not bit equality.

Distances are cosine distance ``1 - <u, v>`` on unit vectors, floored at 0.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

import numpy as np

_M64 = (1 << 64) - 1


def _splitmix_next(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    z ^= z >> 31
    return state, z


def draw_levels(n: int, degree: int, seed: int) -> list[int]:
    """Geometric level draws shared by both twins (one draw per node, in id order)."""
    ml = 1.0 / math.log(degree)
    state = seed & _M64
    levels = []
    for _ in range(n):
        state, z = _splitmix_next(state)
        u = ((z >> 11) + 0.5) / float(1 << 53)  # in (0, 1), never 0
        levels.append(int(-math.log(u) * ml))
    return levels


class HnswGraph:
    """Hierarchical graph index over unit vectors.

    Parameters
    ----------
    vectors : (n, dim) float64 array, rows assumed unit-norm.
    degree : max links per node on upper layers (2x on the ground layer).
    ef_construction : beam width while inserting.
    seed : level-draw seed.
    """

    def __init__(self, vectors: np.ndarray, degree: int = 16,
                 ef_construction: int = 200, seed: int = 0) -> None:
        self._x = np.ascontiguousarray(vectors, dtype=np.float64)
        if self._x.ndim != 2:
            raise ValueError("vectors must be 2-D")
        self._m = int(degree)
        self._m0 = 2 * self._m
        self._efc = max(int(ef_construction), self._m)
        n = self._x.shape[0]
        self._levels = draw_levels(n, self._m, seed)
        # _links[node][layer] -> list of neighbour ids
        self._links: list[list[list[int]]] = [[] for _ in range(n)]
        self._entry = -1
        self._max_level = -1
        for i in range(n):
            self._insert(i)

    # -- distance helpers ---------------------------------------------------

    def _dist(self, node: int, vec: np.ndarray) -> float:
        d = 1.0 - float(np.dot(self._x[node], vec))
        return d if d > 0.0 else 0.0

    # -- construction -------------------------------------------------------

    def _insert(self, i: int) -> None:
        level = self._levels[i]
        self._links[i] = [[] for _ in range(level + 1)]
        if self._entry < 0:
            self._entry = i
            self._max_level = level
            return

        vec = self._x[i]
        cur = self._entry
        cur_d = self._dist(cur, vec)
        for layer in range(self._max_level, level, -1):
            cur, cur_d = self._greedy(vec, cur, cur_d, layer)

        eps = [(cur_d, cur)]
        for layer in range(min(level, self._max_level), -1, -1):
            found = self._search_layer(vec, eps, self._efc, layer)
            cap = self._m0 if layer == 0 else self._m
            neighbours = found[: self._m]
            self._links[i][layer] = [node for _, node in neighbours]
            for d, node in neighbours:
                peers = self._links[node][layer]
                peers.append(i)
                if len(peers) > cap:
                    ranked = sorted((self._dist(p, self._x[node]), p) for p in peers)
                    self._links[node][layer] = [p for _, p in ranked[:cap]]
            eps = found
        if level > self._max_level:
            self._entry = i
            self._max_level = level

    # -- search -------------------------------------------------------------

    def _greedy(self, vec: np.ndarray, cur: int, cur_d: float, layer: int) -> tuple[int, float]:
        changed = True
        while changed:
            changed = False
            for nb in self._links[cur][layer]:
                d = self._dist(nb, vec)
                if d < cur_d or (d == cur_d and nb < cur):
                    cur, cur_d = nb, d
                    changed = True
        return cur, cur_d

    def _search_layer(self, vec: np.ndarray, eps: list[tuple[float, int]],
                      ef: int, layer: int) -> list[tuple[float, int]]:
        """Beam search one layer; returns up to ``ef`` hits sorted by (dist, id)."""
        visited = set()
        cand: list[tuple[float, int]] = []
        res: list[tuple[float, int]] = []  # max-heap via (-d, -node)
        for d, node in eps:
            if node in visited:
                continue
            visited.add(node)
            heappush(cand, (d, node))
            heappush(res, (-d, -node))
        while len(res) > ef:
            heappop(res)
        while cand:
            d, c = heappop(cand)
            worst = -res[0][0]
            if d > worst and len(res) >= ef:
                break
            for nb in self._links[c][layer]:
                if nb in visited:
                    continue
                visited.add(nb)
                dn = self._dist(nb, vec)
                worst, worst_node = -res[0][0], -res[0][1]
                if len(res) < ef or (dn, nb) < (worst, worst_node):
                    heappush(cand, (dn, nb))
                    heappush(res, (-dn, -nb))
                    if len(res) > ef:
                        heappop(res)
        return sorted((-d, -node) for d, node in res)

    def search(self, vec: np.ndarray, k: int, ef: int) -> tuple[np.ndarray, np.ndarray]:
        """Top-``k`` neighbours of one query, ascending (dist, id); padded with -1/inf."""
        ids = np.full(k, -1, dtype=np.int64)
        dists = np.full(k, np.inf, dtype=np.float64)
        if self._entry < 0 or k == 0:
            return ids, dists
        vec = np.ascontiguousarray(vec, dtype=np.float64)
        cur = self._entry
        cur_d = self._dist(cur, vec)
        for layer in range(self._max_level, 0, -1):
            cur, cur_d = self._greedy(vec, cur, cur_d, layer)
        found = self._search_layer(vec, [(cur_d, cur)], max(ef, k), 0)
        for pos, (d, node) in enumerate(found[:k]):
            ids[pos] = node
            dists[pos] = d
        return ids, dists

    def search_batch(self, queries: np.ndarray, k: int, ef: int) -> tuple[np.ndarray, np.ndarray]:
        queries = np.ascontiguousarray(queries, dtype=np.float64)
        ids = np.full((queries.shape[0], k), -1, dtype=np.int64)
        dists = np.full((queries.shape[0], k), np.inf, dtype=np.float64)
        for q in range(queries.shape[0]):
            ids[q], dists[q] = self.search(queries[q], k, ef)
        return ids, dists
