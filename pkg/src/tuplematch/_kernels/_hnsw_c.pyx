# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled navigable-small-world graph index.

Same construction logic and level RNG as the pure twin (hnsw_py); dot
products sum in a different order, so results can differ at float-tie edges.
"""

from libc.math cimport log

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef unsigned long long _M64 = 0xFFFFFFFFFFFFFFFFULL


cdef inline double _u01(unsigned long long* state) noexcept nogil:
    cdef unsigned long long z
    state[0] = state[0] + 0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return ((z >> 11) + 0.5) / 9007199254740992.0  # 2**53


cdef inline bint _pair_lt(double d1, long n1, double d2, long n2) noexcept nogil:
    return d1 < d2 or (d1 == d2 and n1 < n2)


# Binary heaps over parallel (dist, node) arrays.  Min-heap pops the smallest
# (dist, node); max-heap keeps the largest at the root so the worst result can
# be peeked and evicted cheaply.

cdef inline void _minh_push(double* hd, long* hn, int* size, double d, long node) noexcept nogil:
    cdef int i = size[0]
    cdef int p
    cdef double td
    cdef long tn
    hd[i] = d
    hn[i] = node
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if _pair_lt(hd[i], hn[i], hd[p], hn[p]):
            td = hd[i]; hd[i] = hd[p]; hd[p] = td
            tn = hn[i]; hn[i] = hn[p]; hn[p] = tn
            i = p
        else:
            break


cdef inline void _minh_pop(double* hd, long* hn, int* size) noexcept nogil:
    cdef int i = 0
    cdef int l, r, best
    cdef double td
    cdef long tn
    size[0] -= 1
    hd[0] = hd[size[0]]
    hn[0] = hn[size[0]]
    while True:
        l = 2 * i + 1
        r = l + 1
        best = i
        if l < size[0] and _pair_lt(hd[l], hn[l], hd[best], hn[best]):
            best = l
        if r < size[0] and _pair_lt(hd[r], hn[r], hd[best], hn[best]):
            best = r
        if best == i:
            break
        td = hd[i]; hd[i] = hd[best]; hd[best] = td
        tn = hn[i]; hn[i] = hn[best]; hn[best] = tn
        i = best


cdef inline void _maxh_push(double* hd, long* hn, int* size, double d, long node) noexcept nogil:
    cdef int i = size[0]
    cdef int p
    cdef double td
    cdef long tn
    hd[i] = d
    hn[i] = node
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if _pair_lt(hd[p], hn[p], hd[i], hn[i]):
            td = hd[i]; hd[i] = hd[p]; hd[p] = td
            tn = hn[i]; hn[i] = hn[p]; hn[p] = tn
            i = p
        else:
            break


cdef inline void _maxh_pop(double* hd, long* hn, int* size) noexcept nogil:
    cdef int i = 0
    cdef int l, r, best
    cdef double td
    cdef long tn
    size[0] -= 1
    hd[0] = hd[size[0]]
    hn[0] = hn[size[0]]
    while True:
        l = 2 * i + 1
        r = l + 1
        best = i
        if l < size[0] and _pair_lt(hd[best], hn[best], hd[l], hn[l]):
            best = l
        if r < size[0] and _pair_lt(hd[best], hn[best], hd[r], hn[r]):
            best = r
        if best == i:
            break
        td = hd[i]; hd[i] = hd[best]; hd[best] = td
        tn = hn[i]; hn[i] = hn[best]; hn[best] = tn
        i = best


cdef class HnswGraph:
    """Drop-in compiled counterpart of hnsw_py.HnswGraph."""

    cdef double[:, ::1] _x
    cdef Py_ssize_t _n, _dim
    cdef int _m, _m0, _efc
    cdef long _entry
    cdef int _max_level
    cdef int[::1] _levels
    cdef list _adj        # per layer: int32[n, cap] neighbour matrix
    cdef list _cnt        # per layer: int32[n] neighbour counts
    cdef long[::1] _visited
    cdef long _visit_mark
    # scratch buffers (capacity n + 1)
    cdef double[::1] _cand_d
    cdef long[::1] _cand_n
    cdef double[::1] _res_d
    cdef long[::1] _res_n
    cdef double[::1] _lay_d
    cdef long[::1] _lay_n
    cdef double[::1] _eps_d
    cdef long[::1] _eps_n
    cdef double[::1] _sh_d
    cdef long[::1] _sh_n

    def __init__(self, vectors, int degree=16, int ef_construction=200, long seed=0):
        x = np.ascontiguousarray(vectors, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("vectors must be 2-D")
        self._x = x
        self._n = x.shape[0]
        self._dim = x.shape[1]
        self._m = degree
        self._m0 = 2 * degree
        self._efc = max(ef_construction, degree)

        cdef unsigned long long state = (<unsigned long long>seed) & _M64
        cdef double ml = 1.0 / log(<double>degree)
        levels = np.zeros(self._n, dtype=np.int32)
        cdef int[::1] lv = levels
        cdef Py_ssize_t i
        cdef int max_draw = 0
        for i in range(self._n):
            lv[i] = <int>(-log(_u01(&state)) * ml)
            if lv[i] > max_draw:
                max_draw = lv[i]
        self._levels = lv

        self._adj = []
        self._cnt = []
        cdef int layer
        for layer in range(max_draw + 1):
            cap = self._m0 if layer == 0 else self._m
            self._adj.append(np.full((self._n, cap), -1, dtype=np.int32))
            self._cnt.append(np.zeros(self._n, dtype=np.int32))

        cap_scratch = self._n + 1
        self._visited = np.zeros(cap_scratch, dtype=np.int64)
        self._visit_mark = 0
        self._cand_d = np.zeros(cap_scratch, dtype=np.float64)
        self._cand_n = np.zeros(cap_scratch, dtype=np.int64)
        self._res_d = np.zeros(cap_scratch, dtype=np.float64)
        self._res_n = np.zeros(cap_scratch, dtype=np.int64)
        self._lay_d = np.zeros(cap_scratch, dtype=np.float64)
        self._lay_n = np.zeros(cap_scratch, dtype=np.int64)
        self._eps_d = np.zeros(cap_scratch, dtype=np.float64)
        self._eps_n = np.zeros(cap_scratch, dtype=np.int64)
        self._sh_d = np.zeros(self._m0 + 1, dtype=np.float64)
        self._sh_n = np.zeros(self._m0 + 1, dtype=np.int64)

        self._entry = -1
        self._max_level = -1
        for i in range(self._n):
            self._insert(i)

    cdef inline double _dist(self, Py_ssize_t node, const double[::1] vec) noexcept nogil:
        cdef double s = 0.0
        cdef Py_ssize_t t
        for t in range(self._dim):
            s += self._x[node, t] * vec[t]
        s = 1.0 - s
        return s if s > 0.0 else 0.0

    cdef inline double _dist_nodes(self, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
        cdef double s = 0.0
        cdef Py_ssize_t t
        for t in range(self._dim):
            s += self._x[a, t] * self._x[b, t]
        s = 1.0 - s
        return s if s > 0.0 else 0.0

    cdef void _greedy(self, const double[::1] vec, long* cur, double* cur_d, int layer):
        cdef int[:, ::1] adj = self._adj[layer]
        cdef int[::1] cnt = self._cnt[layer]
        cdef bint changed = True
        cdef long scan, nb
        cdef int j
        cdef double d
        while changed:
            changed = False
            scan = cur[0]
            for j in range(cnt[scan]):
                nb = adj[scan, j]
                d = self._dist(nb, vec)
                if d < cur_d[0] or (d == cur_d[0] and nb < cur[0]):
                    cur[0] = nb
                    cur_d[0] = d
                    changed = True

    cdef int _search_layer(self, const double[::1] vec, int n_eps, int ef, int layer):
        """Beam search; entry points in _eps arrays, results into _lay arrays (sorted)."""
        cdef int[:, ::1] adj = self._adj[layer]
        cdef int[::1] cnt = self._cnt[layer]
        cdef double* cand_d = &self._cand_d[0]
        cdef long* cand_n = &self._cand_n[0]
        cdef double* res_d = &self._res_d[0]
        cdef long* res_n = &self._res_n[0]
        cdef int cand_size = 0
        cdef int res_size = 0
        cdef long mark, node, c, nb
        cdef int e, j, out
        cdef double d, dn, worst
        cdef long worst_node

        self._visit_mark += 1
        mark = self._visit_mark
        for e in range(n_eps):
            node = self._eps_n[e]
            if self._visited[node] == mark:
                continue
            self._visited[node] = mark
            d = self._eps_d[e]
            _minh_push(cand_d, cand_n, &cand_size, d, node)
            _maxh_push(res_d, res_n, &res_size, d, node)
        while res_size > ef:
            _maxh_pop(res_d, res_n, &res_size)

        while cand_size > 0:
            d = cand_d[0]
            c = cand_n[0]
            _minh_pop(cand_d, cand_n, &cand_size)
            worst = res_d[0]
            if d > worst and res_size >= ef:
                break
            for j in range(cnt[c]):
                nb = adj[c, j]
                if self._visited[nb] == mark:
                    continue
                self._visited[nb] = mark
                dn = self._dist(nb, vec)
                worst = res_d[0]
                worst_node = res_n[0]
                if res_size < ef or _pair_lt(dn, nb, worst, worst_node):
                    _minh_push(cand_d, cand_n, &cand_size, dn, nb)
                    _maxh_push(res_d, res_n, &res_size, dn, nb)
                    if res_size > ef:
                        _maxh_pop(res_d, res_n, &res_size)

        # heap-sort the survivors into _lay, ascending (dist, id)
        out = res_size
        for j in range(out - 1, -1, -1):
            self._lay_d[j] = res_d[0]
            self._lay_n[j] = res_n[0]
            _maxh_pop(res_d, res_n, &res_size)
        return out

    cdef void _insert(self, Py_ssize_t i):
        cdef int level = self._levels[i]
        if self._entry < 0:
            self._entry = i
            self._max_level = level
            return

        cdef const double[::1] vec = self._x[i]
        cdef long cur = self._entry
        cdef double cur_d = self._dist(cur, vec)
        cdef int layer
        for layer in range(self._max_level, level, -1):
            self._greedy(vec, &cur, &cur_d, layer)

        cdef int n_eps = 1
        self._eps_d[0] = cur_d
        self._eps_n[0] = cur
        cdef int top = level if level < self._max_level else self._max_level
        cdef int found, n_link, cap, j, p, q, r, peer_cnt
        cdef long node, node_tmp
        cdef double d
        cdef int[:, ::1] adj
        cdef int[::1] cnt
        cdef double* sh_d = &self._sh_d[0]
        cdef long* sh_n = &self._sh_n[0]
        for layer in range(top, -1, -1):
            found = self._search_layer(vec, n_eps, self._efc, layer)
            adj = self._adj[layer]
            cnt = self._cnt[layer]
            cap = self._m0 if layer == 0 else self._m
            n_link = found if found < self._m else self._m
            for j in range(n_link):
                adj[i, j] = <int>self._lay_n[j]
            cnt[i] = n_link
            for j in range(n_link):
                node = self._lay_n[j]
                peer_cnt = cnt[node]
                if peer_cnt < cap:
                    adj[node, peer_cnt] = <int>i
                    cnt[node] = peer_cnt + 1
                else:
                    # overflow: keep the cap closest of (existing + i), insertion sort
                    for p in range(peer_cnt):
                        sh_d[p] = self._dist_nodes(adj[node, p], node)
                        sh_n[p] = adj[node, p]
                    sh_d[peer_cnt] = self._dist_nodes(i, node)
                    sh_n[peer_cnt] = i
                    for p in range(1, peer_cnt + 1):
                        d = sh_d[p]
                        node_tmp = sh_n[p]
                        q = p
                        while q > 0 and _pair_lt(d, node_tmp, sh_d[q - 1], sh_n[q - 1]):
                            q -= 1
                        for r in range(p, q, -1):
                            sh_d[r] = sh_d[r - 1]
                            sh_n[r] = sh_n[r - 1]
                        sh_d[q] = d
                        sh_n[q] = node_tmp
                    for p in range(cap):
                        adj[node, p] = <int>sh_n[p]
                    cnt[node] = cap
            # entry points for the next layer down = this layer's results
            n_eps = found
            for j in range(found):
                self._eps_d[j] = self._lay_d[j]
                self._eps_n[j] = self._lay_n[j]
        if level > self._max_level:
            self._entry = i
            self._max_level = level

    def search(self, vec, int k, int ef):
        """Top-k neighbours of one query, ascending (dist, id); padded with -1/inf."""
        ids = np.full(k, -1, dtype=np.int64)
        dists = np.full(k, np.inf, dtype=np.float64)
        if self._entry < 0 or k == 0:
            return ids, dists
        q = np.ascontiguousarray(vec, dtype=np.float64)
        self._search_into(q, k, ef, ids, dists)
        return ids, dists

    def search_batch(self, queries, int k, int ef):
        q = np.ascontiguousarray(queries, dtype=np.float64)
        cdef Py_ssize_t nq = q.shape[0]
        ids = np.full((nq, k), -1, dtype=np.int64)
        dists = np.full((nq, k), np.inf, dtype=np.float64)
        if self._entry < 0 or k == 0:
            return ids, dists
        cdef Py_ssize_t r
        for r in range(nq):
            self._search_into(q[r], k, ef, ids[r], dists[r])
        return ids, dists

    cdef void _search_into(self, const double[::1] vec, int k, int ef,
                           long[::1] out_ids, double[::1] out_d):
        cdef long cur = self._entry
        cdef double cur_d = self._dist(cur, vec)
        cdef int layer, found, j
        for layer in range(self._max_level, 0, -1):
            self._greedy(vec, &cur, &cur_d, layer)
        self._eps_d[0] = cur_d
        self._eps_n[0] = cur
        found = self._search_layer(vec, 1, ef if ef > k else k, 0)
        if found > k:
            found = k
        for j in range(found):
            out_ids[j] = self._lay_n[j]
            out_d[j] = self._lay_d[j]
