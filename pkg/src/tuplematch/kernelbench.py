"""Micro-benchmark of the compiled kernels against their pure-Python twins.

Runs the hashing kernel over synthetic phrases and the graph index over
random unit vectors, timing both implementations (when the compiled ones are
available) and checking the graph twins' top-k recall against the exact
answer, so speed never silently trades away correctness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from tuplematch import _kernels
from tuplematch._kernels import hashing_py, hnsw_py
from tuplematch.index import ExactIndex

__all__ = ["KernelTiming", "kernel_report", "format_report"]

_SEED_KBENCH = 501


@dataclass
class KernelTiming:
    """One kernel at one size: seconds per implementation, plus quality."""

    kernel: str
    size: int
    pure_seconds: float
    compiled_seconds: float | None
    note: str = ""

    @property
    def speedup(self) -> float | None:
        if self.compiled_seconds is None or self.compiled_seconds == 0:
            return None
        return self.pure_seconds / self.compiled_seconds


def _phrases(rng: np.random.Generator, count: int, words: int = 18) -> list[str]:
    alpha = np.array(list("abcdefghijklmnopqrstuvwxyz"))
    out = []
    for _ in range(count):
        lengths = rng.integers(4, 9, size=words)
        out.append(" ".join("".join(rng.choice(alpha, size=int(n))) for n in lengths))
    return out


def _time(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def _recall_at_k(ids: np.ndarray, truth: np.ndarray) -> float:
    hits = sum(len(set(a.tolist()) & set(b.tolist())) for a, b in zip(ids, truth))
    return hits / truth.size


def kernel_report(hash_rows: int = 4000, graph_rows: int = 2000, dim: int = 64,
                  k: int = 10, seed: int = 0) -> list[KernelTiming]:
    """Time both twins of each kernel; one row per kernel."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, _SEED_KBENCH]))
    rows: list[KernelTiming] = []

    texts = _phrases(rng, hash_rows)
    pure_s = _time(lambda: hashing_py.ngram_count_matrix(texts, 256, 2, 3))
    compiled_s = None
    note = "compiled kernels unavailable"
    if _kernels.HAVE_COMPILED:
        from tuplematch._kernels import _hashing_c
        compiled_s = _time(lambda: _hashing_c.ngram_count_matrix(texts, 256, 2, 3))
        same = np.array_equal(hashing_py.ngram_count_matrix(texts[:64], 256, 2, 3),
                              _hashing_c.ngram_count_matrix(texts[:64], 256, 2, 3))
        note = "outputs bit-identical" if same else "OUTPUT MISMATCH"
    rows.append(KernelTiming("hashing", hash_rows, pure_s, compiled_s, note))

    vecs = rng.standard_normal((graph_rows, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    exact_ids, _ = ExactIndex(vecs).query_batch(vecs, k)

    def _build_and_query(cls):
        graph = cls(vecs, 16, 200, seed)
        ids, _ = graph.search_batch(vecs, k, 64)
        return ids

    pure_ids = None

    def _run_pure():
        nonlocal pure_ids
        pure_ids = _build_and_query(hnsw_py.HnswGraph)

    pure_s = _time(_run_pure)
    compiled_s = None
    note = f"pure recall@{k} {_recall_at_k(pure_ids, exact_ids):.3f}"
    if _kernels.HAVE_COMPILED:
        from tuplematch._kernels import _hnsw_c
        compiled_ids = None

        def _run_compiled():
            nonlocal compiled_ids
            compiled_ids = _build_and_query(_hnsw_c.HnswGraph)

        compiled_s = _time(_run_compiled)
        note += f", compiled recall@{k} {_recall_at_k(compiled_ids, exact_ids):.3f}"
    rows.append(KernelTiming("graph-index", graph_rows, pure_s, compiled_s, note))
    return rows


def format_report(rows: list[KernelTiming]) -> str:
    lines = [f"{'kernel':<12} {'size':>6} {'pure (s)':>10} {'compiled (s)':>13} "
             f"{'speedup':>8}  note"]
    for row in rows:
        compiled = f"{row.compiled_seconds:.4f}" if row.compiled_seconds is not None else "-"
        speed = f"{row.speedup:.1f}x" if row.speedup is not None else "-"
        lines.append(f"{row.kernel:<12} {row.size:>6} {row.pure_seconds:>10.4f} "
                     f"{compiled:>13} {speed:>8}  {row.note}")
    return "\n".join(lines)
