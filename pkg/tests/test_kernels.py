import os
import subprocess
import sys

import numpy as np
import pytest

from tuplematch import _kernels
from tuplematch._kernels import hashing_py, hnsw_py
from tuplematch.index import ExactIndex


def test_hashing_counts_are_signed_integers():
    mat = hashing_py.ngram_count_matrix(["aaaa"], 32, 2, 2)
    # "aaaa" has the bigram "aa" three times: one bucket at +-3, rest zero
    assert np.abs(mat).sum() == 3
    assert np.count_nonzero(mat) == 1


def test_hashing_empty_text_is_zero_row():
    mat = hashing_py.ngram_count_matrix(["", "ab"], 32, 2, 3)
    assert not mat[0].any()
    assert mat[1].any()


def test_hashing_is_order_independent_per_row():
    a = hashing_py.ngram_count_matrix(["hello", "world"], 64, 2, 3)
    b = hashing_py.ngram_count_matrix(["world", "hello"], 64, 2, 3)
    np.testing.assert_array_equal(a[0], b[1])
    np.testing.assert_array_equal(a[1], b[0])


def _recall(ids, truth_ids):
    k = ids.shape[1]
    return np.mean([
        len(set(a.tolist()) & set(b.tolist())) / k for a, b in zip(ids, truth_ids)
    ])


@pytest.mark.parametrize("impl_name", ["pure", "compiled"])
def test_hnsw_recall_against_exact(impl_name, random_unit):
    if impl_name == "compiled" and not _kernels.HAVE_COMPILED:
        pytest.skip("compiled kernels not built")
    cls = hnsw_py.HnswGraph if impl_name == "pure" else \
        __import__("tuplematch._kernels._hnsw_c", fromlist=["HnswGraph"]).HnswGraph
    vecs = random_unit(400, 24, seed=8)
    graph = cls(vecs, 16, 200, 0)
    ids, dists = graph.search_batch(vecs, 5, 64)
    exact_ids, exact_dists = ExactIndex(vecs).query_batch(vecs, 5)
    assert _recall(ids, exact_ids) >= 0.99
    # distances are real cosine distances, sorted ascending
    assert np.all(np.diff(dists, axis=1) >= -1e-12)
    assert np.all(dists >= 0.0)
    # each point must find itself at distance zero
    assert np.array_equal(ids[:, 0], np.arange(400))


def test_level_draws_are_seeded_and_geometric():
    levels = hnsw_py.draw_levels(5000, 16, seed=1)
    assert levels == hnsw_py.draw_levels(5000, 16, seed=1)
    assert levels != hnsw_py.draw_levels(5000, 16, seed=2)
    assert min(levels) == 0
    # level >= 1 with probability 1/degree: 5000/16 ~ 312, allow wide slack
    upper = sum(1 for l in levels if l >= 1)
    assert 150 < upper < 600


def test_hnsw_handles_k_past_size(random_unit):
    vecs = random_unit(5, 4, seed=0)
    graph = hnsw_py.HnswGraph(vecs, 16, 50, seed=0)
    ids, dists = graph.search_batch(vecs[:2], 9, 64)
    assert ids.shape == (2, 9)
    assert set(ids[0, :5].tolist()) == set(range(5))
    assert np.all(ids[:, 5:] == -1)
    assert np.all(np.isinf(dists[:, 5:]))


def test_pure_env_var_forces_fallback():
    code = (
        "import tuplematch._kernels as k\n"
        "print(k.HAVE_COMPILED, k.USING_COMPILED, "
        "k.ngram_count_matrix is k.hashing_py.ngram_count_matrix)\n"
    )
    env = dict(os.environ, TUPLEMATCH_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env)
    have, using, is_pure = out.stdout.split()
    assert using == "False"
    assert is_pure == "True"
    if have == "True":  # the build in this checkout has the extensions
        env2 = dict(os.environ)
        env2.pop("TUPLEMATCH_PURE", None)
        out2 = subprocess.run([sys.executable, "-c", code], capture_output=True,
                              text=True, env=env2)
        assert out2.stdout.split()[1] == "True"
