"""Shared test helpers."""

import numpy as np
import pytest

from tuplematch.merging import EntityGroup, WorkingTable
from tuplematch.model import EntityRef


def _unit_rows(mat):
    mat = np.asarray(mat, dtype=np.float64)
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def singleton_table(source_id, vectors, level=0):
    """A working table of singleton groups over the given row vectors."""
    vectors = np.ascontiguousarray(vectors, dtype=np.float64)
    groups = [
        EntityGroup(members=(EntityRef(source_id, r),), centroid=vectors[r], raw=vectors[r])
        for r in range(vectors.shape[0])
    ]
    return WorkingTable(groups=groups, level=level)


@pytest.fixture
def unit_rows():
    """Row-normalize a matrix; convenience for building test vectors."""
    return _unit_rows


@pytest.fixture
def random_unit():
    """Factory for seeded random unit-vector matrices: random_unit(n, dim, seed)."""
    def make(n, dim, seed=0):
        return _unit_rows(np.random.default_rng(seed).standard_normal((n, dim)))
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
