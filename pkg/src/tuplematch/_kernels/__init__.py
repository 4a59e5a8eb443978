"""Kernel selection: compiled Cython extensions with pure-Python fallbacks.

The compiled modules are optional — installs without a C toolchain simply run
the pure twins.  Set ``TUPLEMATCH_PURE=1`` to force the pure path even when
the extensions are present (used by the kernel benchmark and parity tests).

Exports
-------
ngram_count_matrix : signed char n-gram count rows (bit-identical twins).
HnswGraph : navigable-small-world index (twins agree up to float ties).
HAVE_COMPILED / USING_COMPILED : what's available vs what's active.
"""

import os

from tuplematch._kernels import hashing_py, hnsw_py

_FORCE_PURE = os.environ.get("TUPLEMATCH_PURE", "") not in ("", "0")

try:
    from tuplematch._kernels import _hashing_c, _hnsw_c
    HAVE_COMPILED = True
except ImportError:  # no compiler at install time, or a broken build
    _hashing_c = None
    _hnsw_c = None
    HAVE_COMPILED = False

USING_COMPILED = HAVE_COMPILED and not _FORCE_PURE

if USING_COMPILED:
    ngram_count_matrix = _hashing_c.ngram_count_matrix
    HnswGraph = _hnsw_c.HnswGraph
else:
    ngram_count_matrix = hashing_py.ngram_count_matrix
    HnswGraph = hnsw_py.HnswGraph

__all__ = [
    "ngram_count_matrix",
    "HnswGraph",
    "HAVE_COMPILED",
    "USING_COMPILED",
    "hashing_py",
    "hnsw_py",
]
