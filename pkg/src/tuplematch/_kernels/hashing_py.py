"""Pure-Python twin of the n-gram hashing kernel.

Must stay bit-identical to ``_hashing_c``: same FNV-1a arithmetic over the
UTF-32-LE bytes of each character window, same bucket and sign rules.  The
compiled kernel is generated from the same definition; parity is enforced by
tests.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_SIGN_BIT = 1 << 63


def ngram_count_matrix(texts: list[str], dim: int, lo: int, hi: int) -> np.ndarray:
    """Signed character n-gram counts, one row per text.

    Each length-``n`` character window (``lo <= n <= hi``) is hashed with
    FNV-1a over its UTF-32-LE bytes; the count at bucket ``hash % dim`` moves
    by +1 or -1 depending on the hash's top bit.  Rows are raw counts — no
    normalization here.
    """
    out = np.zeros((len(texts), dim), dtype=np.float64)
    for row, text in enumerate(texts):
        buf = text.encode("utf-32-le")
        n_chars = len(buf) // 4
        counts = out[row]
        for n in range(lo, hi + 1):
            if n > n_chars:
                break
            span = 4 * n
            for start in range(0, 4 * (n_chars - n + 1), 4):
                h = _FNV_OFFSET
                for b in buf[start:start + span]:
                    h = ((h ^ b) * _FNV_PRIME) & _MASK64
                if h & _SIGN_BIT:
                    counts[h % dim] -= 1.0
                else:
                    counts[h % dim] += 1.0
    return out
