"""Packed bit vectors.

Coordinate i of a vector lives in word i // 64 at bit i % 64.  Every Boolean
inner product in the package is a popcount of AND over these words.
"""
from __future__ import annotations

import numpy as np

WORD = 64
# rough cap on the number of uint64 cells touched per chunk of a pairwise scan
_CHUNK_CELLS = 1 << 22


def n_words(d: int) -> int:
    return max(1, -(-d // WORD))


def pack(bits) -> np.ndarray:
    """Pack a (n, d) 0/1 array into (n, words) uint64."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim == 1:
        return pack(bits[None, :])[0]
    n, d = bits.shape
    w = n_words(d)
    padded = np.zeros((n, w * WORD), dtype=np.uint8)
    padded[:, :d] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack(words: np.ndarray, d: int) -> np.ndarray:
    """Inverse of pack: (n, words) uint64 -> (n, d) uint8."""
    words = np.asarray(words, dtype=np.uint64)
    if words.ndim == 1:
        return unpack(words[None, :], d)[0]
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :d]


def popcount(words: np.ndarray) -> np.ndarray:
    """Number of ones per row."""
    return np.bitwise_count(np.asarray(words, dtype=np.uint64)).sum(axis=-1, dtype=np.int64)


def ip_matrix(PA: np.ndarray, PB: np.ndarray) -> np.ndarray:
    """All cross inner products, shape (len(PA), len(PB))."""
    from . import _kernels
    return _kernels.ip_matrix(np.ascontiguousarray(PA, dtype=np.uint64),
                              np.ascontiguousarray(PB, dtype=np.uint64))


def ip_matrix_numpy(PA: np.ndarray, PB: np.ndarray) -> np.ndarray:
    """Pure numpy version of ip_matrix (kept as a cross-check)."""
    na, w = PA.shape
    nb = PB.shape[0]
    out = np.empty((na, nb), dtype=np.int64)
    step = max(1, _CHUNK_CELLS // max(1, nb * w))
    for s in range(0, na, step):
        blk = PA[s:s + step, None, :] & PB[None, :, :]
        out[s:s + step] = np.bitwise_count(blk).sum(axis=-1, dtype=np.int64)
    return out


def ip_rows(PA: np.ndarray, PB: np.ndarray) -> np.ndarray:
    """Row-aligned inner products <PA[i], PB[i]>."""
    return np.bitwise_count(PA & PB).sum(axis=-1, dtype=np.int64)


def to_string(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def from_string(s: str) -> np.ndarray:
    if any(c not in "01" for c in s):
        raise ValueError(f"bit string has characters outside 0/1: {s!r}")
    return np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")
