"""Compiled inner loops (numba) for sketches and gap-polynomial evaluation."""
from __future__ import annotations

import numba as nb
import numpy as np

_K1 = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xD6E8FEB86659FD93)


@nb.njit(cache=True, inline="always")
def _bit(label, key):
    # multiply-xorshift-multiply mix of (label, per-repetition key); top bit is phi
    v = np.uint64(label) * _K1 + key
    v ^= v >> np.uint64(32)
    v *= _M1
    return v >> np.uint64(63)


@nb.njit(cache=True)
def phi_from_labels(labels, keys):
    n, reps = labels.shape
    out = np.empty((n, reps), np.uint8)
    for i in range(n):
        for r in range(reps):
            out[i, r] = _bit(labels[i, r], keys[r])
    return out


@nb.njit(cache=True)
def words_from_labels(labels, keys, words, r0):
    """Set bit 2r + phi_r(label) for each repetition r (offset r0) in packed rows."""
    n, reps = labels.shape
    for i in range(n):
        for r in range(reps):
            pos = 2 * (r0 + r) + _bit(labels[i, r], keys[r])
            words[i, pos >> 6] |= np.uint64(1) << np.uint64(pos & 63)


@nb.njit(cache=True)
def words_from_projections(proj, scale, b, inv_w, keys, words, r0):
    """Like words_from_labels with label = floor((proj scale + b) / w); r0 must be a multiple of 32."""
    n, reps = proj.shape
    for i in range(n):
        for q in range(0, reps, 32):
            acc = np.uint64(0)
            for rr in range(min(32, reps - q)):
                r = q + rr
                x = (proj[i, r] * scale + b[r]) * inv_w
                lab = np.int64(x)
                if x < lab:
                    lab -= 1
                acc |= np.uint64(1) << np.uint64(2 * rr + _bit(lab, keys[r]))
            words[i, (2 * (r0 + q)) >> 6] |= acc


@nb.njit(cache=True, inline="always")
def _popcount(v):
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (v * np.uint64(0x0101010101010101)) >> np.uint64(56)


@nb.njit(cache=True, inline="always")
def _sliced_pair(XS, YS, i, j, acc):
    k, W = XS.shape[1], XS.shape[2]
    for w in range(W):
        acc[w] = XS[i, 0, w] & YS[j, 0, w]
    for t in range(1, k):
        for w in range(W):
            acc[w] ^= XS[i, t, w] & YS[j, t, w]
    c = np.uint64(0)
    for w in range(W):
        c += _popcount(acc[w])
    return c


@nb.njit(cache=True)
def sliced_counts(XS, YS):
    """counts[i, j] = popcount(XOR_t XS[i, t] & YS[j, t]) summed over words.

    XS: (na, k, W), YS: (nb, k, W) bit-sliced micro-polynomial inputs.
    """
    na, k, W = XS.shape
    nbv = YS.shape[0]
    out = np.zeros((na, nbv), np.int64)
    acc = np.empty(W, np.uint64)
    for i in range(na):
        for j in range(nbv):
            out[i, j] = _sliced_pair(XS, YS, i, j, acc)
    return out


@nb.njit(cache=True)
def sliced_first_at_most(XS, YS, limit):
    """First (i, j) in row-major order with count <= limit, or (-1, -1)."""
    na, k, W = XS.shape
    nbv = YS.shape[0]
    acc = np.empty(W, np.uint64)
    for i in range(na):
        for j in range(nbv):
            if _sliced_pair(XS, YS, i, j, acc) <= limit:
                return i, j
    return -1, -1


@nb.njit(cache=True)
def sliced_first_above(XS, YS, limit):
    """First (i, j) with count > limit, or (-1, -1)."""
    na, k, W = XS.shape
    nbv = YS.shape[0]
    acc = np.empty(W, np.uint64)
    for i in range(na):
        for j in range(nbv):
            if _sliced_pair(XS, YS, i, j, acc) > limit:
                return i, j
    return -1, -1


@nb.njit(cache=True)
def ip_matrix(PA, PB):
    na, W = PA.shape
    nbv = PB.shape[0]
    out = np.empty((na, nbv), np.int64)
    for i in range(na):
        for j in range(nbv):
            c = np.uint64(0)
            for w in range(W):
                c += _popcount(PA[i, w] & PB[j, w])
            out[i, j] = c
    return out


@nb.njit(cache=True, inline="always")
def _spread(x):
    # bits 0..31 of x move to even positions 0, 2, ..., 62
    x &= np.uint64(0xFFFFFFFF)
    x = (x | (x << np.uint64(16))) & np.uint64(0x0000FFFF0000FFFF)
    x = (x | (x << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    x = (x | (x << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    x = (x | (x << np.uint64(2))) & np.uint64(0x3333333333333333)
    x = (x | (x << np.uint64(1))) & np.uint64(0x5555555555555555)
    return x


@nb.njit(cache=True)
def reverse_packed(P, d, yside):
    """Packed reversal gadget: x-side bit v -> (1-v, v), y-side bit v -> (1, 1-v)."""
    n, W = P.shape
    Wout = max(1, (2 * d + 63) // 64)
    out = np.zeros((n, Wout), np.uint64)
    for i in range(n):
        for k in range(W):
            v = P[i, k]
            for h in range(2):
                o = 2 * k + h
                if o >= Wout:
                    break
                lo = 64 * k + 32 * h            # first coordinate covered by this half
                cnt = min(32, d - lo)
                if cnt <= 0:
                    break
                valid = (np.uint64(1) << np.uint64(cnt)) - np.uint64(1) if cnt < 32 else np.uint64(0xFFFFFFFF)
                half = (v >> np.uint64(32 * h)) & valid
                comp = (~half) & valid
                if yside:
                    out[i, o] = _spread(valid) | (_spread(comp) << np.uint64(1))
                else:
                    out[i, o] = _spread(comp) | (_spread(half) << np.uint64(1))
    return out


@nb.njit(cache=True)
def coordinate_masks(Ts, d):
    """masks[c, t] = packed bits over micros j of [Ts[j, t] == c]."""
    m, k = Ts.shape
    W = max(1, (m + 63) // 64)
    masks = np.zeros((d, k, W), np.uint64)
    for j in range(m):
        for t in range(k):
            masks[Ts[j, t], t, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return masks


@nb.njit(cache=True)
def slice_rows(X, masks, zmask, use_z):
    """Bit-sliced rows: out[i, t] = OR of masks[c, t] over coordinates c with X[i, c] = 1."""
    n, d = X.shape
    _, k, W = masks.shape
    out = np.zeros((n, k, W), np.uint64)
    for i in range(n):
        for c in range(d):
            if X[i, c]:
                for t in range(k):
                    for w in range(W):
                        out[i, t, w] |= masks[c, t, w]
        if use_z:
            for t in range(k):
                for w in range(W):
                    out[i, t, w] &= zmask[t, w]
    return out
