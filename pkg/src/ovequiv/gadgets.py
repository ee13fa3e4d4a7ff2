"""Exact embedding gadgets between Boolean inner-product problems.

Vectors here are unpacked 0/1 numpy arrays; a 2-D array is treated as a batch
of row vectors.  Instance-level wrappers return a DimensionRecord alongside the
reduced instance so pipelines can refuse blow-ups.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .instances import BooleanPairInstance, ExactIPInstance, SetFamilyInstance

DEFAULT_CAP_DIM = 1 << 20


class BlowupError(ValueError):
    pass


@dataclass(frozen=True)
class DimensionRecord:
    gadget: str
    d_in: int
    d_out: int
    threshold: int | None = None


def check_cap(d_out: int, cap: int | None, what: str) -> None:
    cap = DEFAULT_CAP_DIM if cap is None else cap
    if d_out > cap:
        raise BlowupError(f"{what}: output dimension {d_out} exceeds cap {cap}")


def _side(side: str) -> str:
    if side in ("x", "x-side", "a", "A"):
        return "x"
    if side in ("y", "y-side", "b", "B"):
        return "y"
    raise ValueError(f"side must be 'x' or 'y', got {side!r}")


# per-bit table: phi_x(0)=(1,0), phi_x(1)=(0,1), phi_y(0)=(1,1), phi_y(1)=(1,0)
_REV = {"x": np.array([[1, 0], [0, 1]], np.uint8), "y": np.array([[1, 1], [1, 0]], np.uint8)}


def reverse_embed(x, side: str) -> np.ndarray:
    """Length-2d embedding with <rev_x(x), rev_y(y)> = d - <x,y>."""
    x = np.asarray(x, dtype=np.uint8)
    out = _REV[_side(side)][x]
    return out.reshape(x.shape[:-1] + (2 * x.shape[-1],))


def exactip_to_minip_length(d: int, m: int) -> int:
    return d * d + 4 * d * m + (5 * d * d - (2 * d * m - m * m))


def exactip_to_minip_embed(x, m: int, side: str) -> np.ndarray:
    """(x~, rev(x) repeated 2m times, ones) with x~_(i,j) = x_i x_j.

    Paired embeddings have inner product (<x,y> - m)^2 + 5d^2, so the minimum
    5d^2 is reached exactly when <x,y> = m.
    """
    x = np.asarray(x, dtype=np.uint8)
    d = x.shape[-1]
    if not 0 <= m <= d:
        raise ValueError(f"target m={m} outside [0, d={d}]")
    lead = x.shape[:-1]
    outer = (x[..., :, None] & x[..., None, :]).reshape(lead + (d * d,))
    rev = np.tile(reverse_embed(x, side), 2 * m) if m else np.zeros(lead + (0,), np.uint8)
    pad = np.ones(lead + (5 * d * d - (2 * d * m - m * m),), np.uint8)
    return np.concatenate([outer, rev, pad], axis=-1)


def unary_grid(a, r: int, side: str) -> np.ndarray:
    """r x r grid per entry: x-side cell (i,j) is [i <= a], y-side is [j <= b]."""
    a = np.asarray(a, dtype=np.int64)
    if a.size and (a.min() < 0 or a.max() > r):
        raise ValueError(f"entries must lie in 0..{r}")
    idx = np.arange(1, r + 1)
    rows = (idx <= a[..., None]).astype(np.uint8)                 # (..., r)
    if _side(side) == "x":
        grid = np.repeat(rows[..., :, None], r, axis=-1)          # cell (i,j) = [i <= a]
    else:
        grid = np.repeat(rows[..., None, :], r, axis=-2)          # cell (i,j) = [j <= b]
    return grid.reshape(a.shape + (r * r,)).reshape(a.shape[:-1] + (a.shape[-1] * r * r,))


def integer_embed_threshold(d: int, r: int) -> int:
    D1 = d * r * r
    return 4 * D1 * D1


def integer_embed(x, r: int, m: int, side: str) -> np.ndarray:
    """Embed x in {0..r}^d so paired inner product equals M = 4(d r^2)^2 iff <x,y> = m.

    Stages: unary grid (inner product x.y), then the ExactIP->MinIP gadget,
    zero padding to the length at m = d r^2 so M does not depend on m, then the
    reversal gadget, which turns the minimum into a maximum.
    """
    x = np.asarray(x)
    d = x.shape[-1]
    D1 = d * r * r
    if not 0 <= m <= D1:
        raise ValueError(f"target m={m} outside [0, {D1}]")
    g = unary_grid(x, r, side)
    e = exactip_to_minip_embed(g, m, side)
    full = exactip_to_minip_length(D1, D1)
    pad = np.zeros(e.shape[:-1] + (full - e.shape[-1],), np.uint8)
    return reverse_embed(np.concatenate([e, pad], axis=-1), side)


# ---------------------------------------------------------------- instance wrappers

def reverse_packed(P: np.ndarray, d: int, side: str) -> np.ndarray:
    """reverse_embed on packed rows, without unpacking."""
    from ._kernels import reverse_packed as _rev
    return _rev(np.ascontiguousarray(P, dtype=np.uint64), d, _side(side) == "y")


def reverse_instance(inst: BooleanPairInstance, cap: int | None = None):
    """MinIP -> MaxIP (and back): MAX of the output equals d - MIN of the input."""
    check_cap(2 * inst.d, cap, "reverse")
    out = BooleanPairInstance.from_packed(2 * inst.d, reverse_packed(inst.PA, inst.d, "x"),
                                          reverse_packed(inst.PB, inst.d, "y"),
                                          "maxip" if inst.kind == "minip" else "minip")
    return out, DimensionRecord("reverse", inst.d, 2 * inst.d, inst.d)


def exactip_to_minip(inst: ExactIPInstance, cap: int | None = None):
    """ExactIP -> MinIP: yes iff the reduced MIN equals 5d^2."""
    d, m = inst.base.d, inst.target
    L = exactip_to_minip_length(d, m)
    check_cap(L, cap, "exactip-minip")
    out = BooleanPairInstance(L, exactip_to_minip_embed(inst.base.A, m, "x"),
                              exactip_to_minip_embed(inst.base.B, m, "y"), "minip")
    return out, DimensionRecord("exactip-minip", d, L, 5 * d * d)


def integer_instance(A, B, r: int, m: int, cap: int | None = None):
    """Integer ExactIP over {0..r}^d -> Boolean MaxIP with threshold M."""
    A, B = np.asarray(A), np.asarray(B)
    d = A.shape[1]
    D1 = d * r * r
    L = 2 * exactip_to_minip_length(D1, D1)
    check_cap(L, cap, "integer")
    out = BooleanPairInstance(L, integer_embed(A, r, m, "x"), integer_embed(B, r, m, "y"), "maxip")
    return out, DimensionRecord("integer", d, L, integer_embed_threshold(d, r))


def jaccard_embed(inst: BooleanPairInstance) -> SetFamilyInstance:
    """Sets over universe 3d with J(S_x, T_y) = <x,y> / (2d - <x,y>)."""
    d = inst.d

    def sets(X, first):
        out = []
        for x in X:
            w = int(x.sum())
            s = [i + 1 for i in np.flatnonzero(x)]
            off = d if first else 2 * d
            s += [off + i + 1 for i in range(d - w)]
            out.append(sorted(s))
        return out
    return SetFamilyInstance(3 * d, sets(inst.A, True), sets(inst.B, False),
                             {"gadget": "jaccard", "d": d})


def jaccard_of(S, T) -> Fraction:
    S, T = set(S), set(T)
    if not S and not T:
        return Fraction(1)
    return Fraction(len(S & T), len(S | T))


def jaccard_recover(t: float, d: int) -> float:
    """Inverse of the Jaccard identity: w = 2 d t / (t + 1)."""
    if isinstance(t, Fraction):
        return 2 * d * t / (t + 1)
    return 2.0 * d * t / (t + 1.0)


# ---------------------------------------------------------------- enumeration reductions

def minip_via_exactip(inst: BooleanPairInstance, exactip_solver) -> int:
    """Smallest k with a yes answer from the ExactIP solver (d if none)."""
    for k in range(inst.d + 1):
        v = exactip_solver(ExactIPInstance(inst, k))
        if getattr(v, "decision", v):
            return k
    return inst.d


def maxip_via_exactip(inst: BooleanPairInstance, exactip_solver) -> int:
    for k in range(inst.d, -1, -1):
        v = exactip_solver(ExactIPInstance(inst, k))
        if getattr(v, "decision", v):
            return k
    return 0


def ov_via_minip(inst: BooleanPairInstance, minip_solver) -> bool:
    """OV asks whether the minimum inner product is zero."""
    v = minip_solver(inst)
    return getattr(v, "value", v) == 0


def maxip_via_minip(inst: BooleanPairInstance, minip_solver) -> int:
    rev, _ = reverse_instance(inst)
    v = minip_solver(rev)
    return inst.d - getattr(v, "value", v)


def minip_via_maxip(inst: BooleanPairInstance, maxip_solver) -> int:
    rev, _ = reverse_instance(inst)
    v = maxip_solver(rev)
    return inst.d - getattr(v, "value", v)
