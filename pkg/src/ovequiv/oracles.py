"""Brute-force reference solvers.

Witness indices are 1-based and ties go to the lexicographically lowest tuple.
"""
from __future__ import annotations

import json
from fractions import Fraction
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bits
from .instances import (BooleanPairInstance, CnfInstance, ExactIPInstance, IntegerPairInstance,
                        RealPairInstance, SetFamilyInstance, ThreeSumInstance, TripleInstance)


@dataclass(frozen=True)
class OracleVerdict:
    decision: Optional[bool] = None
    value: Optional[float] = None
    witness: Optional[tuple] = None
    assignment: Optional[tuple] = None

    def to_json(self) -> str:
        d = {k: v for k, v in self.__dict__.items() if v is not None}
        if isinstance(d.get("value"), Fraction):
            d["value"] = float(d["value"])
        if "witness" in d:
            d["witness"] = list(d["witness"])
        if "assignment" in d:
            d["assignment"] = "".join(map(str, d["assignment"]))
        return json.dumps(d, sort_keys=True)


def _first(mask: np.ndarray) -> Optional[tuple]:
    idx = np.flatnonzero(mask.ravel())
    if idx.size == 0:
        return None
    return tuple(int(v) + 1 for v in np.unravel_index(idx[0], mask.shape))


def ip_matrix(inst: BooleanPairInstance) -> np.ndarray:
    return bits.ip_matrix(inst.PA, inst.PB)


def ov_decide(inst: BooleanPairInstance) -> OracleVerdict:
    w = _first(ip_matrix(inst) == 0)
    return OracleVerdict(decision=w is not None, witness=w)


def max_ip(inst: BooleanPairInstance) -> OracleVerdict:
    M = ip_matrix(inst)
    v = int(M.max())
    return OracleVerdict(value=v, witness=_first(M == v))


def min_ip(inst: BooleanPairInstance) -> OracleVerdict:
    M = ip_matrix(inst)
    v = int(M.min())
    return OracleVerdict(value=v, witness=_first(M == v))


def exactip_decide(inst: ExactIPInstance) -> OracleVerdict:
    w = _first(ip_matrix(inst.base) == inst.target)
    return OracleVerdict(decision=w is not None, witness=w)


def _pth_power_matrix(A, B, p) -> np.ndarray:
    out = np.empty((len(A), len(B)))
    step = max(1, (1 << 20) // max(1, len(B) * A.shape[1]))
    for s in range(0, len(A), step):
        out[s:s + step] = (np.abs(A[s:s + step, None, :] - B[None, :, :]) ** p).sum(-1)
    return out


def bcp(inst: RealPairInstance) -> OracleVerdict:
    """Closest cross pair distance under the l_p norm."""
    D = _pth_power_matrix(inst.A, inst.other, inst.p)
    v = D.min()
    return OracleVerdict(value=float(v ** (1.0 / inst.p)), witness=_first(D == v))


def fp(inst: RealPairInstance) -> OracleVerdict:
    """Furthest pair distance (over A x A when B is absent)."""
    D = _pth_power_matrix(inst.A, inst.other, inst.p)
    v = D.max()
    return OracleVerdict(value=float(v ** (1.0 / inst.p)), witness=_first(D == v))


def jaccard_matrix(inst: SetFamilyInstance):
    """Intersection and union sizes for every cross pair."""
    PA = bits.pack(inst.incidence(inst.A))
    PB = bits.pack(inst.incidence(inst.B))
    inter = bits.ip_matrix(PA, PB)
    union = bits.popcount(PA)[:, None] + bits.popcount(PB)[None, :] - inter
    return inter, union


def jaccard_max(inst: SetFamilyInstance) -> OracleVerdict:
    inter, union = jaccard_matrix(inst)
    with np.errstate(invalid="ignore", divide="ignore"):
        J = np.where(union == 0, 1.0, inter / np.maximum(union, 1))
    w = _first(J == J.max())
    i, j = w[0] - 1, w[1] - 1
    # exact value from the attaining counts; float ties are exact at these sizes
    v = Fraction(1) if union[i, j] == 0 else Fraction(int(inter[i, j]), int(union[i, j]))
    return OracleVerdict(value=v, witness=w)


def three_ov_decide(inst: TripleInstance) -> OracleVerdict:
    for i in range(len(inst.PA)):
        AB = inst.PA[i][None, :] & inst.PB
        M = bits.ip_matrix(AB, inst.PC)
        w = _first(M == 0)
        if w is not None:
            return OracleVerdict(decision=True, witness=(i + 1,) + w)
    return OracleVerdict(decision=False)


def hopcroft_decide(inst: IntegerPairInstance) -> OracleVerdict:
    if inst.d * inst.bound ** 2 < 2 ** 62:
        M = inst.A @ inst.B.T
    else:
        M = np.array(inst.A.astype(object)) @ np.array(inst.B.astype(object)).T
    w = _first(np.asarray(M == 0))
    return OracleVerdict(decision=w is not None, witness=w)


def three_sum_decide(inst: ThreeSumInstance) -> OracleVerdict:
    first_c = {}
    for k, c in enumerate(inst.C):
        first_c.setdefault(c, k)
    for i, a in enumerate(inst.A):
        for j, b in enumerate(inst.B):
            k = first_c.get(-(a + b))
            if k is not None:
                return OracleVerdict(decision=True, witness=(i + 1, j + 1, k + 1))
    return OracleVerdict(decision=False)


def _clause_masks(inst: CnfInstance):
    pos = np.zeros(inst.m, dtype=np.int64)
    neg = np.zeros(inst.m, dtype=np.int64)
    for c, cl in enumerate(inst.clauses):
        for l in cl:
            if l > 0:
                pos[c] |= 1 << (l - 1)
            else:
                neg[c] |= 1 << (-l - 1)
    return pos, neg


def maxsat_opt(inst: CnfInstance) -> OracleVerdict:
    """Exhaustive scan over all 2^n assignments."""
    n = inst.num_vars
    if n > 26:
        raise ValueError("maxsat_opt enumerates 2^n assignments; n must be <= 26")
    pos, neg = _clause_masks(inst)
    full = (1 << n) - 1
    best, arg = -1, 0
    step = 1 << 14
    for s in range(0, 1 << n, step):
        a = np.arange(s, min(s + step, 1 << n), dtype=np.int64)
        sat = ((a[:, None] & pos[None, :]) != 0) | (((~a & full)[:, None] & neg[None, :]) != 0)
        cnt = sat.sum(axis=1)
        j = int(cnt.argmax())
        if cnt[j] > best:
            best, arg = int(cnt[j]), int(a[j])
    assignment = tuple((arg >> v) & 1 for v in range(n))
    return OracleVerdict(value=best, assignment=assignment)
