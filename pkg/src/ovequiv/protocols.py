"""Sigma_2 communication protocols and their compilation into OV / 3-OV bundles.

A protocol has Merlin (existential, m1 bits), Megan (universal, m2 bits) and an
ell-bit transcript.  For each Merlin string a the compiler builds one OV
instance whose vectors are, per Megan string b, the 2^ell-long indicators

    R_x(a,b)[w] = [w consistent with x and w makes Alice reject]
    R_y(a,b)[w] = [w consistent with y]

so <R_x(a), R_y(a)> = 0 iff Alice accepts for every b.  The bundle is yes iff
some Merlin string yields a yes instance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .gadgets import BlowupError
from .instances import (BooleanPairInstance, ExactIPInstance, IntegerPairInstance, OrBundle,
                        ThreeSumInstance, TripleInstance)

DEFAULT_CAP_DIM = 1 << 20
DEFAULT_CAP_BUNDLE = 1 << 16


def clog2(v: int) -> int:
    return 0 if v <= 1 else (v - 1).bit_length()


@dataclass
class ProtocolSpec:
    """Executable protocol.  Predicates take (input, a, b, w) with a, b, w as ints.

    The optional rows_* callables are vectorized versions of the same predicates
    returning (n, 2^m2, 2^ell) boolean arrays for one Merlin string; the
    compiler uses them when present and the scalar predicates otherwise.
    """
    name: str
    m1: int
    m2: int
    ell: int
    consistency_x: Callable
    consistency_y: Callable
    accepts: Callable
    parties: int = 2
    consistency_z: Optional[Callable] = None
    merlin_candidates: Optional[Callable[[], Sequence[int]]] = None
    rows_x: Optional[Callable] = None
    rows_y: Optional[Callable] = None
    rows_z: Optional[Callable] = None
    info: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 1 << (self.m2 + self.ell)

    def merlins(self, prune: bool = True) -> Sequence[int]:
        if prune and self.merlin_candidates is not None:
            return self.merlin_candidates()
        return range(1 << self.m1)

    def consistent(self, inputs, a, b, w) -> bool:
        preds = [self.consistency_x, self.consistency_y, self.consistency_z][:self.parties]
        return all(p(v, a, b, w) for p, v in zip(preds, inputs))

    def decide(self, *inputs, prune: bool = True) -> bool:
        """F(x, y[, z]) by brute force: exists a, for all b, Alice accepts the consistent w."""
        x = inputs[0]
        for a in self.merlins(prune):
            ok = True
            for b in range(1 << self.m2):
                ws = [w for w in range(1 << self.ell) if self.consistent(inputs, a, b, w)]
                if len(ws) != 1:
                    raise AssertionError(f"{len(ws)} consistent transcripts for a={a}, b={b}")
                if not self.accepts(x, a, b, ws[0]):
                    ok = False
                    break
            if ok:
                return True
        return False

    def transcript_unique(self, *inputs, prune: bool = False) -> bool:
        for a in self.merlins(prune):
            for b in range(1 << self.m2):
                c = sum(self.consistent(inputs, a, b, w) for w in range(1 << self.ell))
                if c != 1:
                    return False
        return True


# ---------------------------------------------------------------- compiler

def _check_caps(proto: ProtocolSpec, merlins, cap_dim, cap_bundle):
    cap_dim = DEFAULT_CAP_DIM if cap_dim is None else cap_dim
    cap_bundle = DEFAULT_CAP_BUNDLE if cap_bundle is None else cap_bundle
    if proto.dim > cap_dim:
        raise BlowupError(f"{proto.name}: compiled dimension 2^{proto.m2 + proto.ell} = {proto.dim} "
                          f"exceeds cap {cap_dim}")
    if len(merlins) > cap_bundle:
        raise BlowupError(f"{proto.name}: bundle size {len(merlins)} exceeds cap {cap_bundle}")


def _scalar_rows(proto, pred, X, a, reject_with=None):
    n2, nl = 1 << proto.m2, 1 << proto.ell
    R = np.zeros((len(X), n2, nl), dtype=bool)
    for i, x in enumerate(X):
        for b in range(n2):
            for w in range(nl):
                if pred(x, a, b, w):
                    R[i, b, w] = reject_with is None or not reject_with(x, a, b, w)
    return R


def _reject_rows(proto, X, a, vectorized):
    if vectorized and proto.rows_x is not None:
        return proto.rows_x(X, a)
    return _scalar_rows(proto, proto.consistency_x, X, a, proto.accepts)


def _cons_rows(proto, which, X, a, vectorized):
    fast = {"y": proto.rows_y, "z": proto.rows_z}[which]
    if vectorized and fast is not None:
        return fast(X, a)
    pred = {"y": proto.consistency_y, "z": proto.consistency_z}[which]
    return _scalar_rows(proto, pred, X, a)


def compile_to_ov(proto: ProtocolSpec, A, B, *, prune: bool = True, vectorized: bool = True,
                  cap_dim: int | None = None, cap_bundle: int | None = None,
                  provenance: str | None = None) -> OrBundle:
    """One OV instance of dimension 2^(m2+ell) per (surviving) Merlin string."""
    if proto.parties != 2:
        raise ValueError("compile_to_ov needs a 2-party protocol")
    merlins = list(proto.merlins(prune))
    _check_caps(proto, merlins, cap_dim, cap_bundle)
    items = []
    for a in merlins:
        RX = _reject_rows(proto, A, a, vectorized).reshape(len(A), -1)
        RY = _cons_rows(proto, "y", B, a, vectorized).reshape(len(B), -1)
        items.append(BooleanPairInstance(proto.dim, RX, RY, "ov", {"merlin": int(a)}))
    return OrBundle("ov", items, provenance or proto.name, [int(a) for a in merlins])


def compile_to_3ov(proto: ProtocolSpec, A, B, C, *, prune: bool = True, vectorized: bool = True,
                   cap_dim: int | None = None, cap_bundle: int | None = None,
                   provenance: str | None = None) -> OrBundle:
    """3-party analogue: sum_w R_x R_y R_z = 0 iff Alice accepts for every b."""
    if proto.parties != 3:
        raise ValueError("compile_to_3ov needs a 3-party protocol")
    merlins = list(proto.merlins(prune))
    _check_caps(proto, merlins, cap_dim, cap_bundle)
    items = []
    for a in merlins:
        RX = _reject_rows(proto, A, a, vectorized).reshape(len(A), -1)
        RY = _cons_rows(proto, "y", B, a, vectorized).reshape(len(B), -1)
        RZ = _cons_rows(proto, "z", C, a, vectorized).reshape(len(C), -1)
        items.append(TripleInstance(proto.dim, RX, RY, RZ, {"merlin": int(a)}))
    return OrBundle("3ov", items, provenance or proto.name, [int(a) for a in merlins])


# ---------------------------------------------------------------- inner product protocol

def _all_words(nbits: int) -> np.ndarray:
    """(2^nbits, nbits) table; row w holds the bits of w, least significant first."""
    w = np.arange(1 << nbits, dtype=np.int64)
    return ((w[:, None] >> np.arange(nbits)) & 1).astype(np.int64)


def ip_protocol(d: int, k: int, group_len: int) -> ProtocolSpec:
    """Grouped protocol for [<x,y> = k] with group_len groups of ceil(d/group_len) bits.

    Merlin sends psi (one field per group), Alice rejects unless sum(psi) = k;
    Megan names a group i, Bob sends y_i and Alice accepts iff <x_i, y_i> = psi_i.
    Megan strings past the last group are accepted unconditionally (Bob sends 0).
    """
    g = int(group_len)
    if not 1 <= g <= d:
        raise ValueError(f"group_len must lie in [1, d={d}]")
    s = -(-d // g)
    fb = clog2(s + 1)
    m1, m2, ell = g * fb, clog2(g), s
    mask = (1 << fb) - 1
    weights = 1 << np.arange(s, dtype=np.int64)
    W = _all_words(s)

    def psi(a):
        return [(a >> (i * fb)) & mask for i in range(g)]

    def groups(x):
        x = np.asarray(x, dtype=np.int64)
        pad = np.zeros(x.shape[:-1] + (g * s,), np.int64)
        pad[..., :d] = x
        return pad.reshape(x.shape[:-1] + (g, s))

    def word_of(y, b):
        return int(groups(y)[b] @ weights) if b < g else 0

    def cons_x(x, a, b, w):
        return True

    def cons_y(y, a, b, w):
        return w == word_of(y, b)

    def accepts(x, a, b, w):
        ps = psi(a)
        if sum(ps) != k:
            return False
        if b >= g:
            return True
        xb = groups(x)[b]
        return int(sum(int(xb[j]) for j in range(s) if (w >> j) & 1)) == ps[b]

    # per-input caches: the group/word inner products and Bob's rows do not depend on a
    cache: dict = {}

    def _cached(tag, X, make):
        key = (tag, id(X))
        hit = cache.get(key)
        if hit is None or hit[0] is not X:
            hit = cache[key] = (X, make(np.asarray(X)))
        return hit[1]

    def rows_x(X, a):
        ip = _cached("x", X, lambda X_: groups(X_) @ W.T)          # (n, g, 2^s)
        R = np.zeros((len(ip), 1 << m2, 1 << ell), dtype=bool)
        ps = psi(a)
        if sum(ps) != k:
            R[:] = True
            return R
        R[:, :g, :] = ip != np.array(ps)[None, :, None]
        return R

    def _bob_rows(Y):
        R = np.zeros((len(Y), 1 << m2, 1 << ell), dtype=bool)
        codes = groups(Y) @ weights
        n = len(Y)
        for b in range(1 << m2):
            R[np.arange(n), b, codes[:, b] if b < g else 0] = True
        R.flags.writeable = False
        return R

    def rows_y(Y, a):
        return _cached("y", Y, _bob_rows)

    def candidates():
        out = []
        for ps in itertools.product(range(s + 1), repeat=g):
            if sum(ps) == k:
                out.append(sum(p << (i * fb) for i, p in enumerate(ps)))
        return sorted(out)

    return ProtocolSpec(f"ip(d={d},k={k},groups={g})", m1, m2, ell, cons_x, cons_y, accepts,
                        merlin_candidates=candidates, rows_x=rows_x, rows_y=rows_y,
                        info={"group_size": s, "field_bits": fb})


def exactip_to_ov(inst: ExactIPInstance, group_len: int, *, prune: bool = True,
                  cap_dim: int | None = None, cap_bundle: int | None = None) -> OrBundle:
    d, g = inst.base.d, int(group_len)
    if 1 <= g <= d:
        # refuse before ip_protocol tabulates all 2^ell transcripts
        bits_ = clog2(g) + -(-d // g)
        if bits_ > 62 or 1 << bits_ > (DEFAULT_CAP_DIM if cap_dim is None else cap_dim):
            raise BlowupError(f"exactip-ov: compiled dimension 2^{bits_} exceeds the dimension cap")
    proto = ip_protocol(d, inst.target, g)
    return compile_to_ov(proto, inst.base.A, inst.base.B, prune=prune, cap_dim=cap_dim,
                         cap_bundle=cap_bundle, provenance="exactip-ov")


# ---------------------------------------------------------------- CRT protocol for Hopcroft

@dataclass(frozen=True)
class CrtParams:
    primes: tuple
    t: int
    product: int


def first_primes():
    found = []
    c = 2
    while True:
        if all(c % p for p in found if p * p <= c):
            found.append(c)
            yield c
        c += 1


def crt_params(bound: int) -> CrtParams:
    """First t primes whose product exceeds bound."""
    primes, prod = [], 1
    for p in first_primes():
        if prod > bound:
            break
        primes.append(p)
        prod *= p
    return CrtParams(tuple(primes), len(primes), prod)


def zip_protocol(d: int, entry_bound: int, n: int | None = None) -> ProtocolSpec:
    """[<x,y> = 0] over integers with |entries| <= V via residues mod small primes.

    Merlin is silent, Megan names a prime p_i, Bob sends y mod p_i and Alice
    accepts iff <x, y> = 0 mod p_i.  The primes multiply past d V^2 >= |<x,y>|.
    n is accepted for interface symmetry; the bound here depends on d and V only.
    """
    crt = crt_params(d * entry_bound ** 2)
    t = crt.t
    width = max(1, clog2(max(crt.primes)))
    m2, ell = clog2(t), d * width
    fmask = (1 << width) - 1
    shifts = np.arange(d, dtype=np.int64) * width
    W = (np.arange(1 << ell, dtype=np.int64)[:, None] >> shifts[None, :]) & fmask   # (2^ell, d)

    def enc(y, b):
        if b >= t:
            return 0
        p = crt.primes[b]
        return int(sum((int(v) % p) << (j * width) for j, v in enumerate(y)))

    def cons_x(x, a, b, w):
        return True

    def cons_y(y, a, b, w):
        return w == enc(y, b)

    def accepts(x, a, b, w):
        if b >= t:
            return True
        p = crt.primes[b]
        return sum(int(v) * ((w >> (j * width)) & fmask) for j, v in enumerate(x)) % p == 0

    def rows_x(X, a):
        X = np.asarray(X, dtype=np.int64)
        R = np.zeros((len(X), 1 << m2, 1 << ell), dtype=bool)
        for b, p in enumerate(crt.primes):
            R[:, b, :] = ((X % p) @ W.T) % p != 0
        return R

    def rows_y(Y, a):
        Y = np.asarray(Y, dtype=np.int64)
        n_ = len(Y)
        R = np.zeros((n_, 1 << m2, 1 << ell), dtype=bool)
        for b in range(1 << m2):
            code = ((Y % crt.primes[b]) << shifts).sum(1) if b < t else np.zeros(n_, np.int64)
            R[np.arange(n_), b, code] = True
        return R

    return ProtocolSpec(f"zip(d={d},V={entry_bound})", 0, m2, ell, cons_x, cons_y, accepts,
                        merlin_candidates=lambda: [0], rows_x=rows_x, rows_y=rows_y,
                        info={"crt": crt, "width": width})


def hopcroft_to_ov(inst: IntegerPairInstance, *, cap_dim: int | None = None,
                   cap_bundle: int | None = None) -> OrBundle:
    proto = zip_protocol(inst.d, inst.bound, max(len(inst.A), len(inst.B)))
    return compile_to_ov(proto, inst.A, inst.B, cap_dim=cap_dim, cap_bundle=cap_bundle,
                         provenance="hopcroft-ov")


# ---------------------------------------------------------------- carry protocol for 3-SUM

@dataclass(frozen=True)
class CarryProof:
    carries: tuple      # c_0 .. c_l with c_0 = 0
    block_size: int

    def __post_init__(self):
        if self.carries[0] != 0 or any(c not in (0, 1, 2) for c in self.carries):
            raise ValueError("carries must lie in {0,1,2} with c_0 = 0")

    def merlin_index(self) -> int:
        return sum(c << (2 * (i - 1)) for i, c in enumerate(self.carries) if i >= 1)


def carry_proof(x: int, y: int, z: int, value_bits: int, block_size: int) -> CarryProof:
    """Honest carry sequence for the digitwise sum of three shifted values."""
    T = block_size
    l = -(-value_bits // T)
    mask = (1 << T) - 1
    c = [0]
    for i in range(l):
        s = ((x >> (T * i)) & mask) + ((y >> (T * i)) & mask) + ((z >> (T * i)) & mask) + c[-1]
        c.append(s >> T)
    return CarryProof(tuple(c), T)


def fzero_protocol(value_bits: int, block_size: int, shift: int | None = None) -> ProtocolSpec:
    """3-party protocol for x + y + z = target on shifted values in [0, 2^value_bits).

    Values are split into l = ceil(value_bits / T) base-2^T digits, the top one
    zero-padded.  Merlin sends carries c_1..c_l (2 bits each), Megan names a
    digit position i in 1..l+1, Bob and Charles send their digit i and Alice checks
        x_i + y_i + z_i + c_{i-1} = t_i + c_i 2^T    (c_0 = c_{l+1} = 0)
    where t = 3 * shift is the shifted target.
    """
    T = int(block_size)
    if T < 1:
        raise ValueError("block_size must be positive")
    shift = (1 << (value_bits - 1)) if shift is None else int(shift)
    target = 3 * shift
    l = -(-value_bits // T)
    mask = (1 << T) - 1
    m1, m2, ell = 2 * l, clog2(l + 1), 2 * T
    tdig = [(target >> (T * i)) & mask for i in range(l)] + [target >> (T * l)]

    def carries(a):
        return [0] + [(a >> (2 * i)) & 3 for i in range(l)] + [0]

    def digit(v, b):
        return (int(v) >> (T * b)) & mask if b < l else 0

    def cons_x(x, a, b, w):
        return True

    def cons_y(y, a, b, w):
        return (w & mask) == digit(y, b)

    def cons_z(z, a, b, w):
        return (w >> T) == digit(z, b)

    def accepts(x, a, b, w):
        c = carries(a)
        if 3 in c:
            return False
        if b > l:
            return True
        lhs = digit(x, b) + (w & mask) + (w >> T) + c[b]
        return lhs == tdig[b] + c[b + 1] * (1 << T)

    wl = np.arange(1 << ell, dtype=np.int64)
    ysum = (wl & mask) + (wl >> T)

    def rows_x(X, a):
        X = np.asarray(X, dtype=np.int64)
        R = np.zeros((len(X), 1 << m2, 1 << ell), dtype=bool)
        c = carries(a)
        if 3 in c:
            R[:] = True
            return R
        for b in range(l + 1):
            xd = (X >> (T * b)) & mask if b < l else np.zeros_like(X)
            lhs = xd[:, None] + ysum[None, :] + c[b]
            R[:, b, :] = lhs != tdig[b] + c[b + 1] * (1 << T)
        return R

    def _cons(X, high):
        X = np.asarray(X, dtype=np.int64)
        n_ = len(X)
        R = np.zeros((n_, 1 << m2, 1 << ell), dtype=bool)
        for b in range(1 << m2):
            dg = (X >> (T * b)) & mask if b < l else np.zeros(n_, np.int64)
            if high:
                R[:, b, :] = (wl >> T)[None, :] == dg[:, None]
            else:
                R[:, b, :] = (wl & mask)[None, :] == dg[:, None]
        return R

    def candidates():
        return sorted(sum(c << (2 * i) for i, c in enumerate(cs))
                      for cs in itertools.product(range(3), repeat=l))

    return ProtocolSpec(f"fzero(bits={value_bits},T={T})", m1, m2, ell, cons_x, cons_y, accepts,
                        parties=3, consistency_z=cons_z, merlin_candidates=candidates,
                        rows_x=rows_x, rows_y=lambda Y, a: _cons(Y, False),
                        rows_z=lambda Z, a: _cons(Z, True),
                        info={"blocks": l, "target": target, "shift": shift})


def threesum_to_3ov(inst: ThreeSumInstance, block_size: int, *, prune: bool = True,
                    cap_dim: int | None = None, cap_bundle: int | None = None) -> OrBundle:
    bits_ = clog2(inst.bound)
    shift = inst.bound // 2
    proto = fzero_protocol(bits_, block_size, shift)
    sh = lambda X: np.array(X, dtype=np.int64) + shift
    return compile_to_3ov(proto, sh(inst.A), sh(inst.B), sh(inst.C), prune=prune, cap_dim=cap_dim,
                          cap_bundle=cap_bundle, provenance="threesum-3ov")


def constant_protocol(accept: bool, m1: int = 1, m2: int = 1, ell: int = 1, parties: int = 2) -> ProtocolSpec:
    """Protocol where Alice always accepts (or always rejects); Bob sends w = 0."""
    zero = lambda v, a, b, w: w == 0
    return ProtocolSpec(f"const({accept})", m1, m2, ell, lambda *a: True, zero,
                        lambda *a: accept, parties=parties,
                        consistency_z=zero if parties == 3 else None)
