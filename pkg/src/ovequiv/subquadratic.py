"""Polynomial-method Gap-Min/Max-IP decisions and factor-2 approximations.

A micro polynomial P(x, y) = sum_i z_i x_{T_i} y_{T_i} over F_2 is 1 with
probability (1 - (1 - <x,y>/d)^k) / 2, so pairs with <x,y> >= 2 tau sit
measurably above pairs with <x,y> <= tau.  A GapPolynomial thresholds the
number of micros evaluating to 1 at 0.4 m.

Evaluation never expands monomials.  Micros are bit-sliced: bit j of word
(t, w) holds coordinate T_j[t] of micro 64 w + j, so one AND/XOR sweep over t
evaluates 64 micros per word and a popcount sums them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import bits as B_
from . import oracles
from ._kernels import coordinate_masks, slice_rows, sliced_counts, sliced_first_above, sliced_first_at_most
from .gadgets import DEFAULT_CAP_DIM, BlowupError, check_cap
from .instances import BooleanPairInstance, GapInstance, OrBundle

DEFAULT_C1 = 555      # micros per log2(1/eps); Hoeffding with margin 0.025 below 0.43
OR_C1 = 35            # same for the tau = 0 level, where the one-probability gap is 0 vs 1/2
THRESHOLD = 0.4
DEFAULT_CAP_BUNDLE = 1 << 16


def block_length(d: int, tau: int) -> int:
    """k = floor(d / tau); the floor keeps (1 - tau/d)^k >= 1/4 for every tau <= d/2."""
    return max(1, d // tau)


@dataclass(frozen=True)
class MicroPolynomial:
    T: np.ndarray       # k coordinate indices (0-based)
    z: np.ndarray       # k coefficient bits

    def __post_init__(self):
        if len(self.T) != len(self.z):
            raise ValueError("T and z must have equal length")

    @property
    def k(self) -> int:
        return len(self.T)

    def __call__(self, x, y) -> int:
        x, y = np.asarray(x), np.asarray(y)
        return int(np.bitwise_xor.reduce(self.z & x[self.T] & y[self.T], initial=0)) & 1

    def monomials(self) -> set:
        """F_2 monomials {x_t, y_t}; a coordinate drawn twice cancels."""
        out: set = set()
        for t, zt in zip(self.T.tolist(), self.z.tolist()):
            if zt:
                out ^= {frozenset({("x", t), ("y", t)})}
        return out


def sample_micro(d: int, tau: int, seed: int) -> MicroPolynomial:
    if tau < 1:
        raise ValueError("tau must be at least 1 (tau = 0 uses or_micro)")
    if 2 * tau > d:
        raise ValueError(f"tau={tau} > d/2 is the trivial regime")
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 0])
    k = block_length(d, tau)
    T = rng.integers(0, d, size=k)
    z = rng.integers(0, 2, size=k).astype(np.uint8)
    return MicroPolynomial(T, z)


def or_micro(d: int, seed: int) -> MicroPolynomial:
    """All d coordinates with random signs: 0 on orthogonal pairs, else a fair coin."""
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 1])
    return MicroPolynomial(np.arange(d), rng.integers(0, 2, size=d).astype(np.uint8))


def micro_count(eps: float, c1: float = DEFAULT_C1) -> int:
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return max(1, math.ceil(c1 * math.log2(1 / eps)))


@dataclass
class GapPolynomial:
    """m micro polynomials of a common length k, stored as arrays for slicing."""
    d: int
    tau: int
    eps: float
    Ts: np.ndarray              # (m, k)
    Zs: np.ndarray              # (m, k)
    c1: float = DEFAULT_C1
    _masks: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _zmask: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.Ts.shape[0]

    @property
    def threshold(self) -> float:
        return THRESHOLD * self.m

    @property
    def micros(self) -> list:
        return [MicroPolynomial(T, z) for T, z in zip(self.Ts, self.Zs)]

    def degree(self) -> int:
        # each micro has degree 2 in (x, y); the threshold combination of m of them
        # is a polynomial in the m micro values, hence total degree <= 2m
        return 2 * self.m

    def slices(self, X, side: str) -> np.ndarray:
        """Bit-sliced inputs, shape (n, k, words); side "x" folds in the z mask."""
        X = np.ascontiguousarray(X, dtype=np.uint8)
        if self._masks is None:
            self._masks = coordinate_masks(np.ascontiguousarray(self.Ts), self.d)
            self._zmask = np.ascontiguousarray(B_.pack(self.Zs.T))        # (k, words)
        return slice_rows(X, self._masks, self._zmask, side == "x")

    def counts(self, X, Y) -> np.ndarray:
        """Number of micros evaluating to 1, for every pair (x in X, y in Y)."""
        return sliced_counts(self.slices(X, "x"), self.slices(Y, "y"))

    def decide(self, x, y) -> int:
        return int(self.counts(np.asarray(x)[None], np.asarray(y)[None])[0, 0] > self.threshold)


def sample_gap_polynomial(d: int, tau: int, eps: float, seed: int,
                          c1: Optional[float] = None) -> GapPolynomial:
    """Fresh polynomial for level tau; tau = 0 gives the orthogonality test."""
    if tau < 0 or 2 * tau > d:
        raise ValueError(f"tau={tau} outside 0..d/2")
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 2, tau])
    if tau == 0:
        c1 = OR_C1 if c1 is None else c1
        m = micro_count(eps, c1)
        Ts = np.broadcast_to(np.arange(d), (m, d)).copy()
    else:
        c1 = DEFAULT_C1 if c1 is None else c1
        m = micro_count(eps, c1)
        Ts = rng.integers(0, d, size=(m, block_length(d, tau)))
    Zs = rng.integers(0, 2, size=Ts.shape).astype(np.uint8)
    return GapPolynomial(d, tau, eps, Ts, Zs, c1)


def _poly_mul(p: set, q: set) -> set:
    out: set = set()
    for a in p:
        for b in q:
            out ^= {a | b}
    return out


def expand_symbolic(poly: GapPolynomial, max_m: int = 4) -> set:
    """P_final as a set of F_2 monomials (test utility; exponential in m).

    The threshold of m micro values is written in algebraic normal form over
    the micros (Moebius transform of its truth table), then each micro is
    substituted and multiplied out with x^2 = x.
    """
    m = poly.m
    if m > max_m:
        raise ValueError(f"symbolic expansion is limited to m <= {max_m}")
    micros = [mp.monomials() for mp in poly.micros]
    anf = [int(bin(s).count("1") > THRESHOLD * m) for s in range(1 << m)]
    for i in range(m):
        for s in range(1 << m):
            if s >> i & 1:
                anf[s] ^= anf[s ^ (1 << i)]
    out: set = set()
    for s in range(1 << m):
        if anf[s]:
            term = {frozenset()}
            for i in range(m):
                if s >> i & 1:
                    term = _poly_mul(term, micros[i])
            out ^= term
    return out


def evaluate_symbolic(monos: set, x, y) -> int:
    v = 0
    for mono in monos:
        v ^= int(all((x if side == "x" else y)[t] for side, t in mono))
    return v


def gap_evaluate(poly: GapPolynomial, x, y) -> int:
    return poly.decide(x, y)


def promise_pairs(d: int, tau: int, count: int, seed: int, side: str = "mixed"):
    """Random pairs with <x,y> <= tau ("low") or >= 2 tau ("high").

    Returns (X, Y, ip).  Inner products are uniform over the allowed range and
    the remaining coordinates are split at random between x-only, y-only and
    neither.
    """
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 3])
    low = np.arange(0, tau + 1)
    high = np.arange(2 * tau, d + 1)
    if side == "low":
        ips = rng.choice(low, size=count)
    elif side == "high":
        ips = rng.choice(high, size=count)
    else:
        pick = rng.integers(0, 2, size=count)
        ips = np.where(pick == 0, rng.choice(low, size=count), rng.choice(high, size=count))
    X = np.zeros((count, d), np.uint8)
    Y = np.zeros((count, d), np.uint8)
    for r, ip in enumerate(ips):
        perm = rng.permutation(d)
        X[r, perm[:ip]] = Y[r, perm[:ip]] = 1
        rest = perm[ip:]
        lab = rng.integers(0, 3, size=len(rest))
        X[r, rest[lab == 0]] = 1
        Y[r, rest[lab == 1]] = 1
    return X, Y, ips.astype(np.int64)


# ---------------------------------------------------------------- set decisions

def _pair_eps(n: int, eps: Optional[float]) -> float:
    n = max(2, n)
    eps = 1.0 / n if eps is None else eps
    return min(0.5, eps / (n * n))


def _level(A, B, d, tau, mode, eps_pair, seed, c1=None):
    """Witness (i, j) for the level-tau gap question, or None."""
    poly = sample_gap_polynomial(d, tau, eps_pair, seed, c1)
    XS, YS = poly.slices(A, "x"), poly.slices(B, "y")
    cut = math.floor(poly.threshold)
    if mode == "min":
        i, j = sliced_first_at_most(XS, YS, cut)
    else:
        i, j = sliced_first_above(XS, YS, cut)
    return None if i < 0 else (int(i), int(j))


def gap_decide(inst: GapInstance, eps: Optional[float] = None, seed: int = 0,
               c1: Optional[float] = None) -> bool:
    """Decide a Gap-Min/Max-IP instance; correct w.p. >= 1 - eps (default 1/n) on promise inputs.

    Gap-Min is yes when some pair has at most 0.4 m micros at 1; Gap-Max when
    some pair has more.  Off-promise inputs get an arbitrary (seeded) answer.
    """
    base, tau, d = inst.base, inst.tau, inst.base.d
    if inst.mode == "min":
        if 2 * tau > d:
            return True              # nothing can reach 2 tau > d
    else:
        if tau == 0:
            return True              # every pair has <x,y> >= 0
        if 2 * tau > d:
            return False
        # tau >= 1 here; the max side never needs the orthogonality level
    ep = _pair_eps(max(base.n, len(base.B)), eps)
    return _level(base.A, base.B, d, tau, inst.mode, ep, seed, c1) is not None


def mamin_ip(inst: BooleanPairInstance, seed: int = 0, eps: Optional[float] = None,
             c1: Optional[float] = None, return_witness: bool = False):
    """Value in [MIN, 2 MIN] w.h.p.: 2 tau_min for the first level tau = 0, 1, ... that says yes."""
    d = inst.d
    ep = _pair_eps(max(inst.n, len(inst.B)), eps)
    A, B = inst.A, inst.B
    for tau in range(0, d // 2 + 1):
        w = _level(A, B, d, tau, "min", ep, _sub(seed, tau), c1)
        if w is not None:
            return (2 * tau, w) if return_witness else 2 * tau
    # every level up to d/2 said no, so MIN > d/2 and d is inside the window
    return (d, (0, 0)) if return_witness else d


def mamax_ip(inst: BooleanPairInstance, seed: int = 0, eps: Optional[float] = None,
             c1: Optional[float] = None, return_witness: bool = False):
    """Value in [MAX/2, MAX] w.h.p.: tau* + 1 for the largest level tau* that says yes.

    A yes at tau means MAX > tau, a no means MAX < 2 tau.  When no level
    tau >= 1 says yes, MAX <= 1 and the orthogonality level tells 0 from 1.
    """
    d = inst.d
    ep = _pair_eps(max(inst.n, len(inst.B)), eps)
    A, B = inst.A, inst.B
    for tau in range(d // 2, 0, -1):
        w = _level(A, B, d, tau, "max", ep, _sub(seed, tau), c1)
        if w is not None:
            return (tau + 1, w) if return_witness else tau + 1
    w = _level(A, B, d, 0, "max", ep, _sub(seed, 0), c1)
    val = 0 if w is None else 1
    return (val, w or (0, 0)) if return_witness else val


def _sub(seed: int, *parts: int) -> int:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *parts])
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------- moderate dimension

@dataclass(frozen=True)
class ModerateParams:
    N: int          # blocks per mapping phi
    t: int          # tuple arity ceil(0.8 N)
    m: int          # independent mappings
    c1p: float
    c2: float

    @property
    def subset_size(self) -> int:
        return self.m // 2 + 1

    @property
    def orth_needed(self) -> int:
        """<phi(x), phi(y)> = 0 exactly when at least this many blocks are orthogonal."""
        return self.N - self.t + 1


def moderate_params(n: int, eps: float, N: Optional[int] = None, m: Optional[int] = None,
                    c1p: float = 1.0, c2: float = 4.0) -> ModerateParams:
    """N = ceil(1/(c1' eps)), m = ceil(3 c2 eps log2 n), both overridable."""
    if N is None:
        N = math.ceil(1 / (c1p * eps))
    if m is None:
        m = max(1, math.ceil(3 * c2 * eps * math.log2(max(2, n))))
    if N < 1 or m < 1:
        raise ValueError("N and m must be positive")
    return ModerateParams(int(N), math.ceil(0.8 * N), int(m), c1p, c2)


def phi_length(N: int, t: int, k: int) -> int:
    return math.comb(N, t) * k ** t


def phi_map(X, Ts: np.ndarray, t: int) -> np.ndarray:
    """Concatenate, over t-subsets I of blocks (lexicographic), the tensor product of x|T_i, i in I."""
    X = np.asarray(X, dtype=np.uint8)
    blocks = [X[:, T] for T in Ts]                     # N arrays of shape (n, k)
    parts = []
    for I in combinations(range(len(Ts)), t):
        v = blocks[I[0]]
        for i in I[1:]:
            v = (v[:, :, None] & blocks[i][:, None, :]).reshape(len(X), -1)
        parts.append(v)
    return np.concatenate(parts, axis=1)


def orthogonal_blocks(x, y, Ts) -> int:
    return sum(int(not np.any(np.asarray(x)[T] & np.asarray(y)[T])) for T in Ts)


def moderate_maminip_to_ov(inst: BooleanPairInstance, tau: int, eps: float = 0.2, seed: int = 0,
                           N: Optional[int] = None, m: Optional[int] = None,
                           cap_dim: Optional[int] = None, cap_bundle: Optional[int] = None,
                           return_maps: bool = False):
    """OR-bundle of OV instances: yes w.h.p. when MIN <= tau, no w.h.p. when MIN >= 2 tau.

    Each of m mappings phi_i draws N blocks T of length floor(d / tau).  A pair
    passes phi_i when at least N - t + 1 blocks are orthogonal, which is the
    same as <phi_i(x), phi_i(y)> = 0.  A pair passes a majority when some
    subset of floor(m/2) + 1 mappings all pass, so one OV instance per such
    subset suffices (larger subsets only add constraints).
    """
    d = inst.d
    if tau < 0 or 2 * tau > d:
        raise ValueError(f"tau={tau} outside 0..d/2")
    if tau == 0:
        ov = BooleanPairInstance.from_packed(d, inst.PA, inst.PB, "ov")
        return OrBundle("ov", [ov], "moderate-maminip:tau=0")
    pr = moderate_params(max(inst.n, len(inst.B)), eps, N, m)
    k = block_length(d, tau)
    L = phi_length(pr.N, pr.t, k)
    dim = L * pr.subset_size
    check_cap(dim, DEFAULT_CAP_DIM if cap_dim is None else cap_dim, "moderate-maminip")
    n_sub = math.comb(pr.m, pr.subset_size)
    cap_b = DEFAULT_CAP_BUNDLE if cap_bundle is None else cap_bundle
    if n_sub > cap_b:
        raise BlowupError(f"moderate-maminip: {n_sub} subsets exceed bundle cap {cap_b}")
    maps = []
    PX, PY = [], []
    for i in range(pr.m):
        rng = np.random.default_rng([int(seed) & (2**64 - 1), 4, tau, i])
        Ts = rng.integers(0, d, size=(pr.N, k))
        maps.append(Ts)
        PX.append(phi_map(inst.A, Ts, pr.t))
        PY.append(phi_map(inst.B, Ts, pr.t))
    items = []
    for S in combinations(range(pr.m), pr.subset_size):
        A = np.concatenate([PX[i] for i in S], axis=1)
        B = np.concatenate([PY[i] for i in S], axis=1)
        items.append(BooleanPairInstance(dim, A, B, "ov",
                                         {"tau": tau, "subset": list(S), "N": pr.N, "t": pr.t}))
    bundle = OrBundle("ov", items, f"moderate-maminip:tau={tau}")
    return (bundle, maps) if return_maps else bundle


def moderate_maminip(inst: BooleanPairInstance, eps: float = 0.2, seed: int = 0, ov_solver=None,
                     N: Optional[int] = None, m: Optional[int] = None,
                     cap_dim: Optional[int] = None, cap_bundle: Optional[int] = None) -> int:
    """Binary search over tau for the smallest yes level; output min(2 tau, d)."""
    d = inst.d
    solver = ov_solver or oracles.ov_decide

    def yes(tau):
        if 2 * tau > d:
            return True
        b = moderate_maminip_to_ov(inst, tau, eps, _sub(seed, tau), N, m, cap_dim, cap_bundle)
        return b.decide(solver)

    if yes(0):
        return 0
    lo, hi = 0, d // 2 + 1          # lo: known no, hi: known yes (trivial level)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if yes(mid):
            hi = mid
        else:
            lo = mid
    return min(2 * hi, d)
