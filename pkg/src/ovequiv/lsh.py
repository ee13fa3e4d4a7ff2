"""LSH families and the sketch reduction to additive-approximate MaxIP.

Each repetition r hashes a point to a bucket label h_r(x), then a random map
phi_r sends the label to (1,0) or (0,1).  Concatenating N repetitions gives a
2N-bit sketch whose inner product counts the repetitions on which phi agrees,
which is about 1/2 + Pr[collision]/2 per repetition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm

from . import _kernels, bits, oracles
from .gadgets import reverse_instance
from .instances import BooleanPairInstance, ExactIPInstance, RealPairInstance, SetFamilyInstance
from .protocols import exactip_to_ov

DEFAULT_WIDTH = 4.0
MC_SAMPLES = 100_000
C1_FACTOR = 32.0        # c1 = eps^2 / 32, so N = ceil(96 eps^-2 ln n)
EMPTY = -1              # bucket label of the empty set under MinHash


# ---------------------------------------------------------------- stable laws

def stable_sample(p: float, size, rng: np.random.Generator) -> np.ndarray:
    """Symmetric p-stable draws: Cauchy at p=1, N(0,1) at p=2, Chambers-Mallows-Stuck between."""
    if p == 1.0:
        return rng.standard_cauchy(size)
    if p == 2.0:
        return rng.standard_normal(size)
    V = rng.uniform(-math.pi / 2, math.pi / 2, size)
    W = rng.exponential(1.0, size)
    return (np.sin(p * V) / np.cos(V) ** (1.0 / p)) * (np.cos((1.0 - p) * V) / W) ** ((1.0 - p) / p)


def gaussian_collision_probability(c: float, w: float) -> float:
    """Closed form for p=2 at distance c (in units of R) and width w."""
    if c == 0:
        return 1.0
    r = w / c
    return float(1 - 2 * norm.cdf(-r) - 2 / (math.sqrt(2 * math.pi) * r) * (1 - math.exp(-r * r / 2)))


@lru_cache(maxsize=None)
def pstable_collision_estimate(p: float, c: float, w: float, samples: int = MC_SAMPLES) -> float:
    """Monte Carlo Pr[h(x) = h(y)] for ||x - y||_p = c R (fixed internal seed)."""
    rng = np.random.default_rng([1234, int(p * 1000), int(c * 1e6), int(w * 1000)])
    s = stable_sample(p, samples, rng)
    b = rng.uniform(0, w, samples)
    v = c * s + b
    return float(np.mean((v >= 0) & (v < w)))


# ---------------------------------------------------------------- families

@dataclass
class LshFamily:
    """Hash family with claimed collision bounds p1 (close pairs) > p2 (far pairs).

    hash_many(points, reps, seed) returns an (n_points, reps) int64 label array;
    repetition r of seed s is the hash function sample(s) when reps = 1.
    """
    description: str
    p1: float
    p2: float
    hash_many: Callable
    info: dict = field(default_factory=dict)
    projector: Optional[Callable] = None    # (points, reps, seed) -> (X a^T, 1/R, b, w) for fused hashing

    def __post_init__(self):
        if not self.p1 > self.p2:
            raise ValueError(f"need p1 > p2, got p1={self.p1}, p2={self.p2}")

    @property
    def eps(self) -> float:
        return self.p1 - self.p2

    def sample(self, seed: int):
        def h(x):
            return int(self.hash_many([x], 1, seed)[0, 0])
        return h

    def collision_frequency(self, x, y, samples: int, seed: int = 0) -> float:
        L = self.hash_many([x, y], samples, seed)
        return float(np.mean(L[0] == L[1]))

    def with_bounds(self, p1: float, p2: float) -> "LshFamily":
        return LshFamily(self.description, p1, p2, self.hash_many, dict(self.info), self.projector)


def pstable_family(p: float, R: float, eps: float, width: float = DEFAULT_WIDTH) -> LshFamily:
    """h(x) = floor((<a, x/R> + b) / w) with a p-stable, b uniform on [0, w)."""
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"norm parameter p={p} outside [1, 2]")
    if R <= 0 or eps <= 0:
        raise ValueError("need R > 0 and eps > 0")
    p1 = pstable_collision_estimate(float(p), 1.0, float(width))
    p2 = pstable_collision_estimate(float(p), 1.0 + float(eps), float(width))

    def projector(points, reps, seed):
        X = np.ascontiguousarray(points, dtype=np.float64)
        P, b = _projection(X.tobytes(), X.shape, float(p), reps, float(width), int(seed))
        return P, 1.0 / R, b, width

    def hash_many(points, reps, seed):
        P, scale, b, w = projector(points, reps, seed)
        return np.floor((P * scale + b) * (1.0 / w)).astype(np.int64)

    return LshFamily(f"{p}-stable projections, R={R}, w={width}", p1, p2, hash_many,
                     {"p": p, "R": R, "eps": eps, "width": width}, projector)


@lru_cache(maxsize=8)
def _stable_draws(p, reps, d, width, seed):
    """Projection vectors and offsets for seed."""
    rng = np.random.default_rng([seed & (2**64 - 1), 0x5AB1E])
    a = stable_sample(p, (reps, d), rng)
    b = rng.uniform(0, width, reps)
    a.flags.writeable = False
    b.flags.writeable = False
    return a, b


@lru_cache(maxsize=3)
def _projection(raw, shape, p, reps, width, seed):
    """Unscaled projections X a^T; the radius only rescales them, so one product serves every R."""
    X = np.frombuffer(raw, dtype=np.float64).reshape(shape)
    a, b = _stable_draws(p, reps, shape[1], width, seed)
    P = X @ a.T
    P.flags.writeable = False
    return P, b


def minhash_family(universe: int, p1: float = 1.0, p2: float = 0.0) -> LshFamily:
    """h(S) = argmin over s in S of pi(s) for a random permutation pi of [U].

    Collision probability is exactly J(S, T).  p1, p2 are the Jaccard levels
    the caller wants to separate.
    """
    if universe < 1:
        raise ValueError("universe must be >= 1")
    U = int(universe)

    def hash_many(sets, reps, seed):
        rng = np.random.default_rng([int(seed) & (2**64 - 1), 0x314])
        ranks = np.argsort(rng.random((reps, U)), axis=1).argsort(axis=1)   # pi per repetition
        out = np.full((len(sets), reps), EMPTY, dtype=np.int64)
        for i, S in enumerate(sets):
            S = np.asarray(list(S), dtype=np.int64)
            if S.size:
                out[i] = S[np.argmin(ranks[:, S - 1], axis=1)]
        return out

    return LshFamily(f"MinHash over [{U}]", p1, p2, hash_many, {"universe": U})


def ideal_family(p1: float = 1.0, p2: float = 0.0) -> LshFamily:
    """Labels are the points themselves (tuples); collides iff equal."""
    def hash_many(points, reps, seed):
        keys = {}
        lab = np.array([keys.setdefault(tuple(np.ravel(x).tolist()), len(keys)) for x in points], np.int64)
        return np.repeat(lab[:, None], reps, axis=1)
    return LshFamily("identity buckets", p1, p2, hash_many)


# ---------------------------------------------------------------- sketch reduction

@dataclass(frozen=True)
class LshReductionParams:
    eps: float
    N: int
    c1: float
    tau1: float
    tau2: float

    @property
    def thresholds(self):
        return self.tau1 * self.N, self.tau2 * self.N

    @property
    def cut(self) -> int:
        """Smallest integer inner product counted as 'above the midpoint'."""
        return math.ceil((self.tau1 + self.tau2) / 2 * self.N)


def reduction_params(fam: LshFamily, n: int, N: Optional[int] = None) -> LshReductionParams:
    eps = fam.p1 - fam.p2
    c1 = eps * eps / C1_FACTOR
    if N is None:
        # failure exp(-c1 N) <= n^-3 per pair
        N = math.ceil(3.0 / c1 * math.log(max(2, n)))
    tau1 = 0.5 + 0.5 * (fam.p1 - eps / 4)
    tau2 = 0.5 + 0.5 * (fam.p2 + eps / 4)
    return LshReductionParams(eps, int(N), c1, tau1, tau2)


def _phi_keys(reps: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 0xF1])
    return rng.integers(0, 2**63, reps, dtype=np.int64).astype(np.uint64)


def phi_bits(labels: np.ndarray, seed: int) -> np.ndarray:
    """Independent random bit per (repetition, label): bit 1 means (0,1), bit 0 means (1,0)."""
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    return _kernels.phi_from_labels(labels, _phi_keys(labels.shape[1], seed))


def sketch_words(points, fam: LshFamily, N: int, seed: int) -> np.ndarray:
    """Packed (n, words) sketch; repetition r occupies coordinates 2r, 2r+1."""
    keys = _phi_keys(N, seed)
    n = len(points)
    words = np.zeros((n, bits.n_words(2 * N)), dtype=np.uint64)
    if fam.projector is not None:
        P, scale, b, w = fam.projector(points, N, seed)
        _kernels.words_from_projections(P, scale, b, 1.0 / w, keys, words, 0)
    else:
        labels = np.ascontiguousarray(fam.hash_many(points, N, seed), dtype=np.int64)
        _kernels.words_from_labels(labels, keys, words, 0)
    return words


def sketch(points, fam: LshFamily, N: int, seed: int) -> np.ndarray:
    """(n, 2N) 0/1 sketch (unpacked form of sketch_words)."""
    return bits.unpack(sketch_words(points, fam, N, seed), 2 * N)


def lsh_to_maxip(A, B, fam: LshFamily, n: Optional[int] = None, seed: int = 0,
                 N: Optional[int] = None):
    """Sketch both sides with the same N hash/phi draws.

    Returns (instance, (tau1 N, tau2 N)).  If some pair has f = 1 then MAX > tau1 N,
    if no pair does then MAX < tau2 N, each with probability >= 1 - 1/n.
    """
    n = n if n is not None else max(len(A), len(B))
    prm = reduction_params(fam, n, N)
    pts = list(A) + list(B) if not isinstance(A, np.ndarray) else np.vstack([A, B])
    S = sketch_words(pts, fam, prm.N, seed)
    inst = BooleanPairInstance.from_packed(2 * prm.N, S[:len(A)], S[len(A):], "maxip",
                               {"N": prm.N, "eps": prm.eps, "tau1": prm.tau1, "tau2": prm.tau2,
                                "cut": prm.cut})
    return inst, prm.thresholds


def additive_maxip_by_sampling(inst: BooleanPairInstance, eps: float, seed: int = 0) -> BooleanPairInstance:
    """Sample s = ceil(ln(2 n^3) / (2 eps^2)) coordinates with replacement.

    params["scale"] = d/s; scale * MAX(sample) is within eps*d of MAX with
    probability >= 1 - 1/n (Hoeffding plus a union bound over n^2 pairs).
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    n = max(2, inst.n)
    s = math.ceil(math.log(2 * n ** 3) / (2 * eps * eps))
    cols = np.random.default_rng([int(seed) & (2**64 - 1), 0xC01]).integers(0, inst.d, s)
    return BooleanPairInstance(s, inst.A[:, cols], inst.B[:, cols], "maxip",
                               {"scale": inst.d / s, "samples": s, "source_d": inst.d})


# ---------------------------------------------------------------- MaxIP backends

def oracle_backend(inst: BooleanPairInstance, k: int) -> bool:
    """MAX(A,B) >= k by brute force."""
    return oracles.max_ip(inst).value >= k


def ov_pipeline_backend(group_len: Optional[int] = None, cap_dim=None, cap_bundle=None):
    """MAX(A,B) >= k decided through ExactIP -> OV bundles and the OV oracle.

    MAX >= k iff ExactIP(t) is yes for some t in k..d; each ExactIP(t) is
    compiled to an OR of OV instances.
    """
    def backend(inst: BooleanPairInstance, k: int) -> bool:
        g = group_len or max(1, round(math.sqrt(inst.d)))
        # no pair can reach a target above the heaviest row on either side
        top = min(int(bits.popcount(inst.PA).max()), int(bits.popcount(inst.PB).max()))
        for t in range(max(0, k), top + 1):
            bundle = exactip_to_ov(ExactIPInstance(inst, t), min(g, inst.d),
                                   cap_dim=cap_dim, cap_bundle=cap_bundle)
            if bundle.decide():
                return True
        return False
    return backend


def _backend(backend):
    if backend is None or backend == "oracle":
        return oracle_backend
    if backend == "ov-pipeline":
        return ov_pipeline_backend()
    if callable(backend):
        return backend
    raise ValueError(f"unknown backend {backend!r}")


def _majority(votes) -> bool:
    votes = list(votes)
    return sum(bool(v) for v in votes) * 2 > len(votes)


# ---------------------------------------------------------------- approximations

def _grid(lo: float, hi: float, eps: float) -> np.ndarray:
    r = 1 + eps / 3
    J = max(0, math.ceil(math.log(hi / lo) / math.log(r))) if hi > lo else 0
    return lo * r ** np.arange(J + 1)


def _coordinate_bounds(P: np.ndarray, p: float):
    """Lower bound: smallest nonzero coordinate gap.  Upper bound: bounding-box diameter."""
    gaps = []
    for col in P.T:
        u = np.unique(col)
        if len(u) > 1:
            gaps.append(np.diff(u).min())
    lo = min(gaps) if gaps else 0.0
    hi = float(np.sum((P.max(0) - P.min(0)) ** p) ** (1 / p))
    return lo, hi


def _seed(seed: int, *parts: int) -> int:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *parts])
    return int(ss.generate_state(1, np.uint64)[0])


def _lp_decision(inst, R, eps, backend, seed, level, far, N, width, runs=3):
    votes = []
    for run in range(runs):
        fam = pstable_family(inst.p, R, eps, width)
        # one hash draw per run, shared by all radii (each level still sees a fresh-looking
        # sample from the family; only the cross-level correlation changes)
        sk, _ = lsh_to_maxip(inst.A, inst.other, fam, seed=_seed(seed, run), N=N)
        cut = sk.params["cut"]
        if far:
            # some pair below the midpoint  <=>  reversed MAX >= 2N - (cut - 1)
            rev, _ = reverse_instance(sk)
            votes.append(backend(rev, sk.d - (cut - 1)))
        else:
            votes.append(backend(sk, cut))
    return _majority(votes)


def bcp_approx(inst: RealPairInstance, eps: float, backend="oracle", seed: int = 0,
               N: Optional[int] = None, width: float = DEFAULT_WIDTH) -> float:
    """(1+eps)-approximate closest pair by binary search over a geometric radius grid."""
    bk = _backend(backend)
    other = inst.other
    if set(map(tuple, inst.A.tolist())) & set(map(tuple, other.tolist())):
        return 0.0
    lo, hi = _coordinate_bounds(np.vstack([inst.A, other]), inst.p)
    grid = _grid(lo, hi, eps)
    # smallest level with a yes; the top level (radius >= diameter) is yes by definition
    a, b = -1, len(grid) - 1
    while b - a > 1:
        mid = (a + b) // 2
        if _lp_decision(inst, grid[mid], eps, bk, seed, mid, False, N, width):
            b = mid
        else:
            a = mid
    lower = grid[a] if a >= 0 else lo
    upper = min(hi, (1 + eps) * grid[b])
    return float(math.sqrt(lower * max(lower, upper)))


def fp_approx(inst: RealPairInstance, eps: float, backend="oracle", seed: int = 0,
              N: Optional[int] = None, width: float = DEFAULT_WIDTH) -> float:
    """(1+eps)-approximate furthest pair; decisions ask for a pair beyond (1+eps)R."""
    bk = _backend(backend)
    P = inst.A if inst.B is None else np.vstack([inst.A, inst.B])
    if inst.B is None and np.all(inst.A == inst.A[0]):
        return 0.0
    lo, hi = _coordinate_bounds(P, inst.p)
    if lo == 0.0:
        return 0.0
    grid = _grid(lo, hi, eps)
    # largest level with a yes; below level 0 the answer is yes by definition
    a, b = -1, len(grid)
    while b - a > 1:
        mid = (a + b) // 2
        if _lp_decision(inst, grid[mid], eps, bk, seed, mid, True, N, width):
            a = mid
        else:
            b = mid
    lower = max(lo, grid[a]) if a >= 0 else lo
    upper = min(hi, (1 + eps) * grid[b]) if b < len(grid) else hi
    return float(math.sqrt(lower * max(lower, upper)))


def jaccard_pair_approx(inst: SetFamilyInstance, eps: float, backend="oracle", seed: int = 0,
                        N: Optional[int] = None) -> float:
    """Additive eps approximation of max J via level decisions spaced eps/2 apart.

    Level t asks whether some pair has J >= t + delta (yes) or all have J <= t (no),
    with delta = eps/2.  Three MinHash sketches are drawn once; each level takes
    the majority of their three decisions.
    """
    bk = _backend(backend)
    delta = eps / 2
    levels = np.arange(0, 1, delta)
    fam = minhash_family(inst.universe, delta, 0.0)
    sketches = [lsh_to_maxip(inst.A, inst.B, fam, seed=_seed(seed, run), N=N)[0] for run in range(3)]
    Nr = sketches[0].params["N"]

    def yes(j):
        t = levels[j]
        cut = math.ceil((0.5 + 0.5 * (t + delta / 2)) * Nr)
        return _majority(bk(sk, cut) for sk in sketches)

    a, b = -1, len(levels)
    while b - a > 1:
        mid = (a + b) // 2
        if yes(mid):
            a = mid
        else:
            b = mid
    lower = levels[a] if a >= 0 else 0.0
    upper = min(1.0, levels[b] + delta) if b < len(levels) else 1.0
    return float((lower + upper) / 2)
