"""Problem instances, seeded generators and the JSON-lines file format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import bits as B_

MAX_RETRIES = 1000


class ParseError(ValueError):
    def __init__(self, line: int, fld: str, msg: str):
        super().__init__(f"line {line}: field '{fld}': {msg}")
        self.line = line
        self.field = fld


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


# ---------------------------------------------------------------- types

class BooleanPairInstance:
    """Two lists of bit vectors of common dimension d, stored packed.

    kind is one of "ov", "maxip", "minip" and only labels the intended question.
    """

    def __init__(self, d: int, A, B, kind: str = "ov", params: Optional[dict] = None):
        if d < 1:
            raise ValueError("dimension d must be positive")
        A = np.asarray(A, dtype=np.uint8)
        B = np.asarray(B, dtype=np.uint8)
        for name, X in (("A", A), ("B", B)):
            if X.ndim != 2 or X.shape[0] == 0:
                raise ValueError(f"{name} must be a non-empty list of vectors")
            if X.shape[1] != d:
                raise ValueError(f"{name} has vectors of length {X.shape[1]}, expected {d}")
            if X.size and X.max() > 1:
                raise ValueError(f"{name} has entries outside {{0,1}}")
        self._init(d, B_.pack(A), B_.pack(B), kind, params)
        self._A = _frozen(A)
        self._B = _frozen(B)

    def _init(self, d, PA, PB, kind, params):
        self.d = int(d)
        self.kind = kind
        self.params = dict(params or {})
        self.PA = _frozen(PA)
        self.PB = _frozen(PB)
        self._A = self._B = None

    @classmethod
    def from_packed(cls, d, PA, PB, kind="ov", params=None):
        """Build from packed words; bits past d in the last word must be zero."""
        PA = np.asarray(PA, dtype=np.uint64)
        PB = np.asarray(PB, dtype=np.uint64)
        w = B_.n_words(d)
        if PA.ndim != 2 or PB.ndim != 2 or PA.shape[1] != w or PB.shape[1] != w or not len(PA) or not len(PB):
            raise ValueError("packed arrays must be non-empty with n_words(d) columns")
        obj = cls.__new__(cls)
        obj._init(d, PA, PB, kind, params)
        return obj

    @property
    def A(self) -> np.ndarray:
        if self._A is None:
            self._A = _frozen(B_.unpack(self.PA, self.d))
        return self._A

    @property
    def B(self) -> np.ndarray:
        if self._B is None:
            self._B = _frozen(B_.unpack(self.PB, self.d))
        return self._B

    @property
    def n(self) -> int:
        return max(len(self.PA), len(self.PB))

    def __eq__(self, other):
        return (isinstance(other, BooleanPairInstance) and self.d == other.d
                and self.kind == other.kind and self.params == other.params
                and np.array_equal(self.PA, other.PA) and np.array_equal(self.PB, other.PB))

    def __repr__(self):
        return f"BooleanPairInstance(kind={self.kind}, d={self.d}, |A|={len(self.PA)}, |B|={len(self.PB)})"


@dataclass(frozen=True, eq=True)
class ExactIPInstance:
    base: BooleanPairInstance
    target: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.target <= self.base.d:
            raise ValueError(f"target m={self.target} outside [0, d={self.base.d}]")

    kind = "exactip"


@dataclass(frozen=True, eq=True)
class GapInstance:
    base: BooleanPairInstance
    tau: int
    mode: str = "min"   # "min": MIN <= tau vs MIN >= 2tau; "max": MAX >= 2tau vs MAX <= tau
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.tau <= self.base.d:
            raise ValueError(f"tau={self.tau} outside [0, d={self.base.d}]")
        if self.mode not in ("min", "max"):
            raise ValueError("mode must be 'min' or 'max'")

    @property
    def kind(self):
        return "gap-" + self.mode


class RealPairInstance:
    """Real points for closest pair (kind "bcp") or furthest pair (kind "fp").  B may be None."""

    def __init__(self, d: int, p: float, A, B=None, kind: str = "bcp", params: Optional[dict] = None):
        if not 1.0 <= p <= 2.0:
            raise ValueError(f"norm parameter p={p} outside [1, 2]")
        A = np.asarray(A, dtype=np.float64).reshape(-1, d) if len(A) else np.zeros((0, d))
        if len(A) == 0:
            raise ValueError("A must be non-empty")
        if B is not None:
            B = np.asarray(B, dtype=np.float64).reshape(-1, d)
            if len(B) == 0:
                raise ValueError("B must be non-empty when present")
        for X in (A, B):
            if X is not None and not np.all(np.isfinite(X)):
                raise ValueError("coordinates must be finite")
        self.d, self.p, self.kind = int(d), float(p), kind
        self.params = dict(params or {})
        self.A = _frozen(A)
        self.B = None if B is None else _frozen(B)

    @property
    def other(self) -> np.ndarray:
        return self.A if self.B is None else self.B

    def __eq__(self, o):
        return (isinstance(o, RealPairInstance) and (self.d, self.p, self.kind) == (o.d, o.p, o.kind)
                and self.params == o.params and np.array_equal(self.A, o.A)
                and ((self.B is None and o.B is None)
                     or (self.B is not None and o.B is not None and np.array_equal(self.B, o.B))))


def _check_sets(U, fam, name):
    out = []
    for s in fam:
        s = [int(v) for v in s]
        if len(set(s)) != len(s):
            raise ValueError(f"{name} has a set with duplicate elements")
        if any(not 1 <= v <= U for v in s):
            raise ValueError(f"{name} has an element outside 1..{U}")
        out.append(tuple(sorted(s)))
    return tuple(out)


class SetFamilyInstance:
    kind = "jaccard"

    def __init__(self, universe: int, A, B, params: Optional[dict] = None):
        if universe < 1:
            raise ValueError("universe must be >= 1")
        self.universe = int(universe)
        self.A = _check_sets(universe, A, "A")
        self.B = _check_sets(universe, B, "B")
        if not self.A or not self.B:
            raise ValueError("A and B must be non-empty")
        self.params = dict(params or {})

    def incidence(self, fam) -> np.ndarray:
        M = np.zeros((len(fam), self.universe), dtype=np.uint8)
        for i, s in enumerate(fam):
            M[i, [v - 1 for v in s]] = 1
        return M

    def __eq__(self, o):
        return (isinstance(o, SetFamilyInstance) and self.universe == o.universe
                and self.A == o.A and self.B == o.B and self.params == o.params)


class IntegerPairInstance:
    kind = "hopcroft"

    def __init__(self, d: int, bound: int, A, B, params: Optional[dict] = None):
        A = np.asarray(A, dtype=np.int64).reshape(-1, d)
        B = np.asarray(B, dtype=np.int64).reshape(-1, d)
        if len(A) == 0 or len(B) == 0:
            raise ValueError("A and B must be non-empty")
        if np.abs(A).max() > bound or np.abs(B).max() > bound:
            raise ValueError(f"entries must lie in [-{bound}, {bound}]")
        self.d, self.bound = int(d), int(bound)
        self.A, self.B = _frozen(A), _frozen(B)
        self.params = dict(params or {})

    def __eq__(self, o):
        return (isinstance(o, IntegerPairInstance) and (self.d, self.bound) == (o.d, o.bound)
                and np.array_equal(self.A, o.A) and np.array_equal(self.B, o.B) and self.params == o.params)


class TripleInstance:
    kind = "3ov"

    def __init__(self, d: int, A, B, C, params: Optional[dict] = None):
        sets = []
        for name, X in (("A", A), ("B", B), ("C", C)):
            X = np.asarray(X, dtype=np.uint8)
            if X.ndim != 2 or len(X) == 0 or X.shape[1] != d:
                raise ValueError(f"{name} must be a non-empty list of length-{d} vectors")
            sets.append(_frozen(X))
        self.d = int(d)
        self.A, self.B, self.C = sets
        self.PA, self.PB, self.PC = (_frozen(B_.pack(X)) for X in sets)
        self.params = dict(params or {})

    def __eq__(self, o):
        return (isinstance(o, TripleInstance) and self.d == o.d and self.params == o.params
                and all(np.array_equal(x, y) for x, y in ((self.A, o.A), (self.B, o.B), (self.C, o.C))))


class ThreeSumInstance:
    kind = "3sum"

    def __init__(self, bound: int, A, B, C, params: Optional[dict] = None):
        if bound < 2 or bound % 2:
            raise ValueError("bound W must be an even integer >= 2")
        lists = []
        for name, X in (("A", A), ("B", B), ("C", C)):
            X = tuple(int(v) for v in X)
            if not X:
                raise ValueError(f"{name} must be non-empty")
            if any(not -bound // 2 <= v < bound // 2 for v in X):
                raise ValueError(f"{name} has a value outside [-W/2, W/2)")
            lists.append(X)
        self.bound = int(bound)
        self.A, self.B, self.C = lists
        self.params = dict(params or {})

    def __eq__(self, o):
        return (isinstance(o, ThreeSumInstance) and self.bound == o.bound
                and (self.A, self.B, self.C) == (o.A, o.B, o.C) and self.params == o.params)


class CnfInstance:
    kind = "cnf"

    def __init__(self, num_vars: int, clauses, params: Optional[dict] = None):
        cl = []
        for c in clauses:
            c = tuple(int(l) for l in c)
            if not c:
                raise ValueError("empty clause")
            if any(l == 0 or abs(l) > num_vars for l in c):
                raise ValueError(f"clause {c} references a variable outside 1..{num_vars}")
            cl.append(c)
        self.num_vars = int(num_vars)
        self.clauses = tuple(cl)
        self.params = dict(params or {})

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied(self, assignment) -> int:
        """Number of clauses satisfied by a 0/1 assignment (index 0 is variable 1)."""
        a = assignment
        return sum(any((a[abs(l) - 1] == 1) == (l > 0) for l in c) for c in self.clauses)

    def value(self, assignment) -> float:
        return self.satisfied(assignment) / self.m

    def __eq__(self, o):
        return (isinstance(o, CnfInstance) and self.num_vars == o.num_vars
                and self.clauses == o.clauses and self.params == o.params)


@dataclass
class OrBundle:
    """Reduced instances accepted iff at least one item is a yes instance."""
    kind: str            # "ov" or "3ov"
    items: list
    provenance: str
    merlin: list = field(default_factory=list)   # Merlin index of each item

    def __post_init__(self):
        dims = {it.d for it in self.items}
        if len(dims) > 1:
            raise ValueError("bundle items must share one dimension")
        if not self.merlin:
            self.merlin = list(range(len(self.items)))

    def __len__(self):
        return len(self.items)

    @property
    def dim(self) -> Optional[int]:
        return self.items[0].d if self.items else None

    def decide(self, solver=None) -> bool:
        """OR over items, using the brute-force oracle unless a solver is given."""
        from . import oracles
        if solver is None:
            solver = oracles.ov_decide if self.kind == "ov" else oracles.three_ov_decide
        for it in self.items:
            v = solver(it)
            if getattr(v, "decision", v):
                return True
        return False

    def __eq__(self, o):
        return (isinstance(o, OrBundle) and (self.kind, self.provenance) == (o.kind, o.provenance)
                and self.merlin == o.merlin and len(self.items) == len(o.items)
                and all(a == b for a, b in zip(self.items, o.items)))


# ---------------------------------------------------------------- generators

def _rng(seed: int, retry: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), retry])


def _need(params, *names):
    for k in names:
        if k not in params:
            raise ValueError(f"missing generator parameter '{k}'")


def _sizes(params):
    n = params.get("n")
    na, nb = params.get("na", n), params.get("nb", n)
    if na is None or nb is None:
        raise ValueError("missing generator parameter 'n'")
    if na < 1 or nb < 1:
        raise ValueError("set sizes must be positive")
    return int(na), int(nb)


def _plant(params):
    p = params.get("plant")
    if p not in (None, "yes", "no"):
        raise ValueError("plant must be 'yes', 'no' or absent")
    return p


def _density(params, rng, retry):
    base = float(params.get("density", 0.5))
    if not 0.0 <= base <= 1.0:
        raise ValueError("density must be in [0, 1]")
    return base if retry == 0 else rng.uniform(0.05, 0.95)


def _rand_bits(rng, n, d, rho):
    return (rng.random((n, d)) < rho).astype(np.uint8)


def _with_retries(make, check, seed, plant, what):
    for r in range(MAX_RETRIES):
        inst = make(_rng(seed, r), r)
        if plant is None or check(inst) == (plant == "yes"):
            return inst
    raise RuntimeError(f"could not generate a planted-{plant} {what} instance in {MAX_RETRIES} retries")


def _gen_boolean(kind, params, seed):
    from . import oracles
    na, nb = _sizes(params)
    _need(params, "d")
    d = int(params["d"])
    if d < 1:
        raise ValueError("d must be positive")
    plant = _plant(params)

    if kind in ("ov", "maxip", "minip"):
        def make(rng, r):
            rho = _density(params, rng, r)
            A, B = _rand_bits(rng, na, d, rho), _rand_bits(rng, nb, d, rho)
            if plant == "yes":
                i, j = rng.integers(na), rng.integers(nb)
                B[j] = B[j] & (1 - A[i])
            return BooleanPairInstance(d, A, B, kind, params)
        return _with_retries(make, lambda x: oracles.ov_decide(x).decision, seed, plant, kind)

    if kind == "exactip":
        _need(params, "m")
        m = int(params["m"])
        if not 0 <= m <= d:
            raise ValueError(f"target m={m} must satisfy 0 <= m <= d={d}")

        def make(rng, r):
            rho = _density(params, rng, r)
            A, B = _rand_bits(rng, na, d, rho), _rand_bits(rng, nb, d, rho)
            if plant == "yes":
                i, j = rng.integers(na), rng.integers(nb)
                perm = rng.permutation(d)
                common = perm[:m]
                x = _rand_bits(rng, 1, d, rho)[0]
                x[common] = 1
                y = (_rand_bits(rng, 1, d, rho)[0] & (1 - x)).astype(np.uint8)
                y[common] = 1
                A[i], B[j] = x, y
            return ExactIPInstance(BooleanPairInstance(d, A, B, "ov"), m, params)
        return _with_retries(make, lambda x: oracles.exactip_decide(x).decision, seed, plant, kind)

    if kind in ("gap-min", "gap-max"):
        _need(params, "tau")
        tau = int(params["tau"])
        mode = kind[4:]
        if not 0 <= tau <= d or (mode == "max" and plant == "yes" and 2 * tau > d):
            raise ValueError(f"tau={tau} incompatible with d={d}")

        def make(rng, r):
            rho = _density(params, rng, r)
            A, B = _rand_bits(rng, na, d, rho), _rand_bits(rng, nb, d, rho)
            if plant == "yes":
                ip = int(rng.integers(0, tau + 1)) if mode == "min" else int(rng.integers(2 * tau, d + 1))
                i, j = rng.integers(na), rng.integers(nb)
                perm = rng.permutation(d)
                x = np.zeros(d, np.uint8)
                y = np.zeros(d, np.uint8)
                x[perm[:ip]] = 1
                y[perm[:ip]] = 1
                rest = perm[ip:]
                side = rng.integers(0, 3, size=len(rest))   # 0: x only, 1: y only, 2: neither
                x[rest[side == 0]] = 1
                y[rest[side == 1]] = 1
                A[i], B[j] = x, y
            return GapInstance(BooleanPairInstance(d, A, B, "ov"), tau, mode, params)

        def check(g):
            if mode == "min":
                v = oracles.min_ip(g.base).value
                return v <= tau if plant == "yes" else not v >= 2 * tau
            v = oracles.max_ip(g.base).value
            return v >= 2 * tau if plant == "yes" else not v <= tau
        return _with_retries(make, check, seed, plant, kind)
    raise ValueError(f"unknown kind {kind}")


def _unit_direction(rng, d, p):
    g = rng.standard_normal(d)
    return g / np.sum(np.abs(g) ** p) ** (1.0 / p)


def _gen_real(kind, params, seed):
    from . import oracles
    na, nb = _sizes(params)
    _need(params, "d")
    d = int(params["d"])
    p = float(params.get("p", 2.0))
    R0 = float(params.get("radius", 1.0))
    eps = float(params.get("eps", 0.3))
    plant = _plant(params)
    if not 1 <= p <= 2 or R0 <= 0 or eps <= 0:
        raise ValueError("need p in [1,2], radius > 0, eps > 0")

    if kind == "bcp":
        def make(rng, r):
            P = rng.standard_normal((na + nb, d))
            if plant is not None:
                diff = np.abs(P[:, None, :] - P[None, :, :]) ** p
                D = diff.sum(-1) ** (1 / p)
                np.fill_diagonal(D, np.inf)
                P *= (1 + eps) * R0 * (1 + rng.uniform(0.01, 0.5)) / D.min()
            A, Bp = P[:na].copy(), P[na:].copy()
            if plant == "yes":
                i, j = rng.integers(na), rng.integers(nb)
                Bp[j] = A[i] + R0 * _unit_direction(rng, d, p)
            shift = rng.standard_normal(d)
            return RealPairInstance(d, p, A + shift, Bp + shift, "bcp", params)

        def check(x):
            v = oracles.bcp(x)
            if plant == "yes":
                i, j = v.witness[0] - 1, v.witness[1] - 1
                D = _lp_matrix(x.A, x.B, p)
                D[i, j] = np.inf
                # the planted pair is the only one below the far radius
                return abs(v.value - R0) <= 1e-9 * R0 and D.min() >= (1 + eps) * R0
            return v.value < (1 + eps) * R0          # a close pair makes it a yes instance
        return _with_retries(make, check, seed, plant, kind)

    if kind == "fp":
        def make(rng, r):
            if plant is None:
                A = rng.standard_normal((na, d))
            else:
                rc = R0 / (2 * (1 + eps))
                A = np.array([_unit_direction(rng, d, p) * rc * rng.uniform() for _ in range(na)])
                if plant == "yes":
                    if na < 2:
                        raise ValueError("fp plant needs n >= 2")
                    u = _unit_direction(rng, d, p) * (R0 / 2)
                    i, j = rng.choice(na, size=2, replace=False)
                    A[i], A[j] = u, -u
            return RealPairInstance(d, p, A + rng.standard_normal(d), None, "fp", params)

        def check(x):
            v = oracles.fp(x)
            if plant == "yes":
                return abs(v.value - R0) <= 1e-9 * R0
            return v.value > R0 / (1 + eps) * (1 + 1e-12)
        return _with_retries(make, check, seed, plant, kind)
    raise ValueError(f"unknown kind {kind}")


def _lp_matrix(A, B, p):
    return (np.abs(A[:, None, :] - B[None, :, :]) ** p).sum(-1) ** (1 / p)


def _gen_jaccard(params, seed):
    from . import oracles
    na, nb = _sizes(params)
    _need(params, "universe")
    U = int(params["universe"])
    size = float(params.get("size", max(1, U // 4)))
    j = float(params.get("j", 0.5))
    plant = _plant(params)

    def make(rng, r):
        rho = min(1.0, size / U) if r == 0 else rng.uniform(0.05, 0.6)
        M = rng.random((na + nb, U)) < rho
        fam = [sorted((np.flatnonzero(row) + 1).tolist()) for row in M]
        A, Bf = fam[:na], fam[na:]
        if plant == "yes":
            Bf[rng.integers(nb)] = list(A[rng.integers(na)])
        return SetFamilyInstance(U, A, Bf, params)
    return _with_retries(make, lambda x: oracles.jaccard_max(x).value >= j, seed, plant, "jaccard")


def _gen_hopcroft(params, seed):
    from . import oracles
    na, nb = _sizes(params)
    _need(params, "d", "bound")
    d, V = int(params["d"]), int(params["bound"])
    plant = _plant(params)
    if d < 1 or V < 1:
        raise ValueError("need d >= 1 and bound >= 1")

    def make(rng, r):
        A = rng.integers(-V, V + 1, size=(na, d))
        Bv = rng.integers(-V, V + 1, size=(nb, d))
        if plant == "yes":
            i, j = rng.integers(na), rng.integers(nb)
            a = A[i]
            y = np.zeros(d, np.int64)
            if d >= 2:
                s, t = rng.choice(d, size=2, replace=False)
                g = np.gcd(a[s], a[t]) or 1
                y[s], y[t] = a[t] // g, -a[s] // g
                y *= rng.choice([-1, 1])
            Bv[j] = y
        return IntegerPairInstance(d, V, A, Bv, params)
    return _with_retries(make, lambda x: oracles.hopcroft_decide(x).decision, seed, plant, "hopcroft")


def _gen_3ov(params, seed):
    from . import oracles
    n = int(params.get("n", 0))
    _need(params, "d")
    d = int(params["d"])
    plant = _plant(params)
    if n < 1:
        raise ValueError("n must be positive")

    def make(rng, r):
        rho = _density(params, rng, r)
        A, Bv, C = (_rand_bits(rng, n, d, rho) for _ in range(3))
        if plant == "yes":
            i, j, k = rng.integers(n, size=3)
            C[k] = C[k] & (1 - (A[i] & Bv[j]))
        return TripleInstance(d, A, Bv, C, params)
    return _with_retries(make, lambda x: oracles.three_ov_decide(x).decision, seed, plant, "3ov")


def _gen_3sum(params, seed):
    from . import oracles
    n = int(params.get("n", 0))
    _need(params, "bound")
    W = int(params["bound"])
    plant = _plant(params)
    if n < 1:
        raise ValueError("n must be positive")
    if W < 2 or W % 2:
        raise ValueError("bound W must be even and >= 2")
    lo, hi = -W // 2, W // 2

    def make(rng, r):
        # later retries draw from a random sub-range so "no" plants stay reachable
        lo_r = lo if r == 0 else int(rng.integers(lo, hi))
        A, Bv, C = (rng.integers(lo_r, hi, size=n).tolist() for _ in range(3))
        if plant == "yes":
            while True:
                a, b = rng.integers(lo, hi, size=2)
                if lo <= -(a + b) < hi:
                    break
            i, j, k = rng.integers(n, size=3)
            A[i], Bv[j], C[k] = int(a), int(b), int(-(a + b))
        return ThreeSumInstance(W, A, Bv, C, params)
    return _with_retries(make, lambda x: oracles.three_sum_decide(x).decision, seed, plant, "3sum")


def _gen_cnf(params, seed):
    """Random k-CNF; with sat=s a planted formula whose optimum is exactly s*m.

    The planted formula has round((1-s)m) complementary unit pairs (x_v), (not x_v),
    each contributing exactly one satisfied clause, and random k-clauses satisfied
    by a hidden assignment for the rest.
    """
    from . import oracles
    _need(params, "num_vars", "m")
    n, m = int(params["num_vars"]), int(params["m"])
    k = int(params.get("width", 3))
    sat = params.get("sat")
    if n < 1 or m < 1 or not 1 <= k <= n:
        raise ValueError("need num_vars >= 1, m >= 1, 1 <= width <= num_vars")

    def rand_clause(rng, hidden=None):
        while True:
            vs = rng.choice(n, size=k, replace=False) + 1
            signs = rng.choice([-1, 1], size=k)
            c = [int(v * s) for v, s in zip(vs, signs)]
            if hidden is None or any((hidden[abs(l) - 1] == 1) == (l > 0) for l in c):
                return c

    if sat is None:
        rng = _rng(seed)
        return CnfInstance(n, [rand_clause(rng) for _ in range(m)], params)
    sat = float(sat)
    u = int(round((1 - sat) * m))
    if 2 * u > m:
        raise ValueError("sat too small for the complementary-pair construction")

    def make(rng, r):
        hidden = rng.integers(0, 2, size=n)
        cl = [rand_clause(rng, hidden) for _ in range(m - 2 * u)]
        for v in rng.integers(1, n + 1, size=u):
            cl += [[int(v)], [-int(v)]]
        order = rng.permutation(len(cl))
        return CnfInstance(n, [cl[i] for i in order], params)

    def check(f):
        return f.num_vars > 26 or oracles.maxsat_opt(f).value == m - u
    return _with_retries(make, check, seed, "yes", "cnf")


def generate(kind: str, params: dict, seed: int):
    """Deterministic instance generator for (kind, params, seed)."""
    params = dict(params)
    if kind in ("ov", "maxip", "minip", "exactip", "gap-min", "gap-max"):
        return _gen_boolean(kind, params, seed)
    if kind in ("bcp", "fp"):
        return _gen_real(kind, params, seed)
    if kind == "jaccard":
        return _gen_jaccard(params, seed)
    if kind == "hopcroft":
        return _gen_hopcroft(params, seed)
    if kind == "3ov":
        return _gen_3ov(params, seed)
    if kind == "3sum":
        return _gen_3sum(params, seed)
    if kind == "cnf":
        return _gen_cnf(params, seed)
    raise ValueError(f"unknown problem kind '{kind}'")


KINDS = ("ov", "maxip", "minip", "exactip", "gap-min", "gap-max", "bcp", "fp",
         "jaccard", "hopcroft", "3ov", "3sum", "cnf")


# ---------------------------------------------------------------- serialization

def _fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def _points(P) -> str:
    return "[" + ",".join("[" + ",".join(_fmt_float(v) for v in row) + "]" for row in P) + "]"


def _bitlist(X) -> list:
    return [B_.to_string(r) for r in X]


def _encode(obj) -> str:
    """One JSON line for an instance (floats written with 17 significant digits)."""
    head = {"kind": obj.kind, "params": obj.params}
    if isinstance(obj, BooleanPairInstance):
        head.update(d=obj.d, A=_bitlist(obj.A), B=_bitlist(obj.B))
    elif isinstance(obj, ExactIPInstance):
        head.update(d=obj.base.d, target=obj.target, A=_bitlist(obj.base.A), B=_bitlist(obj.base.B))
    elif isinstance(obj, GapInstance):
        head.update(d=obj.base.d, tau=obj.tau, A=_bitlist(obj.base.A), B=_bitlist(obj.base.B))
    elif isinstance(obj, RealPairInstance):
        body = json.dumps(dict(head, d=obj.d, p=obj.p))[:-1]
        body += ', "A": ' + _points(obj.A)
        if obj.B is not None:
            body += ', "B": ' + _points(obj.B)
        return body + "}"
    elif isinstance(obj, SetFamilyInstance):
        head.update(universe=obj.universe, A=[list(s) for s in obj.A], B=[list(s) for s in obj.B])
    elif isinstance(obj, IntegerPairInstance):
        head.update(d=obj.d, bound=obj.bound, A=obj.A.tolist(), B=obj.B.tolist())
    elif isinstance(obj, TripleInstance):
        head.update(d=obj.d, A=_bitlist(obj.A), B=_bitlist(obj.B), C=_bitlist(obj.C))
    elif isinstance(obj, ThreeSumInstance):
        head.update(bound=obj.bound, A=list(obj.A), B=list(obj.B), C=list(obj.C))
    elif isinstance(obj, CnfInstance):
        head.update(num_vars=obj.num_vars, clauses=[list(c) for c in obj.clauses])
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return json.dumps(head)


def serialize(obj) -> str:
    """Text for an instance or an OrBundle (header line, then one line per item)."""
    if isinstance(obj, OrBundle):
        lines = [json.dumps({"kind": "bundle", "target": obj.kind, "provenance": obj.provenance,
                             "count": len(obj.items)})]
        for idx, it in zip(obj.merlin, obj.items):
            body = _encode(it)
            lines.append(body[:-1] + f', "merlin": {int(idx)}}}')
        return "\n".join(lines) + "\n"
    return _encode(obj) + "\n"


def _field(rec, name, ln, typ=None):
    if name not in rec:
        raise ParseError(ln, name, "missing")
    v = rec[name]
    if typ is not None and not isinstance(v, typ):
        raise ParseError(ln, name, f"expected {typ.__name__ if isinstance(typ, type) else typ}")
    return v


def _bits_field(rec, name, d, ln):
    vs = _field(rec, name, ln, list)
    out = np.zeros((len(vs), d), dtype=np.uint8)
    for i, s in enumerate(vs):
        if not isinstance(s, str) or len(s) != d or any(c not in "01" for c in s):
            raise ParseError(ln, f"{name}[{i}]", f"expected a 0/1 string of length {d}")
        out[i] = B_.from_string(s)
    return out


def _decode(rec: dict, ln: int):
    kind = _field(rec, "kind", ln, str)
    params = rec.get("params", {})
    if not isinstance(params, dict):
        raise ParseError(ln, "params", "expected an object")
    try:
        if kind in ("ov", "maxip", "minip", "exactip", "gap-min", "gap-max", "3ov"):
            d = _field(rec, "d", ln, int)
            A = _bits_field(rec, "A", d, ln)
            Bv = _bits_field(rec, "B", d, ln)
            if kind == "3ov":
                return TripleInstance(d, A, Bv, _bits_field(rec, "C", d, ln), params)
            if kind == "exactip":
                return ExactIPInstance(BooleanPairInstance(d, A, Bv, "ov"), _field(rec, "target", ln, int), params)
            if kind.startswith("gap-"):
                return GapInstance(BooleanPairInstance(d, A, Bv, "ov"), _field(rec, "tau", ln, int), kind[4:], params)
            return BooleanPairInstance(d, A, Bv, kind, params)
        if kind in ("bcp", "fp"):
            d = _field(rec, "d", ln, int)
            A = _field(rec, "A", ln, list)
            for i, row in enumerate(A + (rec.get("B") or [])):
                if not isinstance(row, list) or len(row) != d:
                    raise ParseError(ln, "A/B", f"point {i} does not have {d} coordinates")
            return RealPairInstance(d, float(_field(rec, "p", ln, (int, float))), A, rec.get("B"), kind, params)
        if kind == "jaccard":
            return SetFamilyInstance(_field(rec, "universe", ln, int), _field(rec, "A", ln, list),
                                     _field(rec, "B", ln, list), params)
        if kind == "hopcroft":
            d = _field(rec, "d", ln, int)
            for name in ("A", "B"):
                for i, row in enumerate(_field(rec, name, ln, list)):
                    if not isinstance(row, list) or len(row) != d:
                        raise ParseError(ln, f"{name}[{i}]", f"expected {d} integers")
            return IntegerPairInstance(d, _field(rec, "bound", ln, int), rec["A"], rec["B"], params)
        if kind == "3sum":
            return ThreeSumInstance(_field(rec, "bound", ln, int), _field(rec, "A", ln, list),
                                    _field(rec, "B", ln, list), _field(rec, "C", ln, list), params)
        if kind == "cnf":
            return CnfInstance(_field(rec, "num_vars", ln, int), _field(rec, "clauses", ln, list), params)
    except ParseError:
        raise
    except (ValueError, TypeError) as e:
        raise ParseError(ln, kind, str(e)) from None
    raise ParseError(ln, "kind", f"unknown kind '{kind}'")


def parse(text: str) -> list:
    """Parse a file of instance lines and bundles into a list of objects."""
    out: list[Any] = []
    lines = [(i + 1, s) for i, s in enumerate(text.splitlines()) if s.strip()]
    pos = 0
    while pos < len(lines):
        ln, s = lines[pos]
        try:
            rec = json.loads(s)
        except json.JSONDecodeError as e:
            raise ParseError(ln, "<json>", e.msg) from None
        if not isinstance(rec, dict):
            raise ParseError(ln, "<json>", "expected an object")
        pos += 1
        if rec.get("kind") == "bundle":
            count = _field(rec, "count", ln, int)
            items, merlin = [], []
            for _ in range(count):
                if pos >= len(lines):
                    raise ParseError(ln, "count", "bundle ends early")
                iln, s2 = lines[pos]
                try:
                    r2 = json.loads(s2)
                except json.JSONDecodeError as e:
                    raise ParseError(iln, "<json>", e.msg) from None
                merlin.append(_field(r2, "merlin", iln, int))
                items.append(_decode(r2, iln))
                pos += 1
            out.append(OrBundle(_field(rec, "target", ln, str), items,
                                _field(rec, "provenance", ln, str), merlin))
        else:
            out.append(_decode(rec, ln))
    return out


def parse_one(text: str):
    objs = parse(text)
    if len(objs) != 1:
        raise ValueError(f"expected exactly one instance, found {len(objs)}")
    return objs[0]
