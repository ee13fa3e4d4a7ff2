"""Approximate MAXSAT for almost-satisfiable formulas via MinIP.

Pipeline: sample M clauses (sparsify), split the variables into halves and
enumerate each half (split_to_minip), then ask an approximate MinIP solver for
a pair of half-assignments leaving few clauses unsatisfied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import oracles
from .instances import BooleanPairInstance, CnfInstance, ParseError

DEFAULT_C1 = 18
MAX_VARS = 24


def sparsify(inst: CnfInstance, eps: float, seed: int = 0, c1: float = DEFAULT_C1) -> CnfInstance:
    """M = ceil(c1 eps^-2 n) clauses drawn uniformly with replacement; no-op when M >= m."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if inst.m == 0:
        raise ValueError("empty formula")
    M = math.ceil(c1 * inst.num_vars / eps ** 2)
    if M >= inst.m:
        return inst
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 5])
    idx = rng.integers(0, inst.m, size=M)
    return CnfInstance(inst.num_vars, [inst.clauses[i] for i in idx],
                       {**inst.params, "sparsified_from": inst.m, "M": M})


def _half_masks(inst: CnfInstance, lo: int, hi: int):
    """Positive/negative literal masks restricted to variables lo+1..hi, shifted to bit 0."""
    pos = np.zeros(inst.m, np.int64)
    neg = np.zeros(inst.m, np.int64)
    for c, cl in enumerate(inst.clauses):
        for l in cl:
            v = abs(l) - 1
            if lo <= v < hi:
                if l > 0:
                    pos[c] |= 1 << (v - lo)
                else:
                    neg[c] |= 1 << (v - lo)
    return pos, neg


def _unsat_vectors(pos, neg, width: int) -> np.ndarray:
    a = np.arange(1 << width, dtype=np.int64)[:, None]
    full = (1 << width) - 1
    sat = ((a & pos[None]) != 0) | (((~a & full) & neg[None]) != 0)
    return (~sat).astype(np.uint8)


def split_halves(num_vars: int) -> tuple:
    n = num_vars + (num_vars & 1)          # odd counts get an unused padding variable
    return n // 2, n - n // 2


def split_to_minip(inst: CnfInstance) -> BooleanPairInstance:
    """u_a[i] = 1 iff clause i is unsatisfied by the left half a; likewise v_b.

    <u_a, v_b> is the number of clauses the joint assignment (a, b) leaves
    unsatisfied.  Row a encodes left variable v at bit v of a.
    """
    if inst.num_vars > MAX_VARS:
        raise ValueError(f"split enumeration needs num_vars <= {MAX_VARS}")
    nl, nr = split_halves(inst.num_vars)
    A = _unsat_vectors(*_half_masks(inst, 0, nl), nl)
    B = _unsat_vectors(*_half_masks(inst, nl, nl + nr), nr)
    return BooleanPairInstance(inst.m, A, B, "minip", {"num_vars": inst.num_vars, "split": [nl, nr]})


def assignment_from_pair(num_vars: int, i: int, j: int) -> tuple:
    nl, nr = split_halves(num_vars)
    bits = [(i >> v) & 1 for v in range(nl)] + [(j >> v) & 1 for v in range(nr)]
    return tuple(bits[:num_vars])


@dataclass(frozen=True)
class MaxsatResult:
    assignment: tuple
    satisfied: int
    m: int
    unsat_sampled: int        # inner product of the chosen pair in the (sparsified) split

    @property
    def ratio(self) -> float:
        return self.satisfied / self.m


def _mamin_backend(repeats: int = 5):
    from .subquadratic import mamin_ip

    def backend(inst: BooleanPairInstance, seed: int):
        best = None
        for r in range(repeats):
            _, (i, j) = mamin_ip(inst, seed=seed * 1009 + r, return_witness=True)
            ip = int(np.dot(inst.A[i].astype(np.int64), inst.B[j]))
            if best is None or ip < best[0]:
                best = (ip, i, j)
        return best[1], best[2]
    return backend


def _oracle_backend(inst: BooleanPairInstance, seed: int):
    i, j = oracles.min_ip(inst).witness
    return i - 1, j - 1


def _resolve(backend):
    if backend is None or backend == "mamin":
        return _mamin_backend()
    if backend == "oracle":
        return _oracle_backend
    if callable(backend):
        return backend
    raise ValueError(f"unknown MinIP backend {backend!r}")


def approx_maxsat(inst: CnfInstance, eps: float, seed: int = 0, minip_backend=None,
                  c1: float = DEFAULT_C1) -> MaxsatResult:
    """Assignment satisfying >= (1 - 2 eps) m clauses w.p. >= 2/3 when sat(phi) >= 1 - eps.

    The default backend is the factor-2 MinIP approximation run five times,
    keeping the witness with the fewest unsatisfied sampled clauses.  A callable
    backend takes (BooleanPairInstance, seed) and returns a 0-based pair.
    """
    if inst.num_vars > MAX_VARS:
        raise ValueError(f"approx_maxsat needs num_vars <= {MAX_VARS}")
    psi = sparsify(inst, eps, seed, c1)
    split = split_to_minip(psi)
    i, j = _resolve(minip_backend)(split, seed)
    x = assignment_from_pair(inst.num_vars, i, j)
    ip = int(np.dot(split.A[i].astype(np.int64), split.B[j]))
    return MaxsatResult(x, inst.satisfied(x), inst.m, ip)


# ---------------------------------------------------------------- DIMACS

def parse_dimacs(text: str) -> CnfInstance:
    """DIMACS CNF: 'c' comments, one 'p cnf n m' header, 0-terminated clauses."""
    header = None
    clauses, cur = [], []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(ln, "header", "expected a single 'p cnf <vars> <clauses>' line")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(ln, "header", "variable and clause counts must be integers") from None
            continue
        if header is None:
            raise ParseError(ln, "clause", "clause before the 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(ln, "clause", f"bad literal {tok!r}") from None
            if abs(lit) > header[0]:
                raise ParseError(ln, "clause", f"literal {lit} exceeds {header[0]} variables")
            if lit == 0:
                if not cur:
                    raise ParseError(ln, "clause", "empty clause")
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if header is None:
        raise ParseError(0, "header", "missing 'p cnf' header")
    if cur:
        clauses.append(cur)
    if len(clauses) != header[1]:
        raise ParseError(0, "clauses", f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfInstance(header[0], clauses)


def to_dimacs(inst: CnfInstance) -> str:
    lines = [f"p cnf {inst.num_vars} {inst.m}"]
    lines += [" ".join(map(str, c)) + " 0" for c in inst.clauses]
    return "\n".join(lines) + "\n"
