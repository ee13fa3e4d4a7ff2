"""Seeded verification and benchmark runs shared by the CLI and the acceptance suite.

A check takes (params, seed, caps) and returns (ok, detail).  verify() runs K
trials, trial i using trial_seed(seed, i), and aggregates in trial order, so a
report depends only on its inputs.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import binomtest

from . import gadgets, lsh, maxsat, oracles, protocols, subquadratic
from .instances import generate

MAX_FAILURES = 5


def trial_seed(seed: int, i: int) -> int:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), 0x7E57, i])
    return int(ss.generate_state(1, np.uint32)[0])


def wilson(k: int, n: int, level: float = 0.95):
    if n == 0:
        return None
    ci = binomtest(k, n).proportion_ci(confidence_level=level, method="wilson")
    return [round(float(ci.low), 6), round(float(ci.high), 6)]


@dataclass(frozen=True)
class Caps:
    dim: Optional[int] = None
    bundle: Optional[int] = None


def _plant(seed: int) -> str:
    return "yes" if seed & 1 else "no"


# ---------------------------------------------------------------- exact reductions

def _check_exactip_ov(p, seed, caps):
    rng = np.random.default_rng(seed)
    d = int(p.get("d", 6))
    m = int(p.get("m", rng.integers(0, d + 1)))
    g = int(p.get("group_len", 2))
    inst = generate("exactip", {"n": p.get("n", 8), "d": d, "m": m, "plant": _plant(seed)}, seed)
    got = protocols.exactip_to_ov(inst, min(g, d), cap_dim=caps.dim, cap_bundle=caps.bundle).decide()
    want = oracles.exactip_decide(inst).decision
    return got == want, {"m": m, "bundle": got, "oracle": want}


def _check_hopcroft_ov(p, seed, caps):
    inst = generate("hopcroft", {"n": p.get("n", 6), "d": p.get("d", 2), "bound": p.get("bound", 20),
                                 "plant": _plant(seed)}, seed)
    got = protocols.hopcroft_to_ov(inst, cap_dim=caps.dim, cap_bundle=caps.bundle).decide()
    want = oracles.hopcroft_decide(inst).decision
    return got == want, {"bundle": got, "oracle": want}


def _check_3sum_3ov(p, seed, caps):
    inst = generate("3sum", {"n": p.get("n", 8), "bound": p.get("bound", 64), "plant": _plant(seed)}, seed)
    b = int(p.get("block_size", 2))
    got = protocols.threesum_to_3ov(inst, b, cap_dim=caps.dim, cap_bundle=caps.bundle).decide()
    want = oracles.three_sum_decide(inst).decision
    return got == want, {"bundle": got, "oracle": want}


def _check_reverse(p, seed, caps):
    inst = generate("minip", {"n": p.get("n", 16), "d": p.get("d", 12)}, seed)
    rev, _ = gadgets.reverse_instance(inst, caps.dim)
    got, want = oracles.max_ip(rev).value, inst.d - oracles.min_ip(inst).value
    return got == want, {"reversed_max": got, "d_minus_min": want}


def _check_exactip_minip(p, seed, caps):
    rng = np.random.default_rng(seed)
    d = int(p.get("d", 4))
    m = int(rng.integers(0, d + 1))
    inst = generate("exactip", {"n": p.get("n", 6), "d": d, "m": m, "plant": _plant(seed)}, seed)
    red, rec = gadgets.exactip_to_minip(inst, caps.dim)
    mn = oracles.min_ip(red).value
    want = oracles.exactip_decide(inst).decision
    return (mn == rec.threshold) == want and mn >= rec.threshold, {"min": mn, "M": rec.threshold}


def _check_integer(p, seed, caps):
    rng = np.random.default_rng(seed)
    d, r, n = int(p.get("d", 2)), int(p.get("r", 2)), int(p.get("n", 4))
    A = rng.integers(0, r + 1, size=(n, d))
    B = rng.integers(0, r + 1, size=(n, d))
    m = int(rng.integers(0, d * r * r + 1))
    red, rec = gadgets.integer_instance(A, B, r, m, caps.dim)
    got = oracles.max_ip(red).value == rec.threshold
    want = bool(np.any(A @ B.T == m))
    return got == want, {"m": m, "reduced": got, "oracle": want}


def _check_jaccard(p, seed, caps):
    inst = generate("maxip", {"n": p.get("n", 12), "d": p.get("d", 10)}, seed)
    sets = gadgets.jaccard_embed(inst)
    J = oracles.jaccard_max(sets).value
    got = gadgets.jaccard_recover(J, inst.d)
    want = oracles.max_ip(inst).value
    return got == want, {"recovered": str(got), "max": want}


# ---------------------------------------------------------------- randomized reductions

def _check_lsh_maxip(p, seed, caps):
    plant = _plant(seed)
    eps = float(p.get("eps", 0.3))
    inst = generate("bcp", {"n": p.get("n", 64), "d": p.get("d", 16), "p": p.get("p", 2.0),
                            "eps": eps, "radius": 1.0, "plant": plant}, seed)
    fam = lsh.pstable_family(inst.p, 1.0, eps)
    sk, (t1, t2) = lsh.lsh_to_maxip(inst.A, inst.other, fam, seed=seed, N=p.get("N"))
    mx = oracles.max_ip(sk).value
    ok = mx > t1 if plant == "yes" else mx < t2
    return ok, {"plant": plant, "max": mx, "tau1N": round(t1, 6), "tau2N": round(t2, 6)}


def _approx_lp(kind):
    def check(p, seed, caps):
        eps = float(p.get("eps", 0.3))
        inst = generate(kind, {"n": p.get("n", 64), "d": p.get("d", 16), "p": p.get("p", 2.0),
                               "eps": eps, "plant": "yes"}, seed)
        backend = p.get("backend", "oracle")
        if backend == "ov-pipeline":
            backend = lsh.ov_pipeline_backend(p.get("group_len"), caps.dim, caps.bundle)
        fn = lsh.bcp_approx if kind == "bcp" else lsh.fp_approx
        got = fn(inst, eps, backend=backend, seed=seed, N=p.get("N"))
        true = (oracles.bcp if kind == "bcp" else oracles.fp)(inst).value
        ok = true / (1 + eps) <= got <= true * (1 + eps) if true > 0 else got == 0
        return bool(ok), {"approx": round(got, 9), "exact": round(true, 9)}
    return check


def _check_gap(p, seed, caps):
    mode = p.get("mode", "min")
    tau = int(p.get("tau", 4))
    plant = _plant(seed)
    inst = generate(f"gap-{mode}", {"n": p.get("n", 100), "d": p.get("d", 40), "tau": tau,
                                    "plant": plant}, seed)
    got = subquadratic.gap_decide(inst, seed=seed)
    return got == (plant == "yes"), {"plant": plant, "decision": got}


def _check_mamin(p, seed, caps):
    inst = generate("minip", {"n": p.get("n", 100), "d": p.get("d", 40),
                              "density": p.get("density", 0.5)}, seed)
    v = subquadratic.mamin_ip(inst, seed=seed)
    mn = oracles.min_ip(inst).value
    return mn <= v <= 2 * mn, {"value": v, "min": mn}


def _check_mamax(p, seed, caps):
    inst = generate("maxip", {"n": p.get("n", 100), "d": p.get("d", 40),
                              "density": p.get("density", 0.5)}, seed)
    v = subquadratic.mamax_ip(inst, seed=seed)
    mx = oracles.max_ip(inst).value
    return mx / 2 <= v <= mx, {"value": v, "max": mx}


def _check_moderate(p, seed, caps):
    inst = generate("minip", {"n": p.get("n", 32), "d": p.get("d", 20),
                              "density": p.get("density", 0.7)}, seed)
    v = subquadratic.moderate_maminip(inst, eps=float(p.get("eps", 0.2)), seed=seed,
                                      N=p.get("N", 5), m=p.get("m", 1),
                                      cap_dim=caps.dim, cap_bundle=caps.bundle)
    mn = oracles.min_ip(inst).value
    return mn <= v <= 2 * mn, {"value": v, "min": mn}


def _check_maxsat(p, seed, caps):
    eps = float(p.get("eps", 0.1))
    f = generate("cnf", {"num_vars": p.get("num_vars", 16), "m": p.get("m", 40),
                         "sat": p.get("sat", round(1 - eps, 9))}, seed)
    r = maxsat.approx_maxsat(f, eps, seed=seed, minip_backend=p.get("backend"))
    return r.satisfied >= (1 - 2 * eps) * f.m, {"satisfied": r.satisfied, "m": f.m}


@dataclass(frozen=True)
class Check:
    fn: Callable
    randomized: bool
    help: str


REGISTRY = {
    "exactip-ov": Check(_check_exactip_ov, False, "ExactIP -> OR of OV via the inner-product protocol"),
    "hopcroft-ov": Check(_check_hopcroft_ov, False, "Hopcroft (integer OV) -> OR of OV via CRT"),
    "3sum-3ov": Check(_check_3sum_3ov, False, "3-SUM -> OR of 3-OV via carry proofs"),
    "reverse": Check(_check_reverse, False, "MinIP <-> MaxIP reversal gadget"),
    "exactip-minip": Check(_check_exactip_minip, False, "ExactIP -> MinIP threshold gadget"),
    "integer": Check(_check_integer, False, "integer ExactIP -> Boolean MaxIP"),
    "jaccard": Check(_check_jaccard, False, "MaxIP -> max Jaccard index"),
    "lsh-maxip": Check(_check_lsh_maxip, True, "l_p LSH -> MaxIP threshold separation"),
    "bcp-approx": Check(_approx_lp("bcp"), True, "(1+eps) closest pair"),
    "fp-approx": Check(_approx_lp("fp"), True, "(1+eps) furthest pair"),
    "gap": Check(_check_gap, True, "Gap-Min/Max-IP decision vs oracle"),
    "mamin": Check(_check_mamin, True, "factor-2 MinIP window"),
    "mamax": Check(_check_mamax, True, "factor-2 MaxIP window"),
    "moderate-maminip": Check(_check_moderate, True, "factor-2 MinIP through OV bundles"),
    "maxsat": Check(_check_maxsat, True, "(1-2eps) MAXSAT on planted formulas"),
}


def _run_one(args):
    name, params, seed, caps, i = args
    s = trial_seed(seed, i)
    ok, detail = REGISTRY[name].fn(params, s, caps)
    return i, bool(ok), {"trial": i, "seed": s, **detail}


def verify(name: str, params: Optional[dict] = None, trials: int = 100, seed: int = 0,
           threads: int = 1, caps: Caps = Caps()) -> dict:
    """Run `trials` seeded instances through a registered check and aggregate in trial order."""
    if name not in REGISTRY:
        raise KeyError(f"unknown reduction '{name}'")
    params = dict(params or {})
    jobs = [(name, params, seed, caps, i) for i in range(trials)]
    if threads > 1 and trials > 1:
        with ProcessPoolExecutor(threads) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    agree = sum(ok for _, ok, _ in results)
    report = {"reduction": name, "params": params, "seed": seed, "trials": trials,
              "agree": agree, "failures": [d for _, ok, d in results if not ok][:MAX_FAILURES],
              "randomized": REGISTRY[name].randomized}
    if REGISTRY[name].randomized:
        report["success_rate"] = round(agree / trials, 6) if trials else None
        report["wilson95"] = wilson(agree, trials)
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True)


# ---------------------------------------------------------------- bench

def _bench_target(name: str, n: int, seed: int, caps: Caps, params: dict):
    """Run one reduction/solver at size n; returns (d_in, d_out, items)."""
    if name == "reverse":
        inst = generate("minip", {"n": n, "d": params.get("d", 32)}, seed)
        _, rec = gadgets.reverse_instance(inst, caps.dim)
        return rec.d_in, rec.d_out, 1
    if name == "exactip-minip":
        inst = generate("exactip", {"n": n, "d": params.get("d", 8), "m": params.get("m", 2)}, seed)
        _, rec = gadgets.exactip_to_minip(inst, caps.dim)
        return rec.d_in, rec.d_out, 1
    if name == "exactip-ov":
        d = params.get("d", 8)
        inst = generate("exactip", {"n": n, "d": d, "m": params.get("m", 2)}, seed)
        b = protocols.exactip_to_ov(inst, params.get("group_len", 2), cap_dim=caps.dim,
                                    cap_bundle=caps.bundle)
        b.decide()
        return d, b.dim, len(b)
    if name == "lsh-maxip":
        inst = generate("bcp", {"n": n, "d": params.get("d", 16)}, seed)
        fam = lsh.pstable_family(inst.p, 1.0, params.get("eps", 0.3))
        sk, _ = lsh.lsh_to_maxip(inst.A, inst.other, fam, seed=seed)
        oracles.max_ip(sk)
        return inst.d, sk.d, 1
    if name in ("mamin", "mamax"):
        d = params.get("d", 40)
        inst = generate("minip", {"n": n, "d": d}, seed)
        (subquadratic.mamin_ip if name == "mamin" else subquadratic.mamax_ip)(inst, seed=seed)
        return d, d, 1
    if name in ("ov", "min_ip", "max_ip"):
        d = params.get("d", 32)
        inst = generate("minip", {"n": n, "d": d}, seed)
        getattr(oracles, "ov_decide" if name == "ov" else name)(inst)
        return d, d, 1
    raise KeyError(f"unknown bench target '{name}'")


BENCH_TARGETS = ("reverse", "exactip-minip", "exactip-ov", "lsh-maxip", "mamin", "mamax",
                 "ov", "min_ip", "max_ip")


def bench(name: str, ladder, seed: int = 0, caps: Caps = Caps(), params: Optional[dict] = None) -> list:
    params = dict(params or {})
    rows = []
    for n in ladder:
        t = time.perf_counter()
        d_in, d_out, items = _bench_target(name, int(n), seed, caps, params)
        rows.append({"target": name, "n": int(n), "seconds": round(time.perf_counter() - t, 6),
                     "d_in": d_in, "d_out": d_out, "blowup": round(d_out / d_in, 6), "items": items})
    return rows


def markdown_table(rows: list) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    out = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    out += ["| " + " | ".join(str(r[c]) for c in cols) + " |" for r in rows]
    return "\n".join(out)


def log2_ladder(lo: int, hi: int) -> list:
    return [1 << e for e in range(int(math.log2(lo)), int(math.log2(hi)) + 1)]
