"""ovequiv command line: generate, solve, reduce, approximate, verify and benchmark.

Every command writes JSON lines to stdout.  Exit status: 0 when all checks
pass, 1 on verification failures, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import gadgets, harness, instances, lsh, maxsat, oracles, protocols, subquadratic
from .instances import ParseError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _kv(items) -> dict:
    """Parse k=v pairs; values are read as JSON when possible, else kept as strings."""
    out = {}
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"expected key=value, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _emit(obj) -> None:
    sys.stdout.write((obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True)) + "\n")


def _read(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load(args) -> list:
    text = _read(args.input)
    if args.input and args.input.endswith((".cnf", ".dimacs")):
        return [maxsat.parse_dimacs(text)]
    return instances.parse(text)


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    params = _kv(args.param)
    for c in range(args.count):
        inst = instances.generate(args.kind, params, args.seed + c)
        _emit(instances.serialize(inst).rstrip("\n"))
    return EXIT_OK


def _solve_one(inst):
    kind = inst.kind
    if kind == "ov":
        return oracles.ov_decide(inst)
    if kind == "maxip":
        return oracles.max_ip(inst)
    if kind == "minip":
        return oracles.min_ip(inst)
    if kind == "exactip":
        return oracles.exactip_decide(inst)
    if kind in ("gap-min", "gap-max"):
        v = (oracles.min_ip if kind == "gap-min" else oracles.max_ip)(inst.base)
        return v
    if kind == "bcp":
        return oracles.bcp(inst)
    if kind == "fp":
        return oracles.fp(inst)
    if kind == "jaccard":
        return oracles.jaccard_max(inst)
    if kind == "hopcroft":
        return oracles.hopcroft_decide(inst)
    if kind == "3ov":
        return oracles.three_ov_decide(inst)
    if kind == "3sum":
        return oracles.three_sum_decide(inst)
    if kind == "cnf":
        return oracles.maxsat_opt(inst)
    raise UsageError(f"no oracle for kind {kind!r}")


def cmd_solve(args) -> int:
    for inst in _load(args):
        if args.oracle and args.oracle != getattr(inst, "kind", "bundle"):
            raise UsageError(f"--oracle {args.oracle} does not match instance kind {inst.kind!r}")
        if isinstance(inst, instances.OrBundle):
            _emit({"kind": "bundle", "decision": inst.decide(), "count": len(inst)})
            continue
        v = _solve_one(inst)
        rec = json.loads(v.to_json())
        if isinstance(rec.get("value"), float):
            rec["value"] = float(format(rec["value"], ".17g"))
        _emit({"kind": inst.kind, **rec})
    return EXIT_OK


REDUCTIONS = ("exactip-ov", "hopcroft-ov", "3sum-3ov", "threesum-3ov", "reverse", "exactip-minip",
              "integer", "jaccard", "moderate-maminip", "split")


# input types each reduction accepts
_REDUCE_INPUT = {
    "exactip-ov": instances.ExactIPInstance, "hopcroft-ov": instances.IntegerPairInstance,
    "3sum-3ov": instances.ThreeSumInstance, "threesum-3ov": instances.ThreeSumInstance,
    "reverse": instances.BooleanPairInstance, "exactip-minip": instances.ExactIPInstance,
    "integer": instances.IntegerPairInstance, "jaccard": instances.BooleanPairInstance,
    "moderate-maminip": instances.BooleanPairInstance, "split": instances.CnfInstance,
}


def _reduce_one(name, inst, params, args):
    cap_dim, cap_b = args.cap_dim, args.cap_bundle
    want = _REDUCE_INPUT.get(name)
    if want is not None and not isinstance(inst, want):
        raise UsageError(f"reduction {name!r} does not accept a {getattr(inst, 'kind', type(inst).__name__)!r} instance")
    prune = not args.no_prune
    if name == "exactip-ov":
        return protocols.exactip_to_ov(inst, int(params.get("group_len", args.group_len)), prune=prune,
                                       cap_dim=cap_dim, cap_bundle=cap_b)
    if name == "hopcroft-ov":
        return protocols.hopcroft_to_ov(inst, cap_dim=cap_dim, cap_bundle=cap_b)
    if name in ("3sum-3ov", "threesum-3ov"):
        return protocols.threesum_to_3ov(inst, int(params.get("block_size", args.block_size)),
                                         prune=prune, cap_dim=cap_dim, cap_bundle=cap_b)
    if name == "reverse":
        return gadgets.reverse_instance(inst, cap_dim)[0]
    if name == "exactip-minip":
        return gadgets.exactip_to_minip(inst, cap_dim)[0]
    if name == "integer":
        if "m" not in params:
            raise UsageError("the integer gadget needs -p m=<target>")
        r = int(params.get("r", max(int(np.max(inst.A)), int(np.max(inst.B)), 1)))
        return gadgets.integer_instance(inst.A, inst.B, r, int(params["m"]), cap_dim)[0]
    if name == "jaccard":
        return gadgets.jaccard_embed(inst)
    if name == "moderate-maminip":
        return subquadratic.moderate_maminip_to_ov(inst, int(params.get("tau", 1)),
                                                   float(params.get("eps", 0.2)), args.seed,
                                                   params.get("N"), params.get("m"), cap_dim, cap_b)
    if name == "split":
        return maxsat.split_to_minip(inst)
    raise UsageError(f"unknown reduction {name!r}")


def cmd_reduce(args) -> int:
    name = args.reduction or args.gadget or args.via
    if not name:
        raise UsageError("name a reduction (positional, --gadget or --via)")
    params = _kv(args.param)
    lines = [instances.serialize(_reduce_one(name, inst, params, args)).rstrip("\n")
             for inst in _load(args)]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_approx(args) -> int:
    status = EXIT_OK
    params = _kv(args.param)
    todo = [(inst, args.seed + t) for inst in _load(args) for t in range(args.trials)]
    for inst, seed in todo:
        prob, rec = args.problem, {"problem": args.problem, "eps": args.eps, "seed": seed}
        if prob in ("bcp", "fp"):
            backend = "oracle" if args.backend in (None, "oracle") else lsh.ov_pipeline_backend(
                params.get("group_len"), args.cap_dim, args.cap_bundle)
            fn = lsh.bcp_approx if prob == "bcp" else lsh.fp_approx
            rec["value"] = fn(inst, args.eps, backend=backend, seed=seed, N=params.get("N"))
            exact = (oracles.bcp if prob == "bcp" else oracles.fp)(inst).value
            rec["exact"] = exact
            rec["in_window"] = bool(exact / (1 + args.eps) <= rec["value"] <= exact * (1 + args.eps))
        elif prob == "jaccard":
            rec["value"] = lsh.jaccard_pair_approx(inst, args.eps, seed=seed)
            exact = float(oracles.jaccard_max(inst).value)
            rec["exact"] = exact
            rec["in_window"] = bool(abs(rec["value"] - exact) <= args.eps)
        elif prob in ("maminip", "mamaxip"):
            if args.backend == "moderate-ov":
                if prob != "maminip":
                    raise UsageError("the moderate-ov backend only approximates MinIP")
                v = subquadratic.moderate_maminip(inst, args.eps, seed,
                                                  cap_dim=args.cap_dim, cap_bundle=args.cap_bundle)
            elif args.backend in (None, "direct"):
                fn = subquadratic.mamin_ip if prob == "maminip" else subquadratic.mamax_ip
                v = fn(inst, seed=seed)
            else:
                raise UsageError(f"unknown backend {args.backend!r}")
            rec["value"] = int(v)
            if inst.n * len(inst.B) <= 1 << 20:
                if prob == "maminip":
                    ex = oracles.min_ip(inst).value
                    rec["in_window"] = bool(ex <= v <= 2 * ex)
                else:
                    ex = oracles.max_ip(inst).value
                    rec["in_window"] = bool(ex / 2 <= v <= ex)
                rec["exact"] = ex
        else:
            raise UsageError(f"unknown problem {prob!r}")
        if rec.get("in_window") is False:
            status = EXIT_FAIL
        _emit(rec)
    return status


def cmd_verify(args) -> int:
    if args.reduction not in harness.REGISTRY:
        raise UsageError(f"unknown reduction {args.reduction!r}; known: {', '.join(harness.REGISTRY)}")
    caps = harness.Caps(args.cap_dim, args.cap_bundle)
    rep = harness.verify(args.reduction, _kv(args.param), args.trials, args.seed, args.threads, caps)
    _emit(harness.report_json(rep))
    if rep["trials"] == 0:
        return EXIT_OK
    if rep["randomized"]:
        return EXIT_OK if rep["agree"] >= args.min_success * rep["trials"] else EXIT_FAIL
    return EXIT_OK if rep["agree"] == rep["trials"] else EXIT_FAIL


def cmd_bench(args) -> int:
    if args.target not in harness.BENCH_TARGETS:
        raise UsageError(f"unknown bench target {args.target!r}")
    ladder = [int(v) for v in args.ladder.split(",") if v.strip()] if args.ladder else []
    rows = harness.bench(args.target, ladder, args.seed, harness.Caps(args.cap_dim, args.cap_bundle),
                         _kv(args.param))
    if args.format == "markdown":
        sys.stdout.write(harness.markdown_table(rows) + ("\n" if rows else ""))
    else:
        for r in rows:
            _emit(r)
    return EXIT_OK


def cmd_maxsat(args) -> int:
    inst = maxsat.parse_dimacs(_read(args.input))
    backend = None if args.backend == "mamin" else args.backend
    res = maxsat.approx_maxsat(inst, args.eps, seed=args.seed, minip_backend=backend)
    rec = {"assignment": "".join(map(str, res.assignment)), "satisfied": res.satisfied,
           "clauses": res.m, "ratio": round(res.ratio, 9), "target": round(1 - 2 * args.eps, 9)}
    _emit(rec)
    return EXIT_OK if res.ratio >= 1 - 2 * args.eps else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ovequiv", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker processes for verify")
    p.add_argument("--cap-dim", type=int, default=None, help="refuse reductions above this dimension")
    p.add_argument("--cap-bundle", type=int, default=None, help="refuse bundles above this size")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate seeded instances")
    g.add_argument("kind", choices=instances.KINDS)
    g.add_argument("--param", "-p", action="append", metavar="K=V")
    g.add_argument("--count", type=int, default=1)
    g.set_defaults(fn=cmd_gen)

    s = sub.add_parser("solve", help="run the brute-force oracle on instances")
    s.add_argument("--input", "-i")
    s.add_argument("--oracle", choices=instances.KINDS, help="assert the instance kind")
    s.set_defaults(fn=cmd_solve)

    r = sub.add_parser("reduce", help="apply a reduction and print the reduced instance")
    r.add_argument("reduction", nargs="?", choices=REDUCTIONS)
    r.add_argument("--gadget", choices=("reverse", "exactip-minip", "integer", "jaccard"))
    r.add_argument("--via", choices=("exactip-ov", "hopcroft-ov", "threesum-3ov"))
    r.add_argument("--group-len", type=int, default=2)
    r.add_argument("--block-size", type=int, default=2)
    r.add_argument("--no-prune", action="store_true", help="emit all 2^m1 Merlin instances")
    r.add_argument("--input", "-i")
    r.add_argument("--output", "-o")
    r.add_argument("--param", "-p", action="append", metavar="K=V")
    r.set_defaults(fn=cmd_reduce)

    a = sub.add_parser("approx", help="run an approximation algorithm")
    a.add_argument("problem", choices=("bcp", "fp", "jaccard", "maminip", "mamaxip"))
    a.add_argument("--input", "-i")
    a.add_argument("--eps", type=float, default=0.3)
    a.add_argument("--backend", choices=("oracle", "ov-pipeline", "direct", "moderate-ov"))
    a.add_argument("--trials", type=int, default=1, help="repeat with seeds seed..seed+K-1")
    a.add_argument("--param", "-p", action="append", metavar="K=V",
                   help="bcp/fp: N (sketch repetitions) and group_len for the ov-pipeline backend")
    a.set_defaults(fn=cmd_approx)

    v = sub.add_parser("verify", help="seeded oracle-equivalence run of a registered reduction")
    v.add_argument("reduction")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--param", "-p", action="append", metavar="K=V")
    v.add_argument("--min-success", type=float, default=2 / 3,
                   help="success fraction required of randomized reductions")
    v.set_defaults(fn=cmd_verify)

    b = sub.add_parser("bench", help="wall clock and dimension blow-up across a size ladder")
    b.add_argument("target")
    b.add_argument("--ladder", default="64,128,256,512,1024")
    b.add_argument("--param", "-p", action="append", metavar="K=V")
    b.add_argument("--format", choices=("json", "markdown"), default="json")
    b.set_defaults(fn=cmd_bench)

    m = sub.add_parser("maxsat", help="approximate almost-satisfiable MAXSAT")
    m.add_argument("action", choices=("approx",))
    m.add_argument("--input", "-i", required=True, help="DIMACS CNF file")
    m.add_argument("--eps", type=float, default=0.1)
    m.add_argument("--backend", choices=("mamin", "oracle"), default="mamin")
    m.set_defaults(fn=cmd_maxsat)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.fn(args)
    except (UsageError, ParseError, ValueError, KeyError, gadgets.BlowupError, OSError) as e:
        sys.stderr.write(f"ovequiv: error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
