"""Approximate closest pair, factor-2 MinIP/MaxIP and MAXSAT on seeded instances."""
from ovequiv import lsh, maxsat, oracles, subquadratic
from ovequiv.instances import generate


def main(seed: int = 3):
    bcp = generate("bcp", {"n": 64, "d": 16, "eps": 0.3, "plant": "yes"}, seed)
    got = lsh.bcp_approx(bcp, 0.3, seed=seed)
    print(f"closest pair: approx {got:.4f}, exact {oracles.bcp(bcp).value:.4f}")

    inst = generate("minip", {"n": 100, "d": 40}, seed)
    print(f"MinIP: approx {subquadratic.mamin_ip(inst, seed=seed)}, exact {oracles.min_ip(inst).value}")
    print(f"MaxIP: approx {subquadratic.mamax_ip(inst, seed=seed)}, exact {oracles.max_ip(inst).value}")

    f = generate("cnf", {"num_vars": 16, "m": 40, "sat": 0.9}, seed)
    r = maxsat.approx_maxsat(f, 0.1, seed=seed)
    print(f"MAXSAT: satisfied {r.satisfied}/{f.m}, optimum {oracles.maxsat_opt(f).value}")


if __name__ == "__main__":
    main()
