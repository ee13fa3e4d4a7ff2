"""Walk one small instance through each exact reduction and compare with the oracle."""
from ovequiv import gadgets, oracles, protocols
from ovequiv.instances import generate


def main(seed: int = 7):
    inst = generate("exactip", {"n": 6, "d": 8, "m": 3, "plant": "yes"}, seed)
    want = oracles.exactip_decide(inst)
    print(f"ExactIP n=6 d=8 target=3: oracle says {want.decision}, witness {want.witness}")

    for g in (1, 2, 4):
        b = protocols.exactip_to_ov(inst, g)
        print(f"  group_len={g}: {len(b)} OV instances of dimension {b.items[0].d}, OR = {b.decide()}")

    red, rec = gadgets.exactip_to_minip(inst)
    print(f"  MinIP gadget: d {rec.d_in} -> {rec.d_out}, MIN = {oracles.min_ip(red).value}, "
          f"threshold {rec.threshold}")

    h = generate("hopcroft", {"n": 5, "d": 3, "bound": 20, "plant": "yes"}, seed)
    b = protocols.hopcroft_to_ov(h)
    print(f"Hopcroft d=3 V=20: {len(b)} OV instance(s) of dimension {b.items[0].d}, "
          f"OR = {b.decide()}, oracle = {oracles.hopcroft_decide(h).decision}")

    t = generate("3sum", {"n": 6, "bound": 64, "plant": "no"}, seed)
    b = protocols.threesum_to_3ov(t, 3)
    print(f"3-SUM n=6: {len(b)} 3-OV instances, OR = {b.decide()}, "
          f"oracle = {oracles.three_sum_decide(t).decision}")


if __name__ == "__main__":
    main()
