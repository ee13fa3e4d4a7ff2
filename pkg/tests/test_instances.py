import numpy as np
import pytest
from hypothesis import given, strategies as st

from ovequiv import bits, oracles
from ovequiv.instances import (KINDS, BooleanPairInstance, OrBundle, ParseError, generate, parse,
                               parse_one, serialize)

PARAMS = {
    "ov": {"n": 5, "d": 6},
    "maxip": {"n": 5, "d": 6},
    "minip": {"n": 5, "d": 6},
    "exactip": {"n": 5, "d": 6, "m": 2},
    "gap-min": {"n": 5, "d": 12, "tau": 2},
    "gap-max": {"n": 5, "d": 12, "tau": 2},
    "bcp": {"n": 5, "d": 3},
    "fp": {"n": 5, "d": 3},
    "jaccard": {"n": 4, "universe": 10},
    "hopcroft": {"n": 4, "d": 2, "bound": 5},
    "3ov": {"n": 3, "d": 5},
    "3sum": {"n": 4, "bound": 32},
    "cnf": {"num_vars": 6, "m": 10},
}

PLANT_ORACLE = {
    "ov": lambda x: oracles.ov_decide(x).decision,
    "exactip": lambda x: oracles.exactip_decide(x).decision,
    "hopcroft": lambda x: oracles.hopcroft_decide(x).decision,
    "3ov": lambda x: oracles.three_ov_decide(x).decision,
    "3sum": lambda x: oracles.three_sum_decide(x).decision,
}


# ---------------------------------------------------------------- bits

@given(st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_pack_roundtrip(d, seed):
    X = (np.random.default_rng(seed).random((3, d)) < 0.5).astype(np.uint8)
    P = bits.pack(X)
    assert P.shape == (3, bits.n_words(d))
    assert np.array_equal(bits.unpack(P, d), X)


def test_bit_layout():
    x = np.zeros(130, np.uint8)
    x[[0, 65, 129]] = 1
    w = bits.pack(x)
    assert w[0] == 1 and w[1] == 2 and w[2] == 2


@given(st.integers(1, 150), st.integers(0, 2**32 - 1))
def test_ip_matrix_kernels_agree(d, seed):
    rng = np.random.default_rng(seed)
    A = (rng.random((4, d)) < 0.5).astype(np.uint8)
    B = (rng.random((5, d)) < 0.5).astype(np.uint8)
    want = A.astype(np.int64) @ B.T
    assert np.array_equal(bits.ip_matrix(bits.pack(A), bits.pack(B)), want)
    assert np.array_equal(bits.ip_matrix_numpy(bits.pack(A), bits.pack(B)), want)


def test_string_parse_convention():
    assert list(bits.from_string("101")) == [1, 0, 1]
    with pytest.raises(ValueError):
        bits.from_string("102")


# ---------------------------------------------------------------- generators

def test_planted_ov_yes():
    inst = generate("ov", {"n": 4, "d": 3, "plant": "yes"}, 1)
    assert oracles.ov_decide(inst).decision


def test_planted_exactip_no():
    inst = generate("exactip", {"n": 8, "d": 6, "m": 2, "plant": "no"}, 7)
    assert not oracles.exactip_decide(inst).decision


def test_empty_instance_rejected():
    with pytest.raises(ValueError):
        generate("ov", {"n": 0, "d": 3}, 0)
    with pytest.raises(ValueError):
        BooleanPairInstance(3, np.zeros((0, 3)), np.zeros((1, 3)))


def test_entries_and_lengths_validated():
    with pytest.raises(ValueError):
        BooleanPairInstance(3, [[0, 2, 1]], [[0, 0, 1]])
    with pytest.raises(ValueError):
        BooleanPairInstance(3, [[0, 1]], [[0, 0, 1]])


@pytest.mark.parametrize("kind", KINDS)
def test_generator_deterministic(kind):
    a = generate(kind, PARAMS[kind], 11)
    b = generate(kind, PARAMS[kind], 11)
    assert serialize(a) == serialize(b)


@pytest.mark.parametrize("kind", sorted(PLANT_ORACLE))
@pytest.mark.parametrize("plant", ["yes", "no"])
def test_plant_soundness(kind, plant):
    check = PLANT_ORACLE[kind]
    for s in range(1000):
        inst = generate(kind, dict(PARAMS[kind], plant=plant), s)
        assert check(inst) == (plant == "yes")


@pytest.mark.parametrize("mode", ["min", "max"])
def test_gap_plants(mode):
    for s in range(50):
        g = generate(f"gap-{mode}", {"n": 6, "d": 12, "tau": 2, "plant": "yes"}, s)
        if mode == "min":
            assert oracles.min_ip(g.base).value <= 2
        else:
            assert oracles.max_ip(g.base).value >= 4


def test_cnf_planted_optimum():
    for s in range(5):
        f = generate("cnf", {"num_vars": 10, "m": 20, "sat": 0.9}, s)
        assert oracles.maxsat_opt(f).value == 18


# ---------------------------------------------------------------- serialization

@pytest.mark.parametrize("kind", KINDS)
def test_roundtrip_every_kind(kind):
    for s in range(5):
        inst = generate(kind, PARAMS[kind], s)
        text = serialize(inst)
        back = parse_one(text)
        assert serialize(back) == text


def test_real_coordinates_bit_exact():
    inst = generate("bcp", {"n": 6, "d": 4}, 3)
    back = parse_one(serialize(inst))
    assert np.array_equal(inst.A, back.A) and np.array_equal(inst.other, back.other)


def test_bundle_roundtrip():
    items = [generate("ov", {"n": 3, "d": 4}, s) for s in range(3)]
    b = OrBundle("ov", items, "test", [5, 7, 9])
    assert parse(serialize(b))[0] == b


def test_parse_wrong_length():
    with pytest.raises(ParseError) as e:
        parse('{"kind": "ov", "d": 3, "A": ["10"], "B": ["101"]}')
    assert e.value.line == 1 and e.value.field == "A[0]"


def test_parse_bad_json_and_kind():
    with pytest.raises(ParseError):
        parse("{not json")
    with pytest.raises(ParseError):
        parse('{"kind": "nope"}')
    with pytest.raises(ParseError):
        parse('{"kind": "ov", "d": 2, "A": ["10"]}')
