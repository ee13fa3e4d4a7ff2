import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ovequiv import gadgets as G
from ovequiv import oracles
from ovequiv.instances import BooleanPairInstance, ExactIPInstance, generate

bitvec = lambda d: st.lists(st.integers(0, 1), min_size=d, max_size=d)


@st.composite
def pair(draw, max_d=64):
    d = draw(st.integers(1, max_d))
    return np.array(draw(bitvec(d)), np.uint8), np.array(draw(bitvec(d)), np.uint8)


# ---------------------------------------------------------------- reversal

def test_reverse_table():
    assert list(G.reverse_embed([1], "x")) == [0, 1]
    assert list(G.reverse_embed([0], "y")) == [1, 1]


def test_reverse_zero_vectors():
    z = np.zeros(7, np.uint8)
    assert int(G.reverse_embed(z, "x") @ G.reverse_embed(z, "y")) == 7


@given(pair())
def test_reverse_identity(xy):
    x, y = xy
    got = int(G.reverse_embed(x, "x").astype(int) @ G.reverse_embed(y, "y"))
    assert got == len(x) - int(x.astype(int) @ y)


@given(st.integers(1, 150), st.integers(0, 2**32 - 1))
def test_reverse_packed_matches_unpacked(d, seed):
    inst = generate("minip", {"n": 3, "d": d}, seed)
    rev, rec = G.reverse_instance(inst)
    assert rec.d_out == 2 * d
    assert np.array_equal(rev.A, G.reverse_embed(inst.A, "x"))
    assert np.array_equal(rev.B, G.reverse_embed(inst.B, "y"))


def test_reverse_swaps_min_and_max():
    for s in range(10):
        inst = generate("minip", {"n": 8, "d": 9}, s)
        rev, _ = G.reverse_instance(inst)
        assert oracles.max_ip(rev).value == 9 - oracles.min_ip(inst).value
        assert oracles.min_ip(rev).value == 9 - oracles.max_ip(inst).value


def test_bad_side():
    with pytest.raises(ValueError):
        G.reverse_embed([1], "z")


# ---------------------------------------------------------------- ExactIP -> MinIP

def _emb_ip(x, y, m):
    return int(G.exactip_to_minip_embed(x, m, "x").astype(int) @ G.exactip_to_minip_embed(y, m, "y"))


def test_exactip_minip_d3():
    x, y = np.array([1, 1, 0]), np.array([0, 1, 1])
    assert _emb_ip(np.uint8(x), np.uint8(y), 1) == 45


def test_exactip_minip_d2_mismatch():
    one = np.array([1, 1], np.uint8)
    assert _emb_ip(one, one, 1) > 20


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_exactip_minip_exhaustive_law(d):
    vecs = [np.array(v, np.uint8) for v in itertools.product((0, 1), repeat=d)]
    for m in range(d + 1):
        L = G.exactip_to_minip_length(d, m)
        for x in vecs:
            ex = G.exactip_to_minip_embed(x, m, "x")
            assert len(ex) == L
            for y in vecs:
                ip = int(x.astype(int) @ y)
                assert _emb_ip(x, y, m) == (ip - m) ** 2 + 5 * d * d


def test_exactip_minip_target_out_of_range():
    with pytest.raises(ValueError):
        G.exactip_to_minip_embed(np.zeros(3, np.uint8), 4, "x")


def test_exactip_to_minip_instance_threshold():
    for s in range(20):
        inst = generate("exactip", {"n": 5, "d": 4, "m": s % 5, "plant": "yes" if s & 1 else "no"}, s)
        red, rec = G.exactip_to_minip(inst)
        mn = oracles.min_ip(red).value
        assert rec.threshold == 80 and mn >= 80
        assert (mn == 80) == oracles.exactip_decide(inst).decision


# ---------------------------------------------------------------- integer encoding

def test_unary_grid_weight():
    assert int(G.unary_grid([2], 2, "x").sum()) == 4


def test_unary_grid_block_product():
    gx, gy = G.unary_grid([2], 2, "x"), G.unary_grid([1], 2, "y")
    assert int(gx.astype(int) @ gy) == 2


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_unary_grid_product_law(d, r, data):
    a = np.array(data.draw(st.lists(st.integers(0, r), min_size=d, max_size=d)))
    b = np.array(data.draw(st.lists(st.integers(0, r), min_size=d, max_size=d)))
    assert int(G.unary_grid(a, r, "x").astype(int) @ G.unary_grid(b, r, "y")) == int(a @ b)


def test_integer_embed_exhaustive_d2_r2():
    d, r = 2, 2
    M = G.integer_embed_threshold(d, r)
    vecs = [np.array(v) for v in itertools.product(range(r + 1), repeat=d)]
    for m in range(d * r * r + 1):
        ex = {tuple(v): G.integer_embed(v, r, m, "x").astype(np.int64) for v in vecs}
        ey = {tuple(v): G.integer_embed(v, r, m, "y").astype(np.int64) for v in vecs}
        for x in vecs:
            for y in vecs:
                ip = int(ex[tuple(x)] @ ey[tuple(y)])
                if int(x @ y) == m:
                    assert ip == M
                else:
                    assert ip < M


def test_integer_embed_range_check():
    with pytest.raises(ValueError):
        G.integer_embed(np.array([3, 0]), 2, 1, "x")


def test_dimension_cap():
    inst = generate("exactip", {"n": 2, "d": 8, "m": 2}, 0)
    with pytest.raises(G.BlowupError):
        G.exactip_to_minip(inst, cap=10)


# ---------------------------------------------------------------- Jaccard

def test_jaccard_full_vectors():
    inst = BooleanPairInstance(4, [[1, 1, 1, 1]], [[1, 1, 1, 1]])
    s = G.jaccard_embed(inst)
    assert G.jaccard_of(s.A[0], s.B[0]) == 1


def test_jaccard_orthogonal_nonzero():
    inst = BooleanPairInstance(4, [[1, 1, 0, 0]], [[0, 0, 1, 0]])
    s = G.jaccard_embed(inst)
    assert G.jaccard_of(s.A[0], s.B[0]) == 0


@given(pair(max_d=32))
def test_jaccard_identity_and_recover(xy):
    x, y = xy
    d = len(x)
    s = G.jaccard_embed(BooleanPairInstance(d, [x], [y]))
    assert s.universe == 3 * d
    ip = int(x.astype(int) @ y)
    J = G.jaccard_of(s.A[0], s.B[0])
    assert J == Fraction(ip, 2 * d - ip)
    assert G.jaccard_recover(J, d) == ip


def test_jaccard_recover_examples():
    assert G.jaccard_recover(1.0, 5) == 5
    assert G.jaccard_recover(0.0, 5) == 0


# ---------------------------------------------------------------- enumeration reductions

def test_minip_via_exactip_examples():
    exact = oracles.exactip_decide
    ov = BooleanPairInstance(3, [[1, 0, 0]], [[0, 1, 0]])
    assert G.minip_via_exactip(ov, exact) == 0
    ones = BooleanPairInstance(3, [[1, 1, 1]], [[1, 1, 1]])
    assert G.minip_via_exactip(ones, exact) == 3


def test_enumeration_reductions_match_oracles():
    for s in range(20):
        inst = generate("minip", {"n": 6, "d": 7}, s)
        mn, mx = oracles.min_ip(inst).value, oracles.max_ip(inst).value
        assert G.minip_via_exactip(inst, oracles.exactip_decide) == mn
        assert G.maxip_via_exactip(inst, oracles.exactip_decide) == mx
        assert G.maxip_via_minip(inst, oracles.min_ip) == mx
        assert G.minip_via_maxip(inst, oracles.max_ip) == mn
        assert G.ov_via_minip(inst, oracles.min_ip) == oracles.ov_decide(inst).decision


def test_exactip_instance_target_validated():
    base = BooleanPairInstance(2, [[1, 0]], [[1, 0]])
    with pytest.raises(ValueError):
        ExactIPInstance(base, 3)
