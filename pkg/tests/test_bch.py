"""BCH bounded-distance and list decoding, plus the code fixture format."""

import itertools

import numpy as np
import pytest

from plsauth.coding import BchCode, DecodeFailure, builtin_code
from plsauth.coding.fixtures import FixtureError, dumps, loads
from plsauth.coding.gf2m import GF2m


def _flip(y, positions):
    out = y.copy()
    out[list(positions)] ^= 1
    return out


def test_toy_generator(bch15):
    # g(x) = 1 + x^4 + x^6 + x^7 + x^8, lowest degree first
    assert bch15.generator.tolist() == [1, 0, 0, 0, 1, 0, 1, 1, 1]
    assert (bch15.n, bch15.k, bch15.t) == (15, 7, 2)


def test_reference_instance_parameters(bch511):
    assert (bch511.n, bch511.k, bch511.t) == (511, 259, 30)
    assert bch511.syndrome(np.zeros(511, dtype=np.uint8)).bits.size == 252


def test_field_arithmetic():
    gf = GF2m(4)
    elems = np.arange(1, 16)
    assert (gf.mul(elems, gf.inv(elems)) == 1).all()
    # x^4 = x + 1 in GF(16) with the primitive polynomial x^4 + x + 1
    assert gf.alpha_pow(4) == 0b0011


def test_encode_gives_codewords(bch15):
    for msg in itertools.product((0, 1), repeat=7):
        c = bch15.encode(np.array(msg, dtype=np.uint8))
        assert bch15.is_codeword(c)
        # generator divides the codeword polynomial: compare with numpy polynomial division
        _, rem = np.polydiv(c[::-1].astype(float), bch15.generator[::-1].astype(float))
        assert not (np.round(rem).astype(int) % 2).any()


def test_every_weight_le2_pattern_corrected(bch15):
    rng = np.random.default_rng(1)
    c = bch15.encode(rng.integers(0, 2, 7, dtype=np.uint8))
    for w in (0, 1, 2):
        for pos in itertools.combinations(range(15), w):
            assert np.array_equal(bch15.correct(_flip(c, pos)), c)


def _coset(code, s):
    """All words with syndrome ``s``: a particular solution plus every codeword."""
    particular = np.zeros(code.n, dtype=np.uint8)
    particular[:s.size] = s  # x^i mod g(x) = x^i for i below the parity length
    assert np.array_equal(code.remainder(particular), s)
    msgs = np.array(list(itertools.product((0, 1), repeat=code.k)), dtype=np.uint8)
    return code.encode(msgs) ^ particular


def _oracle_list_decode(code, coset, y_b, order):
    """Bounded-distance decoding by exhaustive coset search for every flip pattern."""
    best = None
    for w in range(order + 1):
        for pat in itertools.combinations(range(code.n), w):
            cand = _flip(y_b, pat)
            dist = (coset ^ cand).sum(axis=1)
            hits = np.flatnonzero(dist <= code.t)
            if hits.size == 0:
                continue
            est = coset[hits[0]]
            key = (int((est ^ y_b).sum()), est.tobytes())
            if best is None or key < best[0]:
                best = (key, est)
    return None if best is None else best[1]


def test_weight3_list_decoding_matches_oracle(bch15):
    rng = np.random.default_rng(3)
    y_a = rng.integers(0, 2, 15, dtype=np.uint8)
    s = bch15.syndrome(y_a)
    coset = _coset(bch15, s.bits)
    recovered = oracle_recovered = 0
    for pos in itertools.combinations(range(15), 3):
        y_b = _flip(y_a, pos)
        expect = _oracle_list_decode(bch15, coset, y_b, 1)
        try:
            got = bch15.decode(y_b, s, list_order=1).estimate
        except DecodeFailure:
            got = None
        if expect is None:
            assert got is None
        else:
            assert np.array_equal(got, expect)
        recovered += got is not None and np.array_equal(got, y_a)
        oracle_recovered += expect is not None and np.array_equal(expect, y_a)
    assert recovered == oracle_recovered


def test_thirty_flips_recovered(bch511):
    rng = np.random.default_rng(30)
    for _ in range(50):
        y_a = rng.integers(0, 2, 511, dtype=np.uint8)
        y_b = _flip(y_a, rng.choice(511, 30, replace=False))
        res = bch511.decode(y_b, bch511.syndrome(y_a))
        assert res.verified
        assert np.array_equal(res.estimate, y_a)


def test_forty_five_flips_fail(bch511):
    rng = np.random.default_rng(45)
    wrong = 0
    for _ in range(50):
        y_a = rng.integers(0, 2, 511, dtype=np.uint8)
        y_b = _flip(y_a, rng.choice(511, 45, replace=False))
        try:
            wrong += not np.array_equal(bch511.decode(y_b, bch511.syndrome(y_a)).estimate, y_a)
        except DecodeFailure:
            wrong += 1
    assert wrong >= 48


def test_identical_sequences(bch511, rng):
    y = rng.integers(0, 2, 511, dtype=np.uint8)
    res = bch511.decode(y, bch511.syndrome(y))
    assert np.array_equal(res.estimate, y)


def test_syndrome_linearity(bch511, rng):
    for _ in range(10):
        x, y = rng.integers(0, 2, (2, 511), dtype=np.uint8)
        assert np.array_equal(bch511.syndrome(x ^ y).bits,
                              bch511.syndrome(x).bits ^ bch511.syndrome(y).bits)


def test_correct_raises_beyond_radius(bch15):
    c = np.zeros(15, dtype=np.uint8)
    failures = 0
    for pos in itertools.combinations(range(15), 3):
        try:
            out = bch15.correct(_flip(c, pos))
            assert bch15.is_codeword(out)
        except DecodeFailure:
            failures += 1
    assert failures > 0


@pytest.mark.parametrize("name", ["bch_15_7_2", "bch_511_259_30", "polar_512_267",
                                  "ldpc_3_6_512"])
def test_fixture_round_trip(name):
    code = builtin_code(name)
    again = loads(dumps(code))
    assert (again.n, again.k, again.name) == (code.n, code.k, code.name)
    assert dumps(again) == dumps(code)


def test_fixture_rejects_garbage():
    with pytest.raises(FixtureError):
        loads("not a fixture\n")
    text = dumps(BchCode(4, 2)).replace("1 0 0 0 1 0 1 1 1", "1 0 0 0 1 0 1 1 0")
    with pytest.raises(FixtureError):
        loads(text)
