"""LDPC syndrome coding with BP + OSD reprocessing."""

import itertools

import numpy as np
import pytest

from plsauth.coding import DecodeFailure, LdpcCode, bsc_llr, ldpc_osd_decode
from plsauth.coding.gf2 import gf2_matmul, gf2_rank
from plsauth.coding.ldpc import has_four_cycle

TOY_H = np.array([[1, 1, 0, 1, 1, 0, 0, 0],
                  [0, 1, 1, 0, 0, 1, 1, 0],
                  [1, 0, 1, 0, 0, 0, 1, 1],
                  [0, 0, 0, 1, 1, 1, 0, 1]], dtype=np.uint8)


@pytest.fixture(scope="module")
def toy():
    return LdpcCode(TOY_H, name="toy_8_4")


def test_toy_syndrome_by_hand(toy):
    y = [1, 0, 1, 1, 0, 0, 1, 0]
    expect = [sum(TOY_H[r][c] * y[c] for c in range(8)) % 2 for r in range(4)]
    assert list(toy.syndrome(y).bits) == expect == [0, 0, 1, 1]


def test_codeword_has_zero_syndrome(toy):
    for bits in itertools.product((0, 1), repeat=8):
        y = np.array(bits, dtype=np.uint8)
        if not gf2_matmul(TOY_H, y).any():
            assert not toy.syndrome(y).bits.any()


def test_length_mismatch_rejected(toy):
    with pytest.raises(ValueError):
        toy.syndrome(np.zeros(7, dtype=np.uint8))


def _coset_ml(y_b, s):
    """Closest member of the coset {y : H y = s}; ties to the lexicographically smallest."""
    best = None
    for bits in itertools.product((0, 1), repeat=8):
        y = np.array(bits, dtype=np.uint8)
        if np.array_equal(gf2_matmul(TOY_H, y), s):
            key = (int((y ^ y_b).sum()), y.tobytes())
            if best is None or key < best[0]:
                best = (key, y)
    return best[1]


def test_osd1_agrees_with_coset_ml(toy):
    rng = np.random.default_rng(11)
    agree = 0
    trials = 1000
    for _ in range(trials):
        y_a = rng.integers(0, 2, 8, dtype=np.uint8)
        y_b = y_a ^ (rng.random(8) < 0.05).astype(np.uint8)
        s = toy.syndrome(y_a)
        ml = _coset_ml(y_b, s.bits)
        try:
            est = toy.decode(y_b, s, 0.05, osd_order=1).estimate
        except DecodeFailure:
            continue
        # equal-likelihood ties count as agreement: the decision metric is the distance
        agree += int((est ^ y_b).sum()) == int((ml ^ y_b).sum())
    assert agree / trials >= 0.99


def test_noiseless_recovery(ldpc512, rng):
    for _ in range(5):
        y = rng.integers(0, 2, 512, dtype=np.uint8)
        res = ldpc_osd_decode(ldpc512, bsc_llr(y, 0.0), ldpc512.syndrome(y), osd_order=0)
        assert res.verified and np.array_equal(res.estimate, y)


def test_reference_instance_shape(ldpc512):
    H = ldpc512.H
    assert H.shape == (256, 512)
    assert ldpc512.syndrome(np.zeros(512, dtype=np.uint8)).bits.size == 256
    assert (H.sum(axis=0) == 3).all() and (H.sum(axis=1) == 6).all()
    assert gf2_rank(H) == 256 and ldpc512.full_rank
    assert not has_four_cycle(H)


def test_syndrome_linearity(ldpc512, rng):
    for _ in range(20):
        x, y = rng.integers(0, 2, (2, 512), dtype=np.uint8)
        assert np.array_equal(ldpc512.syndrome(x ^ y).bits,
                              ldpc512.syndrome(x).bits ^ ldpc512.syndrome(y).bits)


def test_successes_satisfy_syndrome(ldpc512):
    rng = np.random.default_rng(21)
    for _ in range(40):
        y_a = rng.integers(0, 2, 512, dtype=np.uint8)
        y_b = y_a ^ (rng.random(512) < 0.05).astype(np.uint8)
        s = ldpc512.syndrome(y_a)
        try:
            res = ldpc512.decode(y_b, s, 0.05, osd_order=1)
        except DecodeFailure:
            continue
        assert res.verified
        assert np.array_equal(ldpc512.syndrome(res.estimate).bits, s.bits)


def test_plain_bp_raises_on_failure(ldpc512):
    rng = np.random.default_rng(2)
    y_a = rng.integers(0, 2, 512, dtype=np.uint8)
    y_b = y_a ^ (rng.random(512) < 0.2).astype(np.uint8)
    with pytest.raises(DecodeFailure):
        ldpc512.decode(y_b, ldpc512.syndrome(y_a), 0.2, osd_order=None)


def test_osd_not_worse_than_bp(ldpc512):
    rng = np.random.default_rng(31)
    fail = {None: 0, 0: 0, 1: 0}
    for _ in range(60):
        y_a = rng.integers(0, 2, 512, dtype=np.uint8)
        y_b = y_a ^ (rng.random(512) < 0.07).astype(np.uint8)
        s = ldpc512.syndrome(y_a)
        for order in fail:
            try:
                ok = np.array_equal(ldpc512.decode(y_b, s, 0.07, osd_order=order).estimate, y_a)
            except DecodeFailure:
                ok = False
            fail[order] += not ok
    assert fail[1] <= fail[0] <= fail[None]
