"""Polar syndrome coding and CRC-aided SCL decoding."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plsauth.coding import DecodeFailure, PolarCode, polar_transform
from plsauth.coding.crc import crc_bits_slow
from plsauth.coding.polar import high_entropy_indices, kronecker_generator


def test_n2_zero():
    code = PolarCode(2, 1, crc_len=0)
    assert np.array_equal(polar_transform([0, 0]), [0, 0])
    assert not code.syndrome([0, 0]).bits.any()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=8, max_size=8))
def test_butterfly_matches_dense_kronecker(bits):
    y = np.array(bits, dtype=np.uint8)
    G = kronecker_generator(8)
    assert np.array_equal(polar_transform(y), (y.astype(int) @ G.astype(int)) % 2)


def test_dense_kronecker_n2_kernel():
    assert np.array_equal(kronecker_generator(2), [[1, 0], [1, 1]])


def test_transform_is_involution(rng):
    y = rng.integers(0, 2, (4, 64), dtype=np.uint8)
    assert np.array_equal(polar_transform(polar_transform(y)), y)


def test_reference_instance_sizes(polar512):
    assert polar512.n == 512 and polar512.k == 267 and polar512.crc_len == 11
    assert polar512.frozen.size == 512 - 267 - 11
    assert polar512.syndrome(np.zeros(512, dtype=np.uint8)).bits.size == 245
    assert polar512.effective_rate == pytest.approx((267 + 11) / 512)


def test_syndrome_layout(polar512, rng):
    y = rng.integers(0, 2, 512, dtype=np.uint8)
    s = polar512.syndrome(y).bits
    u = polar_transform(y)
    assert np.array_equal(s[:234], u[polar512.frozen])
    assert np.array_equal(s[234:], crc_bits_slow(y))


def test_frozen_set_is_least_reliable():
    frozen = high_entropy_indices(16, 8, 0.05)
    # the first synthetic channel is the worst and the last the best
    assert 0 in frozen and 15 not in frozen


def test_bad_blocklength():
    with pytest.raises(ValueError):
        PolarCode(12, 4, crc_len=0)


def test_noiseless_recovery_any_list(polar512, rng):
    y = rng.integers(0, 2, 512, dtype=np.uint8)
    s = polar512.syndrome(y)
    for L in (1, 4, 32):
        res = polar512.decode(y, s, 0.0, list_size=L)
        assert res.verified and np.array_equal(res.estimate, y)


def test_scl_matches_exhaustive_ml_n16():
    code = PolarCode(16, 4, crc_len=0, p_design=0.05)
    rng = np.random.default_rng(16)
    p = 0.05
    coset_free = np.flatnonzero(~code.frozen_mask)
    for _ in range(500):
        y_a = rng.integers(0, 2, 16, dtype=np.uint8)
        y_b = y_a ^ (rng.random(16) < p).astype(np.uint8)
        s = code.syndrome(y_a)
        # every y with the published U entries: enumerate the free U entries
        best = None
        for free in itertools.product((0, 1), repeat=coset_free.size):
            u = polar_transform(y_a).copy()
            u[coset_free] = free
            cand = polar_transform(u)
            d = int((cand ^ y_b).sum())
            if best is None or d < best:
                best = d
        est = code.decode(y_b, s, p, list_size=16).estimate
        assert np.array_equal(polar_transform(est)[code.frozen], s.bits)
        assert int((est ^ y_b).sum()) == best


def test_list_dominance(polar512):
    rng = np.random.default_rng(7)
    fails = {1: 0, 4: 0, 32: 0}
    trials = 150
    for _ in range(trials):
        y_a = rng.integers(0, 2, 512, dtype=np.uint8)
        y_b = y_a ^ (rng.random(512) < 0.06).astype(np.uint8)
        s = polar512.syndrome(y_a)
        for L in fails:
            try:
                fails[L] += not np.array_equal(polar512.decode(y_b, s, 0.06, list_size=L).estimate, y_a)
            except DecodeFailure:
                fails[L] += 1
    sigma = np.sqrt(fails[1] / trials * (1 - fails[1] / trials) / trials) * trials
    assert fails[4] <= fails[1] + 2 * sigma
    assert fails[32] <= fails[4] + 2 * sigma
    assert fails[32] < fails[1]


def test_verified_results_pass_crc(polar512):
    rng = np.random.default_rng(9)
    for _ in range(30):
        y_a = rng.integers(0, 2, 512, dtype=np.uint8)
        y_b = y_a ^ (rng.random(512) < 0.05).astype(np.uint8)
        s = polar512.syndrome(y_a)
        res = polar512.decode(y_b, s, 0.05, list_size=8)
        if res.verified:
            assert np.array_equal(polar512.syndrome(res.estimate).bits, s.bits)


def test_list_size_bounds(polar512):
    y = np.zeros(512, dtype=np.uint8)
    with pytest.raises(ValueError):
        polar512.decode(y, polar512.syndrome(y), 0.05, list_size=0)
