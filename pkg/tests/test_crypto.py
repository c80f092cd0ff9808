import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plsauth.bits import BitVector
from plsauth.crypto import (AuthenticationFailure, AuthTag, CipherText, NonceRegistry,
                            SymmetricKey, aead_decrypt, aead_encrypt, derive_rng, expand_bits,
                            fresh_nonce, hash_bits, mac_sign, mac_verify, split_key)


def _flip(data: bytes, bit: int) -> bytes:
    b = bytearray(data)
    b[bit // 8] ^= 0x80 >> (bit % 8)
    return bytes(b)


# -- BitVector ---------------------------------------------------------------------

@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_bitvector_bytes_round_trip(bits):
    v = BitVector(bits)
    assert BitVector.from_bytes(v.to_bytes(), len(v)) == v
    assert len(v) == len(bits)


def test_bitvector_is_immutable():
    v = BitVector([1, 0, 1])
    with pytest.raises(ValueError):
        v.bits[0] = 0


def test_xor_needs_equal_lengths():
    with pytest.raises(ValueError):
        BitVector([1, 0]) ^ BitVector([1, 0, 1])


@given(st.integers(0, 2 ** 40 - 1))
def test_int_round_trip(x):
    assert BitVector.from_int(x, 40).to_int() == x


# -- hash ----------------------------------------------------------------------------

def test_hash_matches_independent_framing():
    v = BitVector([1, 0, 1, 1, 0])
    # 8-byte big-endian bit length, then the bits packed MSB first and zero padded
    expected = hashlib.sha256((5).to_bytes(8, "big") + bytes([0b10110000])).digest()
    assert hash_bits(v).to_bytes() == expected


def test_hash_length_and_determinism(rng):
    x = BitVector.random(512, rng)
    assert len(hash_bits(x)) == 256
    assert hash_bits(x) == hash_bits(x)


def test_hash_rejects_empty_input():
    with pytest.raises(ValueError):
        hash_bits(BitVector([]))


def test_hash_separates_trailing_zero_bits():
    assert hash_bits(BitVector([1])) != hash_bits(BitVector([1, 0]))


def test_hash_one_bit_flip_changes_output(rng):
    for _ in range(1000):
        x = BitVector.random(64, rng)
        pos = int(rng.integers(64))
        bits = x.bits.copy()
        bits[pos] ^= 1
        assert hash_bits(x) != hash_bits(BitVector(bits))


def test_hash_output_bit_balance():
    rng = np.random.default_rng(7)
    outs = np.empty((100_000, 256), dtype=np.uint8)
    raw = rng.integers(0, 2 ** 63, size=100_000)
    for i, r in enumerate(raw):
        outs[i] = np.unpackbits(np.frombuffer(
            hashlib.sha256((64).to_bytes(8, "big") + int(r).to_bytes(8, "big")).digest(), np.uint8))
    # same framing as hash_bits on a 64-bit input; checked against hash_bits below
    assert hash_bits(BitVector.from_int(int(raw[0]), 64)).bits.tolist() == outs[0].tolist()
    freq = outs.mean(axis=0)
    assert np.all(np.abs(freq - 0.5) <= 0.01)


def test_expand_bits_length_and_prefix(rng):
    x = BitVector.random(100, rng)
    long = expand_bits(x, 1000)
    assert len(long) == 1000
    assert expand_bits(x, 512) == long[:512]


# -- key splitting ----------------------------------------------------------------

def test_split_zero_key():
    a, b = split_key(SymmetricKey(BitVector.zeros(256)))
    assert a == BitVector.zeros(128) and b == BitVector.zeros(128)


def test_split_partition_identity(rng):
    k = BitVector.random(256, rng)
    a, b = split_key(k)
    assert BitVector.concat(a, b) == k


def test_split_halves_differ(rng):
    assert all(len(set(x.to_bytes() for x in split_key(BitVector.random(256, rng)))) == 2
               for _ in range(1000))


@pytest.mark.parametrize("n", [0, 128, 255, 257])
def test_split_length_error(n):
    with pytest.raises(ValueError):
        split_key(BitVector.zeros(n))
    with pytest.raises(ValueError):
        SymmetricKey(BitVector.zeros(n))


# -- AEAD and MAC -----------------------------------------------------------------

def test_aead_round_trip(rng):
    k = BitVector.random(128, rng)
    ct = aead_encrypt(k, b"attack at dawn", b"ctx", rng)
    assert aead_decrypt(k, ct, b"ctx") == b"attack at dawn"


def test_aead_wrong_key_and_context(rng):
    k, k2 = BitVector.random(128, rng), BitVector.random(128, rng)
    ct = aead_encrypt(k, b"m", b"ctx", rng)
    with pytest.raises(AuthenticationFailure):
        aead_decrypt(k2, ct, b"ctx")
    with pytest.raises(AuthenticationFailure):
        aead_decrypt(k, ct, b"other")


def test_aead_fresh_ciphertexts(rng):
    k = BitVector.random(128, rng)
    assert aead_encrypt(k, b"m", b"", rng).data != aead_encrypt(k, b"m", b"", rng).data


def test_aead_every_single_bit_flip_fails(rng):
    k = BitVector.random(128, rng)
    ct = aead_encrypt(k, rng.bytes(64), b"ctx", rng)
    for bit in range(8 * len(ct.data)):
        with pytest.raises(AuthenticationFailure):
            aead_decrypt(k, CipherText(_flip(ct.data, bit)), b"ctx")


def test_aead_rejects_wrong_key_length(rng):
    with pytest.raises(ValueError):
        aead_encrypt(BitVector.random(256, rng), b"m", b"", rng)


def test_mac_sign_verify(rng):
    k = BitVector.random(128, rng)
    tag = mac_sign(k, b"hello")
    assert mac_verify(k, b"hello", tag)
    assert not mac_verify(k, b"hellp", tag)


def test_mac_every_single_bit_flip_fails(rng):
    k = BitVector.random(128, rng)
    msg = rng.bytes(64)
    tag = mac_sign(k, msg)
    for bit in range(8 * len(msg)):
        assert not mac_verify(k, _flip(msg, bit), tag)
    for bit in range(8 * len(tag.value)):
        assert not mac_verify(k, msg, AuthTag(_flip(tag.value, bit)))


def test_mac_random_forgeries_rejected(rng):
    accepted = sum(mac_verify(BitVector.random(128, rng), rng.bytes(32), AuthTag(rng.bytes(16)))
                   for _ in range(1000))
    assert accepted == 0


@settings(max_examples=50)
@given(st.binary(min_size=0, max_size=200), st.binary(min_size=0, max_size=20))
def test_aead_round_trip_property(msg, ctx):
    r = np.random.default_rng(len(msg))
    k = BitVector.random(128, r)
    assert aead_decrypt(k, aead_encrypt(k, msg, ctx, r), ctx) == msg


# -- nonces and randomness --------------------------------------------------------

def test_nonce_registry_detects_reuse(rng):
    reg = NonceRegistry()
    n = fresh_nonce(rng, "A")
    assert len(n.value) == 128
    assert reg.register(n.value)
    assert not reg.register(n.value)
    assert n.value in reg


def test_fresh_nonces_never_repeat():
    rng = derive_rng(1, "nonces")
    reg = NonceRegistry()
    assert all(reg.register(fresh_nonce(rng, "A").value) for _ in range(100_000))


def test_derive_rng_deterministic_and_separated():
    a = derive_rng(5, "x", 1).integers(0, 2 ** 32, 4)
    b = derive_rng(5, "x", 1).integers(0, 2 ** 32, 4)
    c = derive_rng(5, "x", 2).integers(0, 2 ** 32, 4)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist()
