"""Symmetric primitives used by the protocol layer.

Concrete choices: SHA-256 for the one-way hash, AES-128-GCM for encryption
under a 128-bit key half, HMAC-SHA-256 truncated to 128 bits for message
authentication. Every function takes its randomness from an explicitly
passed ``numpy.random.Generator`` so whole protocol runs replay exactly.
"""

from __future__ import annotations

import hashlib
import hmac
import zlib
from dataclasses import dataclass, field

import numpy as np
from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .bits import BitVector

HASH_BITS = 256
KEY_BITS = 256
HALF_KEY_BITS = 128
NONCE_BITS = 128
TAG_BYTES = 16
GCM_NONCE_BYTES = 12


class AuthenticationFailure(Exception):
    """Ciphertext or tag did not verify; the caller must abort."""


def derive_rng(seed: int, *labels) -> np.random.Generator:
    """Child generator for ``labels`` under a master seed.

    Labels may be ints or strings; the same (seed, labels) always yields the
    same stream, and distinct label paths give independent streams.
    """
    key = tuple(
        lab if isinstance(lab, int) else zlib.crc32(str(lab).encode()) for lab in labels
    )
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _framed(bits: BitVector) -> bytes:
    # length prefix keeps inputs that differ only in trailing pad bits apart
    return len(bits).to_bytes(8, "big") + bits.to_bytes()


def hash_bits(data: BitVector) -> BitVector:
    """256-bit one-way hash of a bit vector."""
    if len(data) < 1:
        raise ValueError("hash input must hold at least one bit")
    return BitVector.from_bytes(hashlib.sha256(_framed(data)).digest())


def expand_bits(data: BitVector, length: int) -> BitVector:
    """Stretch ``data`` to ``length`` pseudorandom bits (SHAKE-256)."""
    out = hashlib.shake_256(b"expand" + _framed(data)).digest((length + 7) // 8)
    return BitVector.from_bytes(out, length)


@dataclass(frozen=True)
class SymmetricKey:
    material: BitVector

    def __post_init__(self):
        if len(self.material) != KEY_BITS:
            raise ValueError(f"symmetric keys are {KEY_BITS} bits, got {len(self.material)}")

    def halves(self) -> tuple[BitVector, BitVector]:
        return split_key(self)


def split_key(key: SymmetricKey | BitVector) -> tuple[BitVector, BitVector]:
    """Break a 256-bit key into its encryption half and its MAC half."""
    material = key.material if isinstance(key, SymmetricKey) else key
    if len(material) != KEY_BITS:
        raise ValueError(f"can only split {KEY_BITS}-bit keys, got {len(material)}")
    first, second = material.split(HALF_KEY_BITS, HALF_KEY_BITS)
    return first, second


@dataclass(frozen=True)
class CipherText:
    """GCM nonce followed by ciphertext and GCM tag."""

    data: bytes

    def __len__(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class AuthTag:
    value: bytes

    def __post_init__(self):
        if len(self.value) != TAG_BYTES:
            raise ValueError(f"tags are {TAG_BYTES} bytes")


def _check_half(key_half: BitVector):
    if len(key_half) != HALF_KEY_BITS:
        raise ValueError(f"key half must be {HALF_KEY_BITS} bits, got {len(key_half)}")


def aead_encrypt(key_half: BitVector, plaintext: bytes, context: bytes,
                 rng: np.random.Generator) -> CipherText:
    _check_half(key_half)
    nonce = rng.bytes(GCM_NONCE_BYTES)
    body = AESGCM(key_half.to_bytes()).encrypt(nonce, plaintext, context)
    return CipherText(nonce + body)


def aead_decrypt(key_half: BitVector, ciphertext: CipherText, context: bytes) -> bytes:
    _check_half(key_half)
    data = ciphertext.data
    if len(data) < GCM_NONCE_BYTES + 16:
        raise AuthenticationFailure("ciphertext too short")
    try:
        return AESGCM(key_half.to_bytes()).decrypt(
            data[:GCM_NONCE_BYTES], data[GCM_NONCE_BYTES:], context)
    except InvalidTag as exc:
        raise AuthenticationFailure("ciphertext failed authentication") from exc


def mac_sign(key_half: BitVector, msg: bytes) -> AuthTag:
    _check_half(key_half)
    digest = hmac.new(key_half.to_bytes(), msg, hashlib.sha256).digest()
    return AuthTag(digest[:TAG_BYTES])


def mac_verify(key_half: BitVector, msg: bytes, tag: AuthTag) -> bool:
    expected = mac_sign(key_half, msg)
    return hmac.compare_digest(expected.value, tag.value)


@dataclass(frozen=True)
class Nonce:
    value: BitVector
    origin: str


def fresh_nonce(rng: np.random.Generator, origin: str) -> Nonce:
    return Nonce(BitVector.random(NONCE_BITS, rng), origin)


@dataclass
class NonceRegistry:
    """Remembers every nonce value seen; ``register`` reports reuse."""

    seen: set = field(default_factory=set)

    def register(self, value: BitVector) -> bool:
        key = value.to_bytes()
        if key in self.seen:
            return False
        self.seen.add(key)
        return True

    def __contains__(self, value: BitVector) -> bool:
        return value.to_bytes() in self.seen

    def __len__(self) -> int:
        return len(self.seen)
