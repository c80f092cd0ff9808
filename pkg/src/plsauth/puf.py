"""Simulated PUF and the code-offset fuzzy extractor.

The PUF is modelled as a keyed hash of (hidden fingerprint, challenge)
truncated to the response length, with independent Bernoulli bit flips on
every noisy read. The fuzzy extractor uses the BCH(511, 259, 30) code:
``Gen`` masks the response with a random codeword and hashes the codeword
into the key; ``Rep`` decodes the masked re-measurement back to it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .bits import BitVector
from .coding.base import DecodeFailure
from .coding.bch import BchCode
from .crypto import SymmetricKey, hash_bits

CHALLENGE_BITS = 256
DEFAULT_P_INTRA = 0.05


@lru_cache(maxsize=None)
def default_fe_code() -> BchCode:
    return BchCode(9, 30)


@dataclass(frozen=True)
class PufDevice:
    device_id: str
    fingerprint: bytes
    p_intra: float = DEFAULT_P_INTRA
    response_length: int = 511
    tamper_rate: float = 0.0
    tamper_key: bytes = b""

    @classmethod
    def manufacture(cls, device_id: str, rng: np.random.Generator, **kw) -> "PufDevice":
        return cls(device_id, rng.bytes(32), **kw)

    def _stream(self, label: bytes, key: bytes, challenge: BitVector, nbytes: int) -> bytes:
        return hashlib.shake_256(label + key + challenge.to_bytes()).digest(nbytes)

    def base_response(self, challenge: BitVector) -> np.ndarray:
        if len(challenge) != CHALLENGE_BITS:
            raise ValueError(f"challenges are {CHALLENGE_BITS} bits, got {len(challenge)}")
        nbytes = (self.response_length + 7) // 8
        raw = self._stream(b"puf", self.fingerprint, challenge, nbytes)
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:self.response_length]
        if self.tamper_rate:
            # fixed per-challenge distortion standing in for a physically altered circuit
            u = self._stream(b"tamper", self.tamper_key, challenge, 4 * self.response_length)
            draws = np.frombuffer(u, dtype=">u4")[:self.response_length] / 2.0 ** 32
            bits = bits ^ (draws < self.tamper_rate).astype(np.uint8)
        return bits

    def respond(self, challenge: BitVector, noisy: bool = True, rng=None) -> BitVector:
        bits = self.base_response(challenge)
        if noisy and self.p_intra > 0:
            if rng is None:
                raise ValueError("noisy reads need a random generator")
            bits = bits ^ (rng.random(bits.size) < self.p_intra).astype(np.uint8)
        return BitVector(bits)

    def tampered(self, rate: float, key: bytes) -> "PufDevice":
        return replace(self, tamper_rate=rate, tamper_key=key)


def puf_respond(device: PufDevice, challenge: BitVector, noisy: bool, rng=None) -> BitVector:
    return device.respond(challenge, noisy, rng)


def majority_response(device: PufDevice, challenge: BitVector, rng, reads: int = 5) -> BitVector:
    """Bitwise majority over ``reads`` noisy reads (temporal majority voting)."""
    if reads < 1 or reads % 2 == 0:
        raise ValueError("reads must be a positive odd number")
    acc = np.zeros(device.response_length, dtype=np.int64)
    for _ in range(reads):
        acc += device.respond(challenge, True, rng).bits
    return BitVector((2 * acc > reads).astype(np.uint8))


@dataclass(frozen=True)
class FuzzyPair:
    helper: BitVector
    key: SymmetricKey


def fe_gen(response: BitVector, rng: np.random.Generator, code: BchCode | None = None) -> FuzzyPair:
    code = code or default_fe_code()
    if len(response) != code.n:
        raise ValueError(f"response must be {code.n} bits, got {len(response)}")
    codeword = code.encode(rng.integers(0, 2, size=code.k, dtype=np.uint8))
    return FuzzyPair(BitVector(response.bits ^ codeword), SymmetricKey(hash_bits(BitVector(codeword))))


def fe_rep(noisy_response: BitVector, helper: BitVector, code: BchCode | None = None) -> SymmetricKey:
    """Reproduce the key; raises DecodeFailure beyond the correction radius."""
    code = code or default_fe_code()
    if len(noisy_response) != len(helper) or len(helper) != code.n:
        raise ValueError("response and helper lengths must equal the code length")
    codeword = code.correct(noisy_response.bits ^ helper.bits)
    return SymmetricKey(hash_bits(BitVector(codeword)))
