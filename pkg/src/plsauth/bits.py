"""Fixed-length binary vectors.

A :class:`BitVector` wraps a read-only ``uint8`` numpy array of zeros and ones.
Keys, syndromes, PUF responses and quantized channel observations are all
carried as bit vectors; decoders work on the raw arrays directly.
"""

from __future__ import annotations

import numpy as np


class BitVector:
    """Immutable sequence of bits.

    Parameters
    ----------
    bits : array-like of int or bool
        Binary symbols. Any nonzero entry is rejected.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits):
        arr = np.array(bits, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise ValueError("bit vectors hold only 0/1 values")
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> "BitVector":
        return cls(rng.integers(0, 2, size=length, dtype=np.uint8))

    @classmethod
    def from_bytes(cls, data: bytes, length: int | None = None) -> "BitVector":
        """Unpack big-endian bits; ``length`` truncates trailing pad bits."""
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if length is not None:
            if length > bits.size:
                raise ValueError(f"need {length} bits, got {bits.size}")
            bits = bits[:length]
        return cls(bits)

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitVector":
        if value < 0 or value >= 1 << length:
            raise ValueError(f"{value} does not fit in {length} bits")
        return cls([(value >> (length - 1 - i)) & 1 for i in range(length)])

    @classmethod
    def concat(cls, *parts: "BitVector") -> "BitVector":
        return cls(np.concatenate([p.bits for p in parts]) if parts else [])

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def __len__(self) -> int:
        return int(self._bits.size)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitVector(self._bits[item])
        return int(self._bits[item])

    def __iter__(self):
        return (int(b) for b in self._bits)

    def __xor__(self, other: "BitVector") -> "BitVector":
        if not isinstance(other, BitVector):
            return NotImplemented
        if len(other) != len(self):
            raise ValueError(f"XOR of unequal lengths {len(self)} and {len(other)}")
        return BitVector(self._bits ^ other._bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash((len(self), self.to_bytes()))

    def __repr__(self) -> str:
        if len(self) <= 32:
            return f"BitVector('{''.join(map(str, self._bits))}')"
        return f"BitVector(len={len(self)}, hex={self.to_bytes()[:8].hex()}...)"

    def to_bytes(self) -> bytes:
        """Pack to big-endian bytes, zero-padding the final byte."""
        return np.packbits(self._bits).tobytes()

    def to_int(self) -> int:
        return int.from_bytes(self.to_bytes(), "big") >> (-len(self) % 8)

    def weight(self) -> int:
        return int(self._bits.sum())

    def distance(self, other: "BitVector") -> int:
        return (self ^ other).weight()

    def split(self, *sizes: int) -> list["BitVector"]:
        if sum(sizes) != len(self):
            raise ValueError(f"sizes {sizes} do not partition {len(self)} bits")
        out, start = [], 0
        for size in sizes:
            out.append(BitVector(self._bits[start:start + size]))
            start += size
        return out
