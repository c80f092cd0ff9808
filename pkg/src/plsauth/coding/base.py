"""Shared types for the Slepian-Wolf reconciliation codes.

Alice sends a syndrome of her sequence ``y_a``; Bob holds a noisy copy
``y_b`` (side information) and runs a decoder to estimate ``y_a``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

LLR_CLIP = 30.0


class Family(str, enum.Enum):
    LDPC = "LDPC"
    POLAR = "POLAR"
    BCH = "BCH"


class DecodeFailure(Exception):
    """No syndrome-consistent estimate was found."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class Syndrome:
    bits: np.ndarray
    code: "SlepianWolfCode" = field(repr=False, compare=False)

    def __post_init__(self):
        self.bits.setflags(write=False)
        if self.bits.size != self.code.n - self.code.k:
            raise ValueError(
                f"syndrome has {self.bits.size} bits, code needs {self.code.n - self.code.k}")

    def __len__(self):
        return int(self.bits.size)

    def flipped(self, *positions) -> "Syndrome":
        bits = self.bits.copy()
        for p in positions:
            bits[p] ^= 1
        return Syndrome(bits, self.code)


@dataclass
class DecodeResult:
    """Decoder output.

    ``estimate`` is always the decoder's best guess; ``verified`` says whether
    it passed the code's own consistency check (syndrome for LDPC/BCH, CRC
    for polar). ``info`` carries decoder metadata such as BP iterations,
    the stage that produced the estimate, or the winning list rank.
    """

    estimate: np.ndarray
    verified: bool
    info: dict = field(default_factory=dict)


class SlepianWolfCode:
    """Common descriptor fields; subclasses add the parity structure."""

    family: Family
    n: int
    k: int

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def syndrome_length(self) -> int:
        return self.n - self.k

    def _check_length(self, y):
        y = np.asarray(y, dtype=np.uint8).reshape(-1)
        if y.size != self.n:
            raise ValueError(f"expected {self.n} bits, got {y.size}")
        return y

    def syndrome(self, y) -> Syndrome:
        raise NotImplementedError

    def decode(self, y_b, s: Syndrome, p: float, **params) -> DecodeResult:
        """Estimate Alice's sequence from side information and her syndrome."""
        raise NotImplementedError

    def default_params(self) -> dict:
        return {}


def bsc_llr(y_b, p: float) -> np.ndarray:
    """Channel LLRs for side information seen through a BSC(p).

    Positive values favour bit 0; magnitudes saturate at ``LLR_CLIP``.
    """
    y_b = np.asarray(y_b, dtype=np.uint8)
    if p <= 0:
        mag = LLR_CLIP
    elif p >= 0.5:
        mag = 0.0
    else:
        mag = min(np.log((1 - p) / p), LLR_CLIP)
    return (1.0 - 2.0 * y_b) * mag
