"""Cyclic redundancy check as a GF(2)-linear map.

The CRC has zero initial value and no output XOR, so it is linear in the
message bits and can be evaluated for many messages at once as a matrix
product.
"""

from functools import lru_cache

import numpy as np

# x^11 + x^10 + x^9 + x^7 + x^4 + x + 1
CRC11_POLY = 0b1110_1001_0011


def crc_bits_slow(bits, poly=CRC11_POLY, width=11):
    """Bit-serial polynomial division of ``bits(x) * x^width`` by ``poly``."""
    reg = 0
    top = 1 << width
    for b in list(bits) + [0] * width:
        reg = (reg << 1) | int(b)
        if reg & top:
            reg ^= poly
    return np.array([(reg >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


@lru_cache(maxsize=None)
def crc_matrix(length, poly=CRC11_POLY, width=11):
    """(length, width) matrix whose rows are the CRCs of unit vectors."""
    rows = np.zeros((length, width), dtype=np.uint8)
    unit = np.zeros(length, dtype=np.uint8)
    for i in range(length):
        unit[i] = 1
        rows[i] = crc_bits_slow(unit, poly, width)
        unit[i] = 0
    rows.setflags(write=False)
    return rows


def crc(bits, poly=CRC11_POLY, width=11):
    """CRC of a bit vector, or of each row of a 2-D array."""
    bits = np.asarray(bits, dtype=np.uint8)
    M = crc_matrix(bits.shape[-1], poly, width)
    return ((bits.astype(np.int64) @ M) & 1).astype(np.uint8)
