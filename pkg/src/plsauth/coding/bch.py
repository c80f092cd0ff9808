"""Binary BCH codes: syndrome coding, bounded-distance and list decoding.

Bit ``i`` of a word is the coefficient of ``x^i``. The transmitted syndrome
is the remainder of ``y(x)`` modulo the generator polynomial, which is
linear in ``y`` and has length ``n - k``.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .base import DecodeFailure, DecodeResult, Family, SlepianWolfCode, Syndrome
from .gf2m import GF2m


class BchCode(SlepianWolfCode):
    """Narrow-sense primitive BCH code of length ``2^m - 1`` correcting ``t`` errors."""

    family = Family.BCH

    def __init__(self, m, t, name=None):
        self.field = gf = GF2m(m)
        self.m, self.t = m, t
        self.n = gf.n
        g = np.array([1], dtype=np.uint8)
        used = set()
        for j in range(1, 2 * t + 1):
            rep = min(gf.cyclotomic_coset(j))
            if rep in used:
                continue
            used.add(rep)
            g = np.convolve(g, gf.minimal_polynomial(rep)).astype(np.uint8) & 1
        self.generator = g
        self.k = self.n - (g.size - 1)
        if self.k <= 0:
            raise ValueError(f"t={t} leaves no message bits at n={self.n}")
        self.name = name or f"bch_{self.n}_{self.k}_{t}"

        r = self.n - self.k
        rem = np.zeros((self.n, r), dtype=np.uint8)
        cur = np.zeros(r, dtype=np.uint8)
        cur[0] = 1
        for i in range(self.n):
            rem[i] = cur
            carry = cur[-1]
            cur = np.roll(cur, 1)
            cur[0] = 0
            if carry:
                cur ^= g[:r]
        self._rem = rem
        # alpha^(i*j) for every position i and syndrome index j = 1..2t
        ij = np.outer(np.arange(self.n), np.arange(1, 2 * t + 1))
        self._alpha_ij = gf.alpha_pow(ij)

    @property
    def design_distance(self):
        return 2 * self.t + 1

    def syndrome(self, y) -> Syndrome:
        return bch_syndrome(self, y)

    def remainder(self, y):
        y = np.asarray(y, dtype=np.int64)
        return ((y @ self._rem) & 1).astype(np.uint8)

    def encode(self, msg):
        """Systematic codeword: parity in the low positions, message on top."""
        msg = np.asarray(msg, dtype=np.uint8)
        if msg.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} message bits")
        parity = ((msg.astype(np.int64) @ self._rem[self.n - self.k:]) & 1).astype(np.uint8)
        return np.concatenate([parity, msg], axis=-1)

    def is_codeword(self, y) -> bool:
        return not self.remainder(y).any()

    def power_syndromes(self, remainder):
        """``S_j = r(alpha^j)`` for ``j = 1..2t``."""
        idx = np.flatnonzero(remainder)
        if idx.size == 0:
            return np.zeros(2 * self.t, dtype=np.int64)
        return np.bitwise_xor.reduce(self._alpha_ij[idx], axis=0)

    def error_positions(self, S):
        """Bounded-distance decoding of a batch of power-syndrome rows.

        Returns one entry per row: a sorted position array, or ``None`` when
        the row is not within distance ``t`` of a codeword.
        """
        S = np.atleast_2d(np.asarray(S, dtype=np.int64))
        lam = berlekamp_massey(self.field, S, self.t)
        return chien_search(self.field, lam, self.t)

    def correct(self, word):
        """Nearest codeword within the correction radius; raises DecodeFailure otherwise."""
        word = self._check_length(word)
        pos = self.error_positions(self.power_syndromes(self.remainder(word)))[0]
        if pos is None:
            raise DecodeFailure("more than t errors")
        out = word.copy()
        out[pos] ^= 1
        return out

    def decode(self, y_b, s, p=None, list_order=0):
        return bch_list_decode(self, y_b, s, list_order)

    def default_params(self):
        return {"list_order": 0}


def berlekamp_massey(gf: GF2m, S, t):
    """Inversionless Berlekamp-Massey run on every row of ``S`` at once.

    Returns error-locator coefficients, shape (rows, 2t + 2), lowest degree
    first. The locator is only defined up to a nonzero scale factor.
    """
    rows, two_t = S.shape
    width = two_t + 2
    lam = np.zeros((rows, width), dtype=np.int64)
    b = np.zeros((rows, width), dtype=np.int64)
    lam[:, 0] = 1
    b[:, 0] = 1
    k = np.zeros(rows, dtype=np.int64)
    gamma = np.ones(rows, dtype=np.int64)
    for r in range(two_t):
        terms = gf.mul(lam[:, :r + 1], S[:, r::-1])
        delta = np.bitwise_xor.reduce(terms, axis=1)
        shifted = np.zeros_like(b)
        shifted[:, 1:] = b[:, :-1]
        new_lam = gf.mul(gamma[:, None], lam) ^ gf.mul(delta[:, None], shifted)
        swap = (delta != 0) & (k >= 0)
        b = np.where(swap[:, None], lam, shifted)
        gamma = np.where(swap, delta, gamma)
        k = np.where(swap, -k - 1, k + 1)
        lam = new_lam
    return lam


def chien_search(gf: GF2m, lam, t):
    rows = lam.shape[0]
    nz = lam != 0
    degree = np.where(nz.any(axis=1), lam.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1), -1)
    out = [None] * rows
    ok = np.flatnonzero(degree <= t)
    if ok.size == 0:
        return out
    coeffs = lam[ok, :t + 1]
    logc = gf.log[coeffs]
    i = np.arange(gf.n)
    j = np.arange(t + 1)
    # lambda(alpha^{-i}) = sum_j c_j alpha^{-ij}
    expo = (logc[:, None, :] - (i[:, None] * j[None, :])[None, :, :]) % gf.n
    terms = np.where(coeffs[:, None, :] != 0, gf.exp[expo], 0)
    values = np.bitwise_xor.reduce(terms, axis=2)
    for row, deg, vals in zip(ok, degree[ok], values):
        roots = np.flatnonzero(vals == 0)
        if roots.size == deg:
            out[row] = roots
    return out


def bch_syndrome(code: BchCode, y) -> Syndrome:
    y = code._check_length(y)
    return Syndrome(code.remainder(y), code)


def flip_patterns(n, order):
    patterns = [()]
    for w in range(1, order + 1):
        patterns.extend(combinations(range(n), w))
    return patterns


def bch_list_decode(code: BchCode, y_b, s, list_order=0) -> DecodeResult:
    """Flip up to ``list_order`` bits of ``y_b``, bounded-distance decode each
    candidate against Alice's syndrome, keep the estimate closest to ``y_b``.
    """
    y_b = code._check_length(y_b)
    s_bits = s.bits if isinstance(s, Syndrome) else np.asarray(s, dtype=np.uint8)
    if s_bits.size != code.n - code.k:
        raise ValueError(f"expected {code.n - code.k} syndrome bits, got {s_bits.size}")
    base = code.power_syndromes(s_bits ^ code.remainder(y_b))
    patterns = flip_patterns(code.n, list_order)
    S = np.repeat(base[None, :], len(patterns), axis=0)
    for row, pat in enumerate(patterns):
        for i in pat:
            S[row] ^= code._alpha_ij[i]
    decoded = code.error_positions(S)

    best, best_key = None, None
    for pat, pos in zip(patterns, decoded):
        if pos is None:
            continue
        err = np.zeros(code.n, dtype=np.uint8)
        err[list(pat)] ^= 1
        err[pos] ^= 1
        est = y_b ^ err
        key = (int(err.sum()), est.tobytes())
        if best_key is None or key < best_key:
            best, best_key = est, key
    if best is None:
        raise DecodeFailure(f"no candidate within distance {code.t}")
    return DecodeResult(best, True, {"corrections": best_key[0], "list_size": len(patterns)})
