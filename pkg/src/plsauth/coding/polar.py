"""Polar syndrome coding with CRC-aided successive cancellation list decoding.

Alice maps her sequence to ``U = y G_n`` with ``G_n`` the n-fold Kronecker
power of ``[[1, 0], [1, 1]]`` and publishes the high-entropy entries of ``U``
together with a CRC of ``y``. Bob treats the published entries as known
(frozen) values and runs SCL decoding on his side information.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .base import DecodeFailure, DecodeResult, Family, SlepianWolfCode, Syndrome, bsc_llr
from .crc import CRC11_POLY, crc

CRC_LEN = 11


def polar_transform(u):
    """``u G_n`` over GF(2) via the butterfly; works row-wise on 2-D input."""
    x = np.array(u, dtype=np.uint8)
    n = x.shape[-1]
    if n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    lead = x.shape[:-1]
    h = 1
    while h < n:
        view = x.reshape(lead + (-1, 2, h))
        view[..., 0, :] ^= view[..., 1, :]
        h *= 2
    return x


def kronecker_generator(n):
    """Dense ``G_n``; only meant for small oracle checks."""
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    while G.shape[0] < n:
        G = np.kron(F, G) & 1
    return G


# -- construction: Gaussian-approximation density evolution ------------------

def _log_phi(x):
    if x < 10.0:
        return -0.4527 * x ** 0.86 + 0.0218
    return 0.5 * math.log(math.pi / x) + math.log1p(-10.0 / (7.0 * x)) - x / 4.0


def _inv_log_phi(target):
    if target >= 0.0218:
        return 0.0
    hi = 1.0
    while _log_phi(hi) > target:
        hi *= 2.0
    return brentq(lambda x: _log_phi(x) - target, 0.0 if hi <= 1.0 else hi / 2.0, hi,
                  xtol=1e-12, rtol=1e-12)


def _check_mean(m):
    if m <= 0:
        return 0.0
    lp = _log_phi(m)
    # log(1 - (1 - phi)^2) = log(2 phi - phi^2), kept finite for tiny phi
    phi = math.exp(lp)
    return _inv_log_phi(lp + math.log(2.0 - phi))


def ga_channel_means(n, p_design):
    """Mean LLR of every synthetic channel ``U[i] | y_b, U^{i-1}`` (natural order)."""
    m0 = (1 - 2 * p_design) * math.log((1 - p_design) / p_design)

    @lru_cache(maxsize=None)
    def means(size, m):
        if size == 1:
            return (m,)
        return means(size // 2, _check_mean(m)) + means(size // 2, 2.0 * m)

    return np.array(means(n, m0))


def high_entropy_indices(n, count, p_design=0.05):
    """The ``count`` least reliable synthetic channels, sorted ascending."""
    mu = ga_channel_means(n, p_design)
    order = np.lexsort((np.arange(n), mu))
    return np.sort(order[:count])


# -- code descriptor ----------------------------------------------------------

class PolarCode(SlepianWolfCode):
    """Polar syndrome code.

    Parameters
    ----------
    n : int
        Blocklength, a power of two.
    k : int
        Message length; the syndrome carries ``n - k - crc_len`` entries of
        ``U`` plus ``crc_len`` CRC bits.
    frozen : array-like of int, optional
        Indices of ``U`` published in the syndrome. Computed by density
        evolution at ``p_design`` when omitted.
    """

    family = Family.POLAR

    def __init__(self, n, k, crc_len=CRC_LEN, frozen=None, p_design=0.05, name=None):
        if n & (n - 1):
            raise ValueError(f"polar blocklength {n} is not a power of two")
        if not 0 <= k + crc_len <= n:
            raise ValueError("k + crc_len must fit in the blocklength")
        self.n, self.k, self.crc_len = n, k, crc_len
        self.p_design = p_design
        n_frozen = n - k - crc_len
        if frozen is None:
            frozen = high_entropy_indices(n, n_frozen, p_design)
        frozen = np.sort(np.asarray(frozen, dtype=np.int64))
        if frozen.size != n_frozen or np.unique(frozen).size != n_frozen:
            raise ValueError(f"need {n_frozen} distinct frozen indices, got {frozen.size}")
        self.frozen = frozen
        self.frozen.setflags(write=False)
        self.frozen_mask = np.zeros(n, dtype=bool)
        self.frozen_mask[frozen] = True
        self.name = name or f"polar_{n}_{k}"
        self._rate0 = {}
        self._mark_rate0(0, n)

    def _mark_rate0(self, lo, size):
        all_frozen = bool(self.frozen_mask[lo:lo + size].all())
        self._rate0[(lo, size)] = all_frozen
        if size > 1 and not all_frozen:
            self._mark_rate0(lo, size // 2)
            self._mark_rate0(lo + size // 2, size // 2)

    @property
    def effective_rate(self) -> float:
        return (self.k + self.crc_len) / self.n

    def crc(self, y):
        if self.crc_len == 0:
            return np.zeros(np.shape(y)[:-1] + (0,), dtype=np.uint8)
        if self.crc_len != CRC_LEN:
            raise ValueError("only the 11-bit CRC is supported")
        return crc(y, CRC11_POLY, CRC_LEN)

    def syndrome(self, y) -> Syndrome:
        return polar_encode_syndrome(self, y)

    def decode(self, y_b, s, p, list_size=32):
        return polar_scl_decode(self, y_b, p, s, list_size)

    def default_params(self):
        return {"list_size": 32}


def polar_encode_syndrome(code: PolarCode, y) -> Syndrome:
    y = code._check_length(y)
    u = polar_transform(y)
    return Syndrome(np.concatenate([u[code.frozen], code.crc(y)]), code)


# -- list decoder ---------------------------------------------------------------

def _f(a, b):
    """Exact check-node combination of two LLR arrays."""
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
            + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))


def _softplus(x):
    return np.logaddexp(0.0, x)


class _ListDecoder:
    def __init__(self, code, u_known, list_size):
        self.code = code
        self.u_known = u_known
        self.L = list_size
        self.pm = np.zeros(1)

    def run(self, llr):
        x, _ = self._node(llr[None, :], 0)
        return x, self.pm

    def _node(self, alpha, lo):
        n = alpha.shape[1]
        if self.code._rate0.get((lo, n), False):
            x = polar_transform(self.u_known[lo:lo + n])
            self.pm = self.pm + _softplus(-(1.0 - 2.0 * x) * alpha).sum(axis=1)
            return np.broadcast_to(x, alpha.shape).copy(), np.arange(alpha.shape[0])
        if n == 1:
            return self._leaf(alpha[:, 0], lo)
        half = n // 2
        a, b = alpha[:, :half], alpha[:, half:]
        xl, perm1 = self._node(_f(a, b), lo)
        a, b = a[perm1], b[perm1]
        xr, perm2 = self._node(b + (1.0 - 2.0 * xl) * a, lo + half)
        return np.concatenate([xl[perm2] ^ xr, xr], axis=1), perm1[perm2]

    def _leaf(self, lam, i):
        paths = lam.size
        if self.code.frozen_mask[i]:
            u = self.u_known[i]
            self.pm = self.pm + _softplus(-(1.0 - 2.0 * u) * lam)
            return np.full((paths, 1), u, dtype=np.uint8), np.arange(paths)
        metrics = np.concatenate([self.pm + _softplus(-lam), self.pm + _softplus(lam)])
        keep = min(self.L, 2 * paths)
        order = np.argsort(metrics, kind="stable")[:keep]
        self.pm = metrics[order]
        bits = (order >= paths).astype(np.uint8)
        return bits[:, None], order % paths


def polar_scl_decode(code: PolarCode, y_b, p, s, list_size=32) -> DecodeResult:
    """CRC-aided SCL decoding with the syndrome entries as known ``U`` values.

    Returns the most likely surviving path that passes the CRC. When none
    passes, the most likely path comes back with ``verified=False``.
    """
    if not 1 <= list_size <= 1024:
        raise ValueError(f"list size {list_size} out of range")
    y_b = code._check_length(y_b)
    s_bits = s.bits if isinstance(s, Syndrome) else np.asarray(s, dtype=np.uint8)
    if s_bits.size != code.n - code.k:
        raise ValueError(f"expected {code.n - code.k} syndrome bits, got {s_bits.size}")
    n_frozen = code.frozen.size
    u_known = np.zeros(code.n, dtype=np.uint8)
    u_known[code.frozen] = s_bits[:n_frozen]
    crc_rx = s_bits[n_frozen:]

    paths, pm = _ListDecoder(code, u_known, list_size).run(bsc_llr(y_b, p))
    order = np.argsort(pm, kind="stable")
    crc_ok = np.all(code.crc(paths) == crc_rx, axis=1)
    for rank, idx in enumerate(order):
        if crc_ok[idx]:
            return DecodeResult(paths[idx], True, {"list_rank": rank, "paths": len(order)})
    best = paths[order[0]]
    if not np.array_equal(polar_transform(best)[code.frozen], s_bits[:n_frozen]):
        raise DecodeFailure("decoded path contradicts the frozen syndrome bits",
                            DecodeResult(best, False, {}))
    return DecodeResult(best, False, {"list_rank": None, "paths": len(order)})
