"""LDPC syndrome coding with belief propagation and OSD reprocessing."""

from __future__ import annotations

from collections import deque
from itertools import combinations

import numpy as np

from .base import LLR_CLIP, DecodeFailure, DecodeResult, Family, SlepianWolfCode, Syndrome, bsc_llr
from .gf2 import gf2_matmul, gf2_rank, gf2_rref

BP_MAX_ITER = 50
_PHI_MIN = 1e-12


class LdpcCode(SlepianWolfCode):
    """Code defined by a binary parity-check matrix ``H`` of shape (m, n)."""

    family = Family.LDPC

    def __init__(self, H, name=None):
        H = np.asarray(H, dtype=np.uint8) & 1
        self.H = H
        self.H.setflags(write=False)
        m, self.n = H.shape
        rank = gf2_rank(H)
        # the syndrome carries every row of H, so k counts against m, not the rank
        self.k = self.n - m
        self.rank = rank
        self.name = name or f"ldpc_{self.n}_{self.k}"
        checks, variables = np.nonzero(H)
        self._edge_check = checks
        self._edge_var = variables

    @property
    def full_rank(self) -> bool:
        return self.rank == self.H.shape[0]

    def rows(self):
        return [np.flatnonzero(row).tolist() for row in self.H]

    def syndrome(self, y) -> Syndrome:
        return ldpc_syndrome(self, y)

    def decode(self, y_b, s, p, osd_order=1, max_iter=BP_MAX_ITER):
        llr = bsc_llr(self._check_length(y_b), p)
        return ldpc_osd_decode(self, llr, s, osd_order, max_iter=max_iter)

    def default_params(self):
        return {"osd_order": 1}


def ldpc_syndrome(code: LdpcCode, y) -> Syndrome:
    y = code._check_length(y)
    return Syndrome(gf2_matmul(code.H, y), code)


def _phi(x):
    x = np.clip(x, _PHI_MIN, LLR_CLIP)
    return -np.log(np.tanh(x / 2.0))


def belief_propagation(code: LdpcCode, llr, s, max_iter=BP_MAX_ITER):
    """Flooding sum-product decoding towards the coset with syndrome ``s``.

    Returns ``(hard, posterior, iterations, converged)``.
    """
    ec, ev = code._edge_check, code._edge_var
    m, n = code.H.shape
    llr = np.asarray(llr, dtype=float)
    s = np.asarray(s, dtype=np.uint8)
    target_sign = s.astype(np.int64)

    hard = (llr < 0).astype(np.uint8)
    if np.array_equal(gf2_matmul(code.H, hard), s):
        return hard, llr.copy(), 0, True

    v2c = llr[ev]
    posterior = llr
    for it in range(1, max_iter + 1):
        mag = _phi(np.abs(v2c))
        neg = (v2c < 0).astype(np.int64)
        mag_sum = np.bincount(ec, weights=mag, minlength=m)
        neg_sum = np.bincount(ec, weights=neg, minlength=m).astype(np.int64)
        c2v = _phi(mag_sum[ec] - mag)
        parity = (neg_sum[ec] - neg + target_sign[ec]) & 1
        c2v = np.where(parity == 1, -c2v, c2v)

        posterior = llr + np.bincount(ev, weights=c2v, minlength=n)
        posterior = np.clip(posterior, -LLR_CLIP * 4, LLR_CLIP * 4)
        hard = (posterior < 0).astype(np.uint8)
        if np.array_equal(gf2_matmul(code.H, hard), s):
            return hard, posterior, it, True
        v2c = posterior[ev] - c2v
    return hard, posterior, max_iter, False


def _pick(candidates, metric, y_ref):
    """Index of the best candidate: metric, then distance to y_ref, then lexicographic."""
    dist = (candidates != y_ref).sum(axis=1)
    keys = [candidates[:, j] for j in range(candidates.shape[1] - 1, -1, -1)]
    order = np.lexsort(keys + [dist, np.round(metric, 9)])
    return int(order[0])


def osd_reprocess(code: LdpcCode, channel_llr, order_llr, s, osd_order):
    """Ordered statistics decoding of the coset ``{x : H x = s}``.

    ``order_llr`` ranks positions by reliability (BP posteriors);
    ``channel_llr`` scores each candidate. Candidates flip up to
    ``osd_order`` bits of the hard decision on the most reliable basis.
    """
    H = code.H
    m, n = H.shape
    order = np.argsort(np.abs(order_llr), kind="stable")
    aug = np.hstack([H[:, order], np.asarray(s, dtype=np.uint8).reshape(-1, 1)])
    reduced, pivots = gf2_rref(aug, n_pivot_cols=n)
    rank = len(pivots)
    if reduced[rank:, n].any():
        raise DecodeFailure("syndrome outside the column space of H")

    pivot_set = set(pivots)
    info = np.array([c for c in range(n) if c not in pivot_set], dtype=np.int64)
    pivots = np.asarray(pivots, dtype=np.int64)
    R_info = reduced[:rank][:, info]
    s_red = reduced[:rank, n]

    hard_perm = (np.asarray(order_llr)[order] < 0).astype(np.uint8)
    base_info = hard_perm[info]

    flips = [()]
    for w in range(1, osd_order + 1):
        flips.extend(combinations(range(info.size), w))
    cand_info = np.repeat(base_info[None, :], len(flips), axis=0)
    for row, f in enumerate(flips):
        if f:
            cand_info[row, list(f)] ^= 1
    cand_piv = (s_red[None, :] + gf2_matmul(cand_info, R_info.T)) & 1

    cands_perm = np.zeros((len(flips), n), dtype=np.uint8)
    cands_perm[:, info] = cand_info
    cands_perm[:, pivots] = cand_piv
    cands = np.empty_like(cands_perm)
    cands[:, order] = cands_perm

    channel_llr = np.asarray(channel_llr, dtype=float)
    ref = (channel_llr < 0).astype(np.uint8)
    metric = ((cands != ref[None, :]) * np.abs(channel_llr)[None, :]).sum(axis=1)
    best = _pick(cands, metric, ref)
    return cands[best], {"list_size": len(flips), "list_rank": best, "rank": rank}


def ldpc_osd_decode(code: LdpcCode, llr, s, osd_order=1, max_iter=BP_MAX_ITER) -> DecodeResult:
    """BP decoding, falling back to OSD of order ``osd_order`` if BP fails.

    ``osd_order=None`` disables reprocessing (plain BP); then a failed BP run
    raises :class:`DecodeFailure`.
    """
    llr = np.asarray(llr, dtype=float)
    if llr.size != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {llr.size}")
    s_bits = s.bits if isinstance(s, Syndrome) else np.asarray(s, dtype=np.uint8)
    if s_bits.size != code.H.shape[0]:
        raise ValueError(f"expected {code.H.shape[0]} syndrome bits, got {s_bits.size}")

    hard, posterior, iters, ok = belief_propagation(code, llr, s_bits, max_iter)
    if ok:
        return DecodeResult(hard, True, {"stage": "bp", "iterations": iters})
    if osd_order is None:
        raise DecodeFailure("belief propagation did not converge",
                            DecodeResult(hard, False, {"stage": "bp", "iterations": iters}))
    est, meta = osd_reprocess(code, llr, posterior, s_bits, osd_order)
    verified = bool(np.array_equal(gf2_matmul(code.H, est), s_bits))
    if not verified:
        raise DecodeFailure("no OSD candidate satisfies the syndrome",
                            DecodeResult(est, False, meta))
    meta.update(stage="osd", iterations=iters)
    return DecodeResult(est, True, meta)


def peg_construct(n, m, var_degree=3, check_degree=6, seed=0):
    """Progressive edge-growth parity-check matrix with capped check degrees.

    Each new edge of a variable node goes to a check node at maximal graph
    distance (ties: lowest current degree, then seeded random choice), which
    keeps short cycles out wherever the degree caps allow.
    """
    if n * var_degree != m * check_degree:
        raise ValueError("edge counts of variable and check sides differ")
    rng = np.random.default_rng(seed)
    var_adj = [[] for _ in range(n)]
    chk_adj = [[] for _ in range(m)]
    deg = np.zeros(m, dtype=np.int64)

    for v in range(n):
        for e in range(var_degree):
            open_checks = np.flatnonzero(deg < check_degree)
            open_checks = open_checks[~np.isin(open_checks, var_adj[v])]
            if e == 0:
                pool = open_checks
            else:
                reached = _bfs_checks(v, var_adj, chk_adj)
                far = open_checks[~np.isin(open_checks, list(reached))]
                if far.size:
                    pool = far
                else:
                    # every open check is reachable: take the deepest ones
                    depth = np.array([reached[c] for c in open_checks])
                    pool = open_checks[depth == depth.max()]
            low = pool[deg[pool] == deg[pool].min()]
            c = int(rng.choice(low))
            var_adj[v].append(c)
            chk_adj[c].append(v)
            deg[c] += 1

    H = np.zeros((m, n), dtype=np.uint8)
    for v, cs in enumerate(var_adj):
        H[cs, v] = 1
    return H


def _bfs_checks(v, var_adj, chk_adj):
    """Depth (in check layers) of each check reachable from variable ``v``."""
    depth = {}
    seen_vars = {v}
    frontier = deque([(v, 0)])
    while frontier:
        u, d = frontier.popleft()
        for c in var_adj[u]:
            if c in depth:
                continue
            depth[c] = d
            for w in chk_adj[c]:
                if w not in seen_vars:
                    seen_vars.add(w)
                    frontier.append((w, d + 1))
    return depth


def has_four_cycle(H) -> bool:
    overlap = H.astype(np.int64) @ H.T.astype(np.int64)
    np.fill_diagonal(overlap, 0)
    return bool((overlap > 1).any())


def build_regular_code(n=512, var_degree=3, check_degree=6, seed=2021, attempts=64):
    """Full-row-rank, 4-cycle-free (dv, dc)-regular PEG code; tries successive seeds."""
    m = n * var_degree // check_degree
    for trial in range(attempts):
        H = peg_construct(n, m, var_degree, check_degree, seed + trial)
        if gf2_rank(H) == m and not has_four_cycle(H):
            return LdpcCode(H, name=f"ldpc_{var_degree}_{check_degree}_{n}")
    raise RuntimeError("no full-rank construction found")
