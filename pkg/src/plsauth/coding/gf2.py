"""Dense linear algebra over GF(2) on uint8 arrays."""

import numpy as np


def gf2_matmul(a, b):
    """Product of binary arrays reduced mod 2."""
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64) & 1).astype(np.uint8)


def gf2_rref(matrix, n_pivot_cols=None):
    """Reduced row echelon form.

    Pivots are searched left to right among the first ``n_pivot_cols``
    columns (all columns by default); trailing columns ride along, which is
    how an augmented right-hand side is carried through.

    Returns
    -------
    (reduced, pivot_cols)
        ``reduced`` has the pivot rows first; ``pivot_cols[i]`` is the column
        of the leading one in row ``i``.
    """
    a = np.array(matrix, dtype=np.uint8) & 1
    rows, cols = a.shape
    limit = cols if n_pivot_cols is None else n_pivot_cols
    pivots = []
    r = 0
    for c in range(limit):
        if r == rows:
            break
        hits = np.flatnonzero(a[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        mask = a[:, c].astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_rank(matrix) -> int:
    return len(gf2_rref(matrix)[1])


def gf2_nullspace(matrix):
    """Basis of the right null space, one vector per row."""
    a = np.asarray(matrix, dtype=np.uint8)
    n = a.shape[1]
    reduced, pivots = gf2_rref(a)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in enumerate(pivots):
            basis[i, pc] = reduced[row, f]
    return basis
