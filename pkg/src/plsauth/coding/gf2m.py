"""Arithmetic in GF(2^m) through exponent/logarithm tables."""

import numpy as np

PRIMITIVE_POLYS = {
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
}


class GF2m:
    """Field GF(2^m); elements are ints in ``[0, 2^m)``.

    ``exp`` has period ``n = 2^m - 1`` and is stored twice over so that sums
    of two logarithms index it directly.
    """

    def __init__(self, m, poly=None):
        self.m = m
        self.poly = poly or PRIMITIVE_POLYS[m]
        self.n = (1 << m) - 1
        exp = np.zeros(2 * self.n, dtype=np.int64)
        log = np.full(self.n + 1, -1, dtype=np.int64)
        x = 1
        for i in range(self.n):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> m:
                x ^= self.poly
        if x != 1:
            raise ValueError(f"{self.poly:#b} is not primitive for m={m}")
        exp[self.n:] = exp[:self.n]
        self.exp = exp
        self.log = log

    def alpha_pow(self, e):
        return self.exp[np.mod(e, self.n)]

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse")
        return self.exp[(self.n - self.log[a]) % self.n]

    def poly_mul(self, p, q):
        """Product of polynomials with coefficients in the field (lowest degree first)."""
        out = np.zeros(len(p) + len(q) - 1, dtype=np.int64)
        for i, c in enumerate(p):
            if c:
                out[i:i + len(q)] ^= self.mul(c, q)
        return out

    def cyclotomic_coset(self, s):
        coset, x = [], s % self.n
        while x not in coset:
            coset.append(x)
            x = (2 * x) % self.n
        return sorted(coset)

    def minimal_polynomial(self, s):
        """Binary minimal polynomial of ``alpha^s`` (lowest degree first)."""
        poly = np.array([1], dtype=np.int64)
        for e in self.cyclotomic_coset(s):
            poly = self.poly_mul(poly, np.array([self.exp[e], 1]))
        if np.any(poly > 1):
            raise ArithmeticError("minimal polynomial is not binary")
        return poly.astype(np.uint8)
