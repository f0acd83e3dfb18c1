"""Coefficient rings used inside the envelope engine.

Both rings store elements as numpy object arrays of residues.

SeriesRing   (Z/p^N)[[z]]/z^Z, a delta-stable truncation of Z_p[[z]]
QuotientRing (Z/p^N)[z]/(F) for a monic F, used with F = E^J
"""
from __future__ import annotations

import numpy as np

from .series import poly_mul, poly_pow


class SeriesRing:
    def __init__(self, p: int, N: int, Z: int):
        self.p, self.N, self.Z, self.q = p, N, Z, p**N
        self.size = Z

    def zero(self):
        return np.zeros(self.Z, dtype=object)

    def const(self, c):
        a = self.zero()
        a[0] = c % self.q
        return a

    def one(self):
        return self.const(1)

    def from_poly(self, coeffs):
        a = self.zero()
        for i, c in enumerate(coeffs):
            if i < self.Z:
                a[i] = int(c) % self.q
        return a

    def mul(self, a, b):
        return np.convolve(a, b)[: self.Z] % self.q

    def phi(self, a):
        out = self.zero()
        idx = np.arange(0, self.Z, self.p)
        out[idx] = a[: len(idx)]
        return out

    def inv(self, a):
        a0 = int(a[0])
        if a0 % self.p == 0:
            raise ZeroDivisionError("not a unit")
        x = self.const(pow(a0, -1, self.q))
        two = self.const(2)
        for _ in range(int(np.ceil(np.log2(self.Z * self.N + 2))) + 2):
            x = self.mul(x, (two - self.mul(a, x)) % self.q)
        return x


class QuotientRing:
    def __init__(self, p: int, N: int, F):
        self.p, self.N, self.q = p, N, p**N
        self.F = [int(c) for c in F]
        if self.F[-1] != 1:
            raise ValueError("modulus polynomial must be monic")
        self.D = len(self.F) - 1
        self.size = self.D

    def zero(self):
        return np.zeros(self.D, dtype=object)

    def const(self, c):
        return self.reduce([c])

    def one(self):
        return self.const(1)

    def reduce(self, c):
        c = [int(x) % self.q for x in c]
        D, q, F = self.D, self.q, self.F
        for deg in range(len(c) - 1, D - 1, -1):
            lc = c[deg]
            if lc:
                base = deg - D
                for i in range(D + 1):
                    c[base + i] = (c[base + i] - lc * F[i]) % q
        out = self.zero()
        n = min(D, len(c))
        out[:n] = c[:n]
        return out

    from_poly = reduce

    def mul(self, a, b):
        return self.reduce(np.convolve(a, b))

    def phi(self, a):
        """z -> z^p applied to the canonical lift (well defined only modulo
        phi(F); callers account for that ambiguity)."""
        c = np.zeros(self.p * (self.D - 1) + 1 if self.D else 0, dtype=object)
        c[:: self.p] = a
        return self.reduce(c)

    def times_z(self, a):
        return self.reduce(np.concatenate([[0], a]))


def eisenstein_power(E, J: int):
    return [int(c) for c in poly_pow(np.array(E, dtype=object), J)]


def series_to_quotient(S: SeriesRing, T: QuotientRing, a):
    return T.reduce(a % T.q)


__all__ = ["SeriesRing", "QuotientRing", "eisenstein_power", "series_to_quotient", "poly_mul"]
