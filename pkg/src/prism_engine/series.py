"""Truncated power series over Z/p^M and their localization at d = E(z).

A TruncSeries is an element of (Z/p^M)[[z]]/z^Z, i.e. of A/(p^M, z^Z) for
A = Z_p[[z]].  A LocalElement is a fraction f/d^r with an explicit precision
ledger (M_eff, Z_eff) recording which digits are guaranteed.
"""
from __future__ import annotations

import numpy as np

from .zmod import MalformedInput, is_prime


class PrecisionExhausted(ArithmeticError):
    pass


class OrientationError(ValueError):
    pass


def _as_obj(a, length=None) -> np.ndarray:
    arr = np.array([int(x) for x in a], dtype=object)
    if length is not None:
        out = np.zeros(length, dtype=object)
        n = min(length, len(arr))
        out[:n] = arr[:n]
        arr = out
    return arr


def poly_mul(a, b, Z=None) -> np.ndarray:
    """Product of integer coefficient arrays, optionally truncated at z^Z."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0 if Z is None else Z, dtype=object)
    if Z is not None:
        a, b = a[:Z], b[:Z]
    out = np.convolve(a, b)
    if Z is not None:
        out = _as_obj(out, Z)
    return out


def poly_pow(a, n: int, Z=None) -> np.ndarray:
    result = _as_obj([1], Z)
    base = np.asarray(a, dtype=object)
    while n:
        if n & 1:
            result = poly_mul(result, base, Z)
        n >>= 1
        if n:
            base = poly_mul(base, base, Z)
    return result


def poly_frobenius(a, p: int, Z=None) -> np.ndarray:
    """z -> z^p on coefficients (constants are fixed since W(F_p) = Z_p)."""
    a = np.asarray(a, dtype=object)
    n_out = Z if Z is not None else (p * (len(a) - 1) + 1 if len(a) else 0)
    out = np.zeros(n_out, dtype=object)
    for i, c in enumerate(a):
        if p * i >= n_out:
            break
        out[p * i] = c
    return out


class TruncSeries:
    """Element of (Z/p^M)[[z]]/z^Z."""

    __slots__ = ("p", "M", "Z", "coeffs")

    def __init__(self, p: int, M: int, Z: int, coeffs=()):
        if not is_prime(p):
            raise MalformedInput(f"p={p} is not prime")
        if M < 0 or Z < 1:
            raise MalformedInput("need M >= 0 and Z >= 1")
        self.p, self.M, self.Z = p, M, Z
        c = _as_obj(coeffs, Z) % (p**M)
        c.flags.writeable = False
        self.coeffs = c

    # constructors
    @classmethod
    def zero(cls, p, M, Z):
        return cls(p, M, Z)

    @classmethod
    def one(cls, p, M, Z):
        return cls(p, M, Z, [1])

    @classmethod
    def constant(cls, p, M, Z, c):
        return cls(p, M, Z, [c])

    @classmethod
    def z(cls, p, M, Z):
        return cls(p, M, Z, [0, 1])

    @property
    def q(self):
        return self.p**self.M

    def like(self, coeffs) -> "TruncSeries":
        return TruncSeries(self.p, self.M, self.Z, coeffs)

    def _check(self, other) -> "TruncSeries":
        if isinstance(other, int):
            return self.like([other])
        if not isinstance(other, TruncSeries):
            return NotImplemented
        if (self.p, self.M, self.Z) != (other.p, other.M, other.Z):
            raise MalformedInput("series with different (p, M, Z)")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self.like(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return self.like(-self.coeffs)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self.like(self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self.like(poly_mul(self.coeffs, other.coeffs, self.Z))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return self.like(poly_pow(self.coeffs, n, self.Z))

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.like([other])
        return (
            isinstance(other, TruncSeries)
            and (self.p, self.M, self.Z) == (other.p, other.M, other.Z)
            and bool(np.all(self.coeffs == other.coeffs))
        )

    def __hash__(self):
        return hash((self.p, self.M, self.Z, tuple(self.coeffs)))

    def __repr__(self):
        terms = [f"{int(c)}*z^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"TruncSeries(p={self.p}, M={self.M}, Z={self.Z}: {' + '.join(terms) or '0'})"

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def is_unit(self) -> bool:
        return int(self.coeffs[0]) % self.p != 0

    def inverse(self) -> "TruncSeries":
        if not self.is_unit():
            raise ZeroDivisionError("constant term is not a unit")
        q = self.q
        x = self.like([pow(int(self.coeffs[0]), -1, q)])
        # Newton iteration doubles both the p-adic and z-adic accuracy
        steps = int(np.ceil(np.log2(max(self.M, 1) * self.Z + 1))) + 1
        for _ in range(steps):
            x = x * (2 - self * x)
        return x

    def truncate(self, M=None, Z=None) -> "TruncSeries":
        M = self.M if M is None else M
        Z = self.Z if Z is None else Z
        if M > self.M or Z > self.Z:
            raise PrecisionExhausted("cannot raise precision by truncation")
        return TruncSeries(self.p, M, Z, self.coeffs[:Z])

    def lift(self) -> np.ndarray:
        """Integer representatives in [0, p^M)."""
        return np.array(self.coeffs, dtype=object)

    def degree(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else -1


def check_distinguished_poly(E, p: int):
    """Validate a monic Eisenstein polynomial (coefficients constant first).

    Returns e = deg E; raises OrientationError naming the violated condition.
    """
    E = [int(c) for c in E]
    while len(E) > 1 and E[-1] == 0:
        E.pop()
    e = len(E) - 1
    if e < 1:
        raise OrientationError("Eisenstein polynomial must have degree >= 1")
    if E[-1] != 1:
        raise OrientationError(f"leading coefficient must be 1 (got {E[-1]})")
    if E[0] % p or E[0] % (p * p) == 0:
        raise OrientationError(f"constant term must be p times a unit (got {E[0]})")
    for k in range(1, e):
        if E[k] % p:
            raise OrientationError(f"coefficient of z^{k} must be divisible by p={p} (got {E[k]})")
    return e


def weierstrass_divide(f: TruncSeries, E) -> tuple[TruncSeries, list[int]]:
    """f = q*E + rem with deg rem < e.

    E is a monic Eisenstein coefficient list.  The remainder is exact mod p^M
    once Z >= e*M (z^Z lies in (E, p^M)); q is returned at z-precision Z - e*M.
    """
    p, M, Z = f.p, f.M, f.Z
    try:
        e = check_distinguished_poly(E, p)
    except OrientationError as exc:
        raise OrientationError(f"E is not distinguished: {exc}") from None
    if Z < e * M + e:
        raise PrecisionExhausted(f"z-precision {Z} too small for Weierstrass division (need {e * M + e})")
    q = p**M
    Ec = [int(c) for c in E][: e + 1]
    work = list(f.lift())
    quot = [0] * Z
    for deg in range(Z - 1, e - 1, -1):
        c = work[deg] % q
        if c:
            quot[deg - e] = c
            for k in range(e + 1):
                work[deg - e + k] = (work[deg - e + k] - c * Ec[k]) % q
    rem = [int(x) % q for x in work[:e]]
    Zq = Z - e * M
    return TruncSeries(p, M, Zq, quot[:Zq]), rem


def _E_series(E, p, M, Z) -> TruncSeries:
    return TruncSeries(p, M, Z, E)


class LocalElement:
    """f / d^pole with ledger (M_eff, Z_eff) of guaranteed digits."""

    __slots__ = ("E", "numerator", "pole", "M_eff", "Z_eff")

    def __init__(self, E, numerator: TruncSeries, pole: int = 0, normalize: bool = True):
        self.E = tuple(int(c) for c in E)
        self.numerator = numerator
        self.pole = pole
        self.M_eff = numerator.M
        self.Z_eff = numerator.Z
        e = len(self.E) - 1
        if self.M_eff <= 0:
            raise PrecisionExhausted("p-adic ledger exhausted")
        if self.Z_eff <= pole * e:
            raise PrecisionExhausted(f"z-adic ledger {self.Z_eff} does not cover pole {pole}")
        if normalize:
            self._normalize()

    @property
    def p(self):
        return self.numerator.p

    @property
    def e(self):
        return len(self.E) - 1

    def _normalize(self):
        while self.pole > 0:
            if self.numerator.Z - self.e * self.M_eff <= (self.pole - 1) * self.e or self.numerator.Z < self.e * (self.M_eff + 1):
                break
            q, rem = weierstrass_divide(self.numerator, self.E)
            if any(rem):
                break
            self.numerator = q
            self.Z_eff = q.Z
            self.pole -= 1

    @classmethod
    def from_series(cls, E, f: TruncSeries) -> "LocalElement":
        return cls(E, f, 0)

    def ledger(self):
        return (self.M_eff, self.Z_eff)

    def _d(self, M, Z) -> TruncSeries:
        return _E_series(self.E, self.p, M, Z)

    def at(self, M: int, Z: int, pole: int) -> TruncSeries:
        """Numerator of self written over d^pole, at precision (M, Z)."""
        if pole < self.pole:
            raise ValueError("target pole smaller than current pole")
        if M > self.M_eff or Z > self.Z_eff:
            raise PrecisionExhausted("requested precision beyond ledger")
        num = self.numerator.truncate(M, Z)
        return num * self._d(M, Z) ** (pole - self.pole)

    def _common(self, other: "LocalElement"):
        if self.E != other.E or self.p != other.p:
            raise MalformedInput("different orientations")
        M = min(self.M_eff, other.M_eff)
        Z = min(self.Z_eff, other.Z_eff)
        P = max(self.pole, other.pole)
        return M, Z, P

    def __add__(self, other):
        if isinstance(other, int):
            other = LocalElement(self.E, self.numerator.like([other]), 0)
        M, Z, P = self._common(other)
        return LocalElement(self.E, self.at(M, Z, P) + other.at(M, Z, P), P)

    def __neg__(self):
        return LocalElement(self.E, -self.numerator, self.pole, normalize=False)

    def __sub__(self, other):
        if isinstance(other, int):
            other = LocalElement(self.E, self.numerator.like([other]), 0)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return LocalElement(self.E, self.numerator * other, self.pole)
        M, Z, _ = self._common(other)
        num = self.numerator.truncate(M, Z) * other.numerator.truncate(M, Z)
        return LocalElement(self.E, num, self.pole + other.pole)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = LocalElement(self.E, self.numerator.like([1]), 0)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, LocalElement):
            return NotImplemented
        M, Z, P = self._common(other)
        return self.at(M, Z, P) == other.at(M, Z, P)

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def __repr__(self):
        return f"LocalElement({self.numerator!r} / d^{self.pole}, ledger=({self.M_eff}, {self.Z_eff}))"


def delta_of_poly(E, p: int) -> list[int]:
    """delta(E) = (E(z^p) - E(z)^p)/p as an integer polynomial."""
    E = np.array([int(c) for c in E], dtype=object)
    diff = poly_frobenius(E, p) - poly_pow(E, p)
    assert all(int(c) % p == 0 for c in diff)
    return [int(c) // p for c in diff]


def invert_phi_d(E, p: int, M_eff: int, Z: int) -> LocalElement:
    """x with x * phi(d) = 1 at ledger (M_eff, Z), where phi(d) = d^p + p*delta(d).

    Computed as d^{-p} * sum_{j<M_eff} (-p delta(d) d^{-p})^j, so the pole is
    p*M_eff before normalization.
    """
    if M_eff < 1:
        raise PrecisionExhausted("invert_phi_d needs M_eff >= 1")
    dd = TruncSeries(p, M_eff, Z, delta_of_poly(E, p))
    d = TruncSeries(p, M_eff, Z, E)
    dp = d**p
    u = -(dd * p)
    num = TruncSeries.zero(p, M_eff, Z)
    for j in range(M_eff):
        num = num + u**j * dp ** (M_eff - 1 - j)
    return LocalElement(E, num, p * M_eff)


def phi_of_d(E, p: int, M: int, Z: int) -> LocalElement:
    d = TruncSeries(p, M, Z, E)
    dd = TruncSeries(p, M, Z, delta_of_poly(E, p))
    return LocalElement(E, d**p + dd * p, 0)


def default_z_precision(e: int, n: int, p: int) -> int:
    return 20 * e * max(n, p)
