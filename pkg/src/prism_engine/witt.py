"""p-typical Witt vectors of finite length over C = Z/p^M or (Z/p^M)[z]/z^Z.

Every operation is the evaluation of an integral universal polynomial.  We
evaluate it at integer lifts: lift the components to Z[z]/z^Z (p-torsion
free), go to ghost coordinates, operate there, and invert the ghost map by
exact division.  Reducing mod p^M afterwards is sound because the universal
polynomials have integer coefficients.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .series import poly_mul, poly_pow
from .zmod import MalformedInput, is_prime

L_MAX = 5


class CapabilityError(ValueError):
    pass


class CartierWitt(enum.Enum):
    OK = "ok"
    FAIL_NILPOTENCE = "fail_nilpotence"
    FAIL_UNIT = "fail_unit"


@dataclass(frozen=True)
class WittVector:
    p: int
    M: int
    Z: int | None  # None means C = Z/p^M
    components: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise MalformedInput(f"p={self.p} is not prime")
        if not self.components:
            raise MalformedInput("a Witt vector needs at least one component")
        if len(self.components) > L_MAX:
            raise CapabilityError(f"length {len(self.components)} exceeds L_max={L_MAX}")
        q = self.p**self.M
        if self.Z is None:
            comps = tuple(int(c) % q for c in self.components)
        else:
            comps = tuple(tuple(int(x) % q for x in _pad(c, self.Z)) for c in self.components)
        object.__setattr__(self, "components", comps)

    @property
    def L(self) -> int:
        return len(self.components)

    def _lifts(self):
        if self.Z is None:
            return [np.array([c], dtype=object) for c in self.components]
        return [np.array(c, dtype=object) for c in self.components]

    def _make(self, arrays) -> "WittVector":
        q = self.p**self.M
        if self.Z is None:
            return WittVector(self.p, self.M, None, tuple(int(a[0]) % q for a in arrays))
        return WittVector(self.p, self.M, self.Z, tuple(tuple(int(x) % q for x in a) for a in arrays))

    def __add__(self, other):
        return witt_add(self, other)

    def __mul__(self, other):
        return witt_mul(self, other)


def _pad(c, Z):
    c = list(c) if not isinstance(c, int) else [c]
    return (c + [0] * Z)[:Z]


def _width(x: WittVector) -> int:
    return 1 if x.Z is None else x.Z


def _ghost_int(lifts, p, width):
    out = []
    for n in range(len(lifts)):
        w = np.zeros(width, dtype=object)
        for i in range(n + 1):
            w = w + p**i * poly_pow(lifts[i], p ** (n - i), width)
        out.append(w)
    return out


def _unghost_int(ghosts, p, width):
    xs = []
    for n, w in enumerate(ghosts):
        acc = np.array(w, dtype=object)
        for i in range(n):
            acc = acc - p**i * poly_pow(xs[i], p ** (n - i), width)
        if any(int(c) % p**n for c in acc):
            raise ArithmeticError("ghost vector is not integral (internal error)")
        xs.append(np.array([int(c) // p**n for c in acc], dtype=object))
    return xs


def ghost(x: WittVector) -> list:
    """Ghost components w_n = sum_i p^i x_i^{p^(n-i)}, reduced into C."""
    q = x.p**x.M
    gs = _ghost_int(x._lifts(), x.p, _width(x))
    if x.Z is None:
        return [int(g[0]) % q for g in gs]
    return [tuple(int(c) % q for c in g) for g in gs]


def _compat(x: WittVector, y: WittVector):
    if (x.p, x.M, x.Z, x.L) != (y.p, y.M, y.Z, y.L):
        raise MalformedInput("Witt vectors over different rings or lengths")


def witt_add(x: WittVector, y: WittVector) -> WittVector:
    _compat(x, y)
    p, w = x.p, _width(x)
    gx, gy = _ghost_int(x._lifts(), p, w), _ghost_int(y._lifts(), p, w)
    return x._make(_unghost_int([a + b for a, b in zip(gx, gy)], p, w))


def witt_mul(x: WittVector, y: WittVector) -> WittVector:
    _compat(x, y)
    p, w = x.p, _width(x)
    gx, gy = _ghost_int(x._lifts(), p, w), _ghost_int(y._lifts(), p, w)
    return x._make(_unghost_int([poly_mul(a, b, w) for a, b in zip(gx, gy)], p, w))


def witt_neg(x: WittVector) -> WittVector:
    p, w = x.p, _width(x)
    gx = _ghost_int(x._lifts(), p, w)
    return x._make(_unghost_int([-a for a in gx], p, w))


def frobenius_W(x: WittVector) -> WittVector:
    if x.L < 2:
        raise CapabilityError("Frobenius needs length >= 2")
    p, w = x.p, _width(x)
    gx = _ghost_int(x._lifts(), p, w)
    return x._make(_unghost_int(gx[1:], p, w))


def verschiebung(x: WittVector) -> WittVector:
    zero = 0 if x.Z is None else tuple([0] * x.Z)
    comps = (zero,) + x.components
    return WittVector(x.p, x.M, x.Z, comps[:L_MAX])


def teichmuller(a, p: int, M: int, L: int, Z: int | None = None) -> WittVector:
    zero = 0 if Z is None else tuple([0] * Z)
    return WittVector(p, M, Z, (a,) + (zero,) * (L - 1))


def delta_W(x: WittVector) -> WittVector:
    """delta = (F(x) - x^p)/p, length L - 1."""
    if x.L < 2:
        raise CapabilityError("delta needs length >= 2")
    p, w = x.p, _width(x)
    gx = _ghost_int(x._lifts(), p, w)
    gd = []
    for n in range(x.L - 1):
        diff = gx[n + 1] - poly_pow(gx[n], p, w)
        if any(int(c) % p for c in diff):
            raise ArithmeticError("ghost delta not integral (internal error)")
        gd.append(np.array([int(c) // p for c in diff], dtype=object))
    return x._make(_unghost_int(gd, p, w))


def _is_nilpotent(c, x: WittVector) -> bool:
    # in Z/p^M and (Z/p^M)[z]/z^Z the nilradical is (p) resp. (p, z)
    lead = c if x.Z is None else c[0]
    return int(lead) % x.p == 0


def _is_unit(c, x: WittVector) -> bool:
    lead = c if x.Z is None else c[0]
    return int(lead) % x.p != 0


def cartier_witt_check(xi: WittVector) -> CartierWitt:
    """Truncated Cartier-Witt test: x_0 nilpotent and delta(xi)_0 a unit.

    W_L(S) for S with nilpotent p is local-ish in the sense needed here: an
    element of W(S) is a unit iff its 0-th component is a unit of S.
    """
    if not _is_nilpotent(xi.components[0], xi):
        return CartierWitt.FAIL_NILPOTENCE
    d = delta_W(xi)
    if not _is_unit(d.components[0], xi):
        return CartierWitt.FAIL_UNIT
    return CartierWitt.OK
