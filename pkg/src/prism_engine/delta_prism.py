"""delta-structure on the Breuil-Kisin ring Z_p[[z]] and prism constructors.

The Frobenius lift is z -> z^p (constants fixed).  delta is computed as
(phi(f) - f^p)/p on integer lifts, with exact divisibility asserted; one
p-adic digit is consumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import (
    OrientationError,
    PrecisionExhausted,
    TruncSeries,
    check_distinguished_poly,
    poly_frobenius,
    poly_pow,
)
from .zmod import MalformedInput


class ConsistencyError(AssertionError):
    """An identity that must hold exactly failed (signals a bug)."""


def frobenius(f: TruncSeries) -> TruncSeries:
    return f.like(poly_frobenius(f.lift(), f.p, f.Z))


def delta_eval(f: TruncSeries) -> TruncSeries:
    """delta(f) at ledger M - 1."""
    p, M, Z = f.p, f.M, f.Z
    if M < 2:
        raise PrecisionExhausted("delta needs at least two p-adic digits")
    lift = f.lift()
    diff = poly_frobenius(lift, p, Z) - poly_pow(lift, p, Z)
    if any(int(c) % p for c in diff):
        raise ConsistencyError("phi(f) - f^p is not divisible by p")
    return TruncSeries(p, M - 1, Z, [int(c) // p for c in diff])


def is_distinguished(d: TruncSeries) -> bool:
    if d.M < 2:
        raise PrecisionExhausted("need M >= 2 to evaluate delta(d) mod p")
    return int(delta_eval(d).coeffs[0]) % d.p != 0


@dataclass(frozen=True)
class DeltaPresentation:
    p: int
    M: int
    Z: int
    # named generators and their delta values; v1 has z with delta(z) = 0
    generators: dict = field(default_factory=lambda: {"z": (0,)})

    def __post_init__(self):
        for name, dv in self.generators.items():
            if name == "z" and any(dv):
                raise MalformedInput("delta(z) must be 0 for the Breuil-Kisin Frobenius z -> z^p")


@dataclass(frozen=True)
class OrientedPrism:
    presentation: DeltaPresentation
    eisenstein: tuple
    e: int

    @property
    def p(self):
        return self.presentation.p

    @property
    def M(self):
        return self.presentation.M

    @property
    def Z(self):
        return self.presentation.Z

    def d(self) -> TruncSeries:
        return TruncSeries(self.p, self.M, self.Z, self.eisenstein)


def make_breuil_kisin(p: int, M: int, Z: int, E) -> OrientedPrism:
    try:
        e = check_distinguished_poly(E, p)
    except OrientationError as exc:
        raise OrientationError(f"not an Eisenstein polynomial: {exc}") from None
    E = [int(c) for c in E]
    while len(E) > 1 and E[-1] == 0:
        E.pop()
    if M < 2:
        raise PrecisionExhausted("a prism needs M >= 2 to see delta(d)")
    if Z <= e:
        raise PrecisionExhausted("z-precision must exceed the degree of E")
    prism = OrientedPrism(DeltaPresentation(p, M, Z), tuple(E), e)
    if not is_distinguished(prism.d()):
        raise OrientationError("delta(E) is not a unit")
    if not is_transversal(prism):
        raise OrientationError("E is a zero divisor modulo p")
    return prism


def is_transversal(prism: OrientedPrism) -> bool:
    """d is a non-zero-divisor on A/p at the working truncation.

    Mod p, d = z^e * unit, so multiplication by d on F_p[[z]]/z^Z has kernel
    exactly z^{Z-e}F_p[[z]]/z^Z.  Anything beyond that window is a genuine
    zero divisor.
    """
    p, Z = prism.p, prism.Z
    d = np.array([int(c) % p for c in prism.eisenstein] + [0] * Z, dtype=object)[:Z]
    # matrix of multiplication by d on F_p-coordinates 1, z, ..., z^{Z-1}
    rows = []
    for a in range(Z):
        row = np.zeros(Z, dtype=object)
        row[a:] = d[: Z - a]
        rows.append(row % p)
    from .zmod import ZModMatrix, kernel

    K = kernel(ZModMatrix(p, 1, rows))
    e = prism.e
    return K.length() <= e and all(not np.any(row[: Z - e]) for row in K.generators)
