"""Exact linear algebra over the chain ring Z/p^M.

Submodules of free (Z/p^M)-modules are represented by generator matrices in
Howell normal form, which is the canonical representative of a row span over
a chain ring.  Every lattice operation (meet, join, membership, quotients) is
reduced to Howell computations.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class MalformedInput(ValueError):
    pass


class ContainmentError(ValueError):
    pass


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def valuation(x: int, p: int, cap: int) -> int:
    """p-adic valuation of x, capped at ``cap`` (the valuation of zero)."""
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class ZMod:
    p: int
    M: int
    residue: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise MalformedInput(f"p={self.p} is not prime")
        if self.M < 1:
            raise MalformedInput("M must be positive")
        q = self.p ** self.M
        if not 0 <= self.residue < q:
            object.__setattr__(self, "residue", self.residue % q)

    @property
    def modulus(self) -> int:
        return self.p ** self.M

    def _other(self, other) -> int:
        if isinstance(other, ZMod):
            if (other.p, other.M) != (self.p, self.M):
                raise MalformedInput("mixed moduli")
            return other.residue
        return int(other)

    def __add__(self, other):
        return ZMod(self.p, self.M, (self.residue + self._other(other)) % self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return ZMod(self.p, self.M, (self.residue - self._other(other)) % self.modulus)

    def __rsub__(self, other):
        return ZMod(self.p, self.M, (self._other(other) - self.residue) % self.modulus)

    def __neg__(self):
        return ZMod(self.p, self.M, (-self.residue) % self.modulus)

    def __mul__(self, other):
        return ZMod(self.p, self.M, (self.residue * self._other(other)) % self.modulus)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return ZMod(self.p, self.M, pow(self.residue, n, self.modulus))

    def valuation(self) -> int:
        return valuation(self.residue, self.p, self.M)

    def is_unit(self) -> bool:
        return self.residue % self.p != 0

    def inverse(self) -> "ZMod":
        if not self.is_unit():
            raise ZeroDivisionError(f"{self.residue} is not a unit mod {self.p}^{self.M}")
        return ZMod(self.p, self.M, pow(self.residue, -1, self.modulus))


_WIDE_OK = np.finfo(np.longdouble).nmant >= 63


def _dtype_for(q: int):
    # int64 whenever residues fit; products go through _mulmod when q*q overflows
    return np.int64 if q < 2**62 and (q * q < 2**62 or _WIDE_OK) else object


def _mulmod(a, b, q: int):
    """Elementwise a*b mod q for residues in [0, q) (broadcasting)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype == object or b.dtype == object or q * q < 2**62:
        return (a * b) % q
    # floating quotient estimate; the remainder is exact in wrapping uint64
    # arithmetic as long as the estimate is off by less than 2^63 / q
    ft = np.float64 if q < 2**57 else np.longdouble
    quot = np.floor(a.astype(ft) * b.astype(ft) / ft(q)).astype(np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        r = (a.astype(np.uint64) * b.astype(np.uint64) - quot * np.uint64(q)).view(np.int64)
    return r % q


class ZModMatrix:
    """Dense matrix over Z/p^M with rows as the primary axis."""

    __slots__ = ("p", "M", "data")

    def __init__(self, p: int, M: int, data):
        if not is_prime(p):
            raise MalformedInput(f"p={p} is not prime")
        q = p**M
        arr = np.array(data, dtype=object)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise MalformedInput("matrix data must be two dimensional")
        self.p = p
        self.M = M
        self.data = (arr % q).astype(_dtype_for(q))
        self.data.flags.writeable = False

    @classmethod
    def from_entries(cls, rows):
        """Build from nested lists of ZMod; checks that the modulus is uniform."""
        flat = [x for row in rows for x in row]
        if not flat:
            raise MalformedInput("cannot infer modulus from an empty matrix")
        mods = {(x.p, x.M) for x in flat}
        if len(mods) != 1:
            raise MalformedInput(f"mixed moduli {sorted(mods)}")
        p, M = mods.pop()
        return cls(p, M, [[x.residue for x in row] for row in rows])

    @classmethod
    def zeros(cls, p, M, rows, cols):
        return cls(p, M, np.zeros((rows, cols), dtype=object))

    @classmethod
    def identity(cls, p, M, n):
        return cls(p, M, np.eye(n, dtype=int).astype(object))

    @property
    def q(self) -> int:
        return self.p**self.M

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def tolist(self):
        return [[int(x) for x in row] for row in self.data]

    def __eq__(self, other):
        return (
            isinstance(other, ZModMatrix)
            and (self.p, self.M) == (other.p, other.M)
            and self.data.shape == other.data.shape
            and bool(np.all(self.data == other.data))
        )

    def __hash__(self):
        return hash((self.p, self.M, self.data.shape, tuple(map(int, self.data.ravel()))))

    def __repr__(self):
        return f"ZModMatrix(p={self.p}, M={self.M}, {self.tolist()})"

    def __matmul__(self, other: "ZModMatrix") -> "ZModMatrix":
        if (self.p, self.M) != (other.p, other.M):
            raise MalformedInput("mixed moduli")
        prod = self.data.astype(object).dot(other.data.astype(object))
        return ZModMatrix(self.p, self.M, prod)


# -- core algorithms on raw arrays -------------------------------------------


def _valuations(arr: np.ndarray, p: int, k: int) -> np.ndarray:
    """Elementwise p-adic valuation of nonzero residues mod p^k."""
    out = np.zeros(arr.shape, dtype=np.int64)
    cur = np.array(arr)
    for _ in range(k):
        m = (cur % p) == 0
        if not m.any():
            break
        out += m
        cur = np.where(m, cur // p, cur)
    return out


def _howell_array(a: np.ndarray, p: int, k: int) -> np.ndarray:
    """Howell normal form of the rows of ``a`` over Z/p^k (raw arrays)."""
    q = p**k
    dt = _dtype_for(q)
    A = (np.array(a, dtype=object) % q).astype(dt)
    if A.shape[0] == 0:
        return A.reshape(0, A.shape[1])
    n_cols = A.shape[1]
    # row buffer with spare capacity; rows [0, used) are live
    used = A.shape[0]
    A = np.concatenate([A, np.zeros((max(used, 8), n_cols), dtype=A.dtype)])
    r = 0
    pivots = []
    for col in range(n_cols):
        if r >= used:
            break
        column = A[r:used, col]
        nz = np.nonzero(column)[0]
        if nz.size == 0:
            continue
        vals = _valuations(column[nz], p, k)
        t = int(np.argmin(vals))
        best, best_v = nz[t], int(vals[t])
        i = r + int(best)
        if i != r:
            A[[r, i]] = A[[i, r]]
        pv = p**best_v
        unit = int(A[r, col]) // pv
        A[r, col:] = _mulmod(A[r, col:], pow(unit, -1, q), q)
        below = A[r + 1 : used, col]
        nzb = np.nonzero(below)[0]
        if nzb.size:
            factors = below[nzb] // pv
            rows_idx = r + 1 + nzb
            A[rows_idx, col:] = (A[rows_idx, col:] - _mulmod(factors[:, None], A[r, col:][None, :], q)) % q
        if best_v > 0:
            extra = _mulmod(A[r], p ** (k - best_v), q)
            if np.any(extra):
                if used == A.shape[0]:
                    A = np.concatenate([A, np.zeros_like(A)])
                A[used] = extra
                used += 1
        pivots.append((r, col, best_v))
        r += 1
    H = A[:r]
    # reduce entries above each pivot into [0, p^v)
    for t, col, v in pivots:
        pv = p**v
        above = H[:t, col]
        f = above // pv
        nzf = np.nonzero(f)[0]
        if nzf.size:
            H[nzf, col:] = (H[nzf, col:] - _mulmod(f[nzf][:, None], H[t, col:][None, :], q)) % q
    return H


def _pivot_info(H: np.ndarray, p: int, k: int):
    out = []
    for row in H:
        nz = np.nonzero(row)[0]
        c = int(nz[0])
        out.append((c, valuation(int(row[c]), p, k)))
    return out


def _reduce(H: np.ndarray, piv, vec: np.ndarray, p: int, k: int):
    """Reduce ``vec`` by Howell rows; returns the remainder."""
    q = p**k
    x = np.array(vec, dtype=H.dtype) % q
    for row, (c, v) in zip(H, piv):
        if x[c] == 0:
            continue
        pv = p**v
        f = int(x[c]) // pv
        x = (x - _mulmod(row, f, q)) % q
    return x


# -- public operations --------------------------------------------------------


def howell_form(m: ZModMatrix) -> ZModMatrix:
    """Canonical Howell form of the row span of m (zero rows dropped)."""
    H = _howell_array(m.data, m.p, m.M)
    out = ZModMatrix(m.p, m.M, H.astype(object) if H.size else np.zeros((0, m.cols), dtype=object))
    return out


class Lattice:
    """A submodule of (Z/p^M)^n, stored as a Howell basis."""

    __slots__ = ("p", "M", "ambient_rank", "generators", "_piv")

    def __init__(self, p: int, M: int, ambient_rank: int, rows=None, *, _howell=None):
        self.p = p
        self.M = M
        self.ambient_rank = ambient_rank
        if _howell is None:
            arr = np.zeros((0, ambient_rank), dtype=object) if rows is None or len(rows) == 0 else np.array(rows, dtype=object)
            if arr.ndim != 2 or arr.shape[1] != ambient_rank:
                raise MalformedInput("generator rows have wrong width")
            _howell = _howell_array(arr, p, M)
        self.generators = _howell
        self.generators.flags.writeable = False
        self._piv = _pivot_info(_howell, p, M)

    @classmethod
    def full(cls, p, M, n):
        return cls(p, M, n, np.eye(n, dtype=int).astype(object))

    @classmethod
    def zero(cls, p, M, n):
        return cls(p, M, n, None)

    @property
    def q(self):
        return self.p**self.M

    def matrix(self) -> ZModMatrix:
        return ZModMatrix(self.p, self.M, self.generators.astype(object).reshape(-1, self.ambient_rank))

    def length(self) -> int:
        """log_p of the cardinality."""
        return sum(self.M - v for _, v in self._piv)

    def reduce(self, vec) -> np.ndarray:
        return _reduce(self.generators, self._piv, vec, self.p, self.M)

    def __contains__(self, vec) -> bool:
        return not np.any(self.reduce(vec))

    def __eq__(self, other):
        return (
            isinstance(other, Lattice)
            and (self.p, self.M, self.ambient_rank) == (other.p, other.M, other.ambient_rank)
            and self.generators.shape == other.generators.shape
            and bool(np.all(self.generators == other.generators))
        )

    def __hash__(self):
        return hash((self.p, self.M, self.ambient_rank, tuple(map(int, self.generators.ravel()))))

    def __repr__(self):
        return f"Lattice(p={self.p}, M={self.M}, rank={self.ambient_rank}, length={self.length()})"

    def issubset(self, other: "Lattice") -> bool:
        return all(row in other for row in self.generators)

    def scaled(self, c: int) -> "Lattice":
        return Lattice(self.p, self.M, self.ambient_rank, (self.generators.astype(object) * c) % self.q)


def _check_compatible(a: Lattice, b: Lattice):
    if (a.p, a.M, a.ambient_rank) != (b.p, b.M, b.ambient_rank):
        raise MalformedInput("lattices live in different ambient modules")


def contains(L: Lattice, v) -> bool:
    return v in L


def kernel(m: ZModMatrix) -> Lattice:
    """All row vectors v with v @ m == 0."""
    n, k = m.rows, m.cols
    aug = np.hstack([m.data.astype(object), np.eye(n, dtype=int).astype(object)])
    H = _howell_array(aug, m.p, m.M)
    rows = [row[k:] for row in H if not np.any(row[:k])]
    return Lattice(m.p, m.M, n, np.array(rows, dtype=object) if rows else None)


def lattice_join(a: Lattice, b: Lattice) -> Lattice:
    _check_compatible(a, b)
    return Lattice(a.p, a.M, a.ambient_rank, np.vstack([a.generators, b.generators]).astype(object))


def lattice_meet(a: Lattice, b: Lattice) -> Lattice:
    """Zassenhaus intersection via one Howell computation."""
    _check_compatible(a, b)
    n = a.ambient_rank
    ga = a.generators.astype(object)
    gb = b.generators.astype(object)
    top = np.hstack([ga, ga])
    bot = np.hstack([gb, np.zeros_like(gb)])
    H = _howell_array(np.vstack([top, bot]) if len(top) + len(bot) else np.zeros((0, 2 * n), dtype=object), a.p, a.M)
    rows = [row[n:] for row in H if not np.any(row[:n])]
    return Lattice(a.p, a.M, n, np.array(rows, dtype=object) if rows else None)


class SpanSolver:
    """Expresses targets as combinations of fixed generators (one Howell pass)."""

    def __init__(self, gens, p: int, k: int, width: int):
        gens = np.array(gens, dtype=object).reshape(-1, width)
        self.p, self.k, self.q = p, k, p**k
        self.g, self.n = gens.shape
        aug = np.hstack([gens, np.eye(self.g, dtype=int).astype(object)])
        self.H = _howell_array(aug, p, k)
        self.steps = []
        for row in self.H:
            nz = np.nonzero(row[: self.n])[0]
            if nz.size:
                c = int(nz[0])
                self.steps.append((c, p ** valuation(int(row[c]), p, k), row))

    def solve(self, target):
        """c with c @ gens == target, or None when target is outside the span."""
        q, n = self.q, self.n
        x = np.concatenate([np.array(target, dtype=object) % q, np.zeros(self.g, dtype=object)]).astype(self.H.dtype)
        for c, pv, row in self.steps:
            xc = int(x[c])
            if xc == 0:
                continue
            if xc % pv:
                return None
            x = (x - _mulmod(row, xc // pv, q)) % q
        if np.any(x[:n]):
            return None
        return (-x[n:].astype(object)) % q


def solve(gens, target, p: int, k: int):
    """Find c with c @ gens == target over Z/p^k, or None if target is not in the span."""
    return SpanSolver(gens, p, k, len(target)).solve(target)


def quotient_invariants(big: Lattice, small: Lattice) -> list[int]:
    """Invariant factors p^e (e >= 1, sorted) of big/small.

    Uses l_t = length(big / (small + p^t big)) = sum(min(e, t)); the number of
    factors with exponent >= t is l_t - l_{t-1}.
    """
    _check_compatible(big, small)
    if not small.issubset(big):
        raise ContainmentError("small lattice is not contained in big lattice")
    p, k = big.p, big.M
    total = big.length() - small.length()
    counts = []
    prev = 0
    for t in range(1, k + 1):
        lt = big.length() - lattice_join(small, big.scaled(p**t)).length()
        c = lt - prev
        if c == 0:
            break
        counts.append(c)
        prev = lt
        if lt == total:
            break
    out = []
    for t, c in enumerate(counts, start=1):
        nxt = counts[t] if t < len(counts) else 0
        out += [p**t] * (c - nxt)
    return sorted(out)


def log_order(invariants, p: int) -> int:
    total = 0
    for f in invariants:
        e = 0
        while f > 1:
            f //= p
            e += 1
        total += e
    return total
