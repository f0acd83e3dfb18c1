"""Filtered utilities: Koszul regularity (plain, filtered, graded), filtered
envelopes and the scp convolution on finite filtered lattices.

Koszul homology is computed on truncations, where regular elements can pick
up spurious annihilators (a unit-free element of Z/p^N, or z against z^Z).
We therefore report "pro-homology": the image of H_k at a finer truncation
in H_k at the working truncation.  For a genuinely regular sequence this
image vanishes once the finer level is a few digits deeper; a genuinely
non-regular sequence keeps a non-zero image.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._rings import QuotientRing, eisenstein_power
from .zmod import Lattice, MalformedInput, ZModMatrix, kernel, lattice_join, lattice_meet


class WeightError(ValueError):
    pass


# ---------------------------------------------------------------------------
# truncated ring models


class SeriesModel:
    """(Z/p^N)[[z]]/z^Z with basis z^a."""

    def __init__(self, p, N, Z):
        self.p, self.N, self.Z = p, N, Z
        self.rank = Z

    def finer(self, step):
        return SeriesModel(self.p, self.N + step, self.Z + step)

    def mult_rows(self, x):
        q = self.p**self.N
        x = (list(int(c) for c in x) + [0] * self.Z)[: self.Z]
        rows = []
        for a in range(self.Z):
            row = [0] * self.Z
            for i in range(self.Z - a):
                row[a + i] = x[i] % q
            rows.append(row)
        return rows

    def project(self, v, fine):
        q = self.p**self.N
        return [int(c) % q for c in v[: self.Z]]

    def zpow_rows(self, m):
        # z^m A
        return [[1 if j == a else 0 for j in range(self.Z)] for a in range(max(m, 0), self.Z)]


class ResidueModel:
    """(Z/p^N)[z]/F for a monic F (O_K for F = E, or A/E^J)."""

    def __init__(self, p, N, F):
        self.p, self.N, self.F = p, N, list(F)
        self.T = QuotientRing(p, N, F)
        self.rank = self.T.D

    def finer(self, step):
        return ResidueModel(self.p, self.N + step, self.F)

    def mult_rows(self, x):
        c = self.T.reduce(x)
        rows = []
        for _ in range(self.rank):
            rows.append([int(v) for v in c])
            c = self.T.times_z(c)
        return rows

    def project(self, v, fine):
        q = self.p**self.N
        return [int(c) % q for c in v]

    def zpow_rows(self, m):
        c = self.T.reduce([0] * max(m, 0) + [1])
        rows = []
        for _ in range(self.rank):
            rows.append([int(v) for v in c])
            c = self.T.times_z(c)
        return rows


def _koszul_differential(model, elements, k):
    """Rows: images of the basis of K_k (subsets of size k times ring basis)."""
    c = len(elements)
    n = model.rank
    src = list(combinations(range(c), k))
    tgt = list(combinations(range(c), k - 1))
    tidx = {S: i for i, S in enumerate(tgt)}
    mults = [model.mult_rows(x) for x in elements]
    rows = []
    for S in src:
        for b in range(n):
            row = [0] * (len(tgt) * n)
            for pos, i in enumerate(S):
                sign = -1 if pos % 2 else 1
                T = tidx[S[:pos] + S[pos + 1 :]]
                for j, v in enumerate(mults[i][b]):
                    row[T * n + j] += sign * v
            rows.append(row)
    return rows, len(src) * n, len(tgt) * n


def koszul_pro_homology(model, elements, step: int | None = None) -> list[int]:
    """Lengths of the images H_k(fine) -> H_k(model) for k = 1..c.

    The default step is N * (max degree) + 3: truncation tails of an
    annihilator (e.g. x_k = p^(Z-1-k) a for z - p) need that many extra
    z-powers before they die modulo p^N.
    """
    c = len(elements)
    if step is None:
        deg = max((max((i for i, v in enumerate(x) if int(v)), default=0) for x in elements), default=1)
        step = model.N * max(deg, 1) + 3
    fine = model.finer(step)
    p = model.p
    out = []
    for k in range(1, c + 1):
        rows_f, nsrc_f, _ = _koszul_differential(fine, elements, k)
        Zf = kernel(ZModMatrix(p, fine.N, rows_f))
        # project cycles basis-block-wise
        nS = len(list(combinations(range(c), k)))
        proj = []
        for g in Zf.generators:
            g = [int(x) for x in g]
            v = []
            for s in range(nS):
                v += model.project(g[s * fine.rank : (s + 1) * fine.rank], fine)
            proj.append(v)
        dim = nS * model.rank
        if k < c:
            rows_b, _, _ = _koszul_differential(model, elements, k + 1)
            B = Lattice(p, model.N, dim, rows_b)
        else:
            B = Lattice.zero(p, model.N, dim)
        img = lattice_join(Lattice(p, model.N, dim, proj if proj else None), B)
        out.append(img.length() - B.length())
    return out


def koszul_regular_in_residue(E, relations, p: int, N: int = 8):
    """Koszul regularity of the images of relations in O_K = Z_p[z]/E."""
    model = ResidueModel(p, N, E)
    h = koszul_pro_homology(model, relations, step=N)
    return all(x == 0 for x in h), (h[0] if h else 0)


# ---------------------------------------------------------------------------
# filtered Koszul


def z_order(x, q) -> int | None:
    for i, c in enumerate(x):
        if int(c) % q:
            return i
    return None


@dataclass
class FilteredKoszulReport:
    elements: list
    weights: list
    homology: list  # pro-lengths of H_k, k >= 1, filtered complex
    graded_homology: list  # same for the associated graded complex
    strict: bool  # H_0 filtration strict on the window
    induced_lengths: list = field(default_factory=list)  # length of F^m H_0, m = 0..window

    @property
    def regular(self) -> bool:
        return all(h == 0 for h in self.homology) and all(h == 0 for h in self.graded_homology) and self.strict


def filtered_koszul(ringdata, elements, weights, window: int) -> FilteredKoszulReport:
    """Filtered Koszul check for elements of a z-adically filtered series ring.

    ringdata: (p, N, Z) for (Z/p^N)[[z]]/z^Z; N = 1 models F_p[[z]].  The
    filtration is F^m = z^m A, the associated graded ring is (Z/p^N)[t], and
    gr(x) is the lowest z-term of x placed in degree w(x).
    """
    p, N, Z = ringdata
    q = p**N
    if window >= Z // 2:
        raise MalformedInput("window must be below half the z-precision")
    elements = [[int(c) % q for c in x] for x in elements]
    for x, w in zip(elements, weights):
        o = z_order(x, q)
        if o is None or o != w:
            raise WeightError(f"element has z-order {o}, declared weight {w}")
    model = SeriesModel(p, N, Z)
    hom = koszul_pro_homology(model, elements)
    graded = []
    for x, w in zip(elements, weights):
        g = [0] * (w + 1)
        g[w] = x[w]
        graded.append(g)
    ghom = koszul_pro_homology(model, graded)
    strict, induced = _h0_strictness(model, elements, weights, window)
    return FilteredKoszulReport(elements, list(weights), hom, ghom, strict, induced)


def _h0_strictness(model, elements, weights, window):
    """F^m A intersect J equals sum_j x_j F^{m - w_j} (pro-sense), m <= window."""
    p, N = model.p, model.N
    deg = max((max((i for i, v in enumerate(x) if int(v)), default=0) for x in elements), default=1)
    fine = model.finer(N * max(deg, 1) + window + 3)
    n = model.rank
    J_rows = []
    for x in elements:
        J_rows += model.mult_rows(x)
    J = Lattice(p, N, n, J_rows)
    Jf_rows = []
    for x in elements:
        Jf_rows += fine.mult_rows(x)
    Jf = Lattice(p, fine.N, fine.rank, Jf_rows)
    strict = True
    induced = []
    for m in range(window + 1):
        Fm_f = Lattice(p, fine.N, fine.rank, fine.zpow_rows(m))
        meet = lattice_meet(Fm_f, Jf)
        proj = [model.project([int(c) for c in g], fine) for g in meet.generators]
        expect_rows = []
        for x, w in zip(elements, weights):
            shifted = [0] * max(m - w, 0) + list(x)
            expect_rows += model.mult_rows(shifted)
        expect = Lattice(p, N, n, expect_rows)
        got = Lattice(p, N, n, proj if proj else None)
        if not got.issubset(expect):
            strict = False
        Fm = Lattice(p, N, n, model.zpow_rows(m))
        induced.append(lattice_join(Fm, J).length() - J.length())
    return strict, induced


# ---------------------------------------------------------------------------
# filtered modules and scp


@dataclass
class FilteredModule:
    """A lattice with a decreasing filtration F^0 = full >= F^1 >= ... >= F^window.

    F^m for m <= 0 is the whole lattice; asking beyond the window is an error."""

    lattice: Lattice
    pieces: list  # pieces[m] = F^m, m = 0..window
    weights: list | None = None

    def __post_init__(self):
        for a, b in zip(self.pieces, self.pieces[1:]):
            if not b.issubset(a):
                raise MalformedInput("filtration is not decreasing")

    @property
    def window(self):
        return len(self.pieces) - 1

    def piece(self, m: int) -> Lattice:
        if m <= 0:
            return self.lattice
        if m > self.window:
            raise MalformedInput(f"filtration piece {m} beyond window {self.window}")
        return self.pieces[m]

    def lengths(self):
        return [P.length() for P in self.pieces]


def weighted_filtration(lattice: Lattice, weights, window: int) -> FilteredModule:
    """F^m = span of basis vectors of weight >= m, intersected with lattice."""
    n = lattice.ambient_rank
    pieces = []
    for m in range(window + 1):
        rows = [[1 if j == i else 0 for j in range(n)] for i in range(n) if weights[i] >= m]
        sub = Lattice(lattice.p, lattice.M, n, rows if rows else None)
        pieces.append(lattice_meet(sub, lattice))
    return FilteredModule(lattice, pieces, list(weights))


def scp(F: FilteredModule, window: int | None = None) -> FilteredModule:
    """scp(F)^m = sum_{t=0..m} p^{m-t} F^{pt}; needs F up to p * window."""
    window = F.window // F.lattice.p if window is None else window
    p = F.lattice.p
    pieces = []
    for m in range(window + 1):
        acc = Lattice.zero(p, F.lattice.M, F.lattice.ambient_rank)
        for t in range(m + 1):
            acc = lattice_join(acc, F.piece(p * t).scaled(p ** (m - t)))
        pieces.append(acc)
    return FilteredModule(F.lattice, pieces)


def d_adic_filtration(p: int, N: int, E, J: int, window: int) -> FilteredModule:
    """d-adic filtration on T = (Z/p^N)[z]/E^J: F^m = d^m T."""
    model = ResidueModel(p, N, eisenstein_power(E, J))
    n = model.rank
    full = Lattice.full(p, N, n)
    pieces = []
    for m in range(window + 1):
        dm = eisenstein_power(E, m)
        pieces.append(Lattice(p, N, n, model.mult_rows(dm)))
    return FilteredModule(full, pieces)


def ideal_power_filtration(p: int, N: int, E, J: int, gens, window: int) -> FilteredModule:
    """m-th power of the ideal generated by gens (polynomials), computed by
    multiplying out all m-fold products of generators."""
    model = ResidueModel(p, N, eisenstein_power(E, J))
    T = model.T
    n = model.rank
    full = Lattice.full(p, N, n)
    gens = [T.reduce(g) for g in gens]
    pieces = []
    prods = [T.one()]
    for m in range(window + 1):
        if m:
            prods = [T.mul(a, g) for a in prods for g in gens]
            # deduplicate
            seen = {}
            for a in prods:
                seen.setdefault(tuple(int(c) for c in a), a)
            prods = list(seen.values())
        rows = []
        for a in prods:
            rows += model.mult_rows(list(a))
        pieces.append(Lattice(p, N, n, rows))
    return FilteredModule(full, pieces)


# ---------------------------------------------------------------------------
# filtered envelope


def filtered_envelope(pres, bounds, weight: int | None = None, window: int | None = None):
    """Envelope with the weight filtration induced by z-adic weights.

    weight(z) = 1, weight(d) = 0, weight(x_0) = weight(r) = w, so
    weight(z^a B_n) = a + n w.  Returns (env, FilteredModule on the window)
    where F^m = image of {z^a B_n : a + n w >= m} (z^a taken in the ideal
    z^a T, so reductions modulo E^J are accounted for).
    """
    from .envelope import build_envelope

    env = build_envelope(pres, bounds)
    if env.trivial:
        w = 0
    elif weight is not None:
        w = weight
    else:
        w = next(i for i, c in enumerate(pres.relation) if int(c))
    window = (env.D * w + env.eJ) if window is None else window
    win = env.window()
    pieces = []
    for m in range(window + 1):
        rows = []
        for n in range(env.D + 1):
            a0 = max(m - n * w, 0)
            zpow = env.T.reduce([0] * a0 + [1])
            if not np.any(zpow):
                continue
            rows += env.z_multiples({env.basis_poly(n).popitem()[0]: zpow})
        sub = Lattice(env.p, env.N, env.dim, rows if rows else None)
        pieces.append(lattice_join(sub, env.relations))
    pieces[0] = win
    return env, FilteredModule(win, pieces), w
