"""Frobenius twist, Nygaard filtration and the divided Frobenius.

Inside the envelope model V/K the twist is the sub-A-module spanned by

    Phi_n = phi(B_n) = prod_k (x_k^p + p x_{k+1})^{a_k}   (digit normal form),

i.e. monomials in phi(x_k) = delta^k(b) with b = phi(r)/phi(d).  Since phi
does not preserve the ideal E^J, phi on T is only defined up to phi(d)^J
multiples; all maps below land in quotients where this ambiguity dies.
"""
from __future__ import annotations

import numpy as np

from .delta_prism import ConsistencyError
from .envelope import EnvelopeLattice, _padd, digits, undigits
from .zmod import Lattice, SpanSolver, lattice_join, lattice_meet


class WindowMismatch(ValueError):
    pass


class FrobTwistLattice:
    def __init__(self, env: EnvelopeLattice, window: int):
        self.env = env
        p, T = env.p, env.T
        # Phi_n has weight <= p n, but its top-weight terms carry powers of d
        # and die modulo E^J; anything that survives beyond W raises BudgetError
        if window > env.W and not env.trivial:
            raise WindowMismatch(f"twist window {window} beyond ambient weight {env.W}")
        self.window = 0 if env.trivial else window
        L = env.L
        phix = []
        for m in range(L - 1):
            e1 = [0] * L
            e1[m] = p
            e2 = [0] * L
            e2[m + 1] = 1
            phix.append(env.red.nf({tuple(e1): T.one(), tuple(e2): T.const(p)}))
        if not env.trivial and p ** (L - 1) <= self.window:
            raise WindowMismatch(f"delta-depth {L - 1} too small for twist window {self.window}")
        self.Phi = []
        for n in range(self.window + 1):
            cur = {(0,) * L: T.one()}
            for m, a in enumerate(digits(n, p, L)):
                for _ in range(a):
                    cur = env.red.mul(cur, phix[m])
            self.Phi.append(cur)
        zp = T.reduce([0] * p + [1])
        self._zp = zp
        rows = []
        for P in self.Phi:
            rows += env.z_multiples(P)
        self.lattice = lattice_join(Lattice(p, env.N, env.dim, rows), env.relations)

    def provenance(self, n: int) -> str:
        parts = []
        for k, a in enumerate(digits(n, self.env.p, self.env.L)):
            if a:
                parts.append(f"(delta^{k} b)^{a}" if a > 1 else f"delta^{k} b")
        return " * ".join(parts) or "1"

    def basis(self):
        return [(n, self.provenance(n)) for n in range(self.window + 1)]

    def phi_rows(self, upto: int):
        """Vectors of phi(z^a B_n) = z^{pa} Phi_n for n <= upto, a < eJ."""
        env, T = self.env, self.env.T
        out = []
        for n in range(upto + 1):
            cur = self.Phi[n]
            for _ in range(env.eJ):
                out.append(env.vec(cur))
                cur = {k: T.mul(v, self._zp) for k, v in cur.items()}
                cur = {k: v for k, v in cur.items() if np.any(v)}
        return out

    def closure_defects(self):
        """Products Phi_s Phi_t within the window must stay in the span."""
        env = self.env
        bad = []
        for s in range(self.window + 1):
            for t in range(s, self.window + 1 - s):
                prod = env.red.mul(self.Phi[s], self.Phi[t])
                if env.vec(prod) not in self.lattice:
                    bad.append((s, t))
        return bad


def build_frobenius_twist(env: EnvelopeLattice, window: int | None = None) -> FrobTwistLattice:
    if window is None:
        window = env.W // 2
    return FrobTwistLattice(env, window)


class NygaardFiltration:
    """N^{>=j} = twist meet (d^j V + K), computed on demand and cached."""

    def __init__(self, twist: FrobTwistLattice, env: EnvelopeLattice, jmax: int):
        self.twist, self.env, self.jmax = twist, env, jmax
        self._cache = {0: twist.lattice}
        self._cphi = {}

    def piece(self, j: int) -> Lattice:
        j = max(j, 0)
        if j > self.jmax:
            raise WindowMismatch(f"N^>={j} beyond jmax {self.jmax}")
        if j not in self._cache:
            self._cache[j] = lattice_meet(self.twist.lattice, self.env.dk_plus_K(j))
        return self._cache[j]

    @property
    def chain(self):
        return [self.piece(j) for j in range(self.jmax + 1)]

    def lengths(self):
        """length(N^0 / N^j) for j = 0..jmax."""
        L0 = self.piece(0).length()
        return [L0 - c.length() for c in self.chain]

    def check_invariants(self):
        """N^0 = twist, decreasing chain, d^j twist inside N^{>=j}."""
        env, L1 = self.env, self.twist.lattice
        chain = self.chain
        ok = chain[0] == L1
        for j in range(1, len(chain)):
            ok &= chain[j].issubset(chain[j - 1])
            dj = _scale_by(env, L1, env.d_power(j))
            ok &= lattice_join(dj, env.relations).issubset(chain[j])
        return bool(ok)


def _scale_by(env, lat: Lattice, c):
    """c * lat for c in T, computed on generators."""
    T = env.T
    rows = []
    for g in lat.generators:
        v = np.array([int(x) for x in g], dtype=object)
        out = np.zeros(env.dim, dtype=object)
        for n in range(env.W + 1):
            blk = v[n * env.eJ : (n + 1) * env.eJ]
            if np.any(blk):
                out[n * env.eJ : (n + 1) * env.eJ] = T.mul(blk, c)
        rows.append(out)
    return Lattice(env.p, env.N, env.dim, rows if rows else None)


def nygaard_filtration(twist: FrobTwistLattice, env: EnvelopeLattice, jmax: int) -> NygaardFiltration:
    if twist.env is not env:
        raise WindowMismatch("twist and envelope come from different ambient models")
    if jmax > env.J:
        raise WindowMismatch(f"jmax {jmax} exceeds the d-adic depth {env.J}")
    return NygaardFiltration(twist, env, jmax)


class DividedFrobenius:
    """cphi_i(f) = phi(f) / phi(d)^i for f in N^{>=i}, with the orientation
    trivialization d -> 1 of the Breuil-Kisin twist.

    f is written as d^i w + k (k in K plus an optional ambiguity lattice) with
    w supported on B_0..B_window; then cphi_i(f) = phi(w).
    """

    def __init__(self, twist: FrobTwistLattice, i: int, extra: Lattice | None = None, window: int | None = None):
        env = twist.env
        self.twist, self.env, self.i = twist, env, i
        self.window = twist.window if window is None else window
        if self.window > twist.window:
            raise WindowMismatch("solve window beyond the twist window")
        di = env.d_power(i)
        wg = []
        for n in range(self.window + 1):
            wg += env.z_multiples({digits(n, env.p, env.L): di})
        amb = env.relations if extra is None else lattice_join(extra, env.relations)
        self.nw = len(wg)
        G = np.array(wg + [np.array([int(x) for x in g], dtype=object) for g in amb.generators], dtype=object)
        self.solver = SpanSolver(G, env.p, env.N, env.dim)
        self.phiw = np.array(twist.phi_rows(self.window), dtype=object)

    def __call__(self, f):
        c = self.solver.solve(np.array([int(x) for x in f], dtype=object))
        if c is None:
            raise ConsistencyError(f"no divided preimage for an element of N^>={self.i} (window {self.window})")
        w = np.array(c[: self.nw], dtype=object)
        return np.dot(w, self.phiw) % self.env.T.q


def divided_frobenius(nyg: NygaardFiltration, f, i: int, window: int | None = None):
    if i < 0:
        raise ValueError("i must be >= 0")
    if f not in nyg.piece(i):
        raise ConsistencyError(f"element is not in N^>={i}")
    key = (i, window)
    cphi = nyg._cphi.get(key)
    if cphi is None:
        cphi = nyg._cphi[key] = DividedFrobenius(nyg.twist, i, window=window)
    out = cphi(f)
    if out not in nyg.twist.lattice:
        raise ConsistencyError("divided Frobenius left the twist lattice")
    return out


def can_map(nyg: NygaardFiltration, f, i: int):
    if f not in nyg.piece(i):
        raise ConsistencyError(f"element is not in N^>={i}")
    return np.array([int(x) for x in f], dtype=object)
