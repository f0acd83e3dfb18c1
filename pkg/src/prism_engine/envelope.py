"""Prismatic envelopes A{r/d} over a Breuil-Kisin prism, as explicit modules.

Setting: A = Z_p[[z]], d = E(z) Eisenstein, Abar = A/d = O_K, R = Abar/(rbar).

For a single relation r with rbar != 0 the envelope Delta is generated as a
delta-A-algebra by x_0 = r/d, and we write x_k = delta^k(x_0).  Every product
of the x_k can be rewritten into "digit monomials"

    B_n = prod_k x_k^{a_k}   with  n = sum_k a_k p^k,  0 <= a_k < p,

using rules x_m^p = rho_m(x_0, ..., x_{m+1}) that hold in Delta.  The rules
come from the free delta-ring: rho_0 from delta(d x_0 - r) = 0, and rho_{m+1}
from delta(x_m^p - rho_m) = 0.  x_k has weight p^k, and rewriting never raises
the weight sum_k a_k p^k.

As an A-module Delta is then presented by generators B_n and relations
r B_n = d * nf(x_0 B_n).  All computations happen in the finite truncation
(Z/p^N)[z]/E^J, so a truncated envelope is a submodule calculus over Z/p^N
with coordinates (n, a) <-> z^a B_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._rings import QuotientRing, SeriesRing, eisenstein_power
from .delta_prism import ConsistencyError, OrientedPrism
from .series import (
    LocalElement,
    PrecisionExhausted,
    TruncSeries,
    invert_phi_d,
    poly_frobenius,
    poly_pow,
    weierstrass_divide,
)
from .zmod import Lattice, MalformedInput, kernel, lattice_join, lattice_meet, ZModMatrix


class PresentationError(ValueError):
    pass


class BudgetError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# presentation


def _strip(c):
    c = [int(x) for x in c]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def _residue_ring(E, p, N):
    return QuotientRing(p, N, list(E))


def residue_length(E, r, p: int, N: int) -> int:
    """Z_p-length of O_K/(rbar) = Z_p[z]/(E, r), computed at p-precision N."""
    T = _residue_ring(E, p, N)
    e = T.D
    rows = []
    cur = T.reduce(r)
    for _ in range(e):
        rows.append(cur)
        cur = T.times_z(cur)
    span = Lattice(p, N, e, rows)
    return e * N - span.length()


@dataclass(frozen=True)
class QrspPresentation:
    prism: OrientedPrism
    relations: tuple
    # relations that survive in Abar (those divisible by d are dropped)
    effective: tuple = field(default=())
    dropped: tuple = field(default=())
    residue_length: int = 0  # Z_p-length of R (0 means R = Abar)
    s: int = 1  # p^s lies in (E, r)

    @property
    def p(self):
        return self.prism.p

    @property
    def E(self):
        return self.prism.eisenstein

    @property
    def e(self):
        return self.prism.e

    @property
    def c(self):
        return len(self.effective)

    @property
    def relation(self):
        return self.effective[0] if self.effective else None


def make_presentation(prism: OrientedPrism, relations, N_check: int = 12) -> QrspPresentation:
    """Validate relations and reduce to an effective presentation.

    Relations divisible by d are dropped (r/d already lies in A).  The rest
    must form a Koszul-regular sequence in Abar = O_K, checked by computing
    Koszul homology at a truncation.
    """
    from .filtration import koszul_regular_in_residue

    p, E, e = prism.p, prism.eisenstein, prism.e
    rels = tuple(_strip(r) for r in relations)
    eff, dropped = [], []
    for r in rels:
        if all(int(c) == 0 for c in r):
            raise PresentationError("zero relation")
        ts = TruncSeries(p, N_check, max(e * (N_check + 2), len(r) + e + 1), r)
        _, rem = weierstrass_divide(ts, E)
        if any(rem):
            eff.append(r)
        else:
            dropped.append(r)
    if eff:
        ok, h1 = koszul_regular_in_residue(E, eff, p)
        if not ok:
            raise PresentationError(f"relations are not Koszul-regular in O_K (H_1 length {h1})")
    if len(eff) > 1:
        # unreachable for a DVR: two nonunits are never regular; kept as a guard
        raise PresentationError("more than one effective relation in a discrete valuation ring")
    rl, s = 0, 1
    if eff:
        rl = residue_length(E, eff[0], p, N_check)
        if rl == 0:
            raise PresentationError("relation is a unit in O_K, so R = 0")
        if rl >= e * N_check:
            raise PresentationError("relation too deep for the residue check precision")
        s = -(-rl // e)
    return QrspPresentation(prism, rels, tuple(eff), tuple(dropped), rl, s)


# ---------------------------------------------------------------------------
# digit polynomials: dict {exponent tuple: coefficient array}


def _padd(q, P, Q, sign=1):
    out = dict(P)
    for k, v in Q.items():
        if k in out:
            out[k] = (out[k] + sign * v) % q
        else:
            out[k] = (sign * v) % q
    return {k: v for k, v in out.items() if np.any(v)}


def _pmul(R, P, Q):
    out = {}
    for k1, v1 in P.items():
        for k2, v2 in Q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            c = R.mul(v1, v2)
            out[k] = (out[k] + c) % R.q if k in out else c
    return {k: v for k, v in out.items() if np.any(v)}


def _pscale(R, P, c):
    out = {k: R.mul(v, c) for k, v in P.items()}
    return {k: v for k, v in out.items() if np.any(v)}


def _ppow(R, P, n, L):
    out = {(0,) * L: R.one()}
    for _ in range(n):
        out = _pmul(R, out, P)
    return out


def _free_phi(S: SeriesRing, P, L):
    """Frobenius of the free delta-ring: x_k -> x_k^p + p x_{k+1}, z -> z^p."""
    p = S.p
    cache = {}
    out = {}
    for mono, c in P.items():
        term = {(0,) * L: S.phi(c)}
        for k, a in enumerate(mono):
            if a:
                if (k, a) not in cache:
                    e1 = [0] * L
                    e1[k] = p
                    e2 = [0] * L
                    e2[k + 1] = 1
                    base = {tuple(e1): S.one(), tuple(e2): S.const(p)}
                    cache[(k, a)] = _ppow(S, base, a, L)
                term = _pmul(S, term, cache[(k, a)])
        out = _padd(S.q, out, term)
    return out


def _free_delta(S: SeriesRing, P, L):
    p = S.p
    diff = _padd(S.q, _free_phi(S, P, L), _ppow(S, P, p, L), -1)
    out = {}
    for k, v in diff.items():
        if any(int(x) % p for x in v):
            raise ConsistencyError("phi(h) - h^p not divisible by p in the free delta-ring")
        out[k] = np.array([int(x) // p for x in v], dtype=object)
    return {k: v for k, v in out.items() if np.any(v)}


class Reducer:
    """Digit normal form with respect to rules x_m^p = rho_m."""

    def __init__(self, R, p: int, L: int, rules: dict):
        self.R, self.p, self.L, self.rules = R, p, L, rules
        self.memo = {}

    def nf_mono(self, s):
        hit = self.memo.get(s)
        if hit is not None:
            return hit
        p = self.p
        m = next((k for k in range(self.L) if s[k] >= p and k in self.rules), None)
        if m is None:
            res = {s: self.R.one()}
        else:
            rest = list(s)
            rest[m] -= p
            res = {}
            for t, c in self.rules[m].items():
                u = tuple(a + b for a, b in zip(rest, t))
                res = _padd(self.R.q, res, _pscale(self.R, self.nf_mono(u), c))
        self.memo[s] = res
        return res

    def nf(self, P):
        out = {}
        for k, v in P.items():
            out = _padd(self.R.q, out, _pscale(self.R, self.nf_mono(k), v))
        return out

    def mul(self, P, Q):
        out = {}
        for k1, v1 in P.items():
            for k2, v2 in Q.items():
                u = tuple(a + b for a, b in zip(k1, k2))
                out = _padd(self.R.q, out, _pscale(self.R, self.nf_mono(u), self.R.mul(v1, v2)))
        return out


def _derive_rules_uncached(p, E, r, N, Z, levels, L):
    S = SeriesRing(p, N, Z)
    d = S.from_poly(E)
    rr = S.from_poly(r)
    e0 = [0] * L
    e0[0] = 1
    f = {tuple(e0): d, (0,) * L: (-rr) % S.q}
    rules = {}
    red = Reducer(S, p, L, rules)
    g = _free_delta(S, f, L)
    for m in range(levels):
        g = red.nf(g)
        key = [0] * L
        key[m] = p
        key = tuple(key)
        if key not in g or int(g[key][0]) % p == 0:
            raise ConsistencyError(f"leading coefficient of x_{m}^p is not a unit")
        alpha = g[key]
        rest = {k: v for k, v in g.items() if k != key}
        for k in rest:
            if k[m] >= p or any(k[j] for j in range(m + 2, L)):
                raise ConsistencyError(f"rule {m} is not in digit normal form")
        rules[m] = _pscale(S, rest, (-S.inv(alpha)) % S.q)
        red.memo.clear()
        if m + 1 < levels:
            h = _padd(S.q, {key: S.one()}, rules[m], -1)
            g = _free_delta(S, h, L)
    return rules


_RULE_CACHE: dict = {}


def derive_rules(p, E, r, N, Z, levels, L):
    """Rules rho_0..rho_{levels-1} over (Z/p^N)[[z]]/z^Z.

    Results at higher precision are reused by reduction (truncation is a ring
    map compatible with everything in the derivation)."""
    key = (p, tuple(E), tuple(r), levels, L)
    hit = _RULE_CACHE.get(key)
    if hit is not None and hit[0] >= N and hit[1] >= Z:
        q = p**N
        return {m: {k: (v[:Z] % q) for k, v in P.items()} for m, P in hit[2].items()}
    rules = _derive_rules_uncached(p, E, r, N, Z, levels, L)
    _RULE_CACHE[key] = (N, Z, rules)
    return rules


def digits(n: int, p: int, L: int) -> tuple:
    out = []
    for _ in range(L):
        out.append(n % p)
        n //= p
    if n:
        raise ValueError("index needs more digits")
    return tuple(out)


def undigits(t, p: int) -> int:
    return sum(a * p**i for i, a in enumerate(t))


def provenance(n: int, p: int, L: int) -> str:
    parts = []
    for k, a in enumerate(digits(n, p, L)):
        if a:
            parts.append(f"(delta^{k} a)^{a}" if a > 1 else f"delta^{k} a")
    return " * ".join(parts) or "1"


# ---------------------------------------------------------------------------
# bounds and the lattice


@dataclass(frozen=True)
class EnvelopeBounds:
    """Truncation data.

    p_digits     M: requested p-adic precision of results
    z_precision  Z: z-adic precision of the series used to derive rules
    delta_depth  K: variables x_0..x_K (so weights below p^(K+1))
    degree       D: certified window, basis B_n with n <= D
    jmax         J: d-adic depth, computations live modulo E^J
    headroom     extra weights in the ambient model (default J + p)
    """

    p_digits: int = 4
    z_precision: int = 60
    delta_depth: int = 3
    degree: int = 6
    jmax: int = 8
    headroom: int | None = None

    def refined(self, dK=1, dD=2, dZ=20) -> "EnvelopeBounds":
        return EnvelopeBounds(
            self.p_digits, self.z_precision + dZ, self.delta_depth + dK, self.degree + dD, self.jmax, self.headroom
        )


class EnvelopeLattice:
    """A truncated envelope: the module V/K over T = (Z/p^N)[z]/E^J.

    V is free over T on B_0..B_W (W = degree + headroom), K the relation
    lattice.  The certified window is the image of B_0..B_D.
    """

    def __init__(self, pres: QrspPresentation, bounds: EnvelopeBounds, N: int | None = None, weight: int | None = None):
        self.pres = pres
        self.bounds = bounds
        p, E = pres.p, pres.E
        self.p, self.E, self.e = p, E, pres.e
        self.J = bounds.jmax
        if self.J < 1:
            raise MalformedInput("jmax must be >= 1")
        self.trivial = pres.c == 0
        self.N = N if N is not None else bounds.p_digits + pres.s * self.J
        self.T = QuotientRing(p, self.N, eisenstein_power(E, self.J))
        self.eJ = self.T.D
        self.d = self.T.reduce(E)
        if self.trivial:
            self.D = 0
            self.W = 0
            self.L = 1
        else:
            h = bounds.headroom if bounds.headroom is not None else self.J + p
            self.D = bounds.degree
            self.W = weight if weight is not None else self.D + h
            self.L = bounds.delta_depth + 1
            if self.W >= p**self.L:
                raise PrecisionExhausted(
                    f"delta-depth {bounds.delta_depth} only reaches weight {p ** self.L - 1} < ambient weight {self.W}"
                )
        self.dim = (self.W + 1) * self.eJ
        self.ledger = {"p_digits_internal": self.N, "jmax": self.J, "ambient_weight": self.W, "window": self.D}
        self._dk = {}
        if self.trivial:
            self.red = Reducer(self.T, p, 1, {})
            self.relations = Lattice.zero(p, self.N, self.dim)
            self.ledger["note"] = "empty effective presentation: envelope is A"
        else:
            self._build_rules()
            self._build_relations()

    # -- construction

    def _build_rules(self):
        p, e, J, N = self.p, self.e, self.J, self.N
        levels = 0
        while p ** (levels + 1) <= self.W:
            levels += 1
        self.levels = levels
        Nder = N + levels + 2
        Zneed = e * (J + N) + 2
        Z = self.bounds.z_precision
        if Z < Zneed:
            raise PrecisionExhausted(f"z-precision {Z} too small: need {Zneed} for (N={N}, J={J})")
        self.ledger.update({"rule_levels": levels, "rule_p_digits": Nder, "rule_z_precision": Z})
        # one spare variable so that phi(x_K) = x_K^p + p x_{K+1} is expressible
        Lfree = self.L + 1
        rules = derive_rules(p, self.E, self.pres.relation, Nder, Z, levels, Lfree)
        rulesT = {}
        for m, P in rules.items():
            Q = {}
            for k, v in P.items():
                if k[-1]:
                    raise ConsistencyError("rule uses a variable beyond the delta-depth")
                c = self.T.reduce(v % self.T.q)
                if np.any(c):
                    Q[k[:-1]] = c
            rulesT[m] = Q
        self.rules = rulesT
        self.red = Reducer(self.T, p, self.L, rulesT)

    def _build_relations(self):
        T = self.T
        r = T.reduce(self.pres.relation)
        x0 = self.mono((1,) + (0,) * (self.L - 1))
        rows = []
        for n in range(self.W):
            Bn = self.basis_poly(n)
            xb = self.red.mul(x0, Bn)
            rel = _padd(T.q, _pscale(T, Bn, r), _pscale(T, xb, self.d), -1)
            rows += self.z_multiples(rel)
        self.relations = Lattice(self.p, self.N, self.dim, rows)

    # -- elements

    def mono(self, k):
        return {tuple(k): self.T.one()}

    def basis_poly(self, n: int):
        return {digits(n, self.p, self.L): self.T.one()}

    def vec(self, P) -> np.ndarray:
        v = np.zeros(self.dim, dtype=object)
        for k, c in P.items():
            n = undigits(k, self.p)
            if n > self.W or any(a >= self.p for a in k):
                raise BudgetError(f"monomial {k} escapes the ambient window W={self.W}")
            v[n * self.eJ : (n + 1) * self.eJ] += c
        return v % self.T.q

    def z_multiples(self, P, count=None):
        out = []
        cur = P
        for _ in range(self.eJ if count is None else count):
            out.append(self.vec(cur))
            cur = {k: self.T.times_z(v) for k, v in cur.items()}
            cur = {k: v for k, v in cur.items() if np.any(v)}
        return out

    def scalar_multiples(self, c, upto: int | None = None):
        """Rows spanning c * V_{<= upto} (default: the whole ambient)."""
        upto = self.W if upto is None else upto
        rows = []
        for n in range(upto + 1):
            rows += self.z_multiples({digits(n, self.p, self.L): c})
        return rows

    def provenance(self, n: int) -> str:
        return provenance(n, self.p, self.L)

    def basis(self):
        return [(n, self.provenance(n)) for n in range(self.D + 1)]

    # -- lattices

    def d_power(self, k: int):
        c = self.T.one()
        for _ in range(k):
            c = self.T.mul(c, self.d)
        return c

    def dk_plus_K(self, k: int) -> Lattice:
        """d^k V + K."""
        if k not in self._dk:
            if k == 0:
                self._dk[k] = Lattice.full(self.p, self.N, self.dim)
            else:
                rows = self.scalar_multiples(self.d_power(k))
                self._dk[k] = lattice_join(Lattice(self.p, self.N, self.dim, rows), self.relations)
        return self._dk[k]

    def window(self, upto: int | None = None) -> Lattice:
        """Image of B_0..B_upto (default: the certified window) in V, plus K."""
        upto = self.D if upto is None else upto
        rows = self.scalar_multiples(self.T.one(), upto)
        return lattice_join(Lattice(self.p, self.N, self.dim, rows), self.relations)

    def window_relations(self) -> Lattice:
        """Relations among the window generators, saturated through the ambient."""
        n = (self.D + 1) * self.eJ
        coords = Lattice(self.p, self.N, self.dim, [np.eye(self.dim, dtype=object)[i] for i in range(n)])
        inside = lattice_meet(self.relations, coords)
        rows = [row[:n] for row in inside.generators.astype(object)]
        return Lattice(self.p, self.N, n, rows if rows else None)

    # -- certificates

    def torsion_deficit(self, c, window: int | None = None, cap: int | None = None) -> int:
        """Smallest t with {v in window : c v in K} inside d^{J-t} V + K."""
        upto = self.D if window is None else window
        base = np.array(self.scalar_multiples(self.T.one(), upto), dtype=object)
        mult = self.scalar_multiples(c, upto)
        rel = [list(map(int, x)) for x in mult] + [list(map(int, x)) for x in self.relations.generators]
        ker = kernel(ZModMatrix(self.p, self.N, rel))
        nb = len(mult)
        tors = [np.dot(np.array(k[:nb], dtype=object), base) % self.T.q for k in ker.generators.astype(object)]
        cap = self.J if cap is None else cap
        t = 0
        while t < cap:
            slack = self.dk_plus_K(self.J - t)
            if all(v in slack for v in tors):
                return t
            t += 1
        return cap

    def closure_defects(self):
        """Products and delta-images of window basis elements that leave the window."""
        defects = []
        p, L = self.p, self.L
        for s in range(self.D + 1):
            for t in range(s, self.D + 1 - s):
                prod = self.red.mul(self.basis_poly(s), self.basis_poly(t))
                bad = [k for k in prod if undigits(k, p) > self.D]
                if bad:
                    defects.append(("product", s, t))
        for n in range(self.D // p + 1):
            dl = self.delta_basis(n)
            if any(undigits(k, p) > self.D for k in dl):
                defects.append(("delta", n))
        return defects

    def delta_basis(self, n: int):
        """delta(B_n) in digit normal form, from delta(x_k) = x_{k+1} and the product rule."""
        p, L, T = self.p, self.L, self.T
        one = {(0,) * L: T.one()}

        def dl_mono(k):
            # delta(x_k^a) by induction on a
            xk = [0] * L
            xk[k] = 1
            x = {tuple(xk): T.one()}
            nxt = [0] * L
            if k + 1 >= L:
                raise BudgetError("delta leaves the delta-depth")
            nxt[k + 1] = 1
            dx = {tuple(nxt): T.one()}
            return x, dx

        val, dval = one, {}
        for k, a in enumerate(digits(n, p, L)):
            for _ in range(a):
                x, dx = dl_mono(k)
                # delta(uv) = u^p dv + v^p du + p du dv
                up = self._pow(val, p)
                vp = self._pow(x, p)
                new_d = _padd(T.q, self.red.mul(up, dx), self.red.mul(vp, dval))
                new_d = _padd(T.q, new_d, _pscale(T, self.red.mul(dval, dx), T.const(p)))
                val, dval = self.red.mul(val, x), new_d
        return dval

    def _pow(self, P, k):
        out = {(0,) * self.L: self.T.one()}
        for _ in range(k):
            out = self.red.mul(out, P)
        return out


def build_envelope(pres: QrspPresentation, bounds: EnvelopeBounds | None = None) -> EnvelopeLattice:
    return EnvelopeLattice(pres, bounds or EnvelopeBounds())


def hodge_tate_filtration(env: EnvelopeLattice, jmax: int | None = None):
    """[window intersected with d^j Delta for j = 0..jmax]."""
    jmax = env.J if jmax is None else jmax
    if jmax > env.J:
        raise PrecisionExhausted("jmax beyond the d-adic depth of the envelope")
    win = env.window()
    return [lattice_meet(win, env.dk_plus_K(j)) for j in range(jmax + 1)]


@dataclass
class EnvelopeCertificate:
    closure_defects: list
    d_deficit: int
    p_deficit: int
    p_deficit_deeper: int
    stable: bool
    certified: bool


def certify_envelope(env: EnvelopeLattice, refine=(1, 2, 20)) -> EnvelopeCertificate:
    """Torsion and stability certificate for a non-trivial envelope.

    d-torsion: {v : d v in K} must lie in d^{J-1}V + K (deficit 1, the
    unavoidable truncation boundary).  p-torsion: elements killed by p in
    Delta/d^J sit at a bounded d-depth below J; genuine p-torsion in Delta would
    make that deficit grow with J.  We certify by equal deficits at J and J+2,
    both smaller than J.  Stability: the saturated window relations agree
    after refining (K, D, Z).
    """
    if env.trivial:
        return EnvelopeCertificate([], 0, 0, 0, True, True)
    defects = env.closure_defects()
    dd = env.torsion_deficit(env.d)
    pd = env.torsion_deficit(env.T.const(env.p))
    b = env.bounds
    deeper_b = EnvelopeBounds(b.p_digits, b.z_precision + 2 * env.e * (env.pres.s + 1) * 2, b.delta_depth, b.degree, b.jmax + 2, b.headroom)
    deeper = EnvelopeLattice(env.pres, deeper_b)
    pd2 = deeper.torsion_deficit(deeper.T.const(env.p))
    dK, dD, dZ = refine
    rb = b.refined(dK, dD, dZ)
    ref = EnvelopeLattice(env.pres, rb, N=env.N)
    # compare saturated relations among B_0..B_D
    ref_small = _restrict_window(ref, env.D)
    stable = ref_small == env.window_relations()
    certified = not defects and dd <= 1 and pd == pd2 and pd < env.J and stable
    return EnvelopeCertificate(defects, dd, pd, pd2, stable, certified)


def _restrict_window(env: EnvelopeLattice, D: int) -> Lattice:
    n = (D + 1) * env.eJ
    coords = Lattice(env.p, env.N, env.dim, [np.eye(env.dim, dtype=object)[i] for i in range(n)])
    inside = lattice_meet(env.relations, coords)
    rows = [row[:n] for row in inside.generators.astype(object)]
    return Lattice(env.p, env.N, n, rows if rows else None)


# ---------------------------------------------------------------------------
# delta on the localization


def delta_local(f: LocalElement) -> LocalElement:
    """delta(n/d^r) = (phi(n) phi(d)^{-r} - n^p / d^{pr}) / p, exact division asserted.

    Output ledger: one p-adic digit less than the input.
    """
    p, E, M = f.p, f.E, f.M_eff
    if M < 2:
        raise PrecisionExhausted("delta needs two p-adic digits")
    Z = f.Z_eff
    num = f.numerator.truncate(M, Z)
    lifted = num.lift()
    phin = TruncSeries(p, M, Z, poly_frobenius(lifted, p, Z))
    if f.pole == 0:
        X = LocalElement(E, phin, 0)
    else:
        inv = invert_phi_d(E, p, M, Z)
        X = LocalElement(E, phin, 0) * inv**f.pole
    Y = f**p
    diff = X - Y
    Mc = diff.M_eff
    P = diff.pole
    Zc = diff.Z_eff
    top = diff.at(Mc, Zc, P)
    if any(int(c) % p for c in top.coeffs):
        raise ConsistencyError("phi(f) - f^p not divisible by p in the localization")
    return LocalElement(E, TruncSeries(p, Mc - 1, Zc, [int(c) // p for c in top.coeffs]), P)
