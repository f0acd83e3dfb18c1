"""Randomized property suites, shared by `prism-engine check` and the tests.

Every suite takes (trials, seed) and returns a Tally.  Suites are
deterministic under a fixed seed.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .delta_prism import delta_eval, frobenius, is_distinguished, make_breuil_kisin
from .series import OrientationError, TruncSeries


@dataclass
class Tally:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list = field(default_factory=list)

    def check(self, ok, label):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 20:
                self.failures.append(label)

    @property
    def ok(self):
        return self.failed == 0


def _rand_series(rng, p, M, Z):
    q = p**M
    return TruncSeries(p, M, Z, [rng.randrange(q) for _ in range(Z)])


DELTA_CONFIGS = ((2, 3, 24), (3, 3, 30), (5, 2, 20))


def delta_suite(trials=200, seed=0, configs=DELTA_CONFIGS) -> Tally:
    """Sum and product rules for delta, and phi a ring map, on random pairs."""
    rng = random.Random(seed)
    t = Tally("delta")
    for p, M, Z in configs:
        for k in range(trials):
            x, y = _rand_series(rng, p, M, Z), _rand_series(rng, p, M, Z)
            dx, dy = delta_eval(x), delta_eval(y)
            xl, yl = x.truncate(M - 1), y.truncate(M - 1)
            # delta(x + y) = delta(x) + delta(y) - sum_{0<i<p} C(p,i)/p x^i y^(p-i)
            corr = TruncSeries.zero(p, M - 1, Z)
            for i in range(1, p):
                corr = corr + (xl**i * yl ** (p - i)) * (comb(p, i) // p)
            t.check(delta_eval(x + y) == dx + dy - corr, (p, M, Z, k, "sum"))
            # delta(xy) = x^p delta(y) + y^p delta(x) + p delta(x) delta(y)
            rhs = xl**p * dy + yl**p * dx + dx * dy * p
            t.check(delta_eval(x * y) == rhs, (p, M, Z, k, "product"))
            t.check(frobenius(x * y) == frobenius(x) * frobenius(y), (p, M, Z, k, "phi mult"))
            t.check(frobenius(x + y) == frobenius(x) + frobenius(y), (p, M, Z, k, "phi add"))
            # phi(x) = x^p + p delta(x)
            t.check(frobenius(x).truncate(M - 1) == xl**p + dx * p, (p, M, Z, k, "phi vs delta"))
    return t


def witt_suite(trials=100, seed=0) -> Tally:
    from .witt import L_MAX, frobenius_W, ghost, verschiebung, witt_add, witt_mul, WittVector

    rng = random.Random(seed)
    t = Tally("witt")
    # exhaustive over W_2(Z/4)
    p, M, L = 2, 2, 2
    q = p**M
    vecs = [WittVector(p, M, None, c) for c in itertools.product(range(q), repeat=L)]
    for x, y in itertools.product(vecs, repeat=2):
        gx, gy = ghost(x), ghost(y)
        t.check(ghost(witt_add(x, y)) == [(a + b) % q for a, b in zip(gx, gy)], ("add", x.components, y.components))
        t.check(ghost(witt_mul(x, y)) == [(a * b) % q for a, b in zip(gx, gy)], ("mul", x.components, y.components))
    # random at p = 3, M = 4, L <= 4
    p, M = 3, 4
    q = p**M
    for k in range(trials):
        L = rng.randint(1, 4)
        x = WittVector(p, M, None, [rng.randrange(q) for _ in range(L)])
        y = WittVector(p, M, None, [rng.randrange(q) for _ in range(L)])
        gx, gy = ghost(x), ghost(y)
        t.check(ghost(witt_add(x, y)) == [(a + b) % q for a, b in zip(gx, gy)], ("add3", k))
        t.check(ghost(witt_mul(x, y)) == [(a * b) % q for a, b in zip(gx, gy)], ("mul3", k))
        if L + 1 <= L_MAX:
            # F(V(x)) = p x
            fv = frobenius_W(verschiebung(x))
            px = x
            for _ in range(p - 1):
                px = witt_add(px, x)
            t.check(fv == px, ("FV", k))
    return t


def prism_suite(trials=50, seed=0) -> Tally:
    from .witt import CartierWitt, WittVector, cartier_witt_check, teichmuller, verschiebung

    rng = random.Random(seed)
    t = Tally("prism")
    for p in (2, 3, 5):
        t.check(is_distinguished(TruncSeries(p, 3, 12, [-p, 1])), ("z - p", p))
        t.check(not is_distinguished(TruncSeries(p, 3, 12, [0, 1])), ("z", p))
    for k in range(trials):
        p = rng.choice([2, 3, 5])
        e = rng.randint(1, 3)
        c0 = p * rng.choice([u for u in range(1, p * p) if u % p])
        E = [c0] + [p * rng.randrange(p) for _ in range(e - 1)] + [1]
        try:
            make_breuil_kisin(p, 3, 4 * e + 4, E)
            t.check(True, ("eisenstein", E))
        except OrientationError:
            t.check(False, ("eisenstein rejected", E))
        bad = list(E)
        bad[0] = p * p * rng.randint(0, 2)
        try:
            make_breuil_kisin(p, 3, 4 * e + 4, bad)
            t.check(False, ("non-eisenstein accepted", bad))
        except OrientationError:
            t.check(True, ("rejected", bad))
    one = WittVector(3, 2, None, [1])
    t.check(cartier_witt_check(verschiebung(one)) == CartierWitt.OK, "V(1)")
    t.check(cartier_witt_check(teichmuller(1, 3, 2, 2)) == CartierWitt.FAIL_NILPOTENCE, "[1]")
    return t


def envelope_suite(trials=3, seed=0) -> Tally:
    from .envelope import EnvelopeBounds, build_envelope, certify_envelope, delta_local, make_presentation
    from .series import LocalElement, delta_of_poly, phi_of_d

    rng = random.Random(seed)
    t = Tally("envelope")
    p = 3
    pr = make_breuil_kisin(p, 4, 60, [-p, 1])
    choices = [[0, 1], [0, 0, 1], [3, 1], [0, 1, 1]]
    for k in range(trials):
        r = choices[(rng.randrange(len(choices)) + k) % len(choices)]
        pres = make_presentation(pr, [r])
        env = build_envelope(pres, EnvelopeBounds(3, 60, 2, 4, 5))
        cert = certify_envelope(env)
        t.check(cert.certified, ("certificate", r, cert))
    # delta on the localization: phi(E) delta(a) + delta(E) a^p = 0 for a = z/E
    M, Z = 3, 40
    z = TruncSeries(p, M, Z, [0, 1])
    a = LocalElement([-p, 1], z, 1)
    da = delta_local(a)
    phiE = phi_of_d([-p, 1], p, M - 1, Z)
    dE = LocalElement([-p, 1], TruncSeries(p, M - 1, Z, delta_of_poly([-p, 1], p)), 0)
    a2 = LocalElement([-p, 1], z.truncate(M - 1, Z), 1)
    t.check((phiE * da + dE * a2**p).is_zero(), "delta_local identity")
    for k in range(trials):
        f = _rand_series(rng, p, M, Z)
        t.check(delta_local(LocalElement([-p, 1], f, 0)).numerator == delta_eval(f), ("pole 0", k))
    return t


def nygaard_suite(trials=2, seed=0) -> Tally:
    from .envelope import make_presentation
    from .nygaard import DividedFrobenius, nygaard_filtration
    from .syntomic import build_models, cell_config

    rng = random.Random(seed)
    t = Tally("nygaard")
    p = 3
    pr = make_breuil_kisin(p, 4, 60, [-p, 1])
    for r in ([0, 1], [0, 0, 1]):
        pres = make_presentation(pr, [r])
        J = 4
        env, tw, _ = build_models(pres, 2, cell_config(pres, 1, 2, J))
        nyg = nygaard_filtration(tw, env, J)
        t.check(nyg.check_invariants(), ("chain", r))
        lens = nyg.lengths()
        t.check(all(a < b for a, b in zip(lens, lens[1:])), ("strict", r, lens))
        # cphi_{i+1}(d f) = cphi_i(f).  Multiplying by d^{i+1} in the E^J
        # truncation loses E^{J-1-i} multiples, so compare modulo their image.
        for i in range(2):
            amb = _truncation_ambiguity(env, tw, J - 1 - i)
            c0 = DividedFrobenius(tw, i)
            c1 = DividedFrobenius(tw, i + 1)
            gens = list(nyg.piece(i).generators)
            for _ in range(trials):
                g = np.array([int(x) for x in gens[rng.randrange(len(gens))]], dtype=object)
                dg = _times_d(env, g)
                if dg not in nyg.piece(i + 1):
                    t.check(False, ("d f not in N^{i+1}", r, i))
                    continue
                diff = (c1(dg) - c0(g)) % env.T.q
                t.check(diff in amb, ("multiplicativity", r, i))
    return t


def _times_d(env, v):
    return _scale_vec(env, v, env.d)


def _truncation_ambiguity(env, tw, k):
    """K + phi(d)^k * phi(window span)."""
    from .zmod import Lattice, lattice_join

    T, p = env.T, env.p
    phid = T.reduce(_phi_poly(env))
    c = T.one()
    for _ in range(k):
        c = T.mul(c, phid)
    rows = [_scale_vec(env, np.array(v, dtype=object), c) for v in tw.phi_rows(tw.window)]
    return lattice_join(Lattice(p, env.N, env.dim, rows), env.relations)


def _phi_poly(env):
    """E(z^p) as a coefficient list."""
    out = [0] * (env.p * (len(env.pres.E) - 1) + 1)
    for k, a in enumerate(env.pres.E):
        out[env.p * k] = int(a)
    return out


def _scale_vec(env, v, c):
    out = np.zeros(env.dim, dtype=object)
    for n in range(env.W + 1):
        blk = v[n * env.eJ : (n + 1) * env.eJ]
        if np.any(blk):
            out[n * env.eJ : (n + 1) * env.eJ] = env.T.mul(blk, c)
    return out


def filtration_suite(trials=3, seed=0) -> Tally:
    from ._rings import eisenstein_power
    from .filtration import (
        FilteredModule,
        d_adic_filtration,
        filtered_koszul,
        ideal_power_filtration,
        koszul_pro_homology,
        scp,
        SeriesModel,
    )
    from .zmod import Lattice

    rng = random.Random(seed)
    t = Tally("filtration")
    for n in (1, 2, 3):
        rep = filtered_koszul((3, 4, 16), [[-3, 1], [0] * n + [1]], [0, n], 4)
        t.check(rep.regular, ("(E, z^n)", n))
        t.check(rep.induced_lengths[: n + 1] == list(range(n, -1, -1)), ("induced", n, rep.induced_lengths))
    rep = filtered_koszul((3, 1, 16), [[0, 1], [0, 1]], [1, 1], 4)
    t.check(not rep.regular and rep.homology[0] > 0, "(z, z)")
    for k in range(trials):
        p = rng.choice([2, 3])
        E = [-p, 1]
        F = d_adic_filtration(p, 4, E, 8, 3 * p)
        G = ideal_power_filtration(p, 4, E, 8, [eisenstein_power(E, p), [p]], 3)
        t.check(scp(F, 3).pieces == G.pieces, ("scp", p))
        # weight-0 filtered Koszul reduces to plain Koszul
        u = rng.randrange(1, p)
        elems = [[p * u, 1]]
        plain = koszul_pro_homology(SeriesModel(p, 4, 16), elems)
        rep = filtered_koszul((p, 4, 16), elems, [0], 4)
        t.check(plain == rep.homology, ("weights 0", p))
    # trivial filtration -> p-adic filtration
    full = Lattice.full(3, 3, 1)
    zero = Lattice.zero(3, 3, 1)
    triv = FilteredModule(full, [full] + [zero] * 6)
    S = scp(triv, 2)
    t.check([P.length() for P in S.pieces] == [3, 2, 1], "trivial -> p-adic")
    return t


SUITES = {
    "witt": witt_suite,
    "delta": delta_suite,
    "prism": prism_suite,
    "envelope": envelope_suite,
    "nygaard": nygaard_suite,
    "filtration": filtration_suite,
}
