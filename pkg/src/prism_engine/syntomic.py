"""Truncated syntomic complexes Z/p^M(i) = fib(can - cphi) and their cohomology.

For f in N^{>=i}, the map is f -> f - cphi_i(f) with values in the twist.
Both sides are truncated:

    Q_src = N^{>=i} / (N^{>=j} + p^M N^{>=i})
    Q_tgt = N^{>=0} / (N^{>=j} + p^M N^{>=0})

with j = j_used.  H0 and H1 are the kernel and cokernel, reported as lists
of invariant factors (orders of cyclic summands).
"""
from __future__ import annotations

import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .delta_prism import ConsistencyError
from .envelope import BudgetError, EnvelopeBounds, EnvelopeLattice, QrspPresentation
from .nygaard import DividedFrobenius, build_frobenius_twist, nygaard_filtration
from .series import PrecisionExhausted
from .zmod import Lattice, ZModMatrix, kernel, lattice_join, log_order, quotient_invariants


class TruncationError(ValueError):
    pass


def depth_bound(i: int, p: int) -> int:
    """Smallest j with (p - 1) j > p i."""
    if i < 0:
        raise ValueError("i must be >= 0")
    return (p * i) // (p - 1) + 1


def choose_truncation(i: int, p: int, M: int, jmax: int | None = None) -> int:
    """j_used = M * (smallest j with (p-1) j > p i).

    jmax caps the per-digit bound j, not the product.
    """
    j = depth_bound(i, p)
    if jmax is not None and j > jmax:
        raise TruncationError(f"weight {i} needs d-adic depth {j} > Jmax = {jmax}")
    return M * j


def _budget_ms():
    v = os.environ.get("PRISM_ENGINE_BUDGET_MS")
    return int(v) if v else None


@dataclass
class SyntomicResult:
    p: int
    M: int
    e: int
    eisenstein: list
    relations: list
    i: int
    j_used: int
    h0: list
    h1: list
    euler: int
    len_src: int = 0
    len_tgt: int = 0
    stable: dict = field(default_factory=lambda: {"j": True, "precision": True})
    ledger: dict = field(default_factory=dict)
    runtime_ms: int = 0

    @property
    def certified(self) -> bool:
        return bool(self.stable.get("j")) and bool(self.stable.get("precision"))

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("len_src")
        d.pop("len_tgt")
        return d


@dataclass(frozen=True)
class CellConfig:
    """Internal truncation data for one computation."""

    j_used: int
    J: int  # d-adic depth of the ambient
    N: int  # internal p-digits
    W: int  # ambient weight
    Ww: int  # twist/solve window
    Z: int
    K: int


def cell_config(pres: QrspPresentation, i: int, M: int, j_used: int, Z: int | None = None, dN=0, dW=0, dWw=0, dK=0):
    p, e = pres.p, pres.e
    J = max(j_used, i + M + (j_used - 1) // p)
    if pres.c == 0:
        return CellConfig(j_used, J, M + J + dN, 0, 0, Z or 0, 0)
    N = M + pres.s * J + dN
    Ww = j_used + dWw
    W = 2 * Ww + dW
    Zneed = e * (J + N) + 2
    Z = max(Z or 0, Zneed)
    # x_0..x_K must cover weights <= W, and phi(x_k) = x_k^p + p x_{k+1}
    # must be expressible for every digit position of n <= Ww
    K = 1
    while p ** (K + 1) <= W or p**K <= Ww:
        K += 1
    return CellConfig(j_used, J, N, W, Ww, Z, K + dK)


def build_models(pres: QrspPresentation, M: int, cfg: CellConfig):
    """Ambient envelope and twist for cfg, enlarging the ambient weight
    until the twist generators fit.  Returns (env, twist, cfg)."""
    p = pres.p
    while True:
        bounds = EnvelopeBounds(M, cfg.Z, cfg.K, cfg.W, cfg.J, headroom=0)
        try:
            env = EnvelopeLattice(pres, bounds, N=cfg.N, weight=cfg.W)
            return env, build_frobenius_twist(env, cfg.Ww), cfg
        except (BudgetError, PrecisionExhausted) as exc:
            if isinstance(exc, PrecisionExhausted) and "delta-depth" not in str(exc):
                raise
            W = cfg.W + p
            cfg = CellConfig(cfg.j_used, cfg.J, cfg.N, W, cfg.Ww, cfg.Z, cfg.K + (1 if p ** (cfg.K + 1) <= W else 0))


def _compute(pres: QrspPresentation, i: int, M: int, cfg: CellConfig, deadline=None):
    p = pres.p
    env, twist, cfg = build_models(pres, M, cfg)
    _check_deadline(deadline)
    nyg = nygaard_filtration(twist, env, cfg.j_used)
    q, T = env.T.q, env.T
    L1 = nyg.piece(0)
    Ni = nyg.piece(i)
    NJ = nyg.piece(cfg.j_used)
    pM = p**M
    Rt = lattice_join(NJ, L1.scaled(pM))
    Rs = lattice_join(NJ, Ni.scaled(pM))
    _check_deadline(deadline)
    ww = cfg.Ww
    while True:
        cphi = DividedFrobenius(twist, i, extra=Rt, window=ww)
        gens = [np.array([int(x) for x in g], dtype=object) for g in Ni.generators]
        try:
            images = [(y - cphi(y)) % q for y in gens]
            break
        except ConsistencyError:
            if ww >= twist.window:
                raise
            ww = min(twist.window, ww + 2)
        _check_deadline(deadline)
    _check_deadline(deadline)
    dim = env.dim
    Im = Lattice(p, env.N, dim, images if images else None)
    h1 = quotient_invariants(L1, lattice_join(Im, Rt))
    rel_rows = [list(map(int, r)) for r in images] + [list(map(int, r)) for r in Rt.generators]
    ker = kernel(ZModMatrix(p, env.N, rel_rows))
    s = len(images)
    Gm = np.array(gens, dtype=object)
    U = [np.dot(np.array([int(x) for x in kr[:s]], dtype=object), Gm) % q for kr in ker.generators] if s else []
    Ul = lattice_join(Lattice(p, env.N, dim, U if U else None), Rs)
    h0 = quotient_invariants(Ul, Rs)
    len_src = Ni.length() - Rs.length()
    len_tgt = L1.length() - Rt.length()
    led = {
        "J": cfg.J,
        "N": cfg.N,
        "ambient_weight": env.W,
        "twist_window": twist.window,
        "solve_window": ww,
        "z_precision": cfg.Z,
        "delta_depth": env.L - 1,
        "dim": dim,
    }
    return h0, h1, len_src, len_tgt, led


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetError("PRISM_ENGINE_BUDGET_MS exceeded")


def syntomic(pres: QrspPresentation, i: int, M: int, bounds: EnvelopeBounds | None = None, *, check_stability: bool = True, jmax: int | None = None) -> SyntomicResult:
    t0 = time.monotonic()
    p = pres.p
    rels = [list(r) for r in pres.relations]
    if i < 0:
        return SyntomicResult(p, M, pres.e, list(pres.E), rels, i, 0, [], [], 0, ledger={"note": "negative weight"})
    if M < 1:
        raise ValueError("M must be >= 1")
    budget = _budget_ms()
    deadline = t0 + budget / 1000 if budget else None
    ju = choose_truncation(i, p, M, jmax if jmax is not None else (bounds.jmax if bounds else None))
    Z = bounds.z_precision if bounds else None
    cfg = cell_config(pres, i, M, ju, Z)
    h0, h1, ls, lt, led = _compute(pres, i, M, cfg, deadline)
    euler = log_order(h0, p) - log_order(h1, p)
    stable = {"j": None, "precision": None}
    if check_stability:
        cj = cell_config(pres, i, M, ju + 1, Z)
        a0, a1, *_ = _compute(pres, i, M, cj, deadline)
        stable["j"] = (a0, a1) == (h0, h1)
        cp = cell_config(pres, i, M, ju, (cfg.Z or 0) + 1, dN=1, dW=p, dWw=1, dK=1)
        b0, b1, *_ = _compute(pres, i, M, cp, deadline)
        stable["precision"] = (b0, b1) == (h0, h1)
        led["j_plus_one"] = {"h0": a0, "h1": a1}
        led["refined"] = {"h0": b0, "h1": b1}
    led["depth_j"] = depth_bound(i, p)
    ms = int((time.monotonic() - t0) * 1000)
    return SyntomicResult(p, M, pres.e, list(pres.E), rels, i, ju, h0, h1, euler, ls, lt, stable, led, ms)


def sweep(presentations, i_values, M: int, bounds: EnvelopeBounds | None = None, check_stability: bool = True):
    """Deterministic grid of syntomic results; per-cell errors are recorded."""
    rows = []
    for pres in presentations:
        for i in i_values:
            try:
                res = syntomic(pres, i, M, bounds, check_stability=check_stability)
                rows.append({"status": "ok" if res.certified or not check_stability else "unstable", "result": res})
            except Exception as exc:  # recorded per cell
                rows.append({"status": "error", "error": f"{type(exc).__name__}: {exc}", "i": i, "relations": [list(r) for r in pres.relations]})
    return rows
