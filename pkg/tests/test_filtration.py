import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from prism_engine._rings import eisenstein_power
from prism_engine.delta_prism import make_breuil_kisin
from prism_engine.envelope import EnvelopeBounds, build_envelope, make_presentation
from prism_engine.filtration import (
    FilteredModule,
    SeriesModel,
    WeightError,
    d_adic_filtration,
    filtered_envelope,
    filtered_koszul,
    ideal_power_filtration,
    koszul_pro_homology,
    scp,
    weighted_filtration,
)
from prism_engine.zmod import Lattice, MalformedInput


def test_single_regular_element():
    rep = filtered_koszul((3, 4, 16), [[-3, 1]], [0], 4)
    assert rep.regular and rep.strict


@pytest.mark.parametrize("n", [1, 2, 3])
def test_breuil_kisin_quotient_is_filtered_koszul(n):
    rep = filtered_koszul((3, 4, 16), [[-3, 1], [0] * n + [1]], [0, n], 4)
    assert rep.regular
    # the quotient O_K / pi^n with its pi-adic filtration: F^m has length n - m
    assert rep.induced_lengths[: n + 1] == list(range(n, -1, -1))


def brute_h1_zz(Z):
    """dim H_1 of the Koszul complex of (z, z) on F_3[z]/z^Z, by enumeration."""
    vecs = list(itertools.product(range(3), repeat=Z))

    def zmul(a):
        return tuple([0] + list(a[:-1]))

    cycles = {(a, b) for a in vecs for b in vecs if all((x + y) % 3 == 0 for x, y in zip(zmul(a), zmul(b)))}
    bounds = {(tuple((-x) % 3 for x in zmul(c)), zmul(c)) for c in vecs}
    return len(cycles) // len(bounds)


def test_z_z_rejected_and_matches_brute_force():
    assert brute_h1_zz(3) > 1
    rep = filtered_koszul((3, 1, 16), [[0, 1], [0, 1]], [1, 1], 4)
    assert not rep.regular
    assert rep.homology[0] > 0


@pytest.mark.parametrize("p", [2, 3, 5])
def test_weight_zero_reduces_to_plain_koszul(p):
    elems = [[p, 1]]
    assert filtered_koszul((p, 4, 16), elems, [0], 4).homology == koszul_pro_homology(SeriesModel(p, 4, 16), elems)


def test_window_guard():
    with pytest.raises(MalformedInput):
        filtered_koszul((3, 2, 8), [[-3, 1]], [0], 4)
    with pytest.raises(WeightError):
        filtered_koszul((3, 2, 16), [[0, 0, 1]], [1], 4)


@pytest.mark.parametrize("p", [2, 3])
def test_scp_of_d_adic_is_d_p_p_adic(p):
    E = [-p, 1]
    F = d_adic_filtration(p, 4, E, 8, 3 * p)
    G = ideal_power_filtration(p, 4, E, 8, [eisenstein_power(E, p), [p]], 3)
    assert scp(F, 3).pieces == G.pieces


def test_scp_of_trivial_filtration_is_p_adic():
    full, zero = Lattice.full(3, 3, 1), Lattice.zero(3, 3, 1)
    S = scp(FilteredModule(full, [full] + [zero] * 6), 2)
    assert [P.length() for P in S.pieces] == [3, 2, 1]


def test_scp_needs_p_times_window():
    full = Lattice.full(3, 3, 1)
    with pytest.raises(MalformedInput):
        scp(FilteredModule(full, [full, full]), 2)


def test_scp_rank_one_brute_force():
    # Z/27 with F^0 = all, F^1 = 3 Z/27, F^2 = 9 Z/27, F^m = 0 beyond
    p, q = 3, 27
    sets = [set(range(q)), {x % q for x in range(0, q, 3)}, {x % q for x in range(0, q, 9)}]
    full = Lattice.full(3, 3, 1)
    pieces = [full, full.scaled(3), full.scaled(9)] + [Lattice.zero(3, 3, 1)] * 4
    S = scp(FilteredModule(full, pieces), 2)

    def F(k):
        return sets[k] if k < 3 else {0}

    for m in range(3):
        acc = {0}
        for t in range(m + 1):
            part = {(p ** (m - t) * x) % q for x in F(p * t)}
            acc = {(a + b) % q for a in acc for b in part}
        assert {x for x in range(q) if (x,) in S.pieces[m]} == acc


@given(st.lists(st.integers(0, 4), min_size=3, max_size=3), st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_scp_functorial_on_inclusions(w1, w2):
    # pointwise larger weights give larger pieces; scp keeps the inclusion
    hi = [max(a, b) for a, b in zip(w1, w2)]
    full = Lattice.full(2, 3, 3)
    F = weighted_filtration(full, w1, 4)
    G = weighted_filtration(full, hi, 4)
    assert all(a.issubset(b) for a, b in zip(F.pieces, G.pieces))
    assert all(a.issubset(b) for a, b in zip(scp(F, 2).pieces, scp(G, 2).pieces))


def test_filtered_envelope_forgets_to_plain_envelope():
    pr = make_breuil_kisin(3, 4, 60, [-3, 1])
    pres = make_presentation(pr, [[0, 0, 1]])
    b = EnvelopeBounds(3, 60, 2, 4, 5)
    env, F, w = filtered_envelope(pres, b)
    plain = build_envelope(pres, b)
    assert w == 2
    assert env.relations == plain.relations and F.lattice == plain.window()
    env0, F0, w0 = filtered_envelope(pres, b, weight=0)
    assert w0 == 0 and F0.piece(0) == plain.window()
