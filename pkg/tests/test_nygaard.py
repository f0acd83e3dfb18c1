from math import comb

import numpy as np
import pytest

from prism_engine.checks import _scale_vec, _truncation_ambiguity, nygaard_suite
from prism_engine.delta_prism import ConsistencyError, make_breuil_kisin
from prism_engine.envelope import make_presentation
from prism_engine.nygaard import WindowMismatch, can_map, divided_frobenius, nygaard_filtration
from prism_engine.series import LocalElement, TruncSeries, delta_of_poly, phi_of_d
from prism_engine.syntomic import build_models, cell_config

P3 = make_breuil_kisin(3, 4, 60, [-3, 1])
J = 4


def model(rels):
    pres = make_presentation(P3, rels)
    env, tw, _ = build_models(pres, 2, cell_config(pres, 1, 2, J))
    return env, tw, nygaard_filtration(tw, env, J)


@pytest.fixture(scope="module")
def nz():
    return model([[0, 1]])


@pytest.fixture(scope="module")
def trivial():
    pres = make_presentation(P3, [])
    env, tw, _ = build_models(pres, 2, cell_config(pres, 0, 2, J))
    return env, tw, nygaard_filtration(tw, env, env.J)


def unit(env, n=0, a=0):
    v = np.zeros(env.dim, dtype=object)
    v[n * env.eJ + a] = 1
    return v


def test_trivial_twist_is_A_and_nygaard_is_d_adic(trivial):
    env, tw, nyg = trivial
    assert tw.lattice == env.window()
    for j in range(nyg.jmax + 1):
        assert nyg.piece(j) == env.dk_plus_K(j)


def test_chain_shape(nz):
    env, tw, nyg = nz
    assert nyg.piece(0) == tw.lattice
    assert nyg.check_invariants()
    lens = nyg.lengths()
    assert all(a < b for a, b in zip(lens, lens[1:]))


def test_twist_is_closed_under_products(nz):
    env, tw, _ = nz
    assert tw.closure_defects() == []


@pytest.mark.parametrize("i", [0, 1, 2])
def test_divided_frobenius_of_d_power_is_one(nz, i):
    env, tw, nyg = nz
    f = _scale_vec(env, unit(env), env.d_power(i))
    out = divided_frobenius(nyg, f, i)
    assert (out - unit(env)) % env.T.q in _truncation_ambiguity(env, tw, J - i)


def test_divided_frobenius_of_z_on_trivial(trivial):
    env, tw, nyg = trivial
    out = divided_frobenius(nyg, unit(env, 0, 1), 0)
    assert (out - unit(env, 0, 3)) % env.T.q in env.relations


def test_divided_frobenius_of_r_is_phi_of_a(nz):
    # r = d * a, so cphi_1(r) = phi(a) = Phi_1
    env, tw, nyg = nz
    f = unit(env, 0, 1)
    out = divided_frobenius(nyg, f, 1)
    assert out in tw.lattice
    assert (out - env.vec(tw.Phi[1])) % env.T.q in _truncation_ambiguity(env, tw, J - 1)


@pytest.mark.parametrize("i", [0, 1, 2])
def test_divided_frobenius_lands_in_twist_on_every_generator(nz, i):
    env, tw, nyg = nz
    for g in nyg.piece(i).generators:
        assert divided_frobenius(nyg, np.array([int(x) for x in g], dtype=object), i) in tw.lattice


def test_divided_frobenius_rejects_outside_element(nz):
    env, tw, nyg = nz
    with pytest.raises(ConsistencyError):
        divided_frobenius(nyg, unit(env), 1)


def test_can_map_is_identity(nz):
    env, tw, nyg = nz
    for g in list(nyg.piece(1).generators)[:3]:
        assert list(can_map(nyg, g, 1)) == [int(x) for x in g]


def test_multiplicativity_suite():
    t = nygaard_suite(trials=3, seed=11)
    assert t.ok, t.failures


@pytest.mark.parametrize("m", [1, 2, 3])
def test_phi_d_power_decomposes_into_scp_pieces(m):
    p, E, M, Z = 3, [-3, 1], 4, 30
    d = TruncSeries(p, M, Z, E)
    pdd = TruncSeries(p, M, Z, delta_of_poly(E, p)) * p
    lhs = phi_of_d(E, p, M, Z) ** m
    rhs = sum((d ** (p * t) * pdd ** (m - t) * comb(m, t) for t in range(m + 1)), TruncSeries.zero(p, M, Z))
    assert lhs == LocalElement(E, rhs, 0)


def test_jmax_guard(nz):
    env, tw, nyg = nz
    with pytest.raises(WindowMismatch):
        nyg.piece(J + 1)
    with pytest.raises(WindowMismatch):
        nygaard_filtration(tw, env, env.J + 1)
