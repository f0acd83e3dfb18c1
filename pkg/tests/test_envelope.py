import pytest

from prism_engine.delta_prism import delta_eval, make_breuil_kisin
from prism_engine.envelope import (
    EnvelopeBounds,
    PresentationError,
    build_envelope,
    certify_envelope,
    delta_local,
    derive_rules,
    digits,
    hodge_tate_filtration,
    make_presentation,
    undigits,
)
from prism_engine.series import LocalElement, TruncSeries, delta_of_poly, phi_of_d

P3 = make_breuil_kisin(3, 4, 60, [-3, 1])
SMALL = EnvelopeBounds(3, 60, 2, 4, 5)


@pytest.fixture(scope="module")
def env_z():
    return build_envelope(make_presentation(P3, [[0, 1]]), SMALL)


def test_digits_roundtrip():
    for n in range(81):
        assert undigits(digits(n, 3, 4), 3) == n
    assert digits(5, 3, 3) == (2, 1, 0)


def test_presentation_rules():
    assert make_presentation(P3, []).c == 0
    pres = make_presentation(P3, [[-3, 1]])
    assert pres.c == 0 and pres.dropped == ((-3, 1),)
    assert make_presentation(P3, [[0, 0, 1]]).residue_length == 2
    with pytest.raises(PresentationError):
        make_presentation(P3, [[1, 1]])
    with pytest.raises(PresentationError):
        make_presentation(P3, [[0, 1], [0, 0, 1]])


@pytest.mark.parametrize("rels", [[], [[-3, 1]]])
def test_base_cases_are_A(rels):
    env = build_envelope(make_presentation(P3, rels), SMALL)
    assert env.trivial
    assert env.relations.length() == 0
    assert env.window().length() == env.N * env.dim
    cert = certify_envelope(env)
    assert cert.certified
    ht = hodge_tate_filtration(env, env.J)
    gr = [a.length() - b.length() for a, b in zip(ht, ht[1:])]
    assert len(set(gr)) == 1


@pytest.mark.parametrize("r", [[0, 1], [0, 0, 1]])
def test_rule_rho0_in_the_localization(r):
    """x_0^p = rho_0(x_0, x_1), checked with x_k = delta^k(r/d) in A[1/d]."""
    p, E, N, Z = 3, [-3, 1], 4, 200
    rules = derive_rules(p, E, r, N, Z, 1, 3)
    x0 = LocalElement(E, TruncSeries(p, N, Z, r), 1)
    x1 = delta_local(x0)
    M = x1.M_eff
    rhs = None
    for k, v in rules[0].items():
        term = LocalElement(E, TruncSeries(p, M, Z, [int(c) for c in v]), 0)
        for j, a in enumerate(k):
            if a:
                term = term * [x0, x1][j] ** a
        rhs = term if rhs is None else rhs + term
    assert x0**p == rhs
    assert rhs.ledger()[1] > 100


def test_certificate_r_z(env_z):
    cert = certify_envelope(env_z)
    assert cert.certified and cert.stable
    assert cert.closure_defects == []
    assert cert.d_deficit <= 1
    assert cert.p_deficit == cert.p_deficit_deeper < env_z.J


def test_hodge_tate_shape(env_z):
    ht = hodge_tate_filtration(env_z, 3)
    assert ht[0] == env_z.window()
    for a, b in zip(ht, ht[1:]):
        assert b.issubset(a) and b != a


def test_basis_provenance(env_z):
    names = dict(env_z.basis())
    assert names[0] == "1"
    assert names[1] == "delta^0 a"
    assert names[4] == "delta^0 a * delta^1 a"


def test_delta_local_examples():
    p, E, M, Z = 3, [-3, 1], 3, 40
    d = TruncSeries(p, M, Z, E)
    assert delta_local(LocalElement(E, d, 1)).is_zero()
    a = LocalElement(E, TruncSeries(p, M, Z, [0, 1]), 1)
    da = delta_local(a)
    dE = LocalElement(E, TruncSeries(p, M - 1, Z, delta_of_poly(E, p)), 0)
    a2 = LocalElement(E, TruncSeries(p, M - 1, Z, [0, 1]), 1)
    assert (phi_of_d(E, p, M - 1, Z) * da + dE * a2**p).is_zero()
    f = TruncSeries(p, M, Z, [2, 5, 0, 7])
    assert delta_local(LocalElement(E, f, 0)).numerator == delta_eval(f)
