import itertools
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prism_engine.zmod import (
    ContainmentError,
    Lattice,
    MalformedInput,
    ZMod,
    ZModMatrix,
    contains,
    howell_form,
    kernel,
    lattice_join,
    lattice_meet,
    log_order,
    quotient_invariants,
    solve,
)


def span(rows, p, k, n):
    """Every vector in the Z/p^k-span, by enumeration."""
    q = p**k
    S = {tuple([0] * n)}
    for r in rows:
        S = {tuple((a + c * b) % q for a, b in zip(s, r)) for s in S for c in range(q)}
    return S


def all_vectors(q, n):
    return itertools.product(range(q), repeat=n)


def test_zmod_scalars():
    a = ZMod(3, 2, 4)
    assert (a * a.inverse()).residue == 1
    assert ZMod(3, 2, 6).valuation() == 1
    with pytest.raises(ZeroDivisionError):
        ZMod(3, 2, 3).inverse()
    with pytest.raises(MalformedInput):
        ZMod(4, 2, 1)


def test_howell_identity_and_canonical_examples():
    I = ZModMatrix.identity(3, 2, 3)
    assert howell_form(I) == I
    assert howell_form(ZModMatrix(3, 2, [[3]])).tolist() == [[3]]


def test_howell_random_3x3_over_z9_exhaustive():
    rng = random.Random(0)
    rows = [[rng.randrange(9) for _ in range(3)] for _ in range(3)]
    H = howell_form(ZModMatrix(3, 2, rows)).tolist()
    L = Lattice(3, 2, 3, rows)
    S = span(rows, 3, 2, 3)
    assert span(H, 3, 2, 3) == S
    for v in all_vectors(9, 3):
        assert (v in L) == (v in S)


@given(st.sampled_from([(3, 2), (2, 3), (2, 2)]), st.data())
def test_howell_is_canonical(pk, data):
    p, k = pk
    q, n = p**k, 3
    rows = data.draw(st.lists(st.lists(st.integers(0, q - 1), min_size=n, max_size=n), min_size=1, max_size=4))
    H = howell_form(ZModMatrix(p, k, rows))
    assert howell_form(H) == H
    S = span(rows, p, k, n)
    other = data.draw(st.lists(st.sampled_from(sorted(S)), min_size=1, max_size=6))
    if span(other, p, k, n) == S:
        assert howell_form(ZModMatrix(p, k, [list(v) for v in other])) == H


def test_kernel_examples():
    K = kernel(ZModMatrix(5, 2, [[0, 0], [0, 0]]))
    assert K == Lattice.full(5, 2, 2)
    K = kernel(ZModMatrix(3, 2, [[3]]))
    assert K.length() == 1 and (3,) in K and (1,) not in K


def test_kernel_random_4x3_over_z8_exhaustive():
    rng = random.Random(3)
    m = [[rng.randrange(8) for _ in range(3)] for _ in range(4)]
    K = kernel(ZModMatrix(2, 3, m))
    for v in all_vectors(8, 4):
        in_ker = all(sum(v[i] * m[i][j] for i in range(4)) % 8 == 0 for j in range(3))
        assert contains(K, v) == in_ker


@given(st.sampled_from([(2, 2), (3, 1), (2, 3)]), st.data())
def test_row_space_length_matches_kernel(pk, data):
    p, k = pk
    q = p**k
    n = data.draw(st.integers(1, 3))
    m = data.draw(st.lists(st.lists(st.integers(0, q - 1), min_size=2, max_size=2), min_size=n, max_size=n))
    K = kernel(ZModMatrix(p, k, m))
    inv = quotient_invariants(Lattice.full(p, k, n), K)
    image = span([[m[i][j] for j in range(2)] for i in range(n)], p, k, 2)
    assert p ** log_order(inv, p) == len(image)


def test_meet_join_examples():
    L = Lattice(3, 2, 2, [[1, 3], [0, 3]])
    assert lattice_meet(L, Lattice.full(3, 2, 2)) == L
    full1 = Lattice.full(3, 2, 1)
    assert quotient_invariants(full1, full1.scaled(3)) == [3]
    with pytest.raises(ContainmentError):
        quotient_invariants(full1.scaled(3), full1)


def test_meet_join_random_over_z9_exhaustive():
    rng = random.Random(5)
    for _ in range(4):
        A = [[rng.randrange(9) for _ in range(3)] for _ in range(2)]
        B = [[rng.randrange(9) for _ in range(3)] for _ in range(2)]
        SA, SB = span(A, 3, 2, 3), span(B, 3, 2, 3)
        LA, LB = Lattice(3, 2, 3, A), Lattice(3, 2, 3, B)
        assert span(lattice_meet(LA, LB).generators.tolist(), 3, 2, 3) == SA & SB
        assert span(lattice_join(LA, LB).generators.tolist(), 3, 2, 3) == span(A + B, 3, 2, 3)


lattices = st.lists(st.lists(st.integers(0, 7), min_size=2, max_size=2), min_size=0, max_size=3).map(
    lambda rows: Lattice(2, 3, 2, rows or None)
)


@given(lattices, lattices, lattices)
def test_lattice_axioms(a, b, c):
    assert lattice_meet(a, b) == lattice_meet(b, a)
    assert lattice_join(a, b) == lattice_join(b, a)
    assert lattice_meet(a, a) == a and lattice_join(a, a) == a
    assert lattice_meet(a, lattice_join(a, b)) == a
    assert lattice_join(a, lattice_meet(a, b)) == a
    assert lattice_meet(lattice_meet(a, b), c) == lattice_meet(a, lattice_meet(b, c))


@given(lattices, lattices)
def test_invariants_count_quotient(a, b):
    small = lattice_meet(a, b)
    inv = quotient_invariants(a, small)
    assert log_order(inv, 2) == a.length() - small.length()
    # brute force: |a/small| and the number of elements of order dividing p
    Sa = span(a.generators.tolist(), 2, 3, 2)
    Ss = span(small.generators.tolist(), 2, 3, 2)
    assert len(Sa) // len(Ss) == 2 ** log_order(inv, 2)
    killed = sum(1 for x in Sa if tuple((2 * np.array(x)) % 8) in Ss) // len(Ss)
    assert killed == 2 ** len(inv)


def test_solve_recovers_combination():
    rng = random.Random(2)
    G = [[rng.randrange(27) for _ in range(4)] for _ in range(3)]
    c = [rng.randrange(27) for _ in range(3)]
    t = [sum(c[i] * G[i][j] for i in range(3)) % 27 for j in range(4)]
    x = solve(G, t, 3, 3)
    assert x is not None
    assert [sum(int(x[i]) * G[i][j] for i in range(3)) % 27 for j in range(4)] == t


def test_wide_modulus_exact():
    # q^2 overflows int64: products must still be exact
    p, k = 3, 38
    q = p**k
    rng = random.Random(9)
    A = [[rng.randrange(q) for _ in range(3)] for _ in range(3)]
    L = Lattice(p, k, 3, A)
    for _ in range(10):
        c = [rng.randrange(q) for _ in range(3)]
        v = [sum(c[i] * A[i][j] for i in range(3)) % q for j in range(3)]
        assert v in L
