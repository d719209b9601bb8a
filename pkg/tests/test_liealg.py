import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epschar import fp, liealg
from epschar.liealg import (NotRegularError, bracket_form, centralizer, nilradical, perp, pm0_decompose,
                            root_components, solve_bracket, torus, whole, xi_map, xi_y)

P = 5
mats = st.lists(st.integers(0, P - 1), min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))


def test_bracket_form_example():
    E12, E21 = liealg.unit(2, 0, 1), liealg.unit(2, 1, 0)
    br, pair = bracket_form(E12, E21, 3)
    assert np.array_equal(br, np.diag([1, 2]))
    assert pair == 1


@given(mats, mats, mats)
def test_trace_form_invariant(X, Y, Z):
    lhs = fp.trace_form(fp.bracket(X, Y, P), Z, P) + fp.trace_form(Y, fp.bracket(X, Z, P), P)
    assert lhs % P == 0


def test_gram_is_permutation():
    G = liealg.gram_matrix(liealg.basis(3), 7)
    assert np.array_equal(G @ G.T, np.eye(9))


@pytest.mark.parametrize("n", [2, 3])
def test_perp(n):
    p = 5
    assert perp(nilradical(n, p)) == liealg.borel(n, p)
    off = liealg.Subspace.span([liealg.unit(n, i, j) for i in range(n) for j in range(n) if i != j], n, p)
    assert perp(torus(n, p)) == off
    assert perp(whole(n, p)).dim == 0
    assert perp(perp(liealg.borel(n, p))) == liealg.borel(n, p)


def test_centralizer_diagonal():
    tR, x = centralizer(np.diag([1, 2]), 5)
    assert tR == torus(2, 5)
    assert np.array_equal(x, np.eye(2))


def test_centralizer_with_target():
    p = 7
    A = np.diag([1, 3])
    g = np.array([[1, 2], [3, 4]])
    R = (-fp.ad(fp.inverse(g, p), A, p)) % p
    tR, x = centralizer(R, p, target=A)
    assert np.array_equal((-fp.ad(fp.inverse(x, p), A, p)) % p, R)
    assert tR.dim == 2 and tR == liealg.commutant(R, p)


def test_centralizer_irreducible():
    with pytest.raises(NotRegularError):
        centralizer(np.array([[0, 2], [1, 0]]), 3)   # x^2 + 1 over F_3


def test_ad_rank_nullity_exhaustive():
    p = 3
    for v in itertools.product(range(p), repeat=4):
        R = np.array(v).reshape(2, 2)
        try:
            tR, _ = centralizer(R, p)
        except NotRegularError:
            continue
        img = liealg.Subspace.span(liealg.ad_matrix(R, p).T.reshape(-1, 2, 2), 2, p)
        assert img == perp(tR)
        assert liealg.commutant(R, p) == tR


@settings(max_examples=200)
@given(mats, mats, st.integers(0, P - 1))
def test_xi_map_independent_of_solution(g, X0, s):
    if fp.det(g, P) == 0:
        return
    R = fp.ad(fp.inverse(g, P), np.diag([1, 3]), P)
    xi = fp.bracket(X0, R, P)
    z = fp.ad(fp.inverse(g, P), np.diag([2, 1]), P)           # centralizes R
    rho = fp.ad(fp.inverse(g, P), np.diag([s, 1]), P)
    a = xi_map(R, z, xi, P)
    b = xi_map(R, z, xi, P, X=(X0 + rho) % P)
    assert np.array_equal(a, b)
    assert not np.any(xi_map(R, z, np.zeros((2, 2), dtype=np.int64), P))


def test_solve_bracket_outside_image():
    assert solve_bracket(np.diag([1, 2]), np.diag([1, 0]), 5) is None


@given(mats)
def test_pm0(X):
    R = (-np.diag([1, 3])) % P
    _, x = centralizer(R, P)
    m, z, pl = pm0_decompose(R, X, P, x=x)
    assert np.array_equal((m + z + pl) % P, X % P)
    m2, z2, p2 = pm0_decompose(R, X, P, x=np.diag([2, 3]) @ x % P)
    assert np.array_equal(m, m2) and np.array_equal(pl, p2)


def test_pm0_examples():
    R = (-np.diag([1, 3])) % P
    E12 = liealg.unit(2, 0, 1)
    m, z, pl = pm0_decompose(R, E12, P, x=np.eye(2, dtype=np.int64))
    assert not m.any() and not z.any() and np.array_equal(pl, E12)


def test_xi_y():
    assert xi_y(np.eye(2, dtype=np.int64), 3) == frozenset()
    assert xi_y(np.diag([1, 2]), 3) == {(0, 1)}
    assert all(xi_y(np.diag([c, c]), 7) == frozenset() for c in range(1, 7))


@given(mats, st.lists(st.integers(1, P - 1), min_size=2, max_size=2))
def test_root_components_conjugation(X, t):
    y = np.diag(t)
    X0, comps = root_components(X)
    back = X0 + sum(c * liealg.unit(2, i, j) for (i, j), c in comps.items())
    assert np.array_equal(back % P, X % P)
    yX = fp.ad(fp.inverse(y, P), X, P)
    _, ycomps = root_components(yX)
    for (i, j), c in comps.items():
        e = liealg.RootDatum.e_alpha((i, j), [fp.inv_mod(a, P) for a in t], P)
        assert ycomps[(i, j)] == c * e % P


@settings(max_examples=300)
@given(mats, mats, st.lists(st.integers(1, P - 1), min_size=2, max_size=2), st.lists(st.integers(0, P - 1), min_size=2, max_size=2))
def test_torus_pairing_vanishes(x, X, t, a):
    if fp.det(x, P) == 0:
        return
    xinv = fp.inverse(x, P)
    y = xinv @ np.diag(t) @ x % P
    xA = xinv @ np.diag(a) @ x % P
    assert fp.trace_form(xA, (fp.ad(fp.inverse(y, P), X, P) - X) % P, P) == 0
