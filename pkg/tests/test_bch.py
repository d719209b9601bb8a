from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epschar import bch, fp
from epschar.bch import TruncSeries, bch_u, bch_z, is_lie, parse_tree


def test_golden_tables_r4():
    res = bch.golden_check(4)
    assert res["status"] == "pass"
    assert set(res["polynomials"]) == {"z1", "z2", "z3", "u1", "u2", "u3", "u'1", "u'2", "u'3"}


@pytest.mark.parametrize("r", [2, 3, 4, 5, 6])
def test_reconstruction(r):
    assert bch.reconstruct_z(r)
    assert bch.reconstruct_u(r)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_all_lie_and_homogeneous(r):
    us, ups = bch_u(r)
    for P in bch_z(r) + us + ups:
        s = P.series(r - 1)
        assert is_lie(s)
        assert all(bch.word_weight(w) == P.weight for w in s.terms)


def test_uprime_uses_lower_letters():
    _, ups = bch_u(5)
    for i, P in enumerate(ups, 1):
        assert all(a[1] <= i - 1 for a in P.letters())


def test_is_lie_basics():
    W = 2
    X1 = TruncSeries.letter(W, ("X", 1))
    Y1 = TruncSeries.letter(W, ("Y", 1))
    assert is_lie(X1)
    assert not is_lie(X1 * Y1)
    assert is_lie(X1 * Y1 - Y1 * X1)


def test_denominators_divide_six():
    us, ups = bch_u(4)
    for P in bch_z(4) + us + ups:
        assert all(6 % Fraction(c).denominator == 0 for c, _ in P.terms)


def test_symmetry_of_z():
    for z in bch_z(5):
        s = z.series(4)
        only_x = {w: c for w, c in s.terms.items() if all(a[0] == "X" for a in w)}
        assert only_x == {(("X", z.weight),): 1}


def test_exp_log_inverse():
    W = 3
    s = TruncSeries.letter(W, ("X", 1)) + TruncSeries.letter(W, ("Y", 2), Fraction(1, 2))
    assert s.exp().log() == s


def test_parse_tree_errors():
    assert parse_tree("[X'1,[Y1,X1]]") == (("X'", 1), (("Y", 1), ("X", 1)))
    for bad in ("[X1,Y1", "Q1", "[X1;Y1]", "X1]"):
        with pytest.raises(ValueError):
            parse_tree(bad)


def test_r_range():
    with pytest.raises(ValueError):
        bch_z(7)
    with pytest.raises(ValueError):
        bch_u(1)


def _trunc_exp(X, k, p):
    """exp(eps^k X) in gl_n(F_p[eps]/eps^3) as a list of coefficient matrices."""
    n = X.shape[-1]
    out = [np.eye(n, dtype=np.int64), np.zeros_like(X), np.zeros_like(X)]
    out[k] = X % p
    if 2 * k <= 2:
        out[2 * k] = (out[2 * k] + X @ X * fp.inv_mod(2, p)) % p
    return out


def _trunc_mul(a, b, p):
    return [sum(a[i] @ b[k - i] for i in range(k + 1)) % p for k in range(3)]


mats = st.lists(st.integers(0, 4), min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))


@settings(max_examples=200)
@given(mats, mats, mats, mats)
def test_z2_matches_matrix_log(X1, X2, Y1, Y2):
    """Weight-2 part of log(e^{eps X1} e^{eps^2 X2} e^{eps Y1} e^{eps^2 Y2}) over F_5."""
    p = 5
    prod = _trunc_mul(_trunc_mul(_trunc_exp(X1, 1, p), _trunc_exp(X2, 2, p), p),
                      _trunc_mul(_trunc_exp(Y1, 1, p), _trunc_exp(Y2, 2, p), p), p)
    z1, z2 = bch.z_values(3, [X1, X2], [Y1, Y2], p)
    # exp(eps z1) exp(eps^2 z2) must reproduce the product
    back = _trunc_mul(_trunc_exp(z1, 1, p), _trunc_exp(z2, 2, p), p)
    assert all(np.array_equal(a, b) for a, b in zip(back, prod))
    assert np.array_equal(z1, (X1 + Y1) % p)


def test_eval_commuting():
    p = 7
    A, B = np.diag([1, 2]), np.diag([3, 5])
    z1, z2 = bch.z_values(3, [A, A], [B, B], p)
    assert np.array_equal(z2, (A + B) % p)


def test_eval_rejects_small_p():
    z3 = bch_z(4)[2]
    X = np.eye(2, dtype=np.int64)
    with pytest.raises(ValueError):
        z3.evaluate({("X", 1): X, ("Y", 1): X}, 3)
