import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epschar import grgroup as gg
from epschar.rng import SplitMix64


def test_orders_n2p3():
    assert gg.order("G", 2, 3, 2) == 3888
    assert gg.order("B", 2, 3, 2) == 324
    assert gg.enumerate_group("G", 2, 3, 2).shape[0] == 3888
    assert gg.enumerate_group("B", 2, 3, 2).shape[0] == 324
    assert gg.order_gl(2, 3) == 48


@pytest.mark.parametrize("n,p,r", [(2, 3, 1), (2, 3, 3), (2, 5, 2), (3, 3, 1)])
def test_torus_and_unipotent_counts(n, p, r):
    assert gg.enumerate_group("T", n, p, r).shape[0] == (p - 1) ** n * p ** (n * (r - 1))
    assert gg.enumerate_group("U", n, p, r).shape[0] == gg.order("U", n, p, r)


def test_dim_H():
    assert gg.dim_H(2, 4, 2) == 4
    assert gg.dim_H(4, 4, 2) == 10
    B = gg.enumerate_group("B", 2, 3, 2)
    kernel = np.all(np.diagonal(B[:, 0], axis1=1, axis2=2) == 1, axis=1).sum()
    assert kernel == 3 ** 4


def test_budget_refusal():
    with pytest.raises(gg.BudgetExceeded) as exc:
        gg.enumerate_group("G", 2, 5, 4)
    assert exc.value.required == gg.order("G", 2, 5, 4)
    assert str(exc.value.required) in str(exc.value)


@pytest.mark.parametrize("n,p,r", [(2, 5, 4), (3, 7, 3), (2, 3, 2)])
def test_selftest(n, p, r):
    res = gg.group_selftest(n, p, r, samples=1000, seed=3)
    assert res["status"] == "pass"


def test_factored_roundtrip_exhaustive():
    G = gg.enumerate_group("G", 2, 3, 2)
    x, Xs = gg.to_factored(G, 3)
    assert np.all(gg.kr_eq(gg.from_factored(x, Xs, 3), G, 3))


def test_index_roundtrip_exhaustive():
    G = gg.enumerate_group("G", 2, 3, 2)
    idx = gg.element_index(G, 3)
    assert np.all(np.diff(idx) > 0)
    assert np.array_equal(gg.element_from_index(idx, 2, 3, 2), G)


def test_index_beyond_int64():
    rng = SplitMix64(5)
    g = gg.random_kr(rng, 20, 3, 7, 3)          # 7^27 > 2^63
    idx = gg.element_index(g, 7)
    assert idx.dtype == object
    assert np.array_equal(gg.element_from_index(idx, 3, 7, 3), g)


def test_d_r_homomorphism():
    rng = SplitMix64(9)
    B = gg.enumerate_group("B", 2, 3, 2)
    a = B[rng.randbelow(len(B), 1000)]
    b = B[rng.randbelow(len(B), 1000)]
    lhs = gg.d_r(gg.kr_mul(a, b, 3), 3)
    rhs = gg.kr_mul(gg.d_r(a, 3), gg.d_r(b, 3), 3)
    assert np.all(gg.kr_eq(lhs, rhs, 3))
    U = gg.enumerate_group("U", 2, 3, 2)
    assert np.all(gg.kr_eq(gg.d_r(U, 3), gg.kr_identity(2, 2, (len(U),)), 3))


def test_d_r_rejects_non_borel():
    g = gg.kr_const(np.array([[[1, 0], [1, 1]]]), 2)
    with pytest.raises(ValueError):
        gg.d_r(g, 3)


def test_coset_reps():
    reps = gg.borel_r_coset_reps(2, 3, 2)
    assert len(reps) == 12
    assert len(gg.torus_coset_reps(2, 3)) == 48 // 4
    assert len(gg.borel_coset_reps(3, 3)) == gg.order_gl(3, 3) // gg.order("B", 3, 3, 1)


@settings(max_examples=50)
@given(st.integers(0, 2**63))
def test_exp_eps_inverse(seed):
    rng = SplitMix64(seed)
    X = gg.random_lie(rng, 1, 2, 5)[0]
    for m in (1, 2, 3):
        e = gg.exp_eps(m, X, 4, 5)
        einv = gg.exp_eps(m, (-X) % 5, 4, 5)
        assert gg.kr_eq(gg.kr_mul(e, einv, 5), gg.kr_identity(2, 4), 5)


def test_rng_reproducible():
    a = SplitMix64(42).randbelow(7, 100)
    b = SplitMix64(42).randbelow(7, 100)
    assert np.array_equal(a, b)
    assert SplitMix64(0).next_u64(1)[0] == np.uint64(0xE220A8397B1DCDAF)
