import numpy as np
import pytest

from epschar import charfun as cf
from epschar import grgroup as gg
from epschar.charfun import GenericDatum
from epschar.rng import SplitMix64


@pytest.fixture(scope="module")
def t_L2(d2):
    return cf.induced_t_L(d2)


def test_lambda_tilde_is_character_on_B(d2):
    rng = SplitMix64(11)
    B = gg.enumerate_group("B", 2, 3, 2)
    a, b = B[rng.randbelow(len(B), 500)], B[rng.randbelow(len(B), 500)]
    N = d2.ctx.N
    lhs = cf.lambda_tilde_exp(d2, gg.kr_mul(a, b, 3))
    rhs = (cf.lambda_tilde_exp(d2, a) + cf.lambda_tilde_exp(d2, b)) % N
    assert np.array_equal(lhs, rhs)


def test_lambda_tilde_trivial_on_U(d3):
    U = gg.enumerate_group("U", 2, 3, 3)
    assert not np.any(cf.lambda_tilde_exp(d3, U))


def test_t_L_full_table(d2, t_L2):
    assert len(t_L2) == 3888
    one = gg.element_index(gg.kr_identity(2, 2, (1,)), 3)[0]
    assert t_L2.lookup(one).rational_integer() == 12
    assert cf.inner_product(t_L2, t_L2, 3888).rational_integer() == 1


def test_t_L_degenerate_datum_reducible():
    d = GenericDatum.make(2, 3, 2, [(0, 0)], (0, 0))
    t = cf.induced_t_L(d)
    assert t.lookup(gg.element_index(gg.kr_identity(2, 2, (1,)), 3)[0]).rational_integer() == 12
    assert cf.inner_product(t, t, 3888).rational_integer() != 1


@pytest.mark.parametrize("lam,norm", [((0, 1), 1), ((0, 0), 2)])
def test_r1_norm_is_weyl_stabilizer(lam, norm):
    d = GenericDatum.make(2, 3, 1, [], lam)
    t = cf.induced_t_L(d)
    assert cf.inner_product(t, t, gg.order_gl(2, 3)).rational_integer() == norm


def test_conjugation_invariance(d2, t_L2):
    rng = SplitMix64(2)
    g = gg.random_kr(rng, 300, 2, 3, 2)
    h = gg.random_kr(rng, 300, 2, 3, 2)
    conj = gg.kr_conj(h, g, 3)
    a = cf.induced_counts(d2, g)
    b = cf.induced_counts(d2, conj)
    cyc = d2.ctx.cyc
    assert np.array_equal(cyc.reduce_counts(a), cyc.reduce_counts(b))


def test_lookup_missing_raises(t_L2):
    with pytest.raises(KeyError):
        t_L2.lookup(-1)


def test_inner_product_needs_full(d2):
    part = cf.induced_t_L(d2, gg.kr_identity(2, 2, (1,)))
    with pytest.raises(ValueError):
        cf.inner_product(part, part, 3888)


def test_ladder_specs():
    assert cf.ladder_levels(2) == [0, 1, 2]
    assert cf.ladder_levels(3) == [1, 2, 3]
    assert cf.k_spec(3).cons == ("b", None)
    assert cf.k_spec(4).cons == ("t", None, None)
    assert set(cf.piece_specs(4)) == {"L'_2", "L'_3", "L''_1", "L''_2"}
    with pytest.raises(ValueError):
        cf.level_spec(3, 0)


def test_ladder_levels_agree_and_pieces_add(d2):
    els = cf.sample_elements(d2, 60, seed=4)
    res = cf.ladder_counts(d2, els)
    cyc = d2.ctx.cyc
    red = {k: cyc.reduce_counts(v) for k, v in res.items()}
    top = red["L_2"]
    for i in cf.ladder_levels(2):
        assert np.array_equal(red[f"L_{i}"], top)
    for name, (_, i, nb) in cf.piece_specs(2).items():
        assert np.array_equal(red[f"L_{i}"] - red[f"L_{nb}"], red[name])


def test_top_level_is_t_K_and_t_L_is_scaled(d2, t_L2):
    els = cf.sample_elements(d2, 40, seed=8)
    cyc = d2.ctx.cyc
    K = cyc.reduce_counts(cf.t_K_table(d2, els))
    L = cyc.reduce_counts(cf.induced_counts(d2, els))
    assert np.array_equal(K, L * 3 ** 4)


def test_analytic_matches_brute(d2):
    rng = SplitMix64(6)
    els = gg.random_kr(rng, 6, 2, 3, 2)
    ys, Yss = gg.to_factored(els, 3)
    for y, Ys in zip(ys, Yss):
        assert cf.t_K(d2, y, Ys) == cf.t_K(d2, y, Ys, brute=True)
        assert cf.t_L_i(d2, y, Ys, 1) == cf.t_L_i(d2, y, Ys, 1, brute=True)


def test_empty_fiber_is_zero(d2):
    # a constant term with irrational eigenvalues is never T-conjugate
    y = np.array([[0, 2], [1, 0]])
    assert cf.t_K(d2, y, np.zeros((1, 2, 2), dtype=np.int64)).is_zero()


def test_datum_validation():
    assert not GenericDatum.make(2, 3, 2, [(1, 1)], (0, 0)).regular
    assert GenericDatum.make(2, 3, 1, [], (0, 0)).regular
