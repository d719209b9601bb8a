import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epschar.scalars import (ConfigurationError, CycCtx, cyc_arith, cyclotomic_poly, euler_phi,
                             field_init, gauss_linear_sum, make_context)


@pytest.mark.parametrize("p,gamma", [(3, 2), (5, 2), (7, 3), (11, 2), (13, 2)])
def test_least_primitive_root(p, gamma):
    F = field_init(p)
    assert F.gamma == gamma
    assert all(F.log(pow(gamma, k, p)) == k for k in range(p - 1))


def test_dlog_examples():
    assert field_init(3).log(2) == 1
    assert field_init(5).log(4) == 2


@pytest.mark.parametrize("bad", [1, 2, 4, 9, 15])
def test_field_rejects(bad):
    with pytest.raises(ConfigurationError):
        field_init(bad)


@pytest.mark.parametrize("N", [2, 6, 12, 20, 42, 110])
def test_cyclotomic_divides(N):
    phi = cyclotomic_poly(N)
    assert len(phi) - 1 == euler_phi(N)
    # x^N - 1 reduces to zero modulo phi_N
    ctx = CycCtx(N)
    assert ctx.root(N).coeffs == ctx.one().coeffs


def test_reduction_example_N6():
    ctx = CycCtx(6)
    assert ctx.root(2).coeffs == (-1, 1)


def test_psi_character():
    ctx = make_context(3)
    assert ctx.psi(0) == ctx.cyc.one()
    for a, b in itertools.product(range(3), repeat=2):
        assert ctx.psi(a) * ctx.psi(b) == ctx.psi(a + b)
    assert cyc_arith("is_zero", ctx.psi(0) + ctx.psi(1) + ctx.psi(2))


def test_lambda0():
    ctx = make_context(3)
    assert ctx.lambda0_eval((1,), [2]) == -ctx.cyc.one()
    assert ctx.lambda0_eval((0, 0), [[1, 0], [0, 2]]) == ctx.cyc.one()
    with pytest.raises(ValueError):
        ctx.lambda0_exp((1, 1), [0, 1])


@given(st.lists(st.integers(1, 6), min_size=2, max_size=2), st.lists(st.integers(1, 6), min_size=2, max_size=2),
       st.lists(st.integers(0, 5), min_size=2, max_size=2))
def test_lambda0_multiplicative(t, u, c):
    ctx = make_context(7)
    tu = [a * b % 7 for a, b in zip(t, u)]
    assert ctx.lambda0_eval(c, tu) == ctx.lambda0_eval(c, t) * ctx.lambda0_eval(c, u)


def _cyc_values(N):
    deg = euler_phi(N)
    return st.lists(st.integers(-5, 5), min_size=deg, max_size=deg).map(lambda c: CycCtx(N).value(c))


@settings(max_examples=300)
@given(_cyc_values(20), _cyc_values(20), _cyc_values(20))
def test_ring_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a.conj().conj() == a
    assert (a * b).conj() == a.conj() * b.conj()


@given(st.integers(0, 19))
def test_root_norm(k):
    ctx = CycCtx(20)
    z = ctx.root(k)
    assert z * z.conj() == ctx.one()


def test_context_mismatch():
    with pytest.raises(ValueError):
        CycCtx(6).one() + CycCtx(20).one()


def test_gauss_examples():
    c3, c5 = make_context(3), make_context(5)
    assert gauss_linear_sum(c3, [1], brute=True).is_zero()
    assert gauss_linear_sum(c3, [0, 0], 1, brute=True) == c3.psi(1) * 9
    assert gauss_linear_sum(c5, [1, 2, 0], 3, brute=True).is_zero()


@settings(max_examples=100)
@given(st.integers(1, 4).flatmap(lambda k: st.tuples(st.lists(st.integers(0, 2), min_size=k, max_size=k),
                                                      st.integers(0, 2))))
def test_gauss_matches_enumeration(args):
    lin, const = args
    ctx = make_context(3)
    pts = np.array(list(itertools.product(range(3), repeat=len(lin))))
    direct = ctx.cyc.from_counts(ctx.counts(ctx.psi_exp(pts @ np.array(lin) + const)))
    assert gauss_linear_sum(ctx, lin, const) == direct
