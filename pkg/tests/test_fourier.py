import numpy as np
import pytest

from epschar import fourier as fo
from epschar import fp
from epschar.rng import SplitMix64


def test_dft_inversion(d2):
    ctx = d2.ctx
    rng = SplitMix64(1)
    counts = rng.randbelow(3, (81, ctx.N)).astype(np.int64)
    hat = fo.dft_fiber(counts, ctx, 2, 1, +1)
    back = fo.dft_fiber(hat, ctx, 2, 1, -1)
    cyc = ctx.cyc
    assert np.array_equal(cyc.reduce_counts(back), cyc.reduce_counts(counts) * 81)


def test_dft_shape_check(d2):
    with pytest.raises(ValueError):
        fo.dft_fiber(np.zeros((10, d2.ctx.N), dtype=np.int64), d2.ctx, 2, 1)


def test_point_index_matches_enumeration():
    pts = fo.fiber_points(2, 3, 1)
    assert pts.shape == (81, 1, 2, 2)
    assert [fo.point_index(pts[k], 3) for k in (0, 7, 80)] == [0, 7, 80]


def test_r2_report_on_torus_bases(d2):
    bases = fo.conjugable_bases(d2, 0, seed=1)
    rep = fo.fourier_report(d2, bases)
    assert rep["status"] == "pass"
    assert rep["off_support_violations"] == 0
    assert rep["constant_c"]["q_power"] == 8


def test_parametrized_support_r2(d2):
    assert fo.parametrized_support_r2(d2) == 48


def test_pointwise_matches_full_fiber(d2):
    y = np.diag([1, 2])
    hat = d2.ctx.cyc.reduce_counts(fo.dft_fiber(fo.fiber_t_K(d2, y), d2.ctx, 2, 1, +1))
    pts = fo.fiber_points(2, 3, 1)
    for k in (0, 5, 40, 77):
        assert fo.t_hat_point(d2, y, pts[k])[0] == d2.ctx.cyc.value(hat[k])


def test_predict_r2_off_orbit(d2):
    assert fo.predict_r2(d2, np.diag([1, 2]), np.zeros((1, 2, 2), dtype=np.int64)).zero


def test_r3_support_samples(d3):
    rep = fo.sampled_report_r3(d3, 4, seed=2)
    assert rep["conj_x"]["passed"]


def test_stalk_model_on_support(d3):
    on, _ = fo.sample_support_r3(d3, 6, seed=3)
    for y, Rs in on:
        prof = fo.stalk_profile_r3(d3, y, Rs)
        assert prof["in_frame"] and prof["agree"]


def test_descent_r3(d3):
    assert fo.descent_check_r3(d3, 50, seed=4)["passed"]


def test_chain_r4_placement(d4):
    res = fo.chain_r4(d4, 300, seed=5)
    assert res["passed"]
    assert res["coefficient_placement"] == ["third_on_XX"]


def test_tau_invariance_r4(d4):
    assert fo.tau_invariance_r4(d4, 100, seed=6)["passed"]


def test_affinity(d2, d4):
    assert fo.last_pair_affinity(d2, 0, seed=1, exhaustive=True)["passed"]
    assert fo.last_pair_affinity(d4, 10, seed=2)["passed"]
    assert fo.upper_block_affinity(d4, 10, seed=3)["passed"]


def test_xi_form_needs_solvable(d2):
    R = np.diag([1, 2])
    xi = np.array([[1, 0], [0, 0]])        # not in the image of ad(R)
    with pytest.raises(ValueError):
        fo.xi_form(R, fp.eye(2), xi, 3)


@pytest.mark.slow
def test_r4_sampled_sign(d4):
    rep = fo.sampled_report_r4(d4, 2, seed=7)
    assert rep[-1]["passed"] and not rep[+1]["passed"]
