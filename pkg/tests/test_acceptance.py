"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import itertools
import time

import numpy as np
import pytest

from epschar import bch, charfun, fourier, grgroup, lemmas
from epschar.charfun import GenericDatum
from epschar.rng import SplitMix64
from epschar.scalars import gauss_linear_sum, make_context
from epschar.suites import fit_ratio, signed_q_power


@pytest.fixture
def verdict(capsys):
    t0 = time.perf_counter()

    def emit(num, ok, detail, limit):
        dt = time.perf_counter() - t0
        ok = bool(ok) and dt < limit
        with capsys.disabled():
            print(f"\n[acceptance {num:2d}] {'PASS' if ok else 'FAIL'} {detail} ({dt:.1f}s, limit {limit:.0f}s)")
        assert ok, detail

    return emit


def _identity_index(n, p, r):
    return int(grgroup.element_index(grgroup.kr_identity(n, r), p))


def test_01_bch_golden_tables(verdict):
    gold = bch.golden_check(4)
    bad = [k for k, v in gold["polynomials"].items() if not (v["matches"] and v["lie"])]
    verdict(1, gold["status"] == "pass" and not bad,
            f"{len(gold['polynomials'])} polynomials match and are Lie; mismatches {bad}", 1)


def test_02_group_law(verdict):
    res = [grgroup.group_selftest(n, p, r, samples=1000, seed=1) for n, p, r in ((2, 5, 4), (3, 7, 3))]
    G = grgroup.enumerate_group("G", 2, 3, 2)
    x, Xs = grgroup.to_factored(G, 3)
    round_trip = bool(np.all(grgroup.kr_eq(grgroup.from_factored(x, Xs, 3), G, 3)))
    ok = all(r["status"] == "pass" for r in res) and round_trip and len(G) == 3888
    verdict(2, ok, f"selftests {[r['status'] for r in res]}, G_2(F_3) factored round trip {round_trip}", 10)


def test_03_induced_character_r2(verdict, d2):
    tl = charfun.induced_t_L(d2)
    one = tl.lookup(_identity_index(2, 3, 2)).rational_integer()
    rng = SplitMix64(7)
    g = grgroup.random_kr(rng, 1000, 2, 3, 2)
    h = grgroup.random_kr(rng, 1000, 2, 3, 2)
    cyc = d2.ctx.cyc
    conj_ok = np.array_equal(cyc.reduce_counts(charfun.induced_counts(d2, g)),
                             cyc.reduce_counts(charfun.induced_counts(d2, grgroup.kr_conj(h, g, 3))))
    norm = charfun.inner_product(tl, tl, 3888).rational_integer()
    degen = charfun.induced_t_L(GenericDatum.make(2, 3, 2, [(0, 0)], (0, 0)))
    dnorm = charfun.inner_product(degen, degen, 3888).rational_integer()
    ok = len(tl) == 3888 and one == 12 and conj_ok and norm == 1 and dnorm != 1
    verdict(3, ok, f"|table|={len(tl)} t_L(1)={one} conj-invariant={conj_ok} "
                   f"<t_L,t_L>={norm} degenerate={dnorm}", 30)


def _fit_power(datum, elements):
    cyc = datum.ctx.cyc
    L = cyc.reduce_counts(charfun.induced_counts(datum, elements))
    K = cyc.reduce_counts(charfun.t_K_table(datum, elements))
    rho, bad = fit_ratio(L, K)
    return signed_q_power(rho, datum.p), len(bad)


def test_04_t_L_vs_t_K(verdict, d2, d3):
    (s2, k2), bad2 = _fit_power(d2, grgroup.enumerate_group("G", 2, 3, 2))
    (s3, k3), bad3 = _fit_power(d3, charfun.sample_elements(d3, 200, seed=1))
    dh2, dh3 = grgroup.dim_H(2, 4, 2), grgroup.dim_H(3, 4, 2)
    ok = bad2 == bad3 == 0 and s2 in (1, -1) and s3 in (1, -1) and (k2, k3) == (dh2, dh3)
    verdict(4, ok, f"t_L = s q^k t_K fitted k = {k2} (r=2, full), {k3} (r=3, 200 samples); "
                   f"expected dim_H = {dh2}, {dh3}", 600)


def _ladder(datum, count, seed):
    els = charfun.sample_elements(datum, count, seed)
    res = charfun.ladder_counts(datum, els, include_pieces=datum.r >= 4, include_k=False)
    red = {k: datum.ctx.cyc.reduce_counts(v) for k, v in res.items()}
    return red


def test_05_ladder(verdict, d2, d3, d4):
    equal = {}
    for d in (d2, d3):
        red = _ladder(d, 200, 2)
        levels = [red[f"L_{i}"] for i in charfun.ladder_levels(d.r)]
        equal[d.r] = all(np.array_equal(levels[0], lv) for lv in levels[1:])
    red = _ladder(d4, 50, 2)
    additive = all(np.array_equal(red[f"L_{i}"] - red[f"L_{nb}"], red[name])
                   for name, (_, i, nb) in charfun.piece_specs(4).items())
    verdict(5, all(equal.values()) and additive,
            f"levels equal r=2:{equal[2]} r=3:{equal[3]}; r=4 triangle additivity {additive}", 1200)


def test_06_vanishing_lemmas(verdict, d2, d3, d4):
    runs = [(c, d4) for c in ("orbit_E", "action_n3")]
    runs += [(c, d) for c in ("sum_last", "unipotent") for d in (d2, d3, d4)]
    results = [lemmas.vanishing_lemma(c, d, samples=1000, seed=3) for c, d in runs]
    closed = next(r for r in results if r.case == "action_n3").checks["closed_form"]
    failed = [f"{r.case}@r={r.r}" for r in results if not r.passed]
    verdict(6, not failed and closed and all(r.samples >= 1000 for r in results),
            f"{len(results)} cases at 1000 samples; failures {failed}; action closed form {closed}", 300)


def test_07_fourier_r2(verdict, d2):
    bases = grgroup.enumerate_group("G", 2, 3, 1)[:, 0]
    rep = fourier.fourier_report(d2, bases)
    predicted = fourier.parametrized_support_r2(d2)
    c = rep["constant_c"]
    points = len(bases) * 3 ** 4
    ok = (rep["status"] == "pass" and rep["support_size"] == predicted == 48 and points == 3888
          and rep["off_support_violations"] == 0 and c["sign"] in (1, -1))
    verdict(7, ok, f"support {rep['support_size']}/{points}, |C||T| = {predicted}, "
                   f"c = {c['sign']}*q^{c['q_power']}, off-support violations {rep['off_support_violations']}", 60)


def test_08_fourier_r3(verdict, d3):
    bases = fourier.conjugable_bases(d3, 5, seed=1)
    rep = fourier.fourier_report(d3, bases, check_stalks=True)
    strata = rep["strata"]
    seen = {k for k in strata if k.startswith("Z^")}
    ok = (rep["status"] == "pass" and "Z^{}" in seen and len(seen) > 1 and "Z'" in strata
          and rep["stalk_mismatches"] == 0)
    counts = ", ".join(f"{k}:{v['matches']}/{v['points']}" for k, v in sorted(strata.items()))
    c = rep["constant_c"]
    verdict(8, ok, f"{len(bases)} bases; {counts}; stalk mismatches {rep['stalk_mismatches']}; "
                   f"c = {c['sign']}*q^{c['q_power']}", 3600)


def test_09_r4_identities(verdict, d4):
    ch = fourier.chain_r4(d4, 10_000, seed=1)
    tau = fourier.tau_invariance_r4(d4, 1000, seed=1)
    lp = fourier.last_pair_affinity(d4, 100, seed=1)
    ub = fourier.upper_block_affinity(d4, 100, seed=1)
    placement = ch["coefficient_placement"]
    signs = fourier.sampled_report_r4(d4, 2, seed=1, placement=fourier.COEFF_VARIANTS[placement[0]]) \
        if len(placement) == 1 else {}
    fitting = [s for s, r in signs.items() if r["passed"]]
    ok = ch["passed"] and tau["passed"] and lp["passed"] and ub["passed"] and len(fitting) == 1
    verdict(9, ok, f"chain {ch['agree']}; tau mismatches {tau['mismatches']}; last pair {lp['passed']}; "
                   f"upper block {ub['passed']}; placement {placement}; Xi sign {fitting}", 600)


def test_10_degenerate_baselines(verdict):
    norms = {}
    for lam in ((0, 1), (0, 0)):
        tl = charfun.induced_t_L(GenericDatum.make(2, 3, 1, [], lam))
        norms[lam] = charfun.inner_product(tl, tl, grgroup.order_gl(2, 3)).rational_integer()
    ctx = make_context(3)
    rng = SplitMix64(10)
    agree = 0
    for trial in range(100):
        k = 1 + trial % 4
        lin = rng.randbelow(3, k) if trial % 5 else np.zeros(k, dtype=np.int64)
        const = int(rng.randbelow(3, 1)[0])
        brute = ctx.cyc.zero()
        for v in itertools.product(range(3), repeat=k):
            brute = brute + ctx.psi(int(np.dot(lin, v) + const) % 3)
        agree += int(gauss_linear_sum(ctx, lin, const) == brute)
    ok = norms[(0, 1)] == 1 and norms[(0, 0)] == 2 and agree == 100
    verdict(10, ok, f"r=1 norms regular {norms[(0, 1)]}, trivial {norms[(0, 0)]}; "
                    f"Gauss closed form = brute force on {agree}/100 maps", 60)
