"""Verification suites: each takes a Config and returns a Report."""

from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import bch, cache, charfun, fourier, grgroup, lemmas, scalars
from .config import Config
from .report import Figure, Report
from .rng import SplitMix64

log = logging.getLogger(__name__)

SUITES = ("bch", "group", "characters", "ladder", "lemmas", "fourier2", "fourier3",
          "fourier4-sampled", "compare-lk")


class Options:
    """Run-time knobs that are not part of the hashed config."""

    def __init__(self, jobs: int = 1, cache_dir=None, use_cache: bool = True):
        self.jobs = max(1, int(jobs))
        self.cache_dir = cache.cache_dir(cache_dir)
        self.use_cache = use_cache


def _chunks(arr: np.ndarray, parts: int):
    parts = max(1, min(parts, len(arr)))
    return np.array_split(arr, parts)


def _call(args):
    fn, a, kw = args
    return fn(*a, **kw)


def parallel_map(fn, arglist, jobs: int):
    """Ordered map; runs in-process for jobs=1 so results never depend on scheduling."""
    if jobs <= 1 or len(arglist) <= 1:
        return [fn(*a) for a in arglist]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_call, [(fn, a, {}) for a in arglist]))


def _ladder_chunk(datum, elems):
    return charfun.ladder_counts(datum, elems)


def _ladder_counts(datum, elements, jobs):
    parts = parallel_map(_ladder_chunk, [(datum, c) for c in _chunks(elements, jobs)], jobs)
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _induced_chunk(datum, elems):
    return charfun.induced_counts(datum, elems)


def _tk_chunk(datum, elems):
    return charfun.t_K_table(datum, elems)


# ------------------------------------------------------------- helpers

def _dims(n: int) -> tuple[int, int]:
    """(Delta, delta) = (dim g, rank)."""
    return n * n, n


def stab_w(lam, n: int, p: int) -> int:
    """Number of permutations of the coordinates fixing the exponent vector mod p-1."""
    lam = tuple(c % (p - 1) for c in lam)
    return sum(1 for s in itertools.permutations(range(n)) if tuple(lam[i] for i in s) == lam)


def fit_ratio(num: np.ndarray, den: np.ndarray):
    """Rational rho with num = rho * den rowwise, plus the rows where that fails."""
    num = np.asarray(num, dtype=object)
    den = np.asarray(den, dtype=object)
    rho = None
    for a, b in zip(num.reshape(-1), den.reshape(-1)):
        if b != 0:
            rho = Fraction(int(a), int(b))
            break
    if rho is None:
        return None, [k for k in range(len(num)) if any(num[k])]
    bad = [k for k in range(len(num)) if any(num[k] * rho.denominator != den[k] * rho.numerator)]
    return rho, bad


def signed_q_power(rho: Fraction | None, q: int):
    """(s, k) with rho = s q^k for integer k, or (None, None)."""
    if rho is None or rho == 0:
        return None, None
    s = 1 if rho > 0 else -1
    a, b, k = abs(rho.numerator), rho.denominator, 0
    while a % q == 0:
        a //= q
        k += 1
    while b % q == 0:
        b //= q
        k -= 1
    return (s, k) if a == 1 and b == 1 else (None, None)


def _cached_table(cfg: Config, opts: Options, name: str, build):
    """ClassFunction-style (indices, coeffs) through the binary cache."""
    if opts.use_cache:
        hit = cache.load(opts.cache_dir, cfg.hash, name)
        if hit is not None:
            return hit[3], hit[4], True
    idx, coeffs = build()
    if opts.use_cache:
        try:
            cache.store(opts.cache_dir, cfg.hash, name, cfg.n, cfg.p, cfg.r, idx, coeffs)
        except OSError as exc:
            log.warning("cache not written: %s", exc)
    return np.asarray(idx), np.asarray(coeffs), False


def _full_elements(cfg: Config):
    return grgroup.enumerate_group("G", cfg.n, cfg.p, cfg.r, cfg.budgets.max_elements, cfg.force)


def _t_L_full(cfg: Config, opts: Options, datum=None, tag="t_L"):
    datum = datum or cfg.datum
    elements = _full_elements(cfg)

    def build():
        parts = parallel_map(_induced_chunk, [(datum, c) for c in _chunks(elements, opts.jobs)], opts.jobs)
        cf = charfun._counts_to_class_function(datum, elements, np.concatenate(parts), True, "t_L")
        return grgroup.index_to_u64(cf.indices), cf.coeffs

    idx, coeffs, hit = _cached_table(cfg, opts, tag, build)
    cf = charfun.ClassFunction(datum.ctx, idx.astype(np.int64), coeffs, True, "t_L", elements)
    return cf, hit


# ---------------------------------------------------------------- suites

def suite_bch(cfg: Config, opts: Options) -> Report:
    rep = Report("bch", cfg.hash, cfg.seed)
    r = max(cfg.r, 4)
    gold = bch.golden_check(r)
    for name, row in gold["polynomials"].items():
        rep.add(f"{name} matches table", True, row["matches"], "PAPER")
        rep.add(f"{name} is Lie", True, row["lie"], "DERIVED")
    top = max(cfg.r, 2)
    rep.add(f"reconstruct z (r={top})", True, bch.reconstruct_z(top), "DERIVED")
    rep.add(f"reconstruct u (r={top})", True, bch.reconstruct_u(top), "DERIVED")
    lie_all = all(bch.is_lie(P.series(top - 1)) for P in bch.bch_z(top) + bch.bch_u(top)[0] + bch.bch_u(top)[1])
    rep.add(f"all z_i, u_i, u'_i Lie (r={top})", True, lie_all, "DERIVED")
    rep.data["tables"] = bch.tables_json(top)
    names = [P.name for P in bch.bch_z(top) + bch.bch_u(top)[0]]
    rep.figures.append(Figure("terms", f"Lyndon-basis terms, r={top}", names,
                              {"terms": [len(P.terms) for P in bch.bch_z(top) + bch.bch_u(top)[0]]}))
    return rep


def suite_group(cfg: Config, opts: Options) -> Report:
    rep = Report("group", cfg.hash, cfg.seed)
    n, p, r = cfg.n, cfg.p, cfg.r
    if r >= 2:
        st = grgroup.group_selftest(n, p, r, cfg.budgets.group_samples, cfg.seed)
        for key in ("roundtrip", "product", "conjugation", "inverse"):
            rep.add(f"{key} vs matrix model ({st['samples']} pairs)", True, st[key], "DERIVED",
                    repro={"seed": cfg.seed})
    size = grgroup.order("G", n, p, r)
    rep.data["order_G_r"] = size
    if size <= min(cfg.budgets.max_elements, 1 << 16) or cfg.force:
        G = _full_elements(cfg)
        rep.add("|G_r| by enumeration", size, int(G.shape[0]), "DERIVED")
        if r >= 2:
            x, Xs = grgroup.to_factored(G, p)
            ok = grgroup.kr_eq(grgroup.from_factored(x, Xs, p), G, p)
            rep.add("factored round-trip (exhaustive)", True, bool(np.all(ok)), "DERIVED",
                    repro={"first_bad": int(np.argmin(ok))} if not np.all(ok) else None)
        idx = grgroup.element_index(G, p)
        back = grgroup.element_from_index(idx, n, p, r)
        rep.add("index round-trip (exhaustive)", True, bool(np.array_equal(back, G % p)), "DERIVED")
        for sub in ("B", "T", "U"):
            S = grgroup.enumerate_group(sub, n, p, r, cfg.budgets.max_elements, cfg.force)
            rep.add(f"|{sub}_r| by enumeration", grgroup.order(sub, n, p, r), int(S.shape[0]), "DERIVED")
        if r >= 2:
            B = grgroup.enumerate_group("B", n, p, r, cfg.budgets.max_elements, cfg.force)
            kernel = int(np.sum(np.all(np.diagonal(B[:, 0], axis1=1, axis2=2) == 1, axis=1)))
            Delta, delta = _dims(n)
            rep.add("q^dim_H = |ker(B_r -> T)|", p ** grgroup.dim_H(r, Delta, delta), kernel, "PAPER")
    rep.figures.append(Figure("orders", f"subgroup orders, n={n} p={p} r={r}", ["G", "B", "T", "U"],
                              {"order": [grgroup.order(s, n, p, r) for s in ("G", "B", "T", "U")]}, log=True))
    return rep


def suite_characters(cfg: Config, opts: Options) -> Report:
    rep = Report("characters", cfg.hash, cfg.seed)
    datum = cfg.datum
    n, p, r = cfg.n, cfg.p, cfg.r
    order = grgroup.order("G", n, p, r)
    index = order // grgroup.order("B", n, p, r)
    full = order <= cfg.budgets.max_elements or cfg.force
    if full:
        tl, hit = _t_L_full(cfg, opts)
        log.info("t_L table %s", "loaded from cache" if hit else "computed")
        rep.data["table_size"] = len(tl)
        one = tl.lookup(int(grgroup.element_index(grgroup.kr_identity(n, r), p)))
        rep.add("t_L(1) = [G_r:B_r]", index, one.rational_integer(), "DERIVED")
        rep.add("table size = |G_r|", order, len(tl), "DERIVED")
        norm = charfun.inner_product(tl, tl, order).rational_integer()
        if r == 1:
            rep.add("<t_L,t_L> = |Stab_W(lambda_0)|", stab_w(cfg.lambda0, n, p), norm, "DERIVED")
        elif datum.regular:
            rep.add("<t_L,t_L> = 1 (generic datum)", 1, norm, "DERIVED")
        if r == 2:
            degen = charfun.GenericDatum.make(n, p, r, [[0] * n], [0] * n)
            dl = charfun.induced_t_L(degen)
            dnorm = charfun.inner_product(dl, dl, order).rational_integer()
            rep.add("<t_L,t_L> != 1 (A_1 = 0, trivial lambda_0)", "!= 1", dnorm, "DERIVED", passed=dnorm != 1)
            rep.data["degenerate_norm"] = dnorm
    # conjugation invariance, on the full table when available, otherwise on pairs of samples
    rng = SplitMix64(cfg.seed)
    K = cfg.budgets.conjugation_pairs
    g = grgroup.random_kr(rng, K, n, p, r)
    h = grgroup.random_kr(rng, K, n, p, r)
    hg = grgroup.kr_conj(h, g, p)
    if full:
        va = tl.coeffs[np.searchsorted(tl.indices, grgroup.element_index(g, p))]
        vb = tl.coeffs[np.searchsorted(tl.indices, grgroup.element_index(hg, p))]
    else:
        va = datum.ctx.cyc.reduce_counts(charfun.induced_counts(datum, g))
        vb = datum.ctx.cyc.reduce_counts(charfun.induced_counts(datum, hg))
    bad = np.nonzero(np.any(va != vb, axis=1))[0]
    rep.add(f"t_L(hgh^-1) = t_L(g), {K} pairs", 0, int(len(bad)), "TRIVIAL",
            repro={"seed": cfg.seed, "first_bad_pair": int(bad[0])} if len(bad) else None)
    if full:
        mags = np.array([round(abs(v.to_complex()) ** 2) for v in tl.values()])
        vals, counts = np.unique(mags, return_counts=True)
        rep.data["abs2_histogram"] = {str(int(v)): int(c) for v, c in zip(vals, counts)}
        rep.figures.append(Figure("abs2", f"|t_L|^2 over G_{r}(F_{p})", [int(v) for v in vals],
                                  {"elements": counts.tolist()}, log=True))
    return rep


def _sample_or_full(cfg: Config, count: int):
    return charfun.sample_elements(cfg.datum, count, cfg.seed)


def suite_ladder(cfg: Config, opts: Options) -> Report:
    rep = Report("ladder", cfg.hash, cfg.seed)
    datum = cfg.datum
    r = cfg.r
    if r < 2:
        rep.add("ladder needs r >= 2", ">= 2", r, "TRIVIAL", passed=False)
        return rep
    count = cfg.budgets.r4_samples if r >= 4 else cfg.budgets.samples
    elems = _sample_or_full(cfg, count)
    res = _ladder_counts(datum, elems, opts.jobs)
    cyc = datum.ctx.cyc
    red = {k: cyc.reduce_counts(v) for k, v in res.items()}
    idx = grgroup.element_index(elems, cfg.p)
    levels = [f"L_{i}" for i in charfun.ladder_levels(r)]
    top = red[levels[-1]]
    for name in levels[:-1]:
        bad = np.nonzero(np.any(red[name] != top, axis=1))[0]
        rep.add(f"{name} = {levels[-1]} on {len(elems)} samples", 0, int(len(bad)), "PAPER",
                repro={"seed": cfg.seed, "index": str(idx[bad[0]])} if len(bad) else None)
    zero_pieces = []
    for pname, (_, i, nb) in charfun.piece_specs(r).items():
        diff = red[f"L_{i}"] - red[f"L_{nb}"]
        bad = np.nonzero(np.any(diff != red[pname], axis=1))[0]
        rep.add(f"L_{i} - L_{nb} = {pname}", 0, int(len(bad)), "DERIVED",
                repro={"seed": cfg.seed, "index": str(idx[bad[0]])} if len(bad) else None)
        zero_pieces.append(int(np.sum(np.any(red[pname] != 0, axis=1))))
    rho, bad = fit_ratio(top, red["K"])
    s, k = signed_q_power(rho, cfg.p)
    rep.data.update({"samples": int(len(elems)), "levels": levels,
                     "top_over_K": {"sign": s, "q_power": k, "pointwise_failures": len(bad)},
                     "nonzero_piece_values": dict(zip(charfun.piece_specs(r), zero_pieces))})
    nz = [int(np.sum(np.any(red[nm] != 0, axis=1))) for nm in levels]
    rep.figures.append(Figure("levels", f"nonzero values per ladder level, r={r}", levels,
                              {"nonzero": nz}))
    return rep


def suite_compare_lk(cfg: Config, opts: Options) -> Report:
    """Fit t_L = s q^k t_K and compare k with dim_H."""
    rep = Report("compare-lk", cfg.hash, cfg.seed)
    datum = cfg.datum
    n, p, r = cfg.n, cfg.p, cfg.r
    if r < 2:
        rep.add("comparison needs r >= 2", ">= 2", r, "TRIVIAL", passed=False)
        return rep
    if r > 3 and not cfg.force:
        # one t_K value enumerates a fiber of size about p^(n^2 (r-1))
        raise grgroup.BudgetExceeded(p ** (n * n * (r - 1)), cfg.budgets.max_elements)
    Delta, delta = _dims(n)
    dh = grgroup.dim_H(r, Delta, delta)
    order = grgroup.order("G", n, p, r)
    cyc = datum.ctx.cyc
    if r == 2 and (order <= cfg.budgets.max_elements or cfg.force):
        tl, _ = _t_L_full(cfg, opts)
        elems = tl.elements
        L = tl.coeffs
        domain = "full"
    else:
        elems = _sample_or_full(cfg, cfg.budgets.samples)
        parts = parallel_map(_induced_chunk, [(datum, c) for c in _chunks(elems, opts.jobs)], opts.jobs)
        L = cyc.reduce_counts(np.concatenate(parts))
        domain = "sampled"
    parts = parallel_map(_tk_chunk, [(datum, c) for c in _chunks(elems, opts.jobs)], opts.jobs)
    Kc = cyc.reduce_counts(np.concatenate(parts))
    rho, bad = fit_ratio(L, Kc)
    s, k = signed_q_power(rho, p)
    rev_s, rev_k = signed_q_power(1 / rho if rho else None, p)
    idx = grgroup.element_index(elems, p)
    rep.data.update({"domain": domain, "elements": int(len(elems)), "dim_H": dh,
                     "t_L_over_t_K": {"sign": s, "q_power": k, "pointwise_failures": len(bad)},
                     "t_K_over_t_L": {"sign": rev_s, "q_power": rev_k}})
    rep.add("t_L = s q^k t_K with one global s (pointwise failures)", 0, len(bad), "DERIVED",
            repro={"index": str(idx[bad[0]])} if bad else None)
    rep.add("k = dim_H in t_L = s q^k t_K", dh, k, "PAPER",
            repro={"observed": f"t_K = {rev_s} * q^{rev_k} * t_L"} if k != dh else None)
    rep.add("s in {+1,-1}", "+-1", s, "DERIVED", passed=s in (1, -1))
    mL = np.array([abs(cyc.value(v).to_complex()) for v in L[:64]])
    mK = np.array([abs(cyc.value(v).to_complex()) for v in Kc[:64]])
    rep.figures.append(Figure("magnitudes", "|t_L| and |t_K| on the first 64 elements",
                              list(range(len(mL))), {"|t_L|": mL.tolist(), "|t_K|": mK.tolist()},
                              ylabel="magnitude", log=True))
    return rep


def suite_lemmas(cfg: Config, opts: Options) -> Report:
    rep = Report("lemmas", cfg.hash, cfg.seed)
    datum = cfg.datum
    cases = ["sum_last", "unipotent"] if cfg.r in (2, 3) else list(lemmas.CASES) if cfg.r == 4 else []
    if not cases:
        rep.add("lemma cases need 2 <= r <= 4", "2..4", cfg.r, "TRIVIAL", passed=False)
        return rep
    S = cfg.budgets.lemma_samples
    rows = {}
    for case in cases:
        res = lemmas.vanishing_lemma(case, datum, S, cfg.seed)
        rows[case] = res.as_dict()
        rep.add(f"{case}: zero sums on {S} stratum points (nonzero count)", 0, res.nonzero_sums, "DERIVED",
                repro={"seed": cfg.seed})
        rep.add(f"{case}: linear form nonconstant (degenerate count)", 0, res.constant_forms, "TRIVIAL")
        for key, val in res.checks.items():
            rep.add(f"{case}: {key}", True, bool(val), "PAPER" if key == "closed_form" else "DERIVED")
    rep.data["cases"] = rows
    rep.figures.append(Figure("lemmas", f"vanishing sums, r={cfg.r} p={cfg.p}", cases,
                              {"samples": [rows[c]["samples"] for c in cases],
                               "nonzero": [rows[c]["nonzero_sums"] for c in cases]}))
    return rep


# ---------------------------------------------------------------- Fourier

def parse_bases(spec: str, datum) -> tuple[str, np.ndarray]:
    n, p = datum.n, datum.p
    if spec == "all":
        return spec, grgroup.gl_elements(n, p)
    if spec == "T":
        return spec, fourier.conjugable_bases(datum, 0, 0)
    if spec.startswith("sample:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise scalars.ConfigurationError(f"bad --bases value {spec!r}") from None
        return spec, None if k < 0 else k
    raise scalars.ConfigurationError(f"--bases must be all, T or sample:K, got {spec!r}")


def _resolve_bases(cfg, datum, spec):
    label, b = parse_bases(spec, datum)
    if isinstance(b, int) or b is None:
        b = fourier.conjugable_bases(datum, b, cfg.seed)
    return b


def _strata_checks(rep: Report, strata: dict, r: int):
    for name, b in sorted(strata.items()):
        what = {"off": "zero off support", "Z'": "zero on Z'"}.get(name)
        if what is None:
            what = "c * lambda_0 on Z" if r == 2 else (
                "c * psi(f) * lambda_0 on Z^{}" if name == "Z^{}" else f"c * q^#Xi * psi(kappa) * lambda_0 on {name}")
        rep.add(f"{what} ({b['points']} points)", b["points"], b["matches"], "PAPER")


def suite_fourier2(cfg: Config, opts: Options, bases: str = "all") -> Report:
    rep = Report("fourier2", cfg.hash, cfg.seed)
    if cfg.r != 2:
        rep.add("fourier2 needs an r = 2 config", 2, cfg.r, "TRIVIAL", passed=False)
        return rep
    datum = cfg.datum
    B = _resolve_bases(cfg, datum, bases)
    res = fourier.fourier_report(datum, B)
    _common_fourier(rep, res)
    _strata_checks(rep, res["strata"], 2)
    if bases == "all":
        want = fourier.parametrized_support_r2(datum)
        rep.add("support size = |C| * |T|", want, res["support_size"], "PAPER")
    rep.data.update(res)
    rep.data["bases"] = bases
    _strata_figure(rep, res["strata"], "r=2")
    return rep


def _common_fourier(rep, res):
    rep.add("off-support violations", 0, res["off_support_violations"], "PAPER")
    c = res["constant_c"]
    rep.add("single constant c = +-q^k", "+-q^k", c, "DERIVED", passed=c.get("q_power") is not None)
    if "inversion_ok" in res:
        rep.add("Fourier inversion on fiber (first base)", True, res["inversion_ok"], "TRIVIAL")


def _strata_figure(rep, strata, tag):
    names = sorted(strata)
    rep.figures.append(Figure("strata", f"transform strata, {tag}", names,
                              {"points": [strata[k]["points"] for k in names],
                               "matches": [strata[k]["matches"] for k in names]}, log=True))


FULL_FIBER_LIMIT = 3 ** 8


def suite_fourier3(cfg: Config, opts: Options, bases: str | None = None) -> Report:
    rep = Report("fourier3", cfg.hash, cfg.seed)
    datum = cfg.datum
    if cfg.r != 3:
        rep.add("fourier3 needs an r = 3 config", 3, cfg.r, "TRIVIAL", passed=False)
        return rep
    fiber = cfg.p ** (2 * cfg.n * cfg.n)
    if fiber <= FULL_FIBER_LIMIT or cfg.force:
        spec = bases or f"sample:{cfg.budgets.fourier_random_bases}"
        B = _resolve_bases(cfg, datum, spec)
        res = fourier.fourier_report(datum, B, "conj_x", check_stalks=True)
        _common_fourier(rep, res)
        _strata_checks(rep, res["strata"], 3)
        rep.add("stalk model = exhaustive enumeration (mismatches)", 0, res["stalk_mismatches"], "PAPER")
        rep.data.update(res)
        rep.data["bases"] = spec
        strata = res["strata"]
    else:
        k = cfg.budgets.fourier_points
        res = fourier.sampled_report_r3(datum, k, cfg.seed)
        winners = [v for v, rr in res.items() if rr["passed"]]
        rep.add("exactly one frame for f fits (sampled points)", 1, len(winners), "DERIVED")
        rep.add("frame for f is x R_1 x^-1", ["conj_x"], winners, "DERIVED")
        rep.data.update({"mode": "sampled", "points": 2 * k, "variants": res, "f_variant": winners})
        strata = res["conj_x"]["strata"]
    desc = fourier.descent_check_r3(datum, cfg.budgets.affinity_samples, cfg.seed)
    rep.add(f"reduced phase depends on X^- only ({desc['samples']} points)", 0, desc["mismatches"], "PAPER")
    _strata_figure(rep, strata, f"r=3 p={cfg.p}")
    return rep


def suite_fourier4(cfg: Config, opts: Options) -> Report:
    rep = Report("fourier4-sampled", cfg.hash, cfg.seed)
    datum = cfg.datum
    if cfg.r != 4:
        rep.add("fourier4 needs an r = 4 config", 4, cfg.r, "TRIVIAL", passed=False)
        return rep
    b = cfg.budgets
    ch = fourier.chain_r4(datum, b.chain_samples, cfg.seed)
    rep.add(f"rewriting chain expr1 ({b.chain_samples} points)", b.chain_samples, ch["agree"]["expr1"], "PAPER")
    rep.add(f"rewriting chain expr2 ({b.chain_samples} points)", b.chain_samples, ch["agree"]["expr2"], "PAPER")
    rep.add("exactly one coefficient placement fits", 1, len(ch["coefficient_placement"]), "DERIVED")
    tau = fourier.tau_invariance_r4(datum, b.tau_samples, cfg.seed)
    rep.add(f"tau-invariance of reduced phase ({b.tau_samples} points)", 0, tau["mismatches"], "PAPER")
    lp = fourier.last_pair_affinity(datum, b.affinity_samples, cfg.seed)
    rep.add("last pair: affine", True, lp["affine"], "PAPER")
    rep.add("last pair: constant iff R_{r-1} = -_xA_{r-1}", True, lp["constant_iff_on_locus"], "PAPER")
    ub = fourier.upper_block_affinity(datum, b.affinity_samples, cfg.seed)
    rep.add("upper block: affine", True, ub["passed"], "PAPER")
    placement = ch["coefficient_placement"]
    coeffs = fourier.COEFF_VARIANTS[placement[0]] if len(placement) == 1 else (3, 6)
    sampled = fourier.sampled_report_r4(datum, b.fourier_points, cfg.seed, coeffs)
    signs = [s for s, rr in sampled.items() if rr["passed"]]
    rep.add("exactly one sign of the Xi-form condition fits", 1, len(signs), "DERIVED")
    for s, rr in sampled.items():
        rep.data.setdefault("sign_variants", {})[str(s)] = rr
    if len(signs) == 1:
        rr = sampled[signs[0]]
        rep.add("off-support violations (sampled)", 0, rr["off_support_violations"], "PAPER")
        rep.add("single constant c = +-q^k", "+-q^k", rr["constant_c"], "DERIVED",
                passed=rr["constant_c"].get("q_power") is not None)
    rep.data.update({"chain": ch, "tau": tau, "last_pair": lp, "upper_block": ub,
                     "coefficient_placement": placement, "xi_sign": signs})
    rep.figures.append(Figure("chain", "rewriting chain agreement", list(ch["agree"]),
                              {"agree": list(ch["agree"].values())}))
    return rep


RUNNERS = {
    "bch": suite_bch, "group": suite_group, "characters": suite_characters, "ladder": suite_ladder,
    "lemmas": suite_lemmas, "fourier2": suite_fourier2, "fourier3": suite_fourier3,
    "fourier4-sampled": suite_fourier4, "compare-lk": suite_compare_lk,
}


def applicable(cfg: Config) -> list[str]:
    """Suites that make sense for this config, in run order."""
    if cfg.group_only:
        return ["bch", "group"]
    out = ["bch", "group"] if cfg.r >= 2 else ["group"]
    out.append("characters")
    if cfg.r >= 2:
        out.append("ladder")
        if cfg.r <= 3:
            out.append("compare-lk")    # the t_K fiber at r = 4 does not fit in memory
        out.append("lemmas")
        out.append({2: "fourier2", 3: "fourier3", 4: "fourier4-sampled"}[cfg.r])
    return out


def run_suite(name: str, cfg: Config, opts: Options | None = None, **kw) -> Report:
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(RUNNERS)}")
    opts = opts or Options()
    t0 = time.perf_counter()
    rep = RUNNERS[name](cfg, opts, **kw)
    rep.wall_time = time.perf_counter() - t0
    return rep
