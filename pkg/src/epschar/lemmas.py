"""Exponential sums over the affine pieces used to show the ladder pieces vanish.

Each case samples points of a stratum, sums psi(h) over the affine family
attached to the point (a vector space of X's, a unipotent group, or an
orbit of a unipotent group of factored elements) and checks that the
resulting cyclotomic integer is exactly zero.  ``h`` is always evaluated
from the universal BCH polynomials, never from a hand-expanded formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bch, fp, grgroup
from .charfun import GenericDatum, pair_diag, r_prime
from .rng import SplitMix64

CASES = ("sum_last", "orbit_E", "unipotent", "action_n3")


@dataclass
class LemmaResult:
    case: str
    r: int
    p: int
    samples: int
    nonzero_sums: int
    constant_forms: int = 0
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.nonzero_sums == 0 and self.constant_forms == 0 and all(self.checks.values())

    def as_dict(self) -> dict:
        return {"case": self.case, "r": self.r, "p": self.p, "samples": self.samples,
                "nonzero_sums": self.nonzero_sums, "constant_forms": self.constant_forms,
                "checks": dict(self.checks), "passed": self.passed}


# ------------------------------------------------------------- sampling

def _random_in(rng: SplitMix64, cls: str | None, S: int, n: int, p: int) -> np.ndarray:
    """Random matrices in b, t, b - t, outside b, or anywhere (cls None)."""
    Z = rng.randbelow(p, (S, n, n))
    low = np.tril(np.ones((n, n), dtype=np.int64), -1)
    up = np.triu(np.ones((n, n), dtype=np.int64), 1)
    if cls in ("b", "b-t", "t"):
        Z = Z * (1 - low)
    if cls == "t":
        Z = Z * (1 - up)
    if cls == "b-t":
        iu, ju = np.nonzero(up)
        k = rng.randbelow(len(iu), S)
        Z[np.arange(S), iu[k], ju[k]] = rng.randbelow(p - 1, S) + 1
    if cls == "not_b":
        il, jl = np.nonzero(low)
        k = rng.randbelow(len(il), S)
        Z[np.arange(S), il[k], jl[k]] = rng.randbelow(p - 1, S) + 1
    return Z


def _random_b(rng: SplitMix64, kind: str, S: int, n: int, p: int) -> np.ndarray:
    """Invertible b in T, B or B - T."""
    b = _random_in(rng, {"T": "t", "B": "b", "B-T": "b-t"}[kind], S, n, p)
    idx = np.arange(n)
    b[:, idx, idx] = rng.randbelow(p - 1, (S, n)) + 1
    return b


@dataclass
class Frame:
    x: np.ndarray
    xinv: np.ndarray
    y: np.ndarray
    yinv: np.ndarray
    b: np.ndarray


def sample_frame(rng: SplitMix64, kind: str, S: int, n: int, p: int) -> Frame:
    x = grgroup.random_gl(rng, S, n, p)
    xinv = fp.inverse(x, p)
    b = _random_b(rng, kind, S, n, p)
    y = np.matmul(np.matmul(xinv, b) % p, x) % p
    return Frame(x, xinv, y, fp.inverse(y, p), b)


def fill_Y(datum: GenericDatum, fr: Frame, Xs: list, targets: list, rng: SplitMix64) -> list:
    """Choose Y_j so that Ad(x) u_j is a random element of the class targets[j-1]."""
    p, n, r = datum.p, datum.n, datum.r
    S = fr.x.shape[0]
    Xps = [fp.ad(fr.yinv, X, p, fr.y) for X in Xs]
    Ys = []
    for j in range(1, r):
        beta = _random_in(rng, targets[j - 1], S, n, p)
        lin = (Xps[j - 1] - Xs[j - 1]) % p
        up = bch.uprime_values(r, Xps[: j - 1], Ys, Xs[: j - 1], p, j) if j > 1 else 0
        Ys.append((fp.ad(fr.xinv, beta, p, fr.x) - lin - up) % p)
    return Ys


def h_values(datum: GenericDatum, x, xinv, y, yinv, Xs: list, Ys: list) -> np.ndarray:
    """sum_j <A_j, Ad(x) u_j(_yX, Y, X)> mod p, broadcasting over leading axes."""
    p = datum.p
    Xps = [fp.ad(yinv, X, p, y) for X in Xs]
    us = bch.u_values(datum.r, Xps, Ys, Xs, p)
    h = 0
    for j, u in enumerate(us):
        h = h + pair_diag(datum.A_arr[j], fp.ad(x, u, p, xinv))
    return np.asarray(h) % p


def _zero_sums(datum: GenericDatum, h: np.ndarray) -> np.ndarray:
    """Per-sample flags: is sum over the last axis of psi(h) zero?"""
    ctx = datum.ctx
    e = ctx.psi_exp(h)
    S = h.shape[0]
    flat = (np.arange(S)[:, None] * ctx.N + e).ravel()
    counts = np.bincount(flat, minlength=S * ctx.N).reshape(S, ctx.N)
    return ~np.any(ctx.cyc.reduce_counts(counts) != 0, axis=1)


def _ex(a):
    """Add the summation axis after the sample axis."""
    return np.asarray(a)[:, None]


# ---------------------------------------------------------------- cases

def lemma_sum_last(datum: GenericDatum, samples: int, seed: int) -> LemmaResult:
    """B-T conjugate, u_j in b for j <= r-r'-1: sum over X_{r-1} in g."""
    n, p, r = datum.n, datum.p, datum.r
    rng = SplitMix64(seed)
    fr = sample_frame(rng, "B-T", samples, n, p)
    Xs = [grgroup.random_lie(rng, samples, n, p) for _ in range(r - 1)]
    targets = ["b" if j <= r - r_prime(r) - 1 else None for j in range(1, r)]
    Ys = fill_Y(datum, fr, Xs, targets, rng)
    grid = grgroup.lie_elements(n, p)
    Xs_f = [_ex(X) for X in Xs[:-1]] + [grid[None]]
    h = h_values(datum, _ex(fr.x), _ex(fr.xinv), _ex(fr.y), _ex(fr.yinv), Xs_f, [_ex(Y) for Y in Ys])
    ok = _zero_sums(datum, h)
    # the linear form X -> <_xA, _yX - X> is nonzero iff b does not centralize A_{r-1}
    A = datum.A_mat(r - 1)
    form = (fp.ad(fr.b, A, p) - A) % p
    const = ~np.any(form != 0, axis=(-2, -1))
    return LemmaResult("sum_last", r, p, samples, int((~ok).sum()), int(const.sum()))


def lemma_orbit_E(datum: GenericDatum, samples: int, seed: int) -> LemmaResult:
    """r = 4: T-conjugate, u_1 in b - t; sum over the orbit (X_2 + E, X_3 + [E, X_1])."""
    n, p, r = datum.n, datum.p, datum.r
    if r != 4:
        raise ValueError("this orbit sum is set up for r = 4")
    rng = SplitMix64(seed)
    fr = sample_frame(rng, "T", samples, n, p)
    Xs = [grgroup.random_lie(rng, samples, n, p) for _ in range(3)]
    Ys = fill_Y(datum, fr, Xs, ["b-t", None, None], rng)
    E = grgroup.lie_elements(n, p)[None]
    X1 = _ex(Xs[0])
    Xs_f = [X1, (_ex(Xs[1]) + E) % p, (_ex(Xs[2]) + fp.bracket(E, X1, p)) % p]
    h = h_values(datum, _ex(fr.x), _ex(fr.xinv), _ex(fr.y), _ex(fr.yinv), Xs_f, [_ex(Y) for Y in Ys])
    ok = _zero_sums(datum, h)
    Xp1 = fp.ad(fr.yinv, Xs[0], p, fr.y)
    xi = (Xp1 - Xs[0] + Ys[0]) % p
    form = fp.bracket(xi, fp.ad(fr.xinv, datum.A_mat(3), p, fr.x), p)
    const = ~np.any(form != 0, axis=(-2, -1))
    return LemmaResult("orbit_E", r, p, samples, int((~ok).sum()), int(const.sum()))


def lemma_unipotent(datum: GenericDatum, samples: int, seed: int) -> LemmaResult:
    """B-conjugate, u_j in b (j <= r-2), u_{r-1} not in b: sum over x -> v x, v in U."""
    n, p, r = datum.n, datum.p, datum.r
    rng = SplitMix64(seed)
    fr = sample_frame(rng, "B", samples, n, p)
    Xs = [grgroup.random_lie(rng, samples, n, p) for _ in range(r - 1)]
    Ys = fill_Y(datum, fr, Xs, ["b"] * (r - 2) + ["not_b"], rng)
    U = grgroup.unipotent_elements(n, p)[None]
    vx = np.matmul(U, _ex(fr.x)) % p
    vxinv = fp.inverse(vx, p)
    h = h_values(datum, vx, vxinv, _ex(fr.y), _ex(fr.yinv), [_ex(X) for X in Xs], [_ex(Y) for Y in Ys])
    ok = _zero_sums(datum, h)
    # the conjugated element v b v^{-1} stays in B with the same diagonal
    vb = np.matmul(np.matmul(vx, _ex(fr.y)) % p, vxinv) % p
    same_d = np.all(np.diagonal(vb, axis1=-2, axis2=-1) == np.diagonal(_ex(fr.b), axis1=-2, axis2=-1))
    in_b = not np.any(np.tril(vb, -1))
    return LemmaResult("unipotent", r, p, samples, int((~ok).sum()), 0,
                       {"torus_part_constant": bool(same_d), "stays_in_B": bool(in_b)})


def group_action_n3(E, E1, E2, X1, X2, X3, x, xinv, p):
    """Action of |E, E', E''| (E's in n) on (X_1, X_2, X_3), the E's moved by Ad(x^{-1})."""
    i2, i3, i6 = (fp.inv_mod(k, p) for k in (2, 3, 6))
    e, e1, e2 = (fp.ad(xinv, Z, p, x) for Z in (E, E1, E2))
    br = lambda a, b: fp.bracket(a, b, p)
    eX = br(e, X1)
    Y1 = (X1 + e) % p
    Y2 = (X2 + e1 + i2 * eX) % p
    Y3 = (X3 + e2 + br(e1, X1) - i6 * br(e, eX) - i3 * br(X1, eX)) % p
    return Y1, Y2, Y3


def lemma_action_n3(datum: GenericDatum, samples: int, seed: int) -> LemmaResult:
    """r = 4: B-conjugate, u_1 in b, u_2 not in b: sum over the n^3 orbit.

    Also checks that the action preserves both membership conditions and
    that h(E, E', E'') - h(0, E', E'') = <S, [_xA_3, _xE]> with S = u_2
    at the base point.
    """
    n, p, r = datum.n, datum.p, datum.r
    if r != 4:
        raise ValueError("this orbit sum is set up for r = 4")
    rng = SplitMix64(seed)
    fr = sample_frame(rng, "B", samples, n, p)
    Xs = [grgroup.random_lie(rng, samples, n, p) for _ in range(3)]
    Ys = fill_Y(datum, fr, Xs, ["b", "not_b", None], rng)
    nil = grgroup.unipotent_elements(n, p) - np.eye(n, dtype=np.int64)
    m = nil.shape[0]
    I, J, K = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
    E, E1, E2 = nil[I.ravel()][None], nil[J.ravel()][None], nil[K.ravel()][None]
    x, xinv, y, yinv = _ex(fr.x), _ex(fr.xinv), _ex(fr.y), _ex(fr.yinv)
    Xa = group_action_n3(E, E1, E2, _ex(Xs[0]), _ex(Xs[1]), _ex(Xs[2]), x, xinv, p)
    Ye = [_ex(Y) for Y in Ys]
    h = h_values(datum, x, xinv, y, yinv, list(Xa), Ye)
    ok = _zero_sums(datum, h)
    # membership conditions along the orbit
    Xps = [fp.ad(yinv, X, p, y) for X in Xa]
    us = bch.u_values(r, Xps, Ye, list(Xa), p, upto=2)
    low = np.tril(np.ones((n, n), dtype=bool), -1)
    xu1 = fp.ad(x, us[0], p, xinv)
    xu2 = fp.ad(x, us[1], p, xinv)
    keeps_b = not np.any((xu1 != 0) & low)
    keeps_not_b = bool(np.all(np.any((xu2 != 0) & low, axis=(-2, -1))))
    # closed form in E for fixed E', E''
    S = bch.u_values(r, [fp.ad(fr.yinv, Xs[0], p, fr.y), fp.ad(fr.yinv, Xs[1], p, fr.y)],
                     Ys[:2], Xs[:2], p, upto=2)[1]
    A3 = datum.A_mat(3)
    xA3 = fp.ad(fr.xinv, A3, p, fr.x)
    pred = fp.trace_form(_ex(S), fp.bracket(_ex(xA3), fp.ad(xinv, E, p, x), p), p)
    h_grid = h.reshape(samples, m, m, m)
    pred_grid = np.broadcast_to(pred, h.shape).reshape(samples, m, m, m)
    closed = np.all((h_grid - h_grid[:, :1] - pred_grid) % p == 0)
    return LemmaResult("action_n3", r, p, samples, int((~ok).sum()), 0,
                       {"preserves_u1_in_b": bool(keeps_b), "preserves_u2_not_in_b": keeps_not_b,
                        "closed_form": bool(closed)})


_RUNNERS = {"sum_last": lemma_sum_last, "orbit_E": lemma_orbit_E, "unipotent": lemma_unipotent, "action_n3": lemma_action_n3}


def vanishing_lemma(case: str, datum: GenericDatum, samples: int = 1000, seed: int = 1) -> LemmaResult:
    if case not in _RUNNERS:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    return _RUNNERS[case](datum, samples, seed)
