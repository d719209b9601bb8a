"""Fiberwise Fourier transform of t_K along g^{r-1} and the predicted
support/values of the result.

The transform at a base y is
``t^(y|R|) = sum_Y t_K(y|Y|) psi(sum_j <Y_j, R_j>)`` with ``<Y, R> = tr(Y R)``.
It is computed on exponent-count tables, one coordinate axis at a time.

Predictions are expressed in the frame where the last R is diagonal:
``x`` is a representative with ``x R_{r-1} x^{-1} = -A_{r-1}``, ``t = x y x^{-1}``
and ``R~ = x R x^{-1}``.  A prediction is a pair ``(m, e)`` meaning
``q^m zeta_N^e``; the observed value must equal ``c q^m zeta_N^e`` with
one constant ``c`` per datum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bch, fp, grgroup, liealg
from .charfun import GenericDatum, fiber_counts, k_spec, pair_diag
from .rng import SplitMix64
from .scalars import CycValue

# ---------------------------------------------------------------- fibers


def fiber_points(n: int, p: int, k: int) -> np.ndarray:
    """Every point of g^k in row-major coordinate order, shape (p^(k n^2), k, n, n)."""
    D = k * n * n
    grid = np.indices((p,) * D).reshape(D, -1).T
    return grid.reshape(-1, k, n, n).astype(np.int64)


def point_index(Rs: np.ndarray, p: int) -> int:
    flat = np.asarray(Rs, dtype=np.int64).ravel() % p
    out = 0
    for v in flat:
        out = out * p + int(v)
    return out


def dft_fiber(counts: np.ndarray, ctx, n: int, k: int, sign: int = 1) -> np.ndarray:
    """Transform a (p^(k n^2), N) count table over g^k; output indexed like the input."""
    p, N = ctx.p, ctx.N
    D = k * n * n
    if counts.shape != (p ** D, N):
        raise ValueError(f"expected a ({p ** D}, {N}) table, got {counts.shape}")
    arr = counts.reshape((p,) * D + (N,))
    for d in range(D):
        a = np.moveaxis(arr, d, 0)
        out = np.zeros_like(a)
        for rr in range(p):
            for yy in range(p):
                out[rr] += np.roll(a[yy], (sign * ctx.psi_step * yy * rr) % N, axis=-1)
        arr = np.moveaxis(out, 0, d)
    # coordinate (j, a, b) of the dual variable pairs with entry (j, b, a)
    axes = [j * n * n + b * n + a for j in range(k) for a in range(n) for b in range(n)]
    arr = np.transpose(arr, axes + [D])
    return np.ascontiguousarray(arr).reshape(p ** D, N)


def fiber_t_K(datum: GenericDatum, y: np.ndarray) -> np.ndarray:
    """Count table of t_K over the whole fiber above y."""
    pts = fiber_points(datum.n, datum.p, datum.r - 1)
    spec = k_spec(datum.r)
    return fiber_counts(datum, y, pts, [spec])[spec.name]


# ------------------------------------------------------------ frame data

@dataclass
class Frame:
    x: np.ndarray
    xinv: np.ndarray
    t: np.ndarray            # diagonal of x y x^{-1}
    Rt: list                 # x R_j x^{-1}


def frame_for(datum: GenericDatum, y: np.ndarray, Rs: np.ndarray) -> Frame | None:
    """Frame attached to y|Rs|, or None when R_{r-1} is off the orbit or y is not in T_R."""
    p = datum.p
    R = np.asarray(Rs[-1]) % p
    if not liealg.same_char_poly_as(R, (-datum.A_arr[-1]) % p, p):
        return None
    _, x = liealg.centralizer(R, p, target=datum.A_mat(datum.r - 1))
    xinv = fp.inverse(x, p)
    b = x @ y @ xinv % p
    if np.any(b[~np.eye(datum.n, dtype=bool)]):
        return None
    Rt = [x @ np.asarray(Rj) @ xinv % p for Rj in Rs]
    return Frame(x, xinv, np.diagonal(b).copy(), Rt)


@dataclass
class Prediction:
    stratum: str                    # "off", "Z'", or "Z^{...}"
    q_power: int | None = None      # None for a predicted zero
    exponent: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def zero(self) -> bool:
        return self.q_power is None


def _xi_name(xi) -> str:
    return "Z^{" + ",".join(f"{i}{j}" for i, j in sorted(xi)) + "}"


# ------------------------------------------------------------------ r = 2

def predict_r2(datum: GenericDatum, y, Rs) -> Prediction:
    ctx = datum.ctx
    fr = frame_for(datum, y, Rs)
    if fr is None:
        return Prediction("off")
    return Prediction("Z", 0, int(ctx.lambda0_exp(datum.lam, fr.t)))


# ------------------------------------------------------------------ r = 3

F_VARIANTS = ("conj_x", "conj_xinv")


def f_r3(datum: GenericDatum, t, R1t: np.ndarray, skip=frozenset()) -> int:
    """sum over positive roots not in ``skip`` of 2/alpha(A_2) (1-e^a)/(1+e^a) R^a R^-a, in the frame."""
    p = datum.p
    A2 = datum.A_arr[1]
    total = 0
    for (i, j) in liealg.RootDatum(datum.n).positive:
        if (i, j) in skip:
            continue
        a = liealg.RootDatum.alpha((i, j), A2, p)
        e = liealg.RootDatum.e_alpha((i, j), t, p)
        num = 2 * (1 - e) % p
        den = a * (1 + e) % p
        total += num * fp.inv_mod(den, p) * int(R1t[i, j]) * int(R1t[j, i])
    return total % p


def predict_r3(datum: GenericDatum, y, Rs, variant: str = "conj_x") -> Prediction:
    """Support, stratum and predicted value on the fiber above y.

    ``variant`` picks the frame used for R_1 inside f: ``conj_x`` uses
    x R_1 x^{-1} (the frame in which R_2 = -A_2), ``conj_xinv`` uses
    x^{-1} R_1 x.
    """
    ctx, p = datum.ctx, datum.p
    fr = frame_for(datum, y, Rs)
    if fr is None:
        return Prediction("off")
    R1t = fr.Rt[0]
    if np.any((np.diagonal(R1t) + datum.A_arr[0]) % p):
        return Prediction("off")
    xi = liealg.xi_y(fr.t, p)
    for (i, j) in xi:
        if R1t[i, j] or R1t[j, i]:
            return Prediction("Z'")
    R1f = R1t if variant == "conj_x" else fr.xinv @ np.asarray(Rs[0]) @ fr.x % p
    kappa = f_r3(datum, fr.t, R1f, skip=xi)
    e = int(ctx.lambda0_exp(datum.lam, fr.t)) + int(ctx.psi_exp(kappa))
    return Prediction(_xi_name(xi), len(xi), e % ctx.N, {"kappa": kappa})


def stalk_profile_r3(datum: GenericDatum, y, Rs) -> dict:
    """Exhaustive enumeration of the stalk of the descended sum versus its affine model.

    Enumerates X in the negative root spaces of the frame, keeps those with
    A_1 + R~_1 + [A_2, X + _tX]/2 upper nilpotent, and compares solution
    count and the values of <X - _tX, R~_1> with the model in which each
    X^{-a} is pinned by a(A_2)(1 + e^a(t)) X^{-a}/2 = R~^{-a}.
    """
    p, n = datum.p, datum.n
    fr = frame_for(datum, y, Rs)
    if fr is None:
        return {"in_frame": False}
    R1t = fr.Rt[0]
    A1, A2 = datum.A_mat(1), datum.A_mat(2)
    t = np.diag(fr.t)
    tinv = fp.inverse(t, p)
    neg = liealg.RootDatum(n).negative
    sols, hvals = 0, set()
    for vals in np.ndindex(*([p] * len(neg))):
        X = np.zeros((n, n), dtype=np.int64)
        for (i, j), v in zip(neg, vals):
            X[i, j] = v
        tX = tinv @ X @ t % p
        M = (A1 + R1t + fp.inv_mod(2, p) * fp.bracket(A2, (X + tX) % p, p)) % p
        if np.any(np.tril(M)):
            continue
        sols += 1
        hvals.add(int(fp.trace_form((X - tX) % p, R1t, p)))
    # affine model
    model_sols, model_free, model_const, consistent = 1, 0, True, True
    model_val = 0
    for (i, j) in liealg.RootDatum(n).positive:
        a = liealg.RootDatum.alpha((i, j), datum.A_arr[1], p)
        e = liealg.RootDatum.e_alpha((i, j), fr.t, p)
        coef = a * (1 + e) * fp.inv_mod(2, p) % p
        if coef == 0:
            if R1t[j, i] % p:
                consistent = False
            else:
                model_free += 1
                if (1 - e) % p and R1t[i, j] % p:
                    model_const = False
        else:
            Xm = int(R1t[j, i]) * fp.inv_mod(coef, p) % p
            model_val += (1 - e) * Xm * int(R1t[i, j])
    model_sols = p ** model_free if consistent else 0
    return {"in_frame": True, "solutions": sols, "model_solutions": model_sols,
            "h_values": sorted(hvals), "model_constant": consistent and model_const,
            "model_value": model_val % p if consistent and model_const else None,
            "agree": sols == model_sols and (
                not consistent or (len(hvals) == 1) == model_const and
                (not model_const or hvals == {model_val % p}))}


def descent_check_r3(datum: GenericDatum, samples: int, seed: int) -> dict:
    """On random points of the constrained locus, the reduced phase only sees the negative part of X_1."""
    p, n = datum.p, datum.n
    rng = SplitMix64(seed)
    i2 = fp.inv_mod(2, p)
    bad = 0
    for _ in range(samples):
        x = grgroup.random_gl(rng, 1, n, p)[0]
        xinv = fp.inverse(x, p)
        t = np.diag(rng.randbelow(p - 1, n) + 1)
        y = xinv @ t @ x % p
        yinv = fp.inverse(y, p)
        X1 = grgroup.random_lie(rng, 1, n, p)[0]
        nu = np.triu(rng.randbelow(p, (n, n)), 1)
        xA1, xA2 = (xinv @ datum.A_mat(j) @ x % p for j in (1, 2))
        yX = yinv @ X1 @ y % p
        R1 = (-xA1 - i2 * fp.bracket(xA2, (X1 + yX) % p, p) + xinv @ nu @ x) % p
        R2 = (-xA2) % p
        h0 = (fp.trace_form((X1 - yX) % p, R1, p) + i2 * fp.trace_form(xA2, fp.bracket(yX, X1, p), p)) % p
        Xm, _, _ = liealg.pm0_decompose(R2, X1, p, x)
        yXm = yinv @ Xm @ y % p
        hh = fp.trace_form((Xm - yXm) % p, R1, p) % p
        bad += int(h0 != hh)
    return {"samples": samples, "mismatches": bad, "passed": bad == 0}


# ------------------------------------------------------------------ r = 4

COEFF_VARIANTS = {"third_on_XX": (3, 6), "sixth_on_XX": (6, 3)}
SIGN_VARIANTS = (+1, -1)


def _inv(k, p):
    return fp.inv_mod(k, p)


def xi_form(R: np.ndarray, z: np.ndarray, xi: np.ndarray, p: int) -> np.ndarray:
    """[X, Ad(z) xi] for some X with [X, R] = xi (defined modulo t_R^perp)."""
    X = liealg.solve_bracket(R, xi, p)
    if X is None:
        raise ValueError("xi is not in the image of ad(R)")
    return fp.bracket(X, fp.ad(z, xi, p), p)


def predict_r4(datum: GenericDatum, y, Rs, sign: int = -1) -> Prediction:
    """Support predicate with the Xi-form condition taken with ``sign``, and the phase h^.

    ``sign=+1`` reads the last condition as R_1 + _xA_1 + Xi_1/3 + Xi_{y^-1}/6 = 0 mod t_R^perp;
    ``sign=-1`` flips both Xi terms.
    """
    ctx, p, n = datum.ctx, datum.p, datum.n
    fr = frame_for(datum, y, Rs)
    if fr is None:
        return Prediction("off")
    x, xinv = fr.x, fr.xinv
    R1, R2, R3 = (np.asarray(R) % p for R in Rs)
    xA = [xinv @ datum.A_mat(j) @ x % p for j in (1, 2, 3)]
    R2p = (R2 + xA[1]) % p
    if np.any(np.diagonal(x @ R2p @ xinv % p)):
        return Prediction("off")
    yinv = fp.inverse(y, p)
    cond = (R1 + xA[0] + sign * (_inv(3, p) * xi_form(R3, fp.eye(n), R2p, p)
                                 + _inv(6, p) * xi_form(R3, yinv, R2p, p))) % p
    if np.any(np.diagonal(x @ cond @ xinv % p)):
        return Prediction("off")
    X1 = liealg.solve_bracket(-R3 % p, R2p, p)     # [X_1, _xA_3] = R_2 + _xA_2
    hh = h0_r4(datum, x, xinv, y, X1, R1)
    e = int(ctx.lambda0_exp(datum.lam, fr.t)) + int(ctx.psi_exp(hh))
    return Prediction("Z", 0, e % ctx.N, {"h_hat": hh})


def h0_r4(datum: GenericDatum, x, xinv, y, X1, R1) -> int:
    """Reduced phase on the constrained locus (independent of the torus shift of X_1)."""
    p = datum.p
    yinv = fp.inverse(y, p)
    yX = yinv @ X1 @ y % p
    xA2 = xinv @ datum.A_mat(2) @ x % p
    xA3 = xinv @ datum.A_mat(3) @ x % p
    br = lambda a, b: fp.bracket(a, b, p)
    i2, i6 = _inv(2, p), _inv(6, p)
    val = fp.trace_form((X1 - yX) % p, R1, p)
    val += i2 * fp.trace_form(xA2, br(yX, X1), p)
    val += i6 * fp.trace_form(xA3, (br(yX, br(yX, X1)) + br(X1, br(yX, X1))) % p, p)
    return int(val % p)


def htilde(datum: GenericDatum, x, xinv, y, Xs, Ys, Rs) -> np.ndarray:
    """sum_j <Y_j, R_j> + sum_j <A_j, Ad(x) u_j>, all j in 1..r-1 (batched)."""
    p = datum.p
    yinv = fp.inverse(y, p)
    Xps = [fp.ad(yinv, X, p, y) for X in Xs]
    us = bch.u_values(datum.r, Xps, Ys, Xs, p)
    h = 0
    for j, u in enumerate(us):
        h = h + pair_diag(datum.A_arr[j], fp.ad(x, u, p, xinv)) + fp.trace_form(Ys[j], Rs[j], p)
    return np.asarray(h) % p


def t_hat_point(datum: GenericDatum, y, Rs) -> tuple[CycValue, int]:
    """Exact transform of t_K at one point y|Rs| (r in 2, 3, 4).

    The variables (X_j, Y_j) with j >= r - r' enter the phase affinely, so
    their sum is q^(dim) psi(const) when the linear part vanishes and 0
    otherwise; the linear part is read off at basis vectors.  For r >= 3 the
    pair (X_1, Y_1) is enumerated with Y_1 = X_1 - _yX_1 + _x beta, beta
    running over t (r = 4) or b (r = 3).  Returns (value, contributing rows).
    """
    ctx, p, n, r = datum.ctx, datum.p, datum.n, datum.r
    if r not in (2, 3, 4):
        raise ValueError("pointwise transform is set up for r in 2, 3, 4")
    y = np.asarray(y) % p
    yinv = fp.inverse(y, p)
    Rs = [np.asarray(R) % p for R in Rs]
    lo = r - r // 2                      # first eliminated index
    m = r - lo                           # eliminated X's (and as many Y's)
    if lo > 1:
        mask = np.eye(n, dtype=bool) if r % 2 == 0 else np.triu(np.ones((n, n), dtype=bool))
        betas = grgroup.pattern_elements(mask, n, p, None)
        grid = grgroup.lie_elements(n, p)
    counts = np.zeros(ctx.N, dtype=np.int64)
    rows = 0
    basis = liealg.basis(n)
    for x in grgroup.torus_coset_reps(n, p):
        xinv = fp.inverse(x, p)
        b = x @ y @ xinv % p
        if np.any(b[~np.eye(n, dtype=bool)]):
            continue
        lam_e = int(ctx.lambda0_exp(datum.lam, np.diagonal(b)))
        if lo > 1:
            X1 = np.repeat(grid, len(betas), axis=0)
            beta = np.tile(betas, (len(grid), 1, 1))
            Y1 = (X1 - yinv @ X1 @ y + xinv @ beta @ x) % p
            low_X, low_Y = [X1], [Y1]
            M = X1.shape[0]
        else:
            low_X, low_Y, M = [], [], 1
        zero = np.zeros((M, n, n), dtype=np.int64)

        def F(block):
            return htilde(datum, x, xinv, y, low_X + block[:m], low_Y + block[m:], Rs)

        base = np.broadcast_to(F([zero] * (2 * m)), (M,))
        ok = np.ones(M, dtype=bool)
        for slot in range(2 * m):
            for E in basis:
                blk = [zero] * (2 * m)
                blk[slot] = np.broadcast_to(E, (M, n, n))
                ok &= (F(blk) - base) % p == 0
        rows += int(ok.sum())
        counts += np.bincount((ctx.psi_exp(base[ok]) + lam_e) % ctx.N, minlength=ctx.N)
    val = ctx.cyc.from_counts(counts) * ctx.cyc.integer(p ** (2 * m * n * n))
    return val, rows


# ------------------------------------------------------- identity checks

def _random_T_frame(rng: SplitMix64, n: int, p: int):
    x = grgroup.random_gl(rng, 1, n, p)[0]
    xinv = fp.inverse(x, p)
    t = np.diag(rng.randbelow(p - 1, n) + 1)
    y = xinv @ t @ x % p
    return x, xinv, y, fp.inverse(y, p)


def chain_r4(datum: GenericDatum, samples: int, seed: int) -> dict:
    """Compare the reduced phase through its successive rewritings at random constrained points.

    expr0: direct evaluation from the universal polynomials;
    expr1: the bracket expansion with Y_1 = X_1 - _yX_1 + _x tau substituted;
    expr2: after dropping terms that pair to zero against the torus;
    expr3: collected form, for each coefficient placement in COEFF_VARIANTS.
    """
    p, n = datum.p, datum.n
    rng = SplitMix64(seed)
    br = lambda a, b: fp.bracket(a, b, p)
    tf = lambda a, b: int(fp.trace_form(a, b, p))
    i2, i3, i6 = _inv(2, p), _inv(3, p), _inv(6, p)
    agree = {"expr1": 0, "expr2": 0}
    agree.update({k: 0 for k in COEFF_VARIANTS})
    for _ in range(samples):
        x, xinv, y, yinv = _random_T_frame(rng, n, p)
        tau = np.diag(rng.randbelow(p, n))
        X1, X2, Y2, R1, R2 = grgroup.random_lie(rng, 5, n, p)
        xA1, xA2, xA3 = (xinv @ datum.A_mat(j) @ x % p for j in (1, 2, 3))
        xt = xinv @ tau @ x % p
        yX1, yX2 = yinv @ X1 @ y % p, yinv @ X2 @ y % p
        Y1 = (X1 - yX1 + xt) % p
        # expr0: <Y1,R1>+<Y2,R2>+sum_{j<=2}<_xA_j,u_j>+<_xA_3,u'_3>
        us = bch.u_values(4, [yX1, yX2], [Y1, Y2], [X1, X2], p, upto=2)
        up3 = bch.uprime_values(4, [yX1, yX2], [Y1, Y2], [X1, X2], p, 3)
        e0 = (tf(Y1, R1) + tf(Y2, R2) + tf(xA1, us[0]) + tf(xA2, us[1]) + tf(xA3, up3)) % p
        # expr1
        a = (X1 - yX1 + xt) % p
        m = (-yX1 + xt) % p
        s1 = (yX2 - X2 + Y2 + i2 * br(yX1, (X1 + xt) % p) - i2 * br(yX1, X1) - i2 * br(m, X1)) % p
        s3 = (br(yX2, a) + br(X2, X1) - br(yX2, X1) - br(Y2, X1)
              - i6 * br(yX1, br(yX1, (X1 + xt) % p)) - i3 * br(a, br(yX1, (X1 + xt) % p))
              + i2 * br(X1, br(yX1, (X1 + xt) % p)) + i6 * br(yX1, br(yX1, X1))
              + i6 * br(yX1, br(m, X1)) + i6 * br(a, br(yX1, X1)) + i6 * br(a, br(m, X1))
              - i3 * br(X1, br(yX1, X1)) - i3 * br(X1, br(m, X1))) % p
        e1 = (tf(a, R1) + tf(Y2, R2) + tf(xA1, xt) + tf(xA2, s1) + tf(xA3, s3)) % p
        # expr2
        s3b = (-br(Y2, X1) + i6 * br(yX1, br(yX1, xt)) + i6 * br(X1, br(X1, xt))
               + i6 * br(X1, br(yX1, xt)) + i6 * br(yX1, br(yX1, X1)) + i6 * br(X1, br(yX1, X1))) % p
        e2 = (tf(a, R1) + tf(Y2, R2) + tf(xA1, xt) + tf(xA2, (Y2 - i2 * br((-yX1) % p, X1)) % p)
              + tf(xA3, s3b)) % p
        agree["expr1"] += int(e1 == e0)
        agree["expr2"] += int(e2 == e0)
        # expr3
        for name, (dXX, dXyX) in COEFF_VARIANTS.items():
            v = (R1 + xA1 + _inv(dXX, p) * br(X1, br(X1, xA3)) + _inv(dXyX, p) * br(X1, br(yX1, xA3))) % p
            e3 = (tf(Y2, (R2 + xA2 - br(X1, xA3)) % p) + tf(xt, v) + tf((X1 - yX1) % p, R1)
                  + i2 * tf(xA2, br(yX1, X1))
                  + tf(xA3, (i6 * br(yX1, br(yX1, X1)) + i6 * br(X1, br(yX1, X1))) % p)) % p
            agree[name] += int(e3 == e0)
    winners = [k for k in COEFF_VARIANTS if agree[k] == samples]
    return {"samples": samples, "agree": agree, "coefficient_placement": winners,
            "passed": agree["expr1"] == samples and agree["expr2"] == samples and len(winners) == 1}


def tau_invariance_r4(datum: GenericDatum, samples: int, seed: int) -> dict:
    """The reduced phase is unchanged by X_1 -> X_1 + _x tau on the constrained locus."""
    p, n = datum.p, datum.n
    rng = SplitMix64(seed)
    bad = 0
    for _ in range(samples):
        x, xinv, y, yinv = _random_T_frame(rng, n, p)
        X1, R1 = grgroup.random_lie(rng, 2, n, p)
        tau = np.diag(rng.randbelow(p, n))
        h1 = h0_r4(datum, x, xinv, y, X1, R1)
        h2 = h0_r4(datum, x, xinv, y, (X1 + xinv @ tau @ x) % p, R1)
        bad += int(h1 != h2)
    return {"samples": samples, "mismatches": bad, "passed": bad == 0}


def _affine_check(F, dims: int, nvars: int, n: int, p: int, rng: SplitMix64, probes: int):
    """Return (affine?, linear coefficients) for F on g^nvars (batched over the first axis)."""
    zero = [np.zeros((1, n, n), dtype=np.int64)] * nvars
    base = F(zero)
    coeffs = []
    for slot in range(nvars):
        for E in liealg.basis(n):
            v = list(zero)
            v[slot] = E[None]
            coeffs.append((F(v) - base) % p)
    coeffs = np.array(coeffs)[:, 0].reshape(nvars, n, n)
    V = rng.randbelow(p, (probes, nvars, n, n))
    vals = F([V[:, s] for s in range(nvars)])
    pred = (base + np.einsum("sab,ksab->k", coeffs, V)) % p
    return bool(np.all(vals == pred)), coeffs


def last_pair_affinity(datum: GenericDatum, samples: int, seed: int, exhaustive: bool = False) -> dict:
    """htilde restricted to (X_{r-1}, Y_{r-1}) is affine, constant iff R_{r-1} = -_xA_{r-1}."""
    p, n, r = datum.p, datum.n, datum.r
    rng = SplitMix64(seed)
    ok_aff, ok_const, trials = True, True, 0
    for _ in range(samples):
        x, xinv, y, yinv = _random_T_frame(rng, n, p)
        Xs = list(grgroup.random_lie(rng, r - 1, n, p))
        Ys = list(grgroup.random_lie(rng, r - 1, n, p))
        Rs = list(grgroup.random_lie(rng, r - 1, n, p))
        xA = xinv @ datum.A_mat(r - 1) @ x % p
        for on_locus in (True, False):
            R = list(Rs)
            if on_locus:
                R[-1] = (-xA) % p
            elif np.all((R[-1] + xA) % p == 0):
                continue

            def F(v):
                X = [np.broadcast_to(a, v[0].shape) for a in Xs[:-1]] + [v[0]]
                Y = [np.broadcast_to(a, v[1].shape) for a in Ys[:-1]] + [v[1]]
                return htilde(datum, x, xinv, y, X, Y, R)

            if exhaustive:
                pts = fiber_points(n, p, 2)
                vals = F([pts[:, 0], pts[:, 1]])
                aff, lin = _affine_check(F, 2 * n * n, 2, n, p, rng, 1)
                pred = (vals[0] + np.einsum("sab,ksab->k", lin, pts)) % p
                aff = aff and bool(np.all(pred == vals))
            else:
                aff, lin = _affine_check(F, 2 * n * n, 2, n, p, rng, 32)
            const = not np.any(lin)
            ok_aff &= aff
            ok_const &= const == on_locus
            trials += 1
    return {"trials": trials, "affine": ok_aff, "constant_iff_on_locus": ok_const,
            "passed": ok_aff and ok_const}


def upper_block_affinity(datum: GenericDatum, samples: int, seed: int) -> dict:
    """htilde is affine in (X_j, Y_j) for j >= r - r' jointly (r = 4: X_2, X_3, Y_2, Y_3)."""
    p, n, r = datum.p, datum.n, datum.r
    rng = SplitMix64(seed)
    lo = r - r // 2
    ok = True
    for _ in range(samples):
        x, xinv, y, yinv = _random_T_frame(rng, n, p)
        Xs = list(grgroup.random_lie(rng, r - 1, n, p))
        Ys = list(grgroup.random_lie(rng, r - 1, n, p))
        Rs = list(grgroup.random_lie(rng, r - 1, n, p))
        m = r - lo

        def F(v):
            shape = v[0].shape
            X = [np.broadcast_to(a, shape) for a in Xs[: lo - 1]] + list(v[:m])
            Y = [np.broadcast_to(a, shape) for a in Ys[: lo - 1]] + list(v[m:])
            return htilde(datum, x, xinv, y, X, Y, Rs)

        aff, _ = _affine_check(F, 2 * m * n * n, 2 * m, n, p, rng, 32)
        ok &= aff
    return {"samples": samples, "passed": bool(ok)}


# -------------------------------------------------------------- reports

def conjugable_bases(datum: GenericDatum, count: int, seed: int) -> np.ndarray:
    """Torus elements plus ``count`` random conjugates of torus elements."""
    n, p = datum.n, datum.p
    tor = np.array([np.diag(d) for d in np.ndindex(*([p - 1] * n))], dtype=np.int64) + np.eye(n, dtype=np.int64)
    rng = SplitMix64(seed)
    x = grgroup.random_gl(rng, count, n, p)
    t = tor[rng.randbelow(len(tor), count)]
    conj = np.matmul(np.matmul(fp.inverse(x, p), t) % p, x) % p
    return np.concatenate([tor, conj]) if count else tor


class _Fit:
    """Accumulates the single constant c with observed = c q^m zeta^e."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.c = None
        self.consistent = True

    def add(self, observed: CycValue, pred: Prediction) -> bool:
        cyc = self.ctx.cyc
        ratio = observed * cyc.root(-pred.exponent)
        q = self.ctx.p ** pred.q_power
        try:
            ratio = ratio.exact_div(q)
        except ArithmeticError:
            self.consistent = False
            return False
        if self.c is None:
            self.c = ratio
        ok = ratio == self.c
        self.consistent &= ok
        return ok

    def as_dict(self) -> dict:
        if self.c is None:
            return {"sign": None, "q_power": None, "value": None}
        m = self.c.rational_integer()
        if m is None or m == 0:
            return {"sign": None, "q_power": None, "value": str(self.c)}
        k, a = 0, abs(m)
        while a % self.ctx.p == 0:
            a //= self.ctx.p
            k += 1
        if a != 1:
            return {"sign": None, "q_power": None, "value": m}
        return {"sign": 1 if m > 0 else -1, "q_power": k, "value": m}


def _stratum_bucket(strata: dict, name: str):
    return strata.setdefault(name, {"points": 0, "matches": 0})


def fourier_report(datum: GenericDatum, bases: np.ndarray, variant: str = "conj_x",
                   check_stalks: bool = True) -> dict:
    """Full-fiber transform over each base and comparison with the predictions (r = 2, 3)."""
    ctx, p, n, r = datum.ctx, datum.p, datum.n, datum.r
    if r not in (2, 3):
        raise ValueError("full-fiber reports are for r = 2 or 3; use sampled_report_r4")
    pts = fiber_points(n, p, r - 1)
    fit = _Fit(ctx)
    strata: dict = {}
    support = off_viol = 0
    inversion_ok = True
    stalk_bad = 0
    for bi, y in enumerate(bases):
        table = fiber_t_K(datum, y)
        hat = dft_fiber(table, ctx, n, r - 1, +1)
        if bi == 0:
            back = dft_fiber(hat, ctx, n, r - 1, -1)
            lhs = ctx.cyc.reduce_counts(back)
            rhs = ctx.cyc.reduce_counts(table) * p ** ((r - 1) * n * n)
            inversion_ok = bool(np.array_equal(lhs, rhs))
        red = ctx.cyc.reduce_counts(hat)
        for k, Rs in enumerate(pts):
            pred = predict_r2(datum, y, Rs) if r == 2 else predict_r3(datum, y, Rs, variant)
            obs = ctx.cyc.value(red[k])
            bucket = _stratum_bucket(strata, pred.stratum)
            bucket["points"] += 1
            if pred.zero:
                ok = obs.is_zero()
                off_viol += int(not ok)
            else:
                support += 1
                ok = fit.add(obs, pred)
                if r == 3 and check_stalks:
                    prof = stalk_profile_r3(datum, y, Rs)
                    stalk_bad += int(not prof["agree"])
            bucket["matches"] += int(ok)
    passed = (off_viol == 0 and fit.consistent and fit.c is not None
              and fit.as_dict()["q_power"] is not None and inversion_ok and stalk_bad == 0
              and all(b["points"] == b["matches"] for b in strata.values()))
    out = {"r": r, "n": n, "p": p, "bases": len(bases), "support_size": support,
           "off_support_violations": off_viol, "constant_c": fit.as_dict(), "strata": strata,
           "inversion_ok": inversion_ok, "status": "pass" if passed else "fail"}
    if r == 3:
        out["f_variant"] = variant
        out["stalk_mismatches"] = stalk_bad
    return out


def parametrized_support_r2(datum: GenericDatum) -> int:
    """|C| * |T|: orbit size of -A_1 times the torus order."""
    n, p = datum.n, datum.p
    return grgroup.order_gl(n, p) // (p - 1) ** n * (p - 1) ** n


def sample_support_r4(datum: GenericDatum, count: int, seed: int, placement=(3, 6)):
    """Points built from the constrained locus, plus one perturbed neighbour per point.

    ``placement`` gives the denominators on [X_1,[X_1,_xA_3]] and
    [X_1,[_yX_1,_xA_3]] in the torus condition on R_1.
    """
    p, n = datum.p, datum.n
    rng = SplitMix64(seed)
    on, off = [], []
    e00 = np.zeros((n, n), dtype=np.int64)
    e00[0, 0] = 1
    shift = fp.eye(n) + np.eye(n, k=1, dtype=np.int64)
    for k in range(count):
        x, xinv, y, yinv = _random_T_frame(rng, n, p)
        xA = [xinv @ datum.A_mat(j) @ x % p for j in (1, 2, 3)]
        X1 = grgroup.random_lie(rng, 1, n, p)[0]
        yX = yinv @ X1 @ y % p
        br = lambda a, b: fp.bracket(a, b, p)
        R3 = (-xA[2]) % p
        R2 = (-xA[1] + br(X1, xA[2])) % p
        nu = rng.randbelow(p, (n, n)) * (1 - np.eye(n, dtype=np.int64))
        core = (xA[0] + _inv(placement[0], p) * br(X1, br(X1, xA[2]))
                + _inv(placement[1], p) * br(X1, br(yX, xA[2]))) % p
        R1 = (-core + xinv @ nu @ x) % p
        on.append((y, np.stack([R1, R2, R3])))
        R1b, R2b, R3b, yb = R1.copy(), R2.copy(), R3.copy(), y.copy()
        kind = k % 4
        if kind == 0:
            R1b = (R1 + xinv @ e00 @ x) % p
        elif kind == 1:
            R2b = (R2 + xinv @ e00 @ x) % p
        elif kind == 2:
            R3b = (R3 + fp.eye(n)) % p          # shifts the spectrum off the orbit
        else:
            yb = y @ shift % p                  # leaves the centralizer torus
        off.append((yb, np.stack([R1b, R2b, R3b])))
    return on, off


def sampled_report_r4(datum: GenericDatum, count: int, seed: int, placement=(3, 6)) -> dict:
    """Exact transform at sampled points on and off the predicted support, for both sign readings."""
    ctx = datum.ctx
    on, off = sample_support_r4(datum, count, seed, placement)
    values = [t_hat_point(datum, y, Rs)[0] for (y, Rs) in on + off]
    results = {}
    for sign in SIGN_VARIANTS:
        fit = _Fit(ctx)
        off_viol = support = 0
        strata: dict = {}
        for (y, Rs), val in zip(on + off, values):
            pred = predict_r4(datum, y, Rs, sign)
            b = _stratum_bucket(strata, pred.stratum)
            b["points"] += 1
            if pred.zero:
                ok = val.is_zero()
                off_viol += int(not ok)
            else:
                support += 1
                ok = fit.add(val, pred)
            b["matches"] += int(ok)
        c = fit.as_dict()
        results[sign] = {"support_size": support, "off_support_violations": off_viol,
                         "constant_c": c, "strata": strata,
                         "passed": off_viol == 0 and fit.consistent and c["q_power"] is not None
                         and support > 0}
    return results


def sample_support_r3(datum: GenericDatum, count: int, seed: int):
    """Points of the predicted support (every stratum) plus perturbed neighbours."""
    p, n = datum.p, datum.n
    rng = SplitMix64(seed)
    on, off = [], []
    e00 = np.zeros((n, n), dtype=np.int64)
    e00[0, 0] = 1
    for k in range(count):
        x, xinv, y, yinv = _random_T_frame(rng, n, p)
        if k % 3 == 0:
            # force a root with e^a(t) = -1 so the Xi strata are exercised
            t = np.diag(x @ y @ xinv % p).copy()
            t[1] = (-t[0]) % p
            y = xinv @ np.diag(t) @ x % p
        R1t = rng.randbelow(p, (n, n)) * (1 - np.eye(n, dtype=np.int64))
        if k % 6 == 0:
            R1t[0, 1] = R1t[1, 0] = 0
        R1t = (R1t - datum.A_mat(1)) % p
        R1 = xinv @ R1t @ x % p
        R2 = (-(xinv @ datum.A_mat(2) @ x)) % p
        on.append((y, np.stack([R1, R2])))
        if k % 2:
            off.append((y, np.stack([(R1 + xinv @ e00 @ x) % p, R2])))
        else:
            off.append((y, np.stack([R1, (R2 + fp.eye(n)) % p])))
    return on, off


def sampled_report_r3(datum: GenericDatum, count: int, seed: int) -> dict:
    """Pointwise transform against both frame readings of f."""
    ctx = datum.ctx
    on, off = sample_support_r3(datum, count, seed)
    values = [t_hat_point(datum, y, Rs)[0] for (y, Rs) in on + off]
    results = {}
    for variant in F_VARIANTS:
        fit = _Fit(ctx)
        off_viol = support = 0
        strata: dict = {}
        for (y, Rs), val in zip(on + off, values):
            pred = predict_r3(datum, y, Rs, variant)
            bucket = _stratum_bucket(strata, pred.stratum)
            bucket["points"] += 1
            if pred.zero:
                ok = val.is_zero()
                off_viol += int(not ok)
            else:
                support += 1
                ok = fit.add(val, pred)
            bucket["matches"] += int(ok)
        c = fit.as_dict()
        results[variant] = {"support_size": support, "off_support_violations": off_viol,
                            "constant_c": c, "strata": strata,
                            "passed": off_viol == 0 and fit.consistent and c["q_power"] is not None
                            and all(b["points"] == b["matches"] for b in strata.values())}
    return results
