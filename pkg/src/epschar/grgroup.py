"""GL_n(F_p[eps]/eps^r) in the matrix model and in factored coordinates.

A KrMatrix is an integer array of shape ``(..., r, n, n)``; slice ``k``
holds the coefficient of ``eps^k``.  Factored coordinates are a pair
``(x, Xs)`` with ``x`` of shape ``(..., n, n)`` and ``Xs`` of shape
``(..., r-1, n, n)``, meaning ``x e^{eps X_1} ... e^{eps^{r-1} X_{r-1}}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import bch, fp
from .rng import SplitMix64

DEFAULT_BUDGET = 1 << 24


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"enumeration needs {required} elements, budget is {budget} (use --force)")
        self.required = required
        self.budget = budget


def _check_p_r(p: int, r: int):
    if p < r:
        raise ValueError(f"p >= r violated (p={p}, r={r})")


# ------------------------------------------------------------- kr arithmetic

def kr_identity(n: int, r: int, batch=()) -> np.ndarray:
    g = np.zeros(tuple(batch) + (r, n, n), dtype=np.int64)
    g[..., 0, :, :] = np.eye(n, dtype=np.int64)
    return g


def kr_const(x: np.ndarray, r: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    g = np.zeros(x.shape[:-2] + (r,) + x.shape[-2:], dtype=np.int64)
    g[..., 0, :, :] = x
    return g


def kr_mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    r = a.shape[-3]
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.int64)
    for i in range(r):
        for j in range(r - i):
            out[..., i + j, :, :] += np.matmul(a[..., i, :, :], b[..., j, :, :])
    return out % p


def kr_inv(a: np.ndarray, p: int) -> np.ndarray:
    """Inverse via the nilpotent series ``(1 + N)^{-1} = sum (-N)^k``."""
    r, n = a.shape[-3], a.shape[-1]
    a0inv = fp.inverse(a[..., 0, :, :], p)
    N = kr_mul(kr_const(a0inv, r), a, p)
    N[..., 0, :, :] = 0
    term = kr_identity(n, r, a.shape[:-3])
    acc = term.copy()
    for _ in range(1, r):
        term = kr_mul(term, (-N) % p, p)
        acc = (acc + term) % p
    return kr_mul(acc, kr_const(a0inv, r), p)


def kr_eq(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return np.all((a - b) % p == 0, axis=(-3, -2, -1))


def kr_arith(op: str, a: np.ndarray, b: np.ndarray | None = None, p: int = 0):
    if op == "mul":
        return kr_mul(a, b, p)
    if op == "inv":
        return kr_inv(a, p)
    if op == "eq":
        return kr_eq(a, b, p)
    raise ValueError(f"unknown op {op!r}")


def kr_conj(g: np.ndarray, h: np.ndarray, p: int) -> np.ndarray:
    """g h g^{-1}."""
    return kr_mul(kr_mul(g, h, p), kr_inv(g, p), p)


# ------------------------------------------------------- exp and factoring

def exp_eps(m: int, X: np.ndarray, r: int, p: int) -> np.ndarray:
    """``e^{eps^m X} = sum_{k m < r} eps^{k m} X^k / k!``."""
    _check_p_r(p, r)
    if not 1 <= m:
        raise ValueError("m must be >= 1")
    X = np.asarray(X, dtype=np.int64) % p
    n = X.shape[-1]
    out = kr_identity(n, r, X.shape[:-2])
    power = np.broadcast_to(np.eye(n, dtype=np.int64), X.shape).copy()
    k = 1
    while k * m < r:
        power = np.matmul(power, X) % p
        out[..., k * m, :, :] = (out[..., k * m, :, :] + power * fp.inv_mod(factorial(k), p)) % p
        k += 1
    return out


def from_factored(x: np.ndarray, Xs: np.ndarray, p: int) -> np.ndarray:
    r = Xs.shape[-3] + 1
    g = kr_const(x, r)
    for i in range(1, r):
        g = kr_mul(g, exp_eps(i, Xs[..., i - 1, :, :], r, p), p)
    return g


def to_factored(g: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Peel ``x = g mod eps`` and then X_1, X_2, ... in increasing degree."""
    r, n = g.shape[-3], g.shape[-1]
    x = g[..., 0, :, :] % p
    h = kr_mul(kr_const(fp.inverse(x, p), r), g, p)
    Xs = np.zeros(g.shape[:-3] + (r - 1, n, n), dtype=np.int64)
    for i in range(1, r):
        Xi = h[..., i, :, :].copy()
        Xs[..., i - 1, :, :] = Xi
        h = kr_mul(exp_eps(i, (-Xi) % p, r, p), h, p)
    return x, Xs


@dataclass(frozen=True)
class FactoredElement:
    x: np.ndarray
    Xs: np.ndarray
    p: int

    @property
    def r(self) -> int:
        return self.Xs.shape[-3] + 1

    def matrix(self) -> np.ndarray:
        return from_factored(self.x, self.Xs, self.p)

    @classmethod
    def from_matrix(cls, g: np.ndarray, p: int) -> "FactoredElement":
        x, Xs = to_factored(g, p)
        return cls(x, Xs, p)


def bch_product(x, Xs, y, Ys, p: int):
    """(x|X|)(y|Y|) = xy|Z| with Z_i = z_i(_yX, Y)."""
    r = Xs.shape[-3] + 1
    yinv = fp.inverse(y, p)
    Xy = [fp.ad(yinv, Xs[..., i, :, :], p, y) for i in range(r - 1)]
    Z = bch.z_values(r, Xy, [Ys[..., i, :, :] for i in range(r - 1)], p)
    return np.matmul(x, y) % p, np.stack(Z, axis=-3)


def bch_conjugate(x, Xs, y, Ys, p: int):
    """(x|X|)(y|Y|)(x|X|)^{-1} = xyx^{-1}|^x u(_yX, Y, X)|."""
    r = Xs.shape[-3] + 1
    yinv = fp.inverse(y, p)
    xinv = fp.inverse(x, p)
    Xy = [fp.ad(yinv, Xs[..., i, :, :], p, y) for i in range(r - 1)]
    U = bch.u_values(r, Xy, [Ys[..., i, :, :] for i in range(r - 1)], [Xs[..., i, :, :] for i in range(r - 1)], p)
    U = [fp.ad(x, u, p, xinv) for u in U]
    return np.matmul(np.matmul(x, y) % p, xinv) % p, np.stack(U, axis=-3)


def mul_conj_bch(a: FactoredElement, b: FactoredElement):
    p = a.p
    prod = FactoredElement(*bch_product(a.x, a.Xs, b.x, b.Xs, p), p)
    conj = FactoredElement(*bch_conjugate(a.x, a.Xs, b.x, b.Xs, p), p)
    return prod, conj


# ---------------------------------------------------------- subgroups

def in_B_r(g: np.ndarray, p: int) -> np.ndarray:
    """Upper triangular over k_r with invertible diagonal."""
    n = g.shape[-1]
    low = np.tril(np.ones((n, n), dtype=bool), -1)
    upper = ~np.any(((g % p) != 0) & low, axis=(-3, -2, -1))
    diag_ok = np.all(np.diagonal(g[..., 0, :, :], axis1=-2, axis2=-1) % p != 0, axis=-1)
    return upper & diag_ok


def d_r(b: np.ndarray, p: int) -> np.ndarray:
    """B_r -> T_r, keeping the diagonal."""
    if not np.all(in_B_r(b, p)):
        raise ValueError("d_r applied to an element outside B_r")
    n = b.shape[-1]
    return b * np.eye(n, dtype=np.int64)


def torus_coords(t: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """t0 (diagonal vector) and tau_j (diagonal vectors) with t = t0 e^{eps tau_1} ...."""
    x, Xs = to_factored(t, p)
    return np.diagonal(x, axis1=-2, axis2=-1), np.diagonal(Xs, axis1=-2, axis2=-1)


def dim_H(r: int, Delta: int, delta: int) -> int:
    if (r * (Delta + delta)) % 2:
        raise ValueError("r(Delta+delta) must be even")
    return r * (Delta + delta) // 2 - delta


def order_gl(n: int, p: int) -> int:
    out = 1
    for k in range(n):
        out *= p**n - p**k
    return out


def order(subgroup: str, n: int, p: int, r: int) -> int:
    if subgroup == "G":
        return order_gl(n, p) * p ** ((r - 1) * n * n)
    if subgroup == "B":
        return (p - 1) ** n * p ** (n * (n - 1) // 2 + (r - 1) * n * (n + 1) // 2)
    if subgroup == "T":
        return (p - 1) ** n * p ** (n * (r - 1))
    if subgroup == "U":
        return p ** (r * n * (n - 1) // 2)
    raise ValueError(f"unknown subgroup {subgroup!r}")


# -------------------------------------------------------------- indexing

def index_length(n: int, r: int) -> int:
    return r * n * n


def element_index(g: np.ndarray, p: int):
    """Big-endian base-p digits, eps-degree-major then row-major.

    Returns int64 when p^{r n^2} fits, otherwise an object array of ints.
    """
    r, n = g.shape[-3], g.shape[-1]
    L = r * n * n
    digits = (np.asarray(g) % p).reshape(g.shape[:-3] + (L,))
    if p**L < 2**63:
        weights = p ** np.arange(L - 1, -1, -1, dtype=np.int64)
        return digits @ weights
    weights = np.array([p ** (L - 1 - k) for k in range(L)], dtype=object)
    return digits.astype(object) @ weights


def element_from_index(idx, n: int, p: int, r: int) -> np.ndarray:
    L = r * n * n
    arr = np.asarray(idx)
    flat = arr.reshape(-1)
    digits = np.zeros((flat.size, L), dtype=np.int64)
    if arr.dtype == object or p**L >= 2**63:
        for m, v in enumerate(flat):
            v = int(v)
            for k in range(L - 1, -1, -1):
                digits[m, k] = v % p
                v //= p
    else:
        v = flat.astype(np.int64).copy()
        for k in range(L - 1, -1, -1):
            digits[:, k] = v % p
            v //= p
    return digits.reshape(arr.shape + (r, n, n))


def index_to_u64(idx) -> np.ndarray:
    """Serialise indices as little-endian uint64; refuses values beyond 64 bits."""
    vals = [int(v) for v in np.asarray(idx).reshape(-1)]
    if any(v < 0 or v >= 2**64 for v in vals):
        raise OverflowError("element index does not fit in 64 bits for this (n, p, r)")
    return np.array(vals, dtype="<u8")


# ----------------------------------------------------------- enumeration

def gl_elements(n: int, p: int) -> np.ndarray:
    """All of GL_n(F_p), in increasing index order."""
    if p ** (n * n) > DEFAULT_BUDGET:
        raise BudgetExceeded(p ** (n * n), DEFAULT_BUDGET)
    allm = np.array(list(itertools.product(range(p), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    return allm[fp.det(allm, p) != 0]


def lie_elements(n: int, p: int) -> np.ndarray:
    return np.array(list(itertools.product(range(p), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)


def enumerate_group(subgroup: str, n: int, p: int, r: int, budget: int = DEFAULT_BUDGET, force: bool = False) -> np.ndarray:
    """Every element of G_r, B_r, T_r or U_r as a KrMatrix array, in index order."""
    size = order(subgroup, n, p, r)
    if size > budget and not force:
        raise BudgetExceeded(size, budget)
    mask_upper = np.triu(np.ones((n, n), dtype=bool))
    if subgroup == "G":
        consts = gl_elements(n, p)
        free = np.ones((n, n), dtype=bool)
    else:
        if subgroup in ("B", "T"):
            const_mask = mask_upper if subgroup == "B" else np.eye(n, dtype=bool)
            free = const_mask
            consts = pattern_elements(const_mask, n, p, unit_diag=False)
        else:
            free = np.triu(np.ones((n, n), dtype=bool), 1)
            consts = pattern_elements(free, n, p, unit_diag=True)
    higher = pattern_elements(free, n, p, unit_diag=None)  # all values on free positions
    m = higher.shape[0]
    out = np.zeros((consts.shape[0],) + (m,) * (r - 1) + (r, n, n), dtype=np.int64)
    out[..., 0, :, :] = consts.reshape((consts.shape[0],) + (1,) * (r - 1) + (n, n))
    for k in range(1, r):
        shape = [1] * (r - 1)
        shape[k - 1] = m
        out[..., k, :, :] = higher.reshape((1,) + tuple(shape) + (n, n))
    out = out.reshape(-1, r, n, n)
    return out[np.argsort(element_index(out, p), kind="stable")]


def pattern_elements(mask: np.ndarray, n: int, p: int, unit_diag) -> np.ndarray:
    """Matrices supported on ``mask``.

    unit_diag=None: arbitrary values; False: nonzero diagonal required;
    True: diagonal fixed to 1 (mask excludes the diagonal).
    """
    pos = list(zip(*np.nonzero(mask)))
    vals = []
    for combo in itertools.product(range(p), repeat=len(pos)):
        M = np.zeros((n, n), dtype=np.int64)
        for (i, j), v in zip(pos, combo):
            M[i, j] = v
        if unit_diag is True:
            M += np.eye(n, dtype=np.int64)
        elif unit_diag is False and np.any(np.diagonal(M) == 0):
            continue
        vals.append(M)
    return np.array(vals, dtype=np.int64).reshape(-1, n, n)


# ------------------------------------------------------------ coset reps

def permutation_matrix(sigma) -> np.ndarray:
    n = len(sigma)
    P = np.zeros((n, n), dtype=np.int64)
    for j, s in enumerate(sigma):
        P[s, j] = 1
    return P


def borel_coset_reps(n: int, p: int) -> np.ndarray:
    """Representatives of B\\G(F_p): P_w u with u in U supported on inversions of w."""
    reps = []
    for sigma in itertools.permutations(range(n)):
        P = permutation_matrix(sigma)
        pos = [(i, j) for i in range(n) for j in range(i + 1, n) if sigma[i] > sigma[j]]
        for combo in itertools.product(range(p), repeat=len(pos)):
            u = np.eye(n, dtype=np.int64)
            for (i, j), v in zip(pos, combo):
                u[i, j] = v
            reps.append(P @ u % p)
    return np.array(reps, dtype=np.int64)


def unipotent_elements(n: int, p: int) -> np.ndarray:
    return pattern_elements(np.triu(np.ones((n, n), dtype=bool), 1), n, p, unit_diag=True)


def torus_coset_reps(n: int, p: int) -> np.ndarray:
    """Representatives of T\\G(F_p): u w v with u in U and w v a Borel coset rep."""
    U = unipotent_elements(n, p)
    W = borel_coset_reps(n, p)
    return (np.matmul(U[:, None], W[None, :]) % p).reshape(-1, n, n)


def borel_r_coset_reps(n: int, p: int, r: int) -> np.ndarray:
    """Representatives of B_r\\G_r: v x with v = 1 + eps-multiples of strictly lower matrices."""
    W = borel_coset_reps(n, p)
    low = np.tril(np.ones((n, n), dtype=bool), -1)
    L = pattern_elements(low, n, p, unit_diag=None)
    m = L.shape[0]
    v = kr_identity(n, r, (m,) * (r - 1))
    for k in range(1, r):
        shape = [1] * (r - 1)
        shape[k - 1] = m
        v[..., k, :, :] = L.reshape(tuple(shape) + (n, n))
    v = v.reshape(-1, r, n, n)
    reps = kr_mul(v[:, None], kr_const(W, r)[None, :], p)
    return reps.reshape(-1, r, n, n)


# -------------------------------------------------------------- sampling

def random_gl(rng: SplitMix64, count: int, n: int, p: int) -> np.ndarray:
    out = np.zeros((0, n, n), dtype=np.int64)
    while out.shape[0] < count:
        cand = rng.randbelow(p, (2 * count + 4, n, n))
        out = np.concatenate([out, cand[fp.det(cand, p) != 0]])
    return out[:count]


def random_lie(rng: SplitMix64, count: int, n: int, p: int, k: int | None = None) -> np.ndarray:
    shape = (count, n, n) if k is None else (count, k, n, n)
    return rng.randbelow(p, shape)


def random_kr(rng: SplitMix64, count: int, n: int, p: int, r: int) -> np.ndarray:
    x = random_gl(rng, count, n, p)
    g = kr_const(x, r)
    g[:, 1:] = rng.randbelow(p, (count, r - 1, n, n))
    return g


def group_selftest(n: int, p: int, r: int, samples: int = 1000, seed: int = 1) -> dict:
    """Matrix-model oracle checks of the factored group law."""
    rng = SplitMix64(seed)
    a = random_kr(rng, samples, n, p, r)
    b = random_kr(rng, samples, n, p, r)
    xa, Xa = to_factored(a, p)
    xb, Xb = to_factored(b, p)
    roundtrip = bool(np.all(kr_eq(from_factored(xa, Xa, p), a, p)))
    px, PX = bch_product(xa, Xa, xb, Xb, p)
    prod_ok = bool(np.all(kr_eq(from_factored(px, PX, p), kr_mul(a, b, p), p)))
    cx, CX = bch_conjugate(xa, Xa, xb, Xb, p)
    conj_ok = bool(np.all(kr_eq(from_factored(cx, CX, p), kr_conj(a, b, p), p)))
    inv_ok = bool(np.all(kr_eq(kr_mul(a, kr_inv(a, p), p), kr_identity(n, r, (samples,)), p)))
    return {
        "n": n, "p": p, "r": r, "samples": samples,
        "roundtrip": roundtrip, "product": prod_ok, "conjugation": conj_ok, "inverse": inv_ok,
        "status": "pass" if roundtrip and prod_ok and conj_ok and inv_ok else "fail",
    }
