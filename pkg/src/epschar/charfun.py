"""Exact class functions on G_r(F_p): the induced character, the
geometric fiber sum t_K, and the interpolating ladder of fiber sums.

Every sum is accumulated as an exponent-count vector of length
N = p(p-1) (entry k counts occurrences of zeta_N^k) and reduced to the
canonical cyclotomic basis only at the end, so nothing is rounded.

Fiber sums run over T-cosets ``Tx`` with a condition on ``b = x y x^{-1}``
and over ``X_1 .. X_{r-1}`` subject to membership conditions on
``^x u_j``.  The variables ``X_1 .. X_{r-2}`` are enumerated; ``X_{r-1}``
enters ``u_{r-1}`` only through ``(Ad(b^{-1}) - 1) ^x X_{r-1}``, so its sum
is read off a per-coset table (see ``_last_tables``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import bch, fp, grgroup
from .scalars import CycValue, ScalarCtx, make_context


# ------------------------------------------------------------------ datum

@dataclass(frozen=True)
class GenericDatum:
    n: int
    p: int
    r: int
    A: tuple            # r-1 diagonal vectors
    lam: tuple          # lambda_0 exponents

    def __post_init__(self):
        if len(self.A) != max(self.r - 1, 0):
            raise ValueError(f"need {self.r - 1} diagonal vectors A_j, got {len(self.A)}")
        if len(self.lam) != self.n:
            raise ValueError("lambda_0 exponent vector has the wrong length")

    @classmethod
    def make(cls, n, p, r, A, lam=None) -> "GenericDatum":
        A = tuple(tuple(int(a) % p for a in row) for row in A)
        lam = tuple(int(c) for c in (lam if lam is not None else (0,) * n))
        return cls(n, p, r, A, lam)

    @property
    def ctx(self) -> ScalarCtx:
        return make_context(self.p)

    @property
    def A_arr(self) -> np.ndarray:
        return np.array(self.A, dtype=np.int64).reshape(self.r - 1, self.n)

    def A_mat(self, j: int) -> np.ndarray:
        """A_j as a diagonal matrix (1-based j)."""
        return np.diag(self.A_arr[j - 1])

    @property
    def regular(self) -> bool:
        if self.r < 2:
            return True
        last = self.A[-1]
        return len(set(last)) == len(last)


def pair_diag(Avec: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """<diag(Avec), Z> = sum_i a_i Z_ii, batched over Z."""
    return np.einsum("i,...ii->...", np.asarray(Avec, dtype=np.int64), Z)


# ------------------------------------------------------------- characters

def lambda_tilde_exp(datum: GenericDatum, b: np.ndarray) -> np.ndarray:
    """Exponent of zeta_N in lambda~(b) for b in B_r (batched)."""
    ctx = datum.ctx
    t = grgroup.d_r(b, datum.p)
    t0, taus = grgroup.torus_coords(t, datum.p)
    e = ctx.lambda0_exp(datum.lam, t0)
    if datum.r > 1:
        s = np.einsum("jn,...jn->...", datum.A_arr, taus) % datum.p
        e = e + ctx.psi_exp(s)
    return e % ctx.N


def lambda_tilde(datum: GenericDatum, b: np.ndarray) -> CycValue:
    return datum.ctx.cyc.root(int(lambda_tilde_exp(datum, np.asarray(b))))


@dataclass
class ClassFunction:
    """Values on a list of group elements, keyed by their ElementIndex."""

    ctx: ScalarCtx
    indices: np.ndarray
    coeffs: np.ndarray           # (M, degree) canonical coefficients
    full: bool = False
    label: str = ""
    elements: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.indices)

    def value_at(self, k: int) -> CycValue:
        return self.ctx.cyc.value(self.coeffs[k])

    def lookup(self, idx) -> CycValue:
        pos = np.searchsorted(self.indices, idx)
        if pos >= len(self.indices) or self.indices[pos] != idx:
            raise KeyError(f"index {idx} not in the domain")
        return self.value_at(int(pos))

    def values(self) -> list[CycValue]:
        return [self.value_at(k) for k in range(len(self))]


def _counts_to_class_function(datum, elements, counts, full, label) -> ClassFunction:
    ctx = datum.ctx
    idx = grgroup.element_index(elements, datum.p)
    order = np.argsort(idx, kind="stable")
    coeffs = ctx.cyc.reduce_counts(counts)
    return ClassFunction(ctx, idx[order], coeffs[order], full, label, elements[order])


def induced_counts(datum: GenericDatum, elements: np.ndarray) -> np.ndarray:
    """Exponent counts of the induced character at each element.

    Sums lambda~(g g' g^{-1}) over explicit representatives g of B_r\\G_r.
    """
    ctx = datum.ctx
    n, p, r = datum.n, datum.p, datum.r
    reps = grgroup.borel_r_coset_reps(n, p, r)
    M = elements.shape[0]
    counts = np.zeros(M * ctx.N, dtype=np.int64)
    for g in reps:
        c = grgroup.kr_conj(g[None], elements, p)
        ok = grgroup.in_B_r(c, p)
        if not ok.any():
            continue
        rows = np.nonzero(ok)[0]
        e = lambda_tilde_exp(datum, c[rows])
        np.add.at(counts, rows * ctx.N + e, 1)
    return counts.reshape(M, ctx.N)


def induced_t_L(datum: GenericDatum, elements: np.ndarray | None = None,
                budget: int = grgroup.DEFAULT_BUDGET, force: bool = False) -> ClassFunction:
    full = elements is None
    if full:
        elements = grgroup.enumerate_group("G", datum.n, datum.p, datum.r, budget, force)
    counts = induced_counts(datum, elements)
    return _counts_to_class_function(datum, elements, counts, full, "t_L")


def inner_product(f: ClassFunction, g: ClassFunction, group_order: int) -> CycValue:
    """(1/|G|) sum f conj(g), with the division checked to be exact."""
    if not (f.full and g.full) or not np.array_equal(f.indices, g.indices):
        raise ValueError("inner products need two full-domain tables over the same elements")
    if len(f) != group_order:
        raise ValueError("table size does not match the group order")
    cyc = f.ctx.cyc
    total = cyc.mul_arrays(f.coeffs, cyc.conj_arrays(g.coeffs)).sum(axis=0)
    val = cyc.value(total)
    return val.exact_div(group_order)


# ----------------------------------------------------------- ladder specs

CONDS = (None, "t", "b", "b-t", "not_b")


@dataclass(frozen=True)
class LevelSpec:
    """Condition on b = x y x^{-1} plus a membership condition per u_j."""

    name: str
    conj: str                 # "T", "B" or "B-T"
    cons: tuple               # length r-1, entries from CONDS

    def __post_init__(self):
        if self.conj not in ("T", "B", "B-T"):
            raise ValueError(self.conj)
        if any(c not in CONDS for c in self.cons):
            raise ValueError(self.cons)


def r_prime(r: int) -> int:
    return r // 2


def ladder_levels(r: int) -> list[int]:
    return list(range(r - 2 * r_prime(r), r + 1))


def level_spec(r: int, i: int) -> LevelSpec:
    rp = r_prime(r)
    if i not in ladder_levels(r):
        raise ValueError(f"level {i} outside [{r - 2 * rp}, {r}]")
    cons = [None] * (r - 1)
    if i >= r - rp:
        for j in range(1, i):
            cons[j - 1] = "b"
        return LevelSpec(f"L_{i}", "B", tuple(cons))
    for j in range(1, r - rp - i):
        cons[j - 1] = "t"
    for j in range(r - rp - i, r - rp):
        cons[j - 1] = "b"
    return LevelSpec(f"L_{i}", "T", tuple(cons))


def piece_specs(r: int) -> dict[str, tuple[LevelSpec, int, int]]:
    """Set differences between adjacent ladder levels.

    ``name -> (spec, i, neighbour)``: the piece is X_i minus X_neighbour.
    Upper pieces X_i - X_{i+1} exist for r-r' <= i <= r-1 and lower pieces
    X_i - X_{i-1} for r-2r'+1 <= i <= r-r'.
    """
    rp = r_prime(r)
    out = {}
    for i in range(r - rp, r):
        cons = [None] * (r - 1)
        for j in range(1, i):
            cons[j - 1] = "b"
        cons[i - 1] = "not_b"
        out[f"L'_{i}"] = (LevelSpec(f"L'_{i}", "B", tuple(cons)), i, i + 1)
    for i in range(r - 2 * rp + 1, r - rp + 1):
        cons = [None] * (r - 1)
        if i == r - rp:
            for j in range(1, r - rp):
                cons[j - 1] = "b"
            spec = LevelSpec(f"L''_{i}", "B-T", tuple(cons))
        else:
            for j in range(1, r - rp - i):
                cons[j - 1] = "t"
            cons[r - rp - i - 1] = "b-t"
            for j in range(r - rp - i + 1, r - rp):
                cons[j - 1] = "b"
            spec = LevelSpec(f"L''_{i}", "T", tuple(cons))
        out[f"L''_{i}"] = (spec, i, i - 1)
    return out


def k_spec(r: int) -> LevelSpec:
    """Constraints of the t_K fiber: T-conjugate, u_j in t for j < r', u_{r'} in b for odd r."""
    rp = r_prime(r)
    cons = [None] * (r - 1)
    for j in range(1, rp):
        cons[j - 1] = "t"
    if r % 2:
        cons[rp - 1] = "b"
    return LevelSpec("K", "T", tuple(cons))


# ------------------------------------------------------------ fiber engine

def _in_subspace(Z: np.ndarray, cond: str) -> np.ndarray:
    n = Z.shape[-1]
    low = np.tril(np.ones((n, n), dtype=bool), -1)
    off = ~np.eye(n, dtype=bool)
    in_b = ~np.any((Z != 0) & low, axis=(-2, -1))
    if cond == "b":
        return in_b
    in_t = ~np.any((Z != 0) & off, axis=(-2, -1))
    if cond == "t":
        return in_t
    if cond == "b-t":
        return in_b & ~in_t
    if cond == "not_b":
        return ~in_b
    raise ValueError(cond)


def _quotient_positions(V: str, n: int) -> list[tuple[int, int]]:
    if V == "free":
        return []
    if V == "b":
        return [(i, j) for i in range(n) for j in range(n) if i > j]
    if V == "t":
        return [(i, j) for i in range(n) for j in range(n) if i != j]
    raise ValueError(V)


def _quotient_key(Z: np.ndarray, positions, p: int) -> np.ndarray:
    key = np.zeros(Z.shape[:-2], dtype=np.int64)
    for (i, j) in positions:
        key = key * p + Z[..., i, j] % p
    return key


_LAST_COMBOS = {None: (("free", 1),), "b": (("b", 1),), "t": (("t", 1),),
                "not_b": (("free", 1), ("b", -1)), "b-t": (("b", 1), ("t", -1))}


def _last_tables(datum: GenericDatum, b: np.ndarray, binv: np.ndarray, grid: np.ndarray) -> dict:
    """S_V[key] = counts of sum over W with (M W) at quotient coords == key of psi(<A_{r-1}, M W>),
    where M W = Ad(b^{-1}) W - W."""
    p, n, ctx = datum.p, datum.n, datum.ctx
    MW = (np.matmul(np.matmul(binv, grid) % p, b) - grid) % p
    vals = pair_diag(datum.A_arr[-1], MW) % p
    e = ctx.psi_exp(vals)
    out = {}
    for V in ("free", "b", "t"):
        pos = _quotient_positions(V, n)
        key = _quotient_key(MW, pos, p)
        K = p ** len(pos)
        out[V] = np.bincount(key * ctx.N + e, minlength=K * ctx.N).reshape(K, ctx.N)
    return out


def _cyclic_apply(H: np.ndarray, S: np.ndarray, N: int) -> np.ndarray:
    """sum_k H[..., k, :] (*) S[k, :] with (*) cyclic convolution mod N."""
    out = np.zeros(H.shape[:-2] + (N,), dtype=np.int64)
    for k in range(S.shape[0]):
        for s in np.nonzero(S[k])[0]:
            out += np.roll(H[..., k, :], int(s), axis=-1) * S[k, s]
    return out


def coset_data(datum: GenericDatum, y: np.ndarray):
    """(x, x^{-1}, b = x y x^{-1}) for every T-coset rep with b upper triangular."""
    p, n = datum.p, datum.n
    xs = grgroup.torus_coset_reps(n, p)
    xinv = fp.inverse(xs, p)
    bs = np.matmul(np.matmul(xs, y) % p, xinv) % p
    low = np.tril(np.ones((n, n), dtype=bool), -1)
    inB = ~np.any((bs != 0) & low, axis=(-2, -1))
    return [(xs[k], xinv[k], bs[k]) for k in np.nonzero(inB)[0]]


def _b_kind(b: np.ndarray) -> str:
    n = b.shape[-1]
    return "T" if not np.any(b[~np.eye(n, dtype=bool)]) else "B-T"


def _conj_ok(spec: LevelSpec, kind: str) -> bool:
    return spec.conj == "B" or spec.conj == kind


def fiber_counts(datum: GenericDatum, y: np.ndarray, Ys: np.ndarray, specs, brute: bool = False) -> dict:
    """Exponent counts of each fiber sum at the points y|Ys[k]|.

    ``Ys`` has shape (K, r-1, n, n).  Returns ``{spec.name: (K, N) counts}``.
    With ``brute=True`` every X_j (including X_{r-1}) is enumerated.
    """
    ctx, p, n, r = datum.ctx, datum.p, datum.n, datum.r
    N = ctx.N
    Ys = np.asarray(Ys, dtype=np.int64).reshape(-1, r - 1, n, n) % p
    K = Ys.shape[0]
    y = np.asarray(y, dtype=np.int64) % p
    yinv = fp.inverse(y, p)
    specs = list(specs)
    out = {s.name: np.zeros((K, N), dtype=np.int64) for s in specs}
    grid1 = grgroup.lie_elements(n, p)
    n_enum = r - 1 if brute else r - 2
    cosets = []
    for x, xinv, b in coset_data(datum, y):
        active = [s for s in specs if _conj_ok(s, _b_kind(b))]
        if active:
            lam_e = int(ctx.lambda0_exp(datum.lam, np.diagonal(b)))
            tables = None if brute else _last_tables(datum, b, fp.inverse(b, p), grid1)
            cosets.append((x, xinv, active, lam_e, tables))
    if not cosets:
        return out
    for X1_idx in _x1_blocks(datum, cosets, y, yinv, Ys, grid1, n_enum):
        shared = _shared_values(datum, y, yinv, Ys, X1_idx, grid1, n_enum, brute)
        for coset in cosets:
            _accumulate(datum, out, coset, Ys, shared, n_enum, brute)
    return out


def _x1_blocks(datum, cosets, y, yinv, Ys, grid1, n_enum):
    """Indices of X_1 values worth enumerating, split into memory-sized blocks.

    A coset whose active specs all need u_1 = _yX_1 - X_1 + Y_1 in b only
    sees the X_1 passing that test; the union over cosets is enumerated.
    """
    p = datum.p
    if n_enum == 0:
        yield None
        return
    keep = np.zeros(grid1.shape[0], dtype=bool)
    u1 = (fp.ad(yinv, grid1, p, y)[None] - grid1[None] + Ys[:, None, 0]) % p
    for x, xinv, active, _, _ in cosets:
        if all(s.cons[0] in ("t", "b", "b-t") for s in active):
            keep |= _in_subspace(fp.ad(x, u1, p, xinv), "b").any(axis=0)
        else:
            keep[:] = True
            break
    idx = np.nonzero(keep)[0]
    per_x1 = Ys.shape[0] * grid1.shape[0] ** (n_enum - 1)
    step = max(1, _CHUNK_ROWS // per_x1)
    for k in range(0, len(idx), step):
        yield idx[k:k + step]


_CHUNK_ROWS = 1 << 16


def _shared_values(datum, y, yinv, Ys, X1_idx, grid1, n_enum, brute):
    """u_j (j <= n_enum) and Y_{r-1} + u'_{r-1} on a grid block; independent of the coset."""
    p, n, r = datum.p, datum.n, datum.r
    K = Ys.shape[0]
    if n_enum:
        axes = [X1_idx] + [np.arange(grid1.shape[0])] * (n_enum - 1)
        G = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n_enum)
        Xgrid = grid1[G]                                       # (M, n_enum, n, n)
    else:
        Xgrid = np.zeros((1, 0, n, n), dtype=np.int64)
    Xs = [Xgrid[None, :, j] for j in range(n_enum)]            # (1, M, n, n)
    Xps = [fp.ad(yinv, X, p, y) for X in Xs]
    Yl = [Ys[:, None, j] for j in range(r - 1)]                # (K, 1, n, n)
    shape = (K, Xgrid.shape[0])
    us = bch.u_values(r, Xps, Yl[:n_enum], Xs, p, upto=n_enum) if n_enum else []
    us = [np.broadcast_to(u, shape + (n, n)) for u in us]
    last = None
    if not brute:
        last = Yl[r - 2]
        if r >= 3:
            last = (last + bch.uprime_values(r, Xps, Yl[: r - 2], Xs, p, r - 1)) % p
        last = np.broadcast_to(last, shape + (n, n))
    return shape, us, last


_STATE_OK = {None: (0, 1, 2), "t": (0,), "b": (0, 1), "b-t": (1,), "not_b": (2,)}


def _membership_state(Z: np.ndarray) -> np.ndarray:
    """0 if Z is diagonal, 1 if upper triangular but not diagonal, 2 otherwise."""
    n = Z.shape[-1]
    low = np.tril(np.ones((n, n), dtype=bool), -1)
    up = np.triu(np.ones((n, n), dtype=bool), 1)
    has_low = np.any((Z != 0) & low, axis=(-2, -1))
    has_up = np.any((Z != 0) & up, axis=(-2, -1))
    return np.where(has_low, 2, np.where(has_up, 1, 0))


def _ad_rows(x: np.ndarray, xinv: np.ndarray, Z: np.ndarray, p: int) -> np.ndarray:
    """x Z x^{-1} for a large batch, as one product with kron(x, x^{-T})."""
    n = x.shape[-1]
    M = np.kron(x, xinv.T) % p
    flat = Z.reshape(-1, n * n) @ M.T % p
    return flat.reshape(Z.shape)


def _accumulate(datum, out, coset, Ys, shared, n_enum, brute):
    ctx, p, n, r = datum.ctx, datum.p, datum.n, datum.r
    N = ctx.N
    x, xinv, active, lam_e, tables = coset
    shape, us, last = shared
    K = shape[0]
    xus = [_ad_rows(x, xinv, np.ascontiguousarray(u), p) for u in us]
    h = np.zeros(shape, dtype=np.int64)
    code = np.zeros(shape, dtype=np.int64)
    for j, xu in enumerate(xus):
        h += pair_diag(datum.A_arr[j], xu)
        code += _membership_state(xu) * 3 ** j
    ncode = 3 ** n_enum
    rows_k = np.broadcast_to(np.arange(K)[:, None], shape)
    if not brute:
        C = _ad_rows(x, xinv, np.ascontiguousarray(last), p)
        h += pair_diag(datum.A_arr[-1], C)
    e = (ctx.psi_exp(h % p) + lam_e) % N
    base = (rows_k * ncode + code)
    states = np.array(list(np.ndindex(*([3] * n_enum))) or [()], dtype=np.int64).reshape(ncode, n_enum)
    # codes are little-endian in j; ndindex is big-endian, so flip
    codes = (states[:, ::-1] * (3 ** np.arange(n_enum))).sum(axis=1) if n_enum else np.zeros(1, dtype=np.int64)

    def allowed(s):
        ok = np.ones(ncode, dtype=bool)
        for j in range(n_enum):
            ok &= np.isin(states[:, n_enum - 1 - j], _STATE_OK[s.cons[j]])
        return codes[ok]

    if brute:
        H = np.bincount((base * N + e).ravel(), minlength=K * ncode * N).reshape(K, ncode, N)
        for s in active:
            out[s.name] += H[:, allowed(s)].sum(axis=1)
        return
    hists = {}
    for V in {V for s in active for V, _ in _LAST_COMBOS[s.cons[r - 2]]}:
        Kc = tables[V].shape[0]
        key = _quotient_key((-C) % p, _quotient_positions(V, n), p)
        flat = ((base * Kc + key) * N + e).ravel()
        hists[V] = np.bincount(flat, minlength=K * ncode * Kc * N).reshape(K, ncode, Kc, N)
    for s in active:
        sel = allowed(s)
        for V, sign in _LAST_COMBOS[s.cons[r - 2]]:
            H = hists[V][:, sel].sum(axis=1)
            out[s.name] += sign * _cyclic_apply(H, tables[V], N)

def fiber_sum(datum: GenericDatum, y, Ys, spec: LevelSpec, brute: bool = False) -> CycValue:
    c = fiber_counts(datum, y, np.asarray(Ys)[None], [spec], brute)[spec.name][0]
    return datum.ctx.cyc.from_counts(c)


def t_K(datum: GenericDatum, y, Ys, brute: bool = False) -> CycValue:
    return fiber_sum(datum, y, Ys, k_spec(datum.r), brute)


def t_L_i(datum: GenericDatum, y, Ys, i: int, brute: bool = False) -> CycValue:
    return fiber_sum(datum, y, Ys, level_spec(datum.r, i), brute)


def t_K_table(datum: GenericDatum, elements: np.ndarray, brute: bool = False) -> np.ndarray:
    """Exponent counts (M, N) of t_K at each element, grouped by constant term."""
    return _grouped(datum, elements, [k_spec(datum.r)], brute)["K"]


def _grouped(datum, elements, specs, brute=False) -> dict:
    p = datum.p
    ys, Yss = grgroup.to_factored(elements, p)
    keys = grgroup.element_index(grgroup.kr_const(ys, 1), p)
    out = {s.name: np.zeros((elements.shape[0], datum.ctx.N), dtype=np.int64) for s in specs}
    for key in np.unique(keys):
        rows = np.nonzero(keys == key)[0]
        res = fiber_counts(datum, ys[rows[0]], Yss[rows], specs, brute)
        for name, c in res.items():
            out[name][rows] = c
    return out


def ladder_counts(datum: GenericDatum, elements: np.ndarray, include_pieces: bool = True,
                  include_k: bool = True, brute: bool = False) -> dict:
    """Counts for every ladder level (and optionally pieces and K) at each element."""
    r = datum.r
    specs = [level_spec(r, i) for i in ladder_levels(r)]
    if include_pieces:
        specs += [s for s, _, _ in piece_specs(r).values()]
    if include_k:
        specs.append(k_spec(r))
    return _grouped(datum, elements, specs, brute)


# -------------------------------------------------------------- sampling

def sample_elements(datum: GenericDatum, count: int, seed: int, extra: np.ndarray | None = None) -> np.ndarray:
    """Deterministic sample of G_r: identity, torus lifts, B_r-conjugates, uniform draws."""
    from .rng import SplitMix64

    n, p, r = datum.n, datum.p, datum.r
    rng = SplitMix64(seed)
    parts = [grgroup.kr_identity(n, r, (1,))]
    tor = np.array([np.diag(d) for d in itertools.product(range(1, p), repeat=n)], dtype=np.int64)
    parts.append(grgroup.kr_const(tor, r))
    if extra is not None and len(extra):
        parts.append(np.asarray(extra, dtype=np.int64).reshape(-1, r, n, n))
    have = sum(x.shape[0] for x in parts)
    rest = max(count - have, 0)
    half = rest - rest // 3
    # conjugates of random B_r elements (so the constant term has rational eigenvalues)
    bt = rng.randbelow(p, (half, r, n, n))
    bt = bt * np.triu(np.ones((n, n), dtype=np.int64))
    diag = rng.randbelow(p - 1, (half, n)) + 1
    idx = np.arange(n)
    bt[:, 0, idx, idx] = diag
    g = grgroup.random_kr(rng, half, n, p, r)
    parts.append(grgroup.kr_conj(g, bt, p))
    parts.append(grgroup.random_kr(rng, rest - half, n, p, r))
    out = np.concatenate(parts)[: max(count, have)]
    return out
