"""Prime-field and cyclotomic arithmetic, characters, and exponential sums.

All character values live in Z[zeta_N] with N = p(p-1), stored exactly as
integer coefficient vectors reduced modulo the N-th cyclotomic polynomial.
The additive character is psi(a) = zeta_N^{(N/p) a} and a tame torus
character is lambda_0(t) = zeta_N^{p * sum_i c_i dlog(t_i)}.

Bulk sums are accumulated as *exponent counts*: a length-N integer vector
``v`` stands for ``sum_k v[k] zeta_N^k`` and is reduced only once at the end.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

import numpy as np

from . import fp


class ConfigurationError(ValueError):
    """Invalid field/group parameters."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


# ------------------------------------------------------------------ F_p

@dataclass(frozen=True)
class FieldCtx:
    p: int
    gamma: int
    dlog: tuple[int, ...] = field(repr=False)  # dlog[0] == -1 (undefined)

    def log(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ValueError("dlog(0) is undefined")
        return self.dlog[a]

    def inv(self, a: int) -> int:
        return fp.inv_mod(a, self.p)


@lru_cache(maxsize=None)
def field_init(p: int) -> FieldCtx:
    """Prime field context with the least primitive root as generator."""
    if not isinstance(p, int) or not is_prime(p):
        raise ConfigurationError(f"p={p} is not prime")
    if p == 2:
        raise ConfigurationError("p=2 is not supported (p must be odd)")
    for g in range(2, p):
        seen = {pow(g, k, p) for k in range(p - 1)}
        if len(seen) == p - 1:
            break
    dlog = [-1] * p
    for k in range(p - 1):
        dlog[pow(g, k, p)] = k
    return FieldCtx(p=p, gamma=g, dlog=tuple(dlog))


# ---------------------------------------------------------- Z[zeta_N]

def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    # coefficient lists, lowest degree first; den monic
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1]
        out[k] = c
        if c:
            for i, d in enumerate(den):
                num[k + i] -= c * d
    assert not any(num), "non-exact cyclotomic division"
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(N: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the N-th cyclotomic polynomial."""
    num = [-1] + [0] * (N - 1) + [1]
    for d in range(1, N):
        if N % d == 0:
            num = _polydiv_exact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def euler_phi(N: int) -> int:
    return sum(1 for k in range(1, N + 1) if gcd(k, N) == 1)


class CycCtx:
    """The ring Z[zeta_N] presented as Z[x]/(Phi_N)."""

    def __init__(self, N: int):
        self.N = N
        self.phi_N = cyclotomic_poly(N)
        self.degree = len(self.phi_N) - 1
        d = self.degree
        # red[k] = coefficients of x^k mod Phi_N
        red = np.zeros((N, d), dtype=np.int64)
        cur = [0] * d
        cur[0] = 1
        for k in range(N):
            red[k] = cur
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                cur = [c - top * self.phi_N[i] for i, c in enumerate(cur)]
        self.red = red
        self._conj_idx = (-np.arange(N)) % N

    def __eq__(self, other):
        return isinstance(other, CycCtx) and other.N == self.N

    def __hash__(self):
        return hash(("CycCtx", self.N))

    def __repr__(self):
        return f"CycCtx(N={self.N})"

    # exponent-count vectors  <->  canonical coefficients
    def reduce_counts(self, counts) -> np.ndarray:
        """Reduce count vector(s) of shape (..., N) to canonical (..., degree)."""
        counts = np.asarray(counts)
        if counts.dtype == object:
            return np.dot(counts, self.red.astype(object))
        return counts.astype(np.int64) @ self.red

    def lift(self, coeffs) -> np.ndarray:
        out = np.zeros(np.shape(coeffs)[:-1] + (self.N,), dtype=np.asarray(coeffs).dtype)
        out[..., : self.degree] = coeffs
        return out

    def value(self, coeffs) -> "CycValue":
        return CycValue(self, tuple(int(c) for c in coeffs))

    def from_counts(self, counts) -> "CycValue":
        return self.value(self.reduce_counts(counts))

    def root(self, k: int) -> "CycValue":
        counts = np.zeros(self.N, dtype=np.int64)
        counts[k % self.N] = 1
        return self.from_counts(counts)

    def integer(self, m: int) -> "CycValue":
        return CycValue(self, (int(m),) + (0,) * (self.degree - 1))

    def zero(self) -> "CycValue":
        return self.integer(0)

    def one(self) -> "CycValue":
        return self.integer(1)

    # table-level operations on canonical coefficient arrays (..., degree)
    def mul_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d = self.degree
        prod = np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (self.N,), dtype=np.int64)
        for i in range(d):
            prod[..., i : i + d] += a[..., i : i + 1] * b
        return self.reduce_counts(prod)

    def conj_arrays(self, a: np.ndarray) -> np.ndarray:
        lifted = self.lift(a)
        out = np.zeros_like(lifted)
        out[..., self._conj_idx] = lifted
        return self.reduce_counts(out)

    def cyclic_mul_counts(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Product of two exponent-count vectors (cyclic convolution mod N)."""
        out = np.zeros(self.N, dtype=np.int64)
        for k in np.nonzero(v)[0]:
            out += np.roll(u, int(k)) * int(v[k])
        return out


@dataclass(frozen=True)
class CycValue:
    ctx: CycCtx = field(repr=False, compare=False)
    coeffs: tuple[int, ...]

    def _check(self, other: "CycValue"):
        if not isinstance(other, CycValue):
            raise TypeError(f"cannot combine CycValue with {type(other).__name__}")
        if other.ctx.N != self.ctx.N:
            raise ValueError(f"context mismatch: N={self.ctx.N} vs N={other.ctx.N}")

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ctx.integer(other)
        self._check(other)
        return CycValue(self.ctx, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycValue(self.ctx, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return CycValue(self.ctx, tuple(other * a for a in self.coeffs))
        self._check(other)
        d, N = self.ctx.degree, self.ctx.N
        prod = [0] * N
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        red = self.ctx.red
        out = [0] * d
        for k, c in enumerate(prod):
            if c:
                for i in range(d):
                    out[i] += c * int(red[k, i])
        return CycValue(self.ctx, tuple(out))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx.integer(other)
        if not isinstance(other, CycValue):
            return NotImplemented
        self._check(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ctx.N, self.coeffs))

    def conj(self) -> "CycValue":
        N = self.ctx.N
        counts = [0] * N
        for k, c in enumerate(self.coeffs):
            counts[(-k) % N] += c
        return self.ctx.from_counts(np.array(counts, dtype=object))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def rational_integer(self) -> int | None:
        """The value as an integer if it lies in Z, else None."""
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def exact_div(self, m: int) -> "CycValue":
        if any(c % m for c in self.coeffs):
            raise ArithmeticError(f"{self} is not divisible by {m}")
        return CycValue(self.ctx, tuple(c // m for c in self.coeffs))

    def to_complex(self) -> complex:
        z = np.exp(2j * np.pi / self.ctx.N)
        return complex(sum(c * z**k for k, c in enumerate(self.coeffs)))

    def __repr__(self):
        terms = [f"{c}*z^{k}" if k else str(c) for k, c in enumerate(self.coeffs) if c]
        return f"CycValue(N={self.ctx.N}: {' + '.join(terms) or '0'})"


def cyc_arith(op: str, a: CycValue, b: CycValue | None = None):
    """Dispatch form of the ring operations (add, mul, conj, eq, is_zero)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "conj":
        return a.conj()
    if op == "eq":
        return a == b
    if op == "is_zero":
        return a.is_zero()
    raise ValueError(f"unknown op {op!r}")


# ------------------------------------------------------ characters

class ScalarCtx:
    """F_p together with Z[zeta_{p(p-1)}]; hosts psi and lambda_0."""

    def __init__(self, p: int):
        self.field = field_init(p)
        self.p = p
        self.N = p * (p - 1)
        self.cyc = CycCtx(self.N)
        self.psi_step = self.N // p        # psi(1) = zeta_N^psi_step
        self.lam_step = p                  # zeta_{p-1} = zeta_N^p
        self.dlog = np.array(self.field.dlog, dtype=np.int64)

    def __repr__(self):
        return f"ScalarCtx(p={self.p})"

    def psi_exp(self, a):
        """Exponent k with psi(a) = zeta_N^k (vectorised)."""
        return (np.asarray(a, dtype=np.int64) % self.p) * self.psi_step

    def psi(self, a: int) -> CycValue:
        return self.cyc.root(int(self.psi_exp(a)))

    def lambda0_exp(self, exponents, diag) -> np.ndarray:
        """Exponent of lambda_0 on torus elements with diagonal ``diag`` (..., n)."""
        diag = np.asarray(diag, dtype=np.int64) % self.p
        if np.any(diag == 0):
            raise ValueError("lambda_0 evaluated on a non-invertible torus element")
        logs = self.dlog[diag]
        c = np.asarray(exponents, dtype=np.int64)
        return ((logs * c).sum(axis=-1) % (self.p - 1)) * self.lam_step

    def lambda0_eval(self, exponents, t) -> CycValue:
        """lambda_0 on an invertible diagonal matrix (or its diagonal)."""
        t = np.asarray(t, dtype=np.int64)
        diag = np.diagonal(t) if t.ndim == 2 else t
        return self.cyc.root(int(self.lambda0_exp(exponents, diag)))

    def counts(self, exps, weights=None) -> np.ndarray:
        """Exponent-count vector of ``sum_k w_k zeta_N^{exps_k}``."""
        exps = np.asarray(exps, dtype=np.int64).ravel() % self.N
        if weights is None:
            return np.bincount(exps, minlength=self.N).astype(np.int64)
        weights = np.broadcast_to(np.asarray(weights, dtype=np.int64), np.shape(exps)).ravel()
        out = np.zeros(self.N, dtype=np.int64)
        np.add.at(out, exps, weights)
        return out


# ---------------------------------------------------- exponential sums

def gauss_linear_sum(ctx: ScalarCtx, linear, const: int = 0, brute: bool = False) -> CycValue:
    """``sum_{v in F_p^d} psi(<linear, v> + const)``.

    The closed form is 0 for a nonconstant map and ``p^d psi(const)``
    otherwise.  With ``brute=True`` the sum is also enumerated and the two
    are required to agree.
    """
    p = ctx.p
    lin = np.asarray(linear, dtype=np.int64).ravel() % p
    d = lin.size
    closed = ctx.cyc.zero() if np.any(lin) else ctx.psi(const) * (p**d)
    if brute:
        pts = np.array(list(itertools.product(range(p), repeat=d)), dtype=np.int64).reshape(-1, d)
        vals = (pts @ lin + const) % p
        direct = ctx.cyc.from_counts(ctx.counts(ctx.psi_exp(vals)))
        if direct != closed:
            raise AssertionError(f"Gauss sum mismatch: closed {closed} vs brute {direct}")
    return closed


def affine_sum_counts(ctx: ScalarCtx, linear, const: int, M=None, rhs=None) -> np.ndarray:
    """Exponent counts of ``sum_{v : M v = rhs} psi(<linear, v> + const)``.

    Solved exactly through the solution space of the linear system: the
    sum vanishes unless the form is constant on it.
    """
    p = ctx.p
    lin = np.asarray(linear, dtype=np.int64).ravel() % p
    d = lin.size
    out = np.zeros(ctx.N, dtype=np.int64)
    if M is None or np.size(M) == 0:
        if np.any(lin):
            return out
        out[int(ctx.psi_exp(const))] = p**d
        return out
    sol = fp.solve(np.asarray(M).reshape(-1, d), rhs, p)
    if sol is None:
        return out
    v0, K = sol
    if K.shape[0] and np.any((K @ lin) % p):
        return out
    out[int(ctx.psi_exp(int(v0 @ lin) + const))] = p ** K.shape[0]
    return out


def make_context(p: int) -> ScalarCtx:
    return _ctx_cache(p)


@lru_cache(maxsize=None)
def _ctx_cache(p: int) -> ScalarCtx:
    return ScalarCtx(p)
