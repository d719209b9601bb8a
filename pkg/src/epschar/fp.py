"""Exact linear algebra and batched matrix helpers over a prime field F_p.

Matrices are integer numpy arrays with entries in ``range(p)``.  Batched
helpers accept arrays of shape ``(..., n, n)`` and broadcast like
``numpy.matmul``.
"""

from __future__ import annotations

import itertools

import numpy as np


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


def rref(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``M`` mod p and its pivot columns."""
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] = (A[r] * inv_mod(int(A[r, c]), p)) % p
        col = A[:, c].copy()
        col[r] = 0
        A = (A - np.outer(col, A[r])) % p
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M: np.ndarray, p: int) -> int:
    if np.size(M) == 0:
        return 0
    return len(rref(M, p)[1])


def nullspace(M: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of ``{v : M v = 0}`` over F_p."""
    M = np.atleast_2d(np.asarray(M, dtype=np.int64))
    cols = M.shape[1]
    R, pivots = rref(M, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-R[i, f]) % p
    return basis


def solve(M: np.ndarray, b: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray] | None:
    """Solve ``M v = b`` over F_p.

    Returns ``(particular, kernel_basis)`` or None when inconsistent.
    """
    M = np.atleast_2d(np.asarray(M, dtype=np.int64)) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1) % p
    rows, cols = M.shape
    R, pivots = rref(np.concatenate([M, b[:, None]], axis=1), p)
    if cols in pivots:
        return None
    v = np.zeros(cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        v[pc] = R[i, cols]
    return v, nullspace(M, p)


def span_basis(vectors: np.ndarray, p: int) -> np.ndarray:
    """Row basis of the span of ``vectors`` (rows), in RREF."""
    V = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
    if V.size == 0:
        return V.reshape(0, V.shape[-1] if V.ndim == 2 else 0)
    R, piv = rref(V, p)
    return R[: len(piv)]


def in_span(basis: np.ndarray, v: np.ndarray, p: int) -> bool:
    if basis.shape[0] == 0:
        return not np.any(np.asarray(v) % p)
    return rank(np.vstack([basis, v]), p) == rank(basis, p)


# ---------------------------------------------------------------- matrices

def matmul(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    return np.matmul(A, B) % p


def bracket(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    return (np.matmul(A, B) - np.matmul(B, A)) % p


def trace_form(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """``tr(AB)`` mod p, batched over leading axes."""
    return np.einsum("...ij,...ji->...", A, B) % p


def det(A: np.ndarray, p: int) -> np.ndarray:
    """Batched determinant mod p by the Leibniz expansion (small n only)."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[-1]
    out = np.zeros(A.shape[:-2], dtype=np.int64)
    for perm in itertools.permutations(range(n)):
        sign = _perm_sign(perm)
        term = np.ones(A.shape[:-2], dtype=np.int64)
        for i, j in enumerate(perm):
            term = (term * A[..., i, j]) % p
        out = (out + sign * term) % p
    return out


def _perm_sign(perm) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def adjugate(A: np.ndarray, p: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[-1]
    if n == 1:
        return np.ones_like(A)
    adj = np.empty_like(A)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(A, i, axis=-2), j, axis=-1)
            adj[..., j, i] = ((-1) ** (i + j)) * det(minor, p)
    return adj % p


def inverse(A: np.ndarray, p: int) -> np.ndarray:
    """Batched inverse mod p; raises ValueError on a singular matrix."""
    d = det(A, p)
    if np.any(d == 0):
        raise ValueError("matrix is not invertible mod p")
    dinv = np.vectorize(lambda v: inv_mod(int(v), p), otypes=[np.int64])(d)
    return (adjugate(A, p) * dinv[..., None, None]) % p


def is_invertible(A: np.ndarray, p: int) -> np.ndarray:
    return det(A, p) != 0


def ad(x: np.ndarray, X: np.ndarray, p: int, x_inv: np.ndarray | None = None) -> np.ndarray:
    """``Ad(x) X = x X x^{-1}``."""
    if x_inv is None:
        x_inv = inverse(x, p)
    return np.matmul(np.matmul(x, X) % p, x_inv) % p


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)
