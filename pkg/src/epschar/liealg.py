"""gl_n(F_p) with the trace form, its diagonal root datum, and the
linear algebra attached to a split regular semisimple element.

Conventions: ``Ad(x) X = x X x^{-1}``.  Positive roots are the pairs
``(i, j)`` with ``i < j``; the root space of ``(i, j)`` is spanned by
``E_ij`` and ``e^alpha(t) = t_i / t_j`` on diagonal ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fp


class NotRegularError(ValueError):
    """Element is not regular semisimple (or not split over F_p)."""


def unit(n: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((n, n), dtype=np.int64)
    E[i, j] = 1
    return E


def basis(n: int) -> np.ndarray:
    """The E_ij basis of gl_n, row-major, shape (n*n, n, n)."""
    return np.eye(n * n, dtype=np.int64).reshape(n * n, n, n)


def bracket_form(X: np.ndarray, Y: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch {X.shape} vs {Y.shape}")
    return fp.bracket(X, Y, p), int(fp.trace_form(X, Y, p))


def gram_matrix(vectors: np.ndarray, p: int, others: np.ndarray | None = None) -> np.ndarray:
    """Matrix of trace-form pairings between two lists of matrices."""
    others = vectors if others is None else others
    return np.einsum("aij,bji->ab", vectors, others) % p


# ------------------------------------------------------------ subspaces

@dataclass(frozen=True)
class Subspace:
    n: int
    p: int
    rows: np.ndarray  # RREF basis, shape (dim, n*n)

    @classmethod
    def span(cls, mats, n: int, p: int) -> "Subspace":
        mats = np.asarray(mats, dtype=np.int64).reshape(-1, n * n)
        return cls(n, p, fp.span_basis(mats, p) if mats.shape[0] else mats)

    @property
    def dim(self) -> int:
        return self.rows.shape[0]

    @property
    def mats(self) -> np.ndarray:
        return self.rows.reshape(-1, self.n, self.n)

    def contains(self, X: np.ndarray) -> bool:
        return fp.in_span(self.rows, np.asarray(X).reshape(-1), self.p)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.dim == other.dim
            and all(self.contains(m) for m in other.mats)
        )

    __hash__ = None


def perp(E: Subspace) -> Subspace:
    """Orthogonal complement for the trace form."""
    n, p = E.n, E.p
    if E.dim == 0:
        return Subspace.span(basis(n), n, p)
    # <X, E_k> = sum_ij X_ij (E_k)_ji
    G = E.mats.transpose(0, 2, 1).reshape(E.dim, n * n)
    return Subspace(n, p, fp.span_basis(fp.nullspace(G, p), p))


def torus(n: int, p: int) -> Subspace:
    return Subspace.span([unit(n, i, i) for i in range(n)], n, p)


def nilradical(n: int, p: int) -> Subspace:
    return Subspace.span([unit(n, i, j) for i in range(n) for j in range(i + 1, n)] or np.zeros((0, n, n)), n, p)


def borel(n: int, p: int) -> Subspace:
    return Subspace.span([unit(n, i, j) for i in range(n) for j in range(i, n)], n, p)


def whole(n: int, p: int) -> Subspace:
    return Subspace.span(basis(n), n, p)


# ------------------------------------------------------------ root datum

@dataclass(frozen=True)
class RootDatum:
    n: int

    @property
    def positive(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]

    @property
    def negative(self) -> list[tuple[int, int]]:
        return [(j, i) for i, j in self.positive]

    @property
    def roots(self) -> list[tuple[int, int]]:
        return self.positive + self.negative

    @property
    def Delta(self) -> int:
        return self.n * self.n

    @property
    def delta(self) -> int:
        return self.n

    @staticmethod
    def alpha(root, A_diag, p: int) -> int:
        i, j = root
        return (int(A_diag[i]) - int(A_diag[j])) % p

    @staticmethod
    def e_alpha(root, t_diag, p: int) -> int:
        i, j = root
        return int(t_diag[i]) * fp.inv_mod(int(t_diag[j]), p) % p


def xi_y(y: np.ndarray, p: int) -> frozenset:
    """Positive roots alpha with 1 + e^alpha(y) = 0 (y diagonal)."""
    y = np.asarray(y)
    d = np.diagonal(y) if y.ndim == 2 else y
    n = len(d)
    return frozenset(
        a for a in RootDatum(n).positive if (1 + RootDatum.e_alpha(a, d, p)) % p == 0
    )


def root_components(X: np.ndarray) -> tuple[np.ndarray, dict]:
    """Split X into its diagonal part and its root-space coefficients."""
    n = X.shape[-1]
    X0 = np.diag(np.diagonal(X)).astype(np.int64)
    comps = {(i, j): int(X[i, j]) for i in range(n) for j in range(n) if i != j}
    return X0, comps


def diag_part(X: np.ndarray) -> np.ndarray:
    n = X.shape[-1]
    return X * np.eye(n, dtype=np.int64)


def upper_part(X: np.ndarray) -> np.ndarray:
    return np.triu(X, 1)


def lower_part(X: np.ndarray) -> np.ndarray:
    return np.tril(X, -1)


# ----------------------------------------------- regular semisimple data

def eigen_split(R: np.ndarray, p: int) -> list[int]:
    """Eigenvalues of R in F_p; raise unless n distinct ones exist."""
    n = R.shape[0]
    eig = []
    for lam in range(p):
        M = (R - lam * fp.eye(n)) % p
        if fp.rank(M, p) < n:
            eig.append(lam)
    if len(eig) < n:
        raise NotRegularError(f"eigenvalues {eig} of R are not {n} distinct values in F_{p}")
    return eig


def centralizer(R: np.ndarray, p: int, target: np.ndarray | None = None):
    """Centralizer data for a split regular semisimple R.

    Returns ``(t_R, x)`` where ``t_R`` is the centralizer subspace and
    ``x`` satisfies ``x R x^{-1}`` diagonal.  With a diagonal ``target``
    A whose negated entries are the eigenvalues of R, the diagonal is
    ``-A`` in A's order, i.e. ``R = -Ad(x^{-1}) A``.  Rows of x are left
    eigenvectors scaled so their first nonzero entry is 1.  The
    centralizer torus is ``T_R = x^{-1} T x``.
    """
    R = np.asarray(R, dtype=np.int64) % p
    n = R.shape[0]
    eig = eigen_split(R, p)
    if target is not None:
        wanted = [(-int(a)) % p for a in np.diagonal(target)]
        if sorted(wanted) != sorted(eig):
            raise NotRegularError(f"spectrum {eig} does not match -A = {wanted}")
        eig = wanted
    x = np.zeros((n, n), dtype=np.int64)
    for k, lam in enumerate(eig):
        # left eigenvector: v R = lam v  <=>  (R - lam)^T v^T = 0
        ker = fp.nullspace(((R - lam * fp.eye(n)) % p).T, p)
        v = ker[0]
        lead = int(v[np.nonzero(v)[0][0]])
        x[k] = (v * fp.inv_mod(lead, p)) % p
    xinv = fp.inverse(x, p)
    t_R = Subspace.span([xinv @ unit(n, i, i) @ x % p for i in range(n)], n, p)
    return t_R, x


def commutant(R: np.ndarray, p: int) -> Subspace:
    """{Z : [Z, R] = 0} computed as a kernel."""
    n = R.shape[0]
    B = basis(n)
    M = np.stack([fp.bracket(E, R, p).reshape(-1) for E in B], axis=1)
    return Subspace.span(fp.nullspace(M, p).reshape(-1, n, n), n, p)


def ad_matrix(R: np.ndarray, p: int) -> np.ndarray:
    """Matrix of X -> [X, R] in the E_ij basis (columns = images)."""
    n = R.shape[0]
    return np.stack([fp.bracket(E, R, p).reshape(-1) for E in basis(n)], axis=1) % p


def solve_bracket(R: np.ndarray, xi: np.ndarray, p: int) -> np.ndarray | None:
    """Some X with [X, R] = xi, or None when xi is not in the image."""
    n = R.shape[0]
    sol = fp.solve(ad_matrix(R, p), np.asarray(xi).reshape(-1), p)
    return None if sol is None else sol[0].reshape(n, n)


def project_to_torus(v: np.ndarray, x: np.ndarray, p: int, xinv: np.ndarray | None = None) -> np.ndarray:
    """Projection onto t_R = Ad(x^{-1}) t along t_R^perp."""
    xinv = fp.inverse(x, p) if xinv is None else xinv
    w = x @ v @ xinv % p
    return xinv @ diag_part(w) @ x % p


def xi_map(R: np.ndarray, z: np.ndarray, xi: np.ndarray, p: int, X: np.ndarray | None = None) -> np.ndarray:
    """The coset ``[X, Ad(z) xi] + t_R^perp`` for any X with ``[X, R] = xi``.

    The coset is returned through its canonical representative in t_R.
    ``X`` may be supplied to exercise independence of that choice.
    """
    if X is None:
        X = solve_bracket(R, xi, p)
        if X is None:
            raise ValueError("xi is not in the image of ad(R)")
    elif np.any(fp.bracket(X, R, p) != np.asarray(xi) % p):
        raise ValueError("supplied X does not solve [X, R] = xi")
    _, x = centralizer(R, p)
    val = fp.bracket(X, fp.ad(z, xi, p), p)
    return project_to_torus(val, x, p)


def pm0_decompose(R: np.ndarray, X: np.ndarray, p: int, x: np.ndarray | None = None):
    """``X = X^- + X^0 + X^+`` along g^-_R + t_R + g^+_R."""
    if x is None:
        _, x = centralizer(R, p)
    xinv = fp.inverse(x, p)
    w = x @ X @ xinv % p
    back = lambda M: xinv @ M @ x % p
    return back(lower_part(w)), back(diag_part(w)), back(upper_part(w))


def same_char_poly_as(R: np.ndarray, target_diag, p: int) -> bool:
    """Orbit test for split regular semisimple classes."""
    try:
        eig = eigen_split(np.asarray(R) % p, p)
    except NotRegularError:
        return False
    return sorted(eig) == sorted(int(a) % p for a in target_diag) and len(set(eig)) == len(eig)
