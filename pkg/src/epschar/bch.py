"""Graded Campbell-Baker-Hausdorff polynomials for factored coordinates.

Letters are ``(family, i)`` with family one of ``X'``, ``Y``, ``X`` and
weight ``i``; a letter of weight i stands for ``eps^i`` times a Lie
algebra element, so truncating at total weight ``W`` truncates in eps.

``z_i`` solves ``(prod e^{X_j})(prod e^{Y_j}) = prod e^{z_j}`` and ``u_i``
solves ``(prod e^{X'_j})(prod e^{Y_j})(prod e^{X_j})^{-1} = prod e^{u_j}``.
Both are found by peeling one weight at a time off the logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import fp

FAMILIES = ("X'", "Y", "X")
MAX_R = 6

Letter = tuple  # (family, index)
Word = tuple    # tuple of letters


def letter_key(a: Letter):
    return (FAMILIES.index(a[0]), a[1])


def letter_name(a: Letter) -> str:
    return f"{a[0]}{a[1]}"


def word_weight(w: Word) -> int:
    return sum(a[1] for a in w)


# ------------------------------------------------------- truncated series

class TruncSeries:
    """Noncommutative polynomial over Q truncated above total weight W."""

    __slots__ = ("W", "terms")

    def __init__(self, W: int, terms: dict | None = None):
        self.W = W
        self.terms = {w: Fraction(c) for w, c in (terms or {}).items() if c and word_weight(w) <= W}

    @classmethod
    def letter(cls, W: int, a: Letter, coeff=1) -> "TruncSeries":
        return cls(W, {(a,): coeff})

    @classmethod
    def one(cls, W: int) -> "TruncSeries":
        return cls(W, {(): 1})

    def copy(self) -> "TruncSeries":
        return TruncSeries(self.W, dict(self.terms))

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return TruncSeries(self.W, out)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.W, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TruncSeries":
        c = Fraction(c)
        return TruncSeries(self.W, {w: c * v for w, v in self.terms.items()})

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        out: dict = {}
        W = self.W
        for w1, c1 in self.terms.items():
            k1 = word_weight(w1)
            for w2, c2 in other.terms.items():
                if k1 + word_weight(w2) <= W:
                    w = w1 + w2
                    out[w] = out.get(w, 0) + c1 * c2
        return TruncSeries(W, out)

    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def component(self, weight: int) -> "TruncSeries":
        return TruncSeries(self.W, {w: c for w, c in self.terms.items() if word_weight(w) == weight})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, TruncSeries) and self.terms == other.terms

    def __repr__(self):
        parts = [f"{c}*{''.join(letter_name(a) for a in w) or '1'}" for w, c in sorted(self.terms.items(), key=_word_sort)]
        return "TruncSeries(" + " + ".join(parts) + ")"

    def exp(self) -> "TruncSeries":
        if self.constant():
            raise ValueError("exp needs zero constant term")
        out = TruncSeries.one(self.W)
        power = TruncSeries.one(self.W)
        for k in range(1, self.W + 1):
            power = power * self
            if power.is_zero():
                break
            out = out + power.scale(Fraction(1, _fact(k)))
        return out

    def log(self) -> "TruncSeries":
        if self.constant() != 1:
            raise ValueError("log needs constant term 1")
        s = self - TruncSeries.one(self.W)
        out = TruncSeries(self.W)
        power = TruncSeries.one(self.W)
        for k in range(1, self.W + 1):
            power = power * s
            if power.is_zero():
                break
            out = out + power.scale(Fraction((-1) ** (k + 1), k))
        return out


def _fact(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _word_sort(item):
    w = item[0]
    return (len(w), [letter_key(a) for a in w])


# ------------------------------------------------------------ Lie trees
# A tree is a letter (family, i) or a pair (left, right) meaning [left, right].

def is_leaf(t) -> bool:
    return isinstance(t[0], str)


def br(a, b):
    return (a, b)


def expand_tree(t) -> dict:
    """Associative expansion of a bracket tree, as word -> integer."""
    if is_leaf(t):
        return {(t,): 1}
    L, R = expand_tree(t[0]), expand_tree(t[1])
    out: dict = {}
    for w1, c1 in L.items():
        for w2, c2 in R.items():
            out[w1 + w2] = out.get(w1 + w2, 0) + c1 * c2
            out[w2 + w1] = out.get(w2 + w1, 0) - c1 * c2
    return {w: c for w, c in out.items() if c}


def tree_name(t) -> str:
    if is_leaf(t):
        return letter_name(t)
    return f"[{tree_name(t[0])},{tree_name(t[1])}]"


def series_from_terms(terms, W: int) -> TruncSeries:
    out: dict = {}
    for c, t in terms:
        for w, k in expand_tree(t).items():
            out[w] = out.get(w, 0) + Fraction(c) * k
    return TruncSeries(W, out)


# ---------------------------------------------------------- Lie criteria

def is_lie(s: TruncSeries) -> bool:
    """Friedrichs criterion: s is primitive for the shuffle coproduct."""
    if s.constant():
        return False
    coprod: dict = {}
    for w, c in s.terms.items():
        k = len(w)
        for mask in range(1 << k):
            left = tuple(w[i] for i in range(k) if mask >> i & 1)
            right = tuple(w[i] for i in range(k) if not mask >> i & 1)
            key = (left, right)
            coprod[key] = coprod.get(key, 0) + c
    expected: dict = {}
    for w, c in s.terms.items():
        expected[(w, ())] = expected.get((w, ()), 0) + c
        expected[((), w)] = expected.get(((), w), 0) + c
    keys = set(coprod) | set(expected)
    return all(coprod.get(k, 0) == expected.get(k, 0) for k in keys)


def is_lyndon(w: Word) -> bool:
    key = [letter_key(a) for a in w]
    return all(key < key[i:] for i in range(1, len(key)))


def standard_bracketing(w: Word):
    """Standard bracketing of a Lyndon word (split at its longest proper Lyndon suffix)."""
    if len(w) == 1:
        return w[0]
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return (standard_bracketing(w[:i]), standard_bracketing(w[i:]))
    raise ValueError("not a Lyndon word")


def lyndon_decompose(s: TruncSeries) -> list[tuple[Fraction, object]]:
    """Write a Lie element in the Lyndon basis.

    The expansion of the standard bracketing of a Lyndon word w is w plus
    lexicographically larger words, so the smallest surviving word is
    always Lyndon and its coefficient is read off directly.
    """
    rem = dict(s.terms)
    out = []
    while rem:
        w = min(rem, key=lambda v: (len(v), [letter_key(a) for a in v]))
        c = rem[w]
        # words of one length are processed in lex order; a leftover word
        # that is not Lyndon means s was not a Lie element
        if not is_lyndon(w):
            raise ValueError(f"not a Lie element (stuck at word {w})")
        t = standard_bracketing(w)
        out.append((c, t))
        for v, k in expand_tree(t).items():
            nv = rem.get(v, 0) - c * k
            if nv:
                rem[v] = nv
            else:
                rem.pop(v, None)
    return out


# ------------------------------------------------------- universal polys

@dataclass(frozen=True)
class UniversalLiePoly:
    name: str
    weight: int
    terms: tuple  # ((Fraction, tree), ...) in the Lyndon basis

    @classmethod
    def from_series(cls, name: str, weight: int, s: TruncSeries) -> "UniversalLiePoly":
        return cls(name, weight, tuple(lyndon_decompose(s)))

    def series(self, W: int | None = None) -> TruncSeries:
        return series_from_terms(self.terms, W or self.weight)

    def letters(self) -> set:
        out = set()

        def walk(t):
            if is_leaf(t):
                out.add(t)
            else:
                walk(t[0])
                walk(t[1])

        for _, t in self.terms:
            walk(t)
        return out

    def to_json(self) -> list:
        return [[str(c), tree_name(t)] for c, t in self.terms]

    def evaluate(self, assignment: dict, p: int) -> np.ndarray:
        return eval_universal(self, assignment, p)


def _coeff_mod(c: Fraction, p: int) -> int:
    if c.denominator % p == 0:
        raise ValueError(f"coefficient {c} has a denominator divisible by p={p}; need p >= r")
    return c.numerator * fp.inv_mod(c.denominator, p) % p


def eval_universal(poly: UniversalLiePoly, assignment: dict, p: int) -> np.ndarray:
    """Evaluate in gl_n(F_p); ``assignment`` maps letters to (..., n, n) arrays.

    Missing letters are treated as zero.  Subtrees are memoised so shared
    brackets are computed once.
    """
    memo: dict = {}
    sample = next(iter(assignment.values()))
    zero = np.zeros(np.shape(sample), dtype=np.int64)

    def ev(t):
        if t in memo:
            return memo[t]
        if is_leaf(t):
            v = np.asarray(assignment.get(t, zero), dtype=np.int64) % p
        else:
            a, b = ev(t[0]), ev(t[1])
            v = fp.bracket(a, b, p)
        memo[t] = v
        return v

    out = None
    for c, t in poly.terms:
        term = (_coeff_mod(c, p) * ev(t)) % p
        out = term if out is None else out + term
    if out is None:
        return zero
    return out % p


def _exp_product(letters, W: int, sign: int = 1, reverse: bool = False) -> TruncSeries:
    order = list(reversed(letters)) if reverse else list(letters)
    out = TruncSeries.one(W)
    for a in order:
        out = out * TruncSeries.letter(W, a, sign).exp()
    return out


def _peel(P: TruncSeries, W: int) -> list[TruncSeries]:
    comps = []
    Q = P
    for i in range(1, W + 1):
        z = Q.log().component(i)
        comps.append(z)
        Q = (-z).exp() * Q
    return comps


def _check_r(r: int):
    if not 2 <= r <= MAX_R:
        raise ValueError(f"r must lie in [2, {MAX_R}], got {r}")


@lru_cache(maxsize=None)
def bch_z(r: int) -> tuple[UniversalLiePoly, ...]:
    """z_1 .. z_{r-1}."""
    _check_r(r)
    W = r - 1
    X = [("X", i) for i in range(1, r)]
    Y = [("Y", i) for i in range(1, r)]
    P = _exp_product(X, W) * _exp_product(Y, W)
    return tuple(UniversalLiePoly.from_series(f"z{i}", i, z) for i, z in enumerate(_peel(P, W), 1))


@lru_cache(maxsize=None)
def bch_u(r: int) -> tuple[tuple[UniversalLiePoly, ...], tuple[UniversalLiePoly, ...]]:
    """(u_1 .. u_{r-1}, u'_1 .. u'_{r-1}) with u_i = X'_i - X_i + Y_i + u'_i."""
    _check_r(r)
    W = r - 1
    Xp = [("X'", i) for i in range(1, r)]
    Y = [("Y", i) for i in range(1, r)]
    X = [("X", i) for i in range(1, r)]
    P = _exp_product(Xp, W) * _exp_product(Y, W) * _exp_product(X, W, sign=-1, reverse=True)
    us, ups = [], []
    for i, u in enumerate(_peel(P, W), 1):
        lin = TruncSeries(W, {(("X'", i),): 1, (("X", i),): -1, (("Y", i),): 1})
        us.append(UniversalLiePoly.from_series(f"u{i}", i, u))
        ups.append(UniversalLiePoly.from_series(f"u'{i}", i, u - lin))
    return tuple(us), tuple(ups)


def reconstruct_z(r: int) -> bool:
    """exp(z_1) ... exp(z_{r-1}) equals the defining product through weight r-1."""
    W = r - 1
    X = [("X", i) for i in range(1, r)]
    Y = [("Y", i) for i in range(1, r)]
    lhs = _exp_product(X, W) * _exp_product(Y, W)
    rhs = TruncSeries.one(W)
    for z in bch_z(r):
        rhs = rhs * z.series(W).exp()
    return lhs == rhs


def reconstruct_u(r: int) -> bool:
    W = r - 1
    Xp = [("X'", i) for i in range(1, r)]
    Y = [("Y", i) for i in range(1, r)]
    X = [("X", i) for i in range(1, r)]
    lhs = _exp_product(Xp, W) * _exp_product(Y, W) * _exp_product(X, W, sign=-1, reverse=True)
    rhs = TruncSeries.one(W)
    for u in bch_u(r)[0]:
        rhs = rhs * u.series(W).exp()
    return lhs == rhs


def tables_json(r: int) -> dict:
    us, ups = bch_u(r)
    return {
        "r": r,
        "letter_order": list(FAMILIES),
        "z": {z.name: z.to_json() for z in bch_z(r)},
        "u": {u.name: u.to_json() for u in us},
        "u_prime": {u.name: u.to_json() for u in ups},
    }


# ---------------------------------------------------------- golden tables
# Hand-transcribed low-weight polynomials.  Brackets are written as strings
# and compared after associative expansion, which is a canonical form.

def _L(*terms):
    return tuple((Fraction(c), t) for c, t in terms)


GOLDEN = {
    "z1": _L((1, "X1"), (1, "Y1")),
    "z2": _L((1, "X2"), (1, "Y2"), ("1/2", "[X1,Y1]")),
    "z3": _L((1, "X3"), (1, "Y3"), (1, "[X2,Y1]"), ("-1/6", "[X1,[X1,Y1]]"), ("-1/3", "[Y1,[X1,Y1]]")),
    "u1": _L((1, "X'1"), (-1, "X1"), (1, "Y1")),
    "u2": _L((1, "X'2"), (-1, "X2"), (1, "Y2"), ("1/2", "[X'1,Y1]"), ("-1/2", "[X'1,X1]"),
             ("-1/2", "[Y1,X1]")),
    "u3": _L((1, "X'3"), (-1, "X3"), (1, "Y3"), (1, "[X'2,Y1]"), (1, "[X2,X1]"), (-1, "[X'2,X1]"),
             (-1, "[Y2,X1]"), ("-1/6", "[X'1,[X'1,Y1]]"), ("-1/3", "[Y1,[X'1,Y1]]"),
             ("1/2", "[X1,[X'1,Y1]]"), ("1/6", "[X'1,[X'1,X1]]"), ("1/6", "[X'1,[Y1,X1]]"),
             ("1/6", "[Y1,[X'1,X1]]"), ("1/6", "[Y1,[Y1,X1]]"), ("-1/3", "[X1,[X'1,X1]]"),
             ("-1/3", "[X1,[Y1,X1]]")),
}


def parse_tree(text: str):
    """``"[X'1,[Y1,X1]]"`` -> nested letter tree."""
    text = text.replace(" ", "")

    def at(k):
        return text[k] if k < len(text) else ""

    def parse(k):
        if at(k) == "[":
            left, k = parse(k + 1)
            if at(k) != ",":
                raise ValueError(f"expected ',' at {k} in {text!r}")
            right, k = parse(k + 1)
            if at(k) != "]":
                raise ValueError(f"expected ']' at {k} in {text!r}")
            return (left, right), k + 1
        j = k
        while j < len(text) and text[j] not in ",]":
            j += 1
        tok = text[k:j]
        fam = tok.rstrip("0123456789")
        if fam not in FAMILIES or fam == tok:
            raise ValueError(f"bad letter {tok!r}")
        return (fam, int(tok[len(fam):])), j

    tree, end = parse(0)
    if end != len(text):
        raise ValueError(f"trailing input in {text!r}")
    return tree


def golden_series(name: str, W: int) -> TruncSeries:
    return series_from_terms([(c, parse_tree(t)) for c, t in GOLDEN[name]], W)


def golden_uprime(i: int, W: int) -> TruncSeries:
    lin = TruncSeries(W, {(("X'", i),): 1, (("X", i),): -1, (("Y", i),): 1})
    return golden_series(f"u{i}", W) - lin


def golden_check(r: int = 4) -> dict:
    """Compare computed z_i, u_i, u'_i (i < r, i <= 3) with GOLDEN; certify each is Lie."""
    W = r - 1
    us, ups = bch_u(r)
    rows = {}
    for i in range(1, min(r, 4)):
        pairs = {
            f"z{i}": (bch_z(r)[i - 1].series(W), golden_series(f"z{i}", W)),
            f"u{i}": (us[i - 1].series(W), golden_series(f"u{i}", W)),
            f"u'{i}": (ups[i - 1].series(W), golden_uprime(i, W)),
        }
        for name, (got, want) in pairs.items():
            rows[name] = {"matches": got == want, "lie": is_lie(got)}
    ok = all(v["matches"] and v["lie"] for v in rows.values())
    return {"r": r, "polynomials": rows, "status": "pass" if ok else "fail"}


# --------------------------------------------- batched evaluation helpers

def z_values(r: int, X: list, Y: list, p: int) -> list[np.ndarray]:
    """z_i(X_1.., Y_1..) for i = 1..r-1 on batched matrices."""
    assign = {("X", i + 1): X[i] for i in range(len(X))}
    assign.update({("Y", i + 1): Y[i] for i in range(len(Y))})
    return [z.evaluate(assign, p) for z in bch_z(r)]


def u_values(r: int, Xp: list, Y: list, X: list, p: int, upto: int | None = None) -> list[np.ndarray]:
    """u_i(X'_1.., Y_1.., X_1..) for i = 1..upto (default r-1).

    Each list may be shorter than r-1; absent letters count as zero.
    """
    assign = {}
    for fam, seq in (("X'", Xp), ("Y", Y), ("X", X)):
        for i, v in enumerate(seq):
            if v is not None:
                assign[(fam, i + 1)] = v
    us = bch_u(r)[0]
    upto = r - 1 if upto is None else upto
    return [us[i].evaluate(assign, p) for i in range(upto)]


def uprime_values(r: int, Xp: list, Y: list, X: list, p: int, i: int) -> np.ndarray:
    assign = {}
    for fam, seq in (("X'", Xp), ("Y", Y), ("X", X)):
        for k, v in enumerate(seq):
            if v is not None:
                assign[(fam, k + 1)] = v
    return bch_u(r)[1][i - 1].evaluate(assign, p)


def all_words(W: int, families=FAMILIES):
    """Every word of total weight <= W (used by exhaustive property tests)."""
    letters = [(f, i) for f in families for i in range(1, W + 1)]
    out = [()]
    frontier = [()]
    while frontier:
        nxt = []
        for w in frontier:
            for a in letters:
                v = w + (a,)
                if word_weight(v) <= W:
                    nxt.append(v)
        out.extend(nxt)
        frontier = nxt
    return out


__all__ = [
    "TruncSeries", "UniversalLiePoly", "bch_z", "bch_u", "is_lie", "eval_universal",
    "lyndon_decompose", "series_from_terms", "expand_tree", "br", "tables_json",
    "z_values", "u_values", "uprime_values", "reconstruct_z", "reconstruct_u",
    "GOLDEN", "parse_tree", "golden_check",
]
