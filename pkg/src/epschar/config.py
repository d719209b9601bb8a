"""Run configuration: loading, validation and the canonical hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .charfun import GenericDatum
from .grgroup import DEFAULT_BUDGET
from .scalars import ConfigurationError, is_prime

MAX_R_FULL = 4      # character, ladder and Fourier suites
MAX_R_BCH = 6


@dataclass(frozen=True)
class Budgets:
    max_elements: int = DEFAULT_BUDGET
    samples: int = 200              # ladder / comparison samples for r >= 3
    r4_samples: int = 50            # ladder triangle checks at r = 4
    lemma_samples: int = 1000
    chain_samples: int = 10_000
    tau_samples: int = 1000
    affinity_samples: int = 100
    group_samples: int = 1000
    conjugation_pairs: int = 1000
    fourier_random_bases: int = 5
    fourier_points: int = 16        # sampled support points at r = 4


@dataclass(frozen=True)
class Config:
    n: int
    p: int
    r: int
    A: tuple = ()
    lambda0: tuple = ()
    seed: int = 1
    budgets: Budgets = field(default_factory=Budgets)
    force: bool = False
    group_only: bool = False

    @property
    def datum(self) -> GenericDatum:
        return GenericDatum.make(self.n, self.p, self.r, self.A, self.lambda0)

    def to_json(self) -> dict:
        d = asdict(self)
        d["A"] = [list(a) for a in self.A]
        d["lambda0"] = list(self.lambda0)
        return d

    def canonical(self) -> str:
        """Sorted keys, no whitespace: the byte string that gets hashed."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def replace(self, **kw) -> "Config":
        d = self.to_json()
        d.update(kw)
        return from_dict(d)


def _int(d: dict, key: str, default=None) -> int:
    if key not in d:
        if default is None:
            raise ConfigurationError(f"missing field {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(f"field {key!r} must be an integer, got {v!r}")
    return v


def from_dict(d: dict) -> Config:
    if not isinstance(d, dict):
        raise ConfigurationError("config must be a JSON object")
    n, p, r = _int(d, "n"), _int(d, "p"), _int(d, "r")
    if n not in (2, 3):
        raise ConfigurationError(f"n must be 2 or 3, got {n}")
    if p == 2 or not is_prime(p):
        raise ConfigurationError(f"p must be an odd prime, got {p}")
    group_only = bool(d.get("group_only", False))
    top = MAX_R_BCH if group_only else MAX_R_FULL
    if not 1 <= r <= top:
        raise ConfigurationError(f"r must lie in [1, {top}], got {r}")
    if p < r:
        raise ConfigurationError(f"p >= r violated: p={p}, r={r}")

    A = d.get("A", [[0] * n for _ in range(r - 1)] if group_only else None)
    if A is None:
        raise ConfigurationError("missing field 'A'")
    if not isinstance(A, list) or len(A) != r - 1:
        raise ConfigurationError(f"A must list r-1 = {r - 1} diagonal vectors")
    for j, row in enumerate(A, 1):
        if not isinstance(row, list) or len(row) != n or not all(isinstance(a, int) for a in row):
            raise ConfigurationError(f"A_{j} must be a list of {n} integers")
    A = tuple(tuple(a % p for a in row) for row in A)
    if r >= 2 and not group_only:
        last = A[-1]
        for i in range(n):
            for k in range(i + 1, n):
                if last[i] == last[k]:
                    raise ConfigurationError(
                        f"A_{r - 1} not regular semisimple: entries {last[i]},{last[k]} collide")

    lam = d.get("lambda0", [0] * n)
    if not isinstance(lam, list) or len(lam) != n or not all(isinstance(c, int) for c in lam):
        raise ConfigurationError(f"lambda0 must be a list of {n} integers")
    lam = tuple(c % (p - 1) for c in lam)

    seed = _int(d, "seed", 1)
    if not 0 <= seed < 2**64:
        raise ConfigurationError("seed must fit in 64 bits")
    raw_b = d.get("budgets", {})
    known = set(Budgets.__dataclass_fields__)
    extra = set(raw_b) - known
    if extra:
        raise ConfigurationError(f"unknown budget fields: {sorted(extra)}")
    budgets = Budgets(**{k: _int(raw_b, k) for k in raw_b})
    unknown = set(d) - {"n", "p", "r", "A", "lambda0", "seed", "budgets", "force", "group_only"}
    if unknown:
        raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
    return Config(n, p, r, A, lam, seed, budgets, bool(d.get("force", False)), group_only)


def load_config(path) -> Config:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(data)
