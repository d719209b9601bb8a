"""splitmix64 stream, vectorised with numpy's wrapping uint64 arithmetic."""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    def __init__(self, seed: int):
        self.state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)

    def next_u64(self, count: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            steps = np.arange(1, count + 1, dtype=np.uint64) * _GAMMA
            z = self.state + steps
            self.state = self.state + np.uint64(count) * _GAMMA
            return _mix(z)

    def randbelow(self, bound: int, shape) -> np.ndarray:
        """Uniform integers in [0, bound); the modulo bias is below 2^-56 for bound < 256."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        count = int(np.prod(shape)) if shape else 1
        vals = self.next_u64(count) % np.uint64(bound)
        return vals.astype(np.int64).reshape(shape)

    def fork(self, label: int) -> "SplitMix64":
        """An independent child stream keyed by ``label``."""
        with np.errstate(over="ignore"):
            child_seed = int(_mix(np.array([self.state ^ np.uint64(label & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64))[0])
        return SplitMix64(child_seed)
