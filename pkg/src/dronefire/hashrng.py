"""Counter-based uniform draws keyed by (seed, source cell, target cell).

A draw is a pure function of its key, so two simulations sharing a seed see
the same coin for the same source/target pair no matter what else differs
between them. The mixer is the splitmix64 finalizer, applied once per key component.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TARGET_SALT = np.uint64(0xD1B54A32D192ED03)
_INV_2_53 = 1.0 / (1 << 53)


def _mix(x: np.ndarray) -> np.ndarray:
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def uniform(seed: int, source, target) -> np.ndarray:
    """Uniform floats in [0, 1) for each (source, target) index pair."""
    src = np.asarray(source, dtype=np.uint64)
    tgt = np.asarray(target, dtype=np.uint64)
    with np.errstate(over="ignore"):
        # the seed is mixed on its own first so that nearby seeds do not
        # alias each other through the xor with the source index
        h = _mix(_mix(np.uint64(seed & MASK64)) ^ src)
        h = _mix(h ^ (tgt * _TARGET_SALT))
    return (h >> np.uint64(11)).astype(np.float64) * _INV_2_53


def derive_seed(seed: int, index: int) -> int:
    """Independent seed for replicate ``index`` of a base seed."""
    with np.errstate(over="ignore"):
        return int(_mix(_mix(np.uint64(seed & MASK64)) ^ np.uint64(index)))


class HashDraws:
    """Callable draw source bound to one seed; the engine's default."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64

    def __call__(self, source, target) -> np.ndarray:
        return uniform(self.seed, source, target)

    def __repr__(self):
        return f"HashDraws(seed={self.seed})"
