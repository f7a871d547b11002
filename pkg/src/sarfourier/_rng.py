"""Counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, stream)``, so trial
``t`` of a Monte Carlo run draws the same numbers no matter which worker
computes it or in what order.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_phases(seed: int, size, stream: int = 0) -> np.ndarray:
    """Phases uniform on ``[-pi, pi)``."""
    return -np.pi + 2.0 * np.pi * generator(seed, stream).random(size)
