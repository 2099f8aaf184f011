"""
Seeded random streams.

All randomness flows from one 64-bit seed through Philox, a counter-based
generator: stream k starts at counter k << 192, so streams never overlap and
a parallel sweep draws the same numbers whatever order its points run in.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


def make_rng(seed: int = 0, stream: int = 0) -> np.random.Generator:
    """Generator for (seed, stream)"""
    if stream < 0:
        raise ValueError("stream index must be >= 0")
    counter = np.array([0, 0, 0, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=int(seed) & SEED_MASK))


def log_uniform(rng: np.random.Generator, low: float, high: float, size=None):
    """Samples whose logarithm is uniform on [log low, log high]"""
    return np.exp(rng.uniform(np.log(low), np.log(high), size=size))
