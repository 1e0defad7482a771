"""Counter-based random streams.

Every random quantity in the package is drawn from a Philox4x64-10 stream
keyed by ``(seed, stream_id)``. A stream is a pure function of its key, so
work split across threads or processes reproduces bit-for-bit no matter how
it is scheduled.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def philox(seed: int, stream: int = 0) -> np.random.Philox:
    return np.random.Philox(key=np.array([seed & MASK64, stream & MASK64],
                                         dtype=np.uint64))


def substream(seed: int, stream: int = 0) -> np.random.Generator:
    """Return a Generator over the substream ``(seed, stream)``."""
    return np.random.Generator(philox(seed, stream))


def raw_words(seed: int, stream: int, count: int) -> np.ndarray:
    """First ``count`` raw 64-bit outputs of the substream."""
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    return philox(seed, stream).random_raw(count).astype(np.uint64, copy=False)
