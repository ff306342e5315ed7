"""Reproducible random streams.

All randomness in this package flows through Philox, a counter-based
generator whose output for a given 256-bit key is fixed by specification.
Independent streams are derived by packing a user seed plus small stream
tags into the key words, so any (seed, purpose, index) triple names the
same stream on every run regardless of call order or thread count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def make_generator(seed: int, *stream: int) -> np.random.Generator:
    """Generator over the Philox stream keyed by (seed, *stream).

    Up to three extra stream tags may be given; the same tuple always
    yields the same stream.
    """
    words = (seed, *stream)
    if len(words) > 4:
        raise ValueError("at most three stream tags are supported")
    key = np.zeros(4, dtype=np.uint64)
    for i, w in enumerate(words):
        key[i] = int(w) & _MASK64
    return np.random.Generator(np.random.Philox(key=key))
