"""Seed handling.

All randomness comes from ``numpy.random.PCG64`` streams derived from a
``SeedSequence``. A substream is addressed by appending integers to the
parent's spawn key, so ``substream(seed, a, b)`` names the same stream no
matter which worker or in which order it is requested, and distinct keys
give statistically independent streams.
"""
from __future__ import annotations

from typing import Union

import numpy as np

Seed = Union[int, np.random.SeedSequence]


def seed_sequence(seed: Seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (bool, float)) or int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.SeedSequence(int(seed))


def substream(seed: Seed, *key: int) -> np.random.SeedSequence:
    parent = seed_sequence(seed)
    return np.random.SeedSequence(
        entropy=parent.entropy,
        spawn_key=tuple(parent.spawn_key) + tuple(int(k) for k in key),
        pool_size=parent.pool_size,
    )


def generator(seed: Seed, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(substream(seed, *key)))


def seed_label(seed: Seed) -> int:
    """A 64-bit integer identifying ``seed`` for reporting."""
    if isinstance(seed, np.random.SeedSequence):
        if not seed.spawn_key and isinstance(seed.entropy, int):
            return int(seed.entropy)
        return int(seed.generate_state(1, np.uint64)[0])
    return int(seed)
