"""Seed-stream derivation.

Every random quantity is drawn from a generator derived from a 64-bit master
seed plus a ``(tag, index)`` pair, so trials can be replayed in isolation and
results do not depend on execution order.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def derive_seed(master_seed: int, tag: str, index: int = 0) -> int:
    """Return the 64-bit seed of stream ``(tag, index)`` under ``master_seed``."""
    if not 0 <= master_seed <= MASK64:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    if index < 0:
        raise ValueError("stream index must be non-negative")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(_tag_key(tag), index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed) -> np.random.Generator:
    """Coerce an integer seed or a Generator into a Generator; None is rejected."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.default_rng(int(seed))


def stream(master_seed: int, tag: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, tag, index))
