"""Deterministic RNG stream derivation.

Every stochastic stage of the pipeline owns an independent stream derived
from a master seed plus a structural key (stage name, activity id, image
index, ...). Streams are stable across runs and independent of execution
order, so parallel dataset generation reproduces serial output exactly.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFFFFFFFFFF
    if isinstance(key, str):
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"seed keys must be int or str, got {type(key).__name__}")


def derive_seed_sequence(*keys) -> np.random.SeedSequence:
    """Build a SeedSequence from a tuple of int/str keys."""
    if not keys:
        raise ValueError("at least one key required")
    return np.random.SeedSequence(entropy=tuple(_key_to_int(k) for k in keys))


def derive_rng(*keys) -> np.random.Generator:
    """Independent Generator for the stream named by `keys`."""
    return np.random.default_rng(derive_seed_sequence(*keys))


def derive_seed(*keys) -> int:
    """Collapse a stream name to a single integer seed (for APIs taking one)."""
    return int(derive_seed_sequence(*keys).generate_state(1, np.uint64)[0])
