"""Deterministic derivation of sub-seeds from a master seed."""
import numpy as np


def child_seed(seed: int, *path: int) -> int:
    """u64 seed for the stream at ``path`` below ``seed``; a fixed counter scheme."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path)))
