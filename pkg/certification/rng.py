"""
Deterministic Random Streams

Counter-based generators (numpy Philox) keyed by (master seed, purpose tag,
counters). There is no global RNG state: the same key always yields the same
stream, whatever the thread count or call order.
"""

from typing import Dict

import numpy as np

from certification.errors import InputError

PURPOSE_TAGS: Dict[str, int] = {
    "sample": 1,
    "trajectory": 2,
    "depolarize": 3,
    "power_iteration": 4,
    "random_state": 5,
}

BASIS_TAGS: Dict[str, int] = {"X": 0, "Y": 1, "Z": 2}


def stream(seed: int, purpose: str, *counters: int) -> np.random.Generator:
    """Generator keyed by (seed, purpose, *counters)."""
    if seed < 0 or any(c < 0 for c in counters):
        raise InputError(f"seed and counters must be non-negative, got {seed}, {counters}")
    try:
        tag = PURPOSE_TAGS[purpose]
    except KeyError:
        raise InputError(f"unknown RNG purpose {purpose!r}") from None
    key = np.random.SeedSequence([int(seed), tag, *(int(c) for c in counters)])
    return np.random.Generator(np.random.Philox(key))


def shot_uniforms(seed: int, purpose: str, basis: str, shots: int) -> np.ndarray:
    """
    One uniform in [0, 1) per shot.

    Philox consumes one 64-bit word per double, so value s is fixed by the
    key and the counter position s alone.
    """
    return stream(seed, purpose, BASIS_TAGS[basis]).random(shots)


def trajectory_seed(seed: int, basis: str, shot: int) -> int:
    """Per-shot seed for a noise trajectory."""
    words = np.random.SeedSequence([int(seed), PURPOSE_TAGS["trajectory"], BASIS_TAGS[basis], int(shot)])
    return int(words.generate_state(1, dtype=np.uint64)[0])
