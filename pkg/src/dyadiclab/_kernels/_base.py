"""Shared conventions of the walk kernels.

Counter-based randomness: every path owns a 64-bit key derived from
(ensemble seed, global path index); word ``ctr`` of a path is a splitmix64
output, so any word is addressable without generating its predecessors and
results are independent of execution order and worker count.

Toss stream layout for resolution N (wpb = ceil(N/64) words per block):

* word 0, bit 0           -> the memory toss of generation 0,
* block n >= 1 uses words (n-1)*wpb + 1 .. n*wpb, least significant bit
  first, N bits in total; bit b encodes the toss 2b - 1.

Positions are tracked as integer multiples of the fine step sqrt(2 delta);
this keeps long paths drift-free and makes the stopping test exact.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
FULL_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)

MAX_RESOLUTION = 64  # keeps ix^2 + iy^2 inside int64 for the full horizon


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * MIX1
        z = (z ^ (z >> np.uint64(27))) * MIX2
        return z ^ (z >> np.uint64(31))


def path_keys(seed: int, start: int, count: int) -> np.ndarray:
    gids = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        a = mix64(np.uint64(seed) + GOLDEN)
        b = mix64((gids + np.uint64(1)) * GOLDEN)
        return mix64(a ^ b)


def words(keys: np.ndarray, ctr: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        return mix64(keys + np.uint64(ctr + 1) * GOLDEN)


def scheme_parameters(N: int, T: float):
    """(delta, step, words_per_block, coarse_blocks, stop_threshold).

    stop_threshold compares against ix^2 + iy^2: the walk has left the disc
    of radius 1 - 1/N once that integer reaches the threshold."""
    if N < 2 or N > MAX_RESOLUTION:
        raise ValueError(f"resolution N must lie in [2, {MAX_RESOLUTION}]")
    if T <= 0:
        raise ValueError("horizon T must be positive")
    delta = T / float(N**5)
    step = np.sqrt(2.0 * delta)
    wpb = (N + 63) // 64
    eps = 1.0 / N
    threshold = (1.0 - eps) ** 2 / (2.0 * delta)
    return delta, step, wpb, N**4, threshold
