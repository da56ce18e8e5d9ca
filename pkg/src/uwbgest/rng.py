"""Deterministic random number generation for synthetic data.

Everything here is built on SplitMix64 (Steele, Lea & Flood 2014), chosen
because it is a published, trivially portable 64-bit generator: the k-th
output of a stream is a pure function of (seed, k), so generation can be
vectorized and parallelized without any shared state. Datasets produced
from the same seed are identical on every platform that implements the
same three lines of integer mixing.

Stream definition (all arithmetic mod 2**64):

    output_k = mix64(seed + (k + 1) * GOLDEN_GAMMA)      for k = 0, 1, 2, ...

where ``mix64`` is the SplitMix64 finalizer:

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Uniform doubles take the top 53 bits of each output. Gaussian deviates use
the Box-Muller transform on consecutive pairs (u1 in (0, 1], u2 in [0, 1)):

    z0 = sqrt(-2 ln u1) * cos(2 pi u2)
    z1 = sqrt(-2 ln u1) * sin(2 pi u2)

This module is the only source of randomness in dataset synthesis; model
weight initialization uses numpy's seeded PCG64 instead (see models).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int, reduced mod 2**64."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(root: int, *path: int) -> int:
    """Derive a child seed from ``root`` and a tuple of path indices.

    Stable contract (relied on by dataset manifests):

        h = root
        for p in path:  h = mix64(h + (p + 1) * GOLDEN_GAMMA)

    The +1 keeps index 0 from being a no-op step.
    """
    h = root & MASK64
    for p in path:
        h = mix64(h + (p + 1) * GOLDEN_GAMMA)
    return h


def stream_u64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of the SplitMix64 stream for ``seed`` (uint64)."""
    k = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + k * np.uint64(GOLDEN_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, n: int) -> np.ndarray:
    """``n`` doubles in [0, 1) from the top 53 bits of the stream."""
    return (stream_u64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(seed: int, n: int) -> np.ndarray:
    """``n`` standard normal doubles via Box-Muller on stream pairs.

    Consecutive stream outputs (2k, 2k+1) form one Box-Muller pair; u1 is
    shifted into (0, 1] so the log never sees zero.
    """
    npairs = (n + 1) // 2
    raw = stream_u64(seed, 2 * npairs)
    u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * npairs, dtype=np.float64)
    out[0::2] = r * np.cos(2.0 * np.pi * u2)
    out[1::2] = r * np.sin(2.0 * np.pi * u2)
    return out[:n]


class U64Stream:
    """Sequential view of a SplitMix64 stream, for index-by-index draws."""

    def __init__(self, seed: int):
        self._seed = seed & MASK64
        self._k = 0

    def next_u64(self) -> int:
        self._k += 1
        return mix64(self._seed + self._k * GOLDEN_GAMMA)

    def next_below(self, bound: int) -> int:
        """Uniform int in [0, bound) by modulo reduction.

        Modulo bias is below bound/2**64, which is negligible for the cell
        counts used here (< 2**32).
        """
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound
