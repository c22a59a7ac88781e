"""Deterministic 64-bit random streams (splitmix64).

Every random decision in the package flows through these streams. The
compiled kernels in ``_speedups`` re-implement the exact same update and
rejection logic on C integers, so a corpus is byte-identical no matter
which backend is active, how many workers ran, or what platform built it.
Per-task streams are derived from (master seed, tag, index) so any
document can be regenerated in isolation.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_POW64 = 1 << 64
_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """splitmix64 finalizer: a bijective avalanche on 64-bit values."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    """FNV-1a hash of the UTF-8 encoding of ``text``."""
    h = _FNV_OFFSET
    for b in text.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def derive_seed(master_seed: int, tag: str, index: int = 0) -> int:
    """Derive an independent stream seed from (master seed, tag, index)."""
    h = mix64((master_seed & MASK64) ^ fnv1a64(tag))
    return mix64(h ^ (index & MASK64))


class Stream:
    """A splitmix64 stream over a single 64-bit state word.

    ``state`` is the whole state; adopting a state value from a kernel call
    is equivalent to constructing ``Stream(state)``.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return mix64(self.state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via unbiased rejection sampling."""
        if n <= 0:
            raise ValueError(f"next_below requires n >= 1, got {n}")
        # Mirrors the compiled kernel: r = 2^64 mod n, reject u >= 2^64 - r.
        r = _POW64 % n
        limit = _POW64 - r
        while True:
            u = self.next_u64()
            if r == 0 or u < limit:
                return u % n

    def shuffle(self, values) -> None:
        """In-place Fisher-Yates shuffle driven by ``next_below``."""
        for j in range(len(values) - 1, 0, -1):
            i = self.next_below(j + 1)
            values[j], values[i] = values[i], values[j]
