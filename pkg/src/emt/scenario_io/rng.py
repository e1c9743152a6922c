"""SplitMix64: a tiny, platform-independent 64-bit generator.

Output k (1-based) of the stream seeded with ``s`` is ``mix(s + k * GAMMA mod 2**64)``,
which lets whole blocks be generated with vectorised uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return _mix_int(self.state)

    def u64_array(self, n: int) -> np.ndarray:
        k = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self.state) + k * np.uint64(GAMMA)
            out = _mix_array(states)
        self.state = (self.state + n * GAMMA) & MASK64
        return out

    def random(self, size=None):
        """Uniform doubles in [0, 1) from the top 53 bits."""
        if size is None:
            return (self.next_u64() >> 11) * 2.0**-53
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape))
        return ((self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(shape)

    def uniform(self, low=0.0, high=1.0, size=None):
        return low + (high - low) * self.random(size)

    def integers(self, low: int, high: int) -> int:
        """Integer in [low, high) (modulo bias is negligible for the small ranges used here)."""
        return low + self.next_u64() % (high - low)

    def spawn(self, salt: int) -> "SplitMix64":
        return SplitMix64(_mix_int((self.state ^ (salt * GAMMA)) & MASK64))


def seeded_rng(seed: int) -> SplitMix64:
    return SplitMix64(seed)
