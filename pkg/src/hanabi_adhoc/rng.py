"""Portable seeded randomness.

All shuffles and random rule choices go through SplitMix64 (Steele, Lea &
Flood 2014) so a transcript replays identically in any language: the
generator is a 64-bit counter stepped by the golden-ratio constant and
finalised with the variant-13 mixer.  Bounded draws use rejection
sampling on the raw 64-bit output and shuffles are Fisher-Yates from the
last index down.
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

ALGORITHM = "splitmix64"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    algorithm = ALGORITHM

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = z = (self.state + _GAMMA) & _MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        # reject the top partial bucket so every residue is equally likely
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def shuffle(self, items: MutableSequence) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """``k`` distinct indices from ``range(n)``, returned sorted."""
        pool = list(range(n))
        for i in range(min(k, n)):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[: min(k, n)])


def derive_seed(seed: int, *keys: int) -> int:
    """Mix integer keys into a seed to get an independent child stream."""
    s = seed & _MASK
    for key in keys:
        s = SplitMix64(s ^ ((key * _GAMMA) & _MASK)).next_u64()
    return s
