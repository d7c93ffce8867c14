"""Seeded SplitMix64 generator with a language-neutral contract.

State is one unsigned 64-bit word.  Each draw adds 0x9E3779B97F4A7C15 to the
state (mod 2**64) and returns the standard SplitMix64 finaliser of the new
state.  Derived draws:

* ``uniform()``     -> (next >> 11) * 2**-53, in [0, 1)
* ``randint(lo,hi)``-> lo + ((next * (hi - lo + 1)) >> 64), inclusive bounds
* ``choice_sign()`` -> +1 if the top bit of next is set, else -1
* ``sample(n, k)``  -> Floyd's algorithm over range(n), returned sorted
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def randint(self, lo: int, hi: int) -> int:
        if hi < lo:
            raise ValueError("empty range")
        return lo + ((self.next_u64() * (hi - lo + 1)) >> 64)

    def choice_sign(self) -> int:
        return 1 if self.next_u64() >> 63 else -1

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct integers from range(n), sorted."""
        if k > n:
            raise ValueError("sample larger than population")
        chosen: set[int] = set()
        for j in range(n - k, n):
            t = self.randint(0, j)
            chosen.add(j if t in chosen else t)
        return sorted(chosen)
