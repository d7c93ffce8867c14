"""Low-level prime sieves shared across modules."""

from __future__ import annotations

from functools import lru_cache
from math import isqrt

import numpy as np


@lru_cache(maxsize=8)
def _prime_flags(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    flags.setflags(write=False)
    return flags


def primes_upto(n: int) -> np.ndarray:
    """All primes ``p <= n`` as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(_prime_flags(int(n))).astype(np.int64)


def is_prime_table(n: int) -> np.ndarray:
    return _prime_flags(int(max(n, 1)))


def smallest_prime_factor(n: int) -> np.ndarray:
    """``spf[m]`` for ``0 <= m <= n`` (``spf[0] = spf[1] = 0``)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in primes_upto(isqrt(n)):
        block = spf[p * p :: p]
        block[block == 0] = p
    rest = spf == 0
    rest[:2] = False
    spf[rest] = np.flatnonzero(rest)
    return spf


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorisation, fine for the moduli used here."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out -= out // p
    return out


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def divisor_count_table(n: int) -> np.ndarray:
    """``d_2(m)`` for ``0 <= m <= n`` by the sieve of multiples."""
    d = np.zeros(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        d[k::k] += 1
    return d
