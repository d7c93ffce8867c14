"""Exact truncated power series over the integers.

Products use Kronecker substitution: both operands are packed into a single
big integer at a fixed bit stride, multiplied with GMP, and unpacked.  Each
coefficient occupies ``8 * nbytes`` bits stored with a bias so signed values
round-trip without carries crossing digit boundaries.
"""

from __future__ import annotations

from typing import Sequence

import gmpy2

Series = list  # list[int], index = power of q


def _nbytes_for(bound: int) -> int:
    # one extra bit for the sign bias
    return (bound.bit_length() + 1 + 7) // 8


def _pack(coeffs: Sequence[int], nbytes: int) -> gmpy2.mpz:
    pos = b"".join((c if c > 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))


def _unpack(z: gmpy2.mpz, nbytes: int, n: int) -> Series:
    width = 8 * nbytes
    half = 1 << (width - 1)
    bias = int.from_bytes((b"\x00" * (nbytes - 1) + b"\x80") * n, "little")
    shifted = int(gmpy2.f_mod_2exp(z + bias, width * n))
    raw = shifted.to_bytes(nbytes * n, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - half for i in range(n)]


def mul(a: Sequence[int], b: Sequence[int], n: int) -> Series:
    """Product of two integer series truncated to ``n`` coefficients."""
    a = list(a[:n])
    b = list(b[:n])
    if not a or not b:
        return [0] * n
    amax = max(abs(c) for c in a)
    bmax = max(abs(c) for c in b)
    if amax == 0 or bmax == 0:
        return [0] * n
    nbytes = _nbytes_for(amax * bmax * min(len(a), len(b)))
    za = _pack(a, nbytes)
    if a == b:
        z = gmpy2.square(za)
    else:
        z = za * _pack(b, nbytes)
    return _unpack(z, nbytes, n)


def square(a: Sequence[int], n: int) -> Series:
    return mul(a, a, n)


def power(a: Sequence[int], e: int, n: int) -> Series:
    """``a**e`` truncated to ``n`` terms by repeated squaring."""
    result = [1] + [0] * (n - 1)
    base = list(a[:n]) + [0] * max(0, n - len(a))
    while e:
        if e & 1:
            result = mul(result, base, n)
        e >>= 1
        if e:
            base = square(base, n)
    return result


def naive_mul(a: Sequence[int], b: Sequence[int], n: int) -> Series:
    """Schoolbook product; reference implementation for tests."""
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out
