"""Binary coefficient cache.

Layout (all integers little-endian)::

    b"CUSP" | version:u16 | weight:u16 | N:u64 | N records

    record = sign:u8 (0 non-negative, 1 negative) | length:u32 | magnitude bytes

``length`` may be 0 for a zero coefficient.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

from .errors import IntegrityError
from .forms import CuspForm, form_from_coefficients
from .rng import SplitMix64

MAGIC = b"CUSP"
VERSION = 1
_HEADER = struct.Struct("<4sHHQ")
_RECORD = struct.Struct("<BI")


@dataclass(frozen=True)
class CacheHeader:
    version: int
    weight: int
    ncoeffs: int


def encode(weight: int, coeffs) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION, weight, len(coeffs))]
    for c in coeffs:
        mag = abs(c)
        body = mag.to_bytes((mag.bit_length() + 7) // 8, "little")
        parts.append(_RECORD.pack(1 if c < 0 else 0, len(body)))
        parts.append(body)
    return b"".join(parts)


def decode(data: bytes) -> tuple[CacheHeader, list[int]]:
    if len(data) < _HEADER.size:
        raise IntegrityError("file shorter than header", offset=len(data))
    magic, version, weight, n = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise IntegrityError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise IntegrityError(f"unsupported cache version {version}", offset=4)
    pos = _HEADER.size
    coeffs = []
    end = len(data)
    for i in range(n):
        if pos + _RECORD.size > end:
            raise IntegrityError(f"truncated record header for coefficient {i + 1}", offset=pos)
        sign, length = _RECORD.unpack_from(data, pos)
        if sign > 1:
            raise IntegrityError(f"invalid sign byte {sign}", offset=pos)
        pos += _RECORD.size
        if pos + length > end:
            raise IntegrityError(f"truncated magnitude for coefficient {i + 1}", offset=pos)
        mag = int.from_bytes(data[pos : pos + length], "little")
        pos += length
        coeffs.append(-mag if sign else mag)
    if pos != end:
        raise IntegrityError(f"{end - pos} trailing bytes after last record", offset=pos)
    return CacheHeader(version, weight, n), coeffs


def write_cache(form: CuspForm, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode(form.weight, form.a))
    return path


def read_header(path) -> CacheHeader:
    with open(path, "rb") as fh:
        data = fh.read(_HEADER.size)
    if len(data) < _HEADER.size:
        raise IntegrityError("file shorter than header", offset=len(data))
    magic, version, weight, n = _HEADER.unpack(data)
    if magic != MAGIC:
        raise IntegrityError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise IntegrityError(f"unsupported cache version {version}", offset=4)
    return CacheHeader(version, weight, n)


def read_cache(path) -> CuspForm:
    header, coeffs = decode(Path(path).read_bytes())
    return form_from_coefficients(header.weight, coeffs)


def _hecke_from_primes(a: list[int], n: int, weight: int) -> int:
    """a(n) rebuilt from a(p) using multiplicativity and the prime-power recurrence."""
    km1 = weight - 1
    out = 1
    m = n
    p = 2
    while m > 1:
        if p * p > m:
            p = m
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            prev, cur = 1, a[p - 1]
            for _ in range(e - 1):
                prev, cur = cur, a[p - 1] * cur - p**km1 * prev
            out *= cur
        p += 1
    return out


def verify_cache(path, fraction: float = 0.01, seed: int = 0) -> dict:
    """Recompute a random sample of coefficients from the cached prime values."""
    form = read_cache(path)
    a = list(form.a)
    n = form.ncoeffs
    size = min(n, max(1, int(n * fraction)))
    sample = [m + 1 for m in SplitMix64(seed).sample(n, size)]
    mismatches = [m for m in sample if _hecke_from_primes(a, m, form.weight) != a[m - 1]]
    return {
        "weight": form.weight,
        "ncoeffs": n,
        "checked": len(sample),
        "mismatches": mismatches,
        "passed": not mismatches and a[0] == 1,
    }
