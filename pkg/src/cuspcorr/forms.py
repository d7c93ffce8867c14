"""Level-one Hecke eigenforms in the one-dimensional weights.

For ``k`` in ``SUPPORTED_WEIGHTS`` the space of cusp forms of weight ``k`` is
spanned by ``Delta * E_{k-12}``; coefficients are generated in exact integer
arithmetic and normalised to ``lambda_f(n) = a_f(n) / n**((k-1)/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from . import series
from .errors import InternalConsistencyError, ParameterError, UnsupportedWeightError
from .sieve import divisor_count_table, smallest_prime_factor

SUPPORTED_WEIGHTS = (12, 16, 18, 20, 22, 26)
MAX_COEFFS = 10**7

# E_{k-12} as (exponent of E_4, exponent of E_6)
_EISENSTEIN_FACTOR = {12: (0, 0), 16: (1, 0), 18: (0, 1), 20: (2, 0), 22: (1, 1), 26: (2, 1)}


@dataclass(frozen=True)
class CuspForm:
    weight: int
    ncoeffs: int
    a: tuple  # a[n - 1] = a_f(n), exact ints
    lam: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        if len(self.a) != self.ncoeffs or len(self.lam) != self.ncoeffs + 1:
            raise ParameterError("coefficient table length does not match ncoeffs")

    def coeff(self, n: int) -> int:
        if not 1 <= n <= self.ncoeffs:
            raise ParameterError(f"n={n} outside coefficient table [1, {self.ncoeffs}]")
        return self.a[n - 1]

    def lambda_at(self, n: int) -> float:
        if not 1 <= n <= self.ncoeffs:
            raise ParameterError(f"n={n} outside coefficient table [1, {self.ncoeffs}]")
        return float(self.lam[n])

    @property
    def lambdas(self) -> np.ndarray:
        """Read-only array with ``lambdas[n] = lambda_f(n)``; index 0 is 0."""
        return self.lam


def _check_n(N: int) -> None:
    if not isinstance(N, (int, np.integer)) or not 1 <= N <= MAX_COEFFS:
        raise ParameterError(f"ncoeffs must be an integer in [1, {MAX_COEFFS}], got {N!r}")


def eta_cubed(n: int) -> list[int]:
    """First ``n`` coefficients of prod (1 - q^m)^3 (Jacobi's identity)."""
    out = [0] * n
    m = 0
    while m * (m + 1) // 2 < n:
        out[m * (m + 1) // 2] = (-1) ** m * (2 * m + 1)
        m += 1
    return out


def delta_series(n: int) -> list[int]:
    """Coefficients of Delta = q prod (1-q^m)^24 for q^0 .. q^(n-1)."""
    if n <= 1:
        return [0] * n
    e24 = series.power(eta_cubed(n - 1), 8, n - 1)
    return [0] + e24


def divisor_power_sums(r: int, n: int) -> list[int]:
    """Exact sigma_r(m) for 0 <= m < n (sigma_r(0) set to 0)."""
    out = [0] * n
    if n > 1:
        out[1] = 1
    spf = smallest_prime_factor(max(n - 1, 1)).tolist()
    for m in range(2, n):
        p = spf[m]
        rest, pe = m // p, p
        while rest % p == 0:
            rest //= p
            pe *= p
        # sigma_r(p^e) = (p^(r(e+1)) - 1) / (p^r - 1)
        out[m] = out[rest] * ((pe * p) ** r - 1) // (p**r - 1)
    return out


def eisenstein_series(weight: int, n: int) -> list[int]:
    """E_4 or E_6 with constant term 1, first ``n`` coefficients."""
    if weight == 4:
        const, r = 240, 3
    elif weight == 6:
        const, r = -504, 5
    else:
        raise UnsupportedWeightError(f"only E_4 and E_6 are hard-coded, got E_{weight}")
    sig = divisor_power_sums(r, n)
    return [1] + [const * s for s in sig[1:]]


def check_eisenstein_identity(n: int) -> int:
    """Max |coefficient| of E_4^3 - E_6^2 - 1728 Delta through q^(n-1); 0 if exact."""
    e4 = eisenstein_series(4, n)
    e6 = eisenstein_series(6, n)
    lhs = series.mul(series.square(e4, n), e4, n)
    e6sq = series.square(e6, n)
    delta = delta_series(n)
    return max(abs(x - y - 1728 * d) for x, y, d in zip(lhs, e6sq, delta))


def normalize(a: list[int], weight: int) -> np.ndarray:
    """lambda(n) = a(n)/n^((k-1)/2), rounded once from a^2/n^(k-1)."""
    lam = np.zeros(len(a) + 1)
    km1 = weight - 1
    for n, c in enumerate(a, start=1):
        if c:
            # int/int true division is correctly rounded; sqrt adds at most half an ulp
            lam[n] = math.copysign(math.sqrt(c * c / n**km1), c)
    lam.setflags(write=False)
    return lam


def _make(weight: int, coeffs: list[int]) -> CuspForm:
    return CuspForm(weight=weight, ncoeffs=len(coeffs), a=tuple(coeffs), lam=normalize(coeffs, weight))


def build_delta(N: int) -> CuspForm:
    """Ramanujan's Delta (weight 12) with tau(1..N)."""
    _check_n(N)
    return _make(12, delta_series(N + 1)[1:])


def build_form(k: int, N: int, selfcheck: bool = True) -> CuspForm:
    """The normalised eigenform Delta * E_{k-12} of weight ``k``, N coefficients."""
    if k not in _EISENSTEIN_FACTOR:
        raise UnsupportedWeightError(
            f"weight {k} does not have a one-dimensional cusp space; supported: {SUPPORTED_WEIGHTS}"
        )
    _check_n(N)
    if k == 12:
        return build_delta(N)
    n = N + 1
    i4, i6 = _EISENSTEIN_FACTOR[k]
    e4 = eisenstein_series(4, n)
    e6 = eisenstein_series(6, n)
    delta = delta_series(n)
    if selfcheck:
        e4cube = series.mul(series.square(e4, n), e4, n)
        e6sq = series.square(e6, n)
        if any(x - y != 1728 * d for x, y, d in zip(e4cube, e6sq, delta)):
            raise InternalConsistencyError("E_4^3 - E_6^2 != 1728 Delta; Eisenstein constants are wrong")
    prod = delta
    for _ in range(i4):
        prod = series.mul(prod, e4, n)
    for _ in range(i6):
        prod = series.mul(prod, e6, n)
    return _make(k, prod[1:])


def form_from_coefficients(weight: int, coeffs) -> CuspForm:
    """Wrap an externally supplied coefficient table (e.g. from the cache)."""
    coeffs = [int(c) for c in coeffs]
    if not coeffs:
        raise ParameterError("empty coefficient table")
    return _make(weight, coeffs)


def lambda_at(form: CuspForm, n: int) -> float:
    return form.lambda_at(n)


def hecke_residual(form: CuspForm, limit: int | None = None) -> tuple[int, int]:
    """Check a(m)a(n) = sum_{d | (m,n)} d^(k-1) a(mn/d^2) for all m <= n, mn <= limit.

    Returns ``(max_abs_residual, pairs_checked)``; exact integer arithmetic.
    """
    limit = form.ncoeffs if limit is None else min(limit, form.ncoeffs)
    a = (0,) + form.a
    km1 = form.weight - 1
    worst = 0
    count = 0
    for m in range(1, math.isqrt(limit) + 1):
        am = a[m]
        for n in range(m, limit // m + 1):
            g = gcd(m, n)
            mn = m * n
            if g == 1:
                rhs = a[mn]
            else:
                rhs = sum(d**km1 * a[mn // (d * d)] for d in range(1, g + 1) if g % d == 0)
            r = abs(am * a[n] - rhs)
            if r > worst:
                worst = r
            count += 1
    return worst, count


def deligne_violations(form: CuspForm, limit: int | None = None) -> list[int]:
    """All n <= limit with |lambda_f(n)| > d_2(n)."""
    limit = form.ncoeffs if limit is None else min(limit, form.ncoeffs)
    d2 = divisor_count_table(limit)
    lam = np.abs(form.lam[: limit + 1])
    bad = np.flatnonzero(lam[1:] > d2[1:]) + 1
    return bad.tolist()


def prime_power_recurrence_error(form: CuspForm, limit: int | None = None) -> float:
    """Max relative defect of lambda(p^{j+1}) = lambda(p)lambda(p^j) - lambda(p^{j-1})."""
    limit = form.ncoeffs if limit is None else min(limit, form.ncoeffs)
    lam = form.lam
    worst = 0.0
    p = 2
    spf = smallest_prime_factor(max(limit, 2))
    for p in np.flatnonzero(spf[: math.isqrt(limit) + 1] == np.arange(math.isqrt(limit) + 1)):
        p = int(p)
        if p < 2:
            continue
        prev, cur, pj = 1.0, lam[p], p
        while pj * p <= limit:
            pred = lam[p] * cur - prev
            actual = lam[pj * p]
            err = abs(pred - actual) / max(1.0, abs(actual))
            worst = max(worst, err)
            prev, cur, pj = cur, actual, pj * p
    return worst
