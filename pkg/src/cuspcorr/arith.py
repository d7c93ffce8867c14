"""Arithmetic-function tables: Lambda, d_m, Lambda_f, mu_f and friends.

Tables are float64 arrays over an integer interval ``[lo, hi]``.  Sieving a
segment only needs primes up to ``sqrt(hi)``; what remains after dividing
those out is a single prime above the square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as _product
from math import comb, isqrt, log

import numpy as np

from .errors import ParameterError, PreconditionError, ResourceError
from .forms import CuspForm
from .sieve import primes_upto

MAX_TABLE_LEN = 50_000_000
MAX_HI = 10**8
SEGMENT = 1 << 20


@dataclass(frozen=True)
class ArithTable:
    lo: int
    hi: int
    values: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise ParameterError(f"need 1 <= lo <= hi, got [{self.lo}, {self.hi}]")
        if len(self.values) != self.hi - self.lo + 1:
            raise ParameterError("values length does not match [lo, hi]")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError(f"non-finite values in table {self.label!r}")

    def __len__(self):
        return self.hi - self.lo + 1

    def __getitem__(self, n: int) -> float:
        if not self.lo <= n <= self.hi:
            raise ParameterError(f"n={n} outside [{self.lo}, {self.hi}]")
        return float(self.values[n - self.lo])

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def restrict(self, lo: int, hi: int, label: str | None = None) -> "ArithTable":
        if lo < self.lo or hi > self.hi:
            raise ParameterError(f"[{lo}, {hi}] not inside [{self.lo}, {self.hi}]")
        return ArithTable(lo, hi, self.values[lo - self.lo : hi - self.lo + 1].copy(), label or self.label)

    def padded(self, lo: int, hi: int) -> np.ndarray:
        """Values on [lo, hi], zero outside the table."""
        out = np.zeros(hi - lo + 1, dtype=self.values.dtype)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo : b - lo + 1] = self.values[a - self.lo : b - self.lo + 1]
        return out

    def __mul__(self, other: "ArithTable") -> "ArithTable":
        if (self.lo, self.hi) != (other.lo, other.hi):
            raise ParameterError("pointwise product needs identical ranges")
        return ArithTable(self.lo, self.hi, self.values * other.values, f"{self.label}*{other.label}")

    def l2_squared(self) -> float:
        return math.fsum(np.abs(self.values) ** 2)

    def to_csv_rows(self):
        for n, v in zip(range(self.lo, self.hi + 1), self.values.tolist()):
            yield n, v


def _check_range(lo: int, hi: int) -> None:
    if not 1 <= lo <= hi:
        raise ParameterError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    if hi > MAX_HI:
        raise ParameterError(f"hi={hi} exceeds {MAX_HI}")
    if hi - lo + 1 > MAX_TABLE_LEN:
        raise ResourceError(f"table of length {hi - lo + 1} exceeds memory budget {MAX_TABLE_LEN}")


def _check_form_range(form: CuspForm, hi: int) -> None:
    if hi > form.ncoeffs:
        raise ParameterError(f"hi={hi} exceeds coefficient table ({form.ncoeffs})")


def _factor_segment(lo: int, hi: int, on_prime_power):
    """Walk the segment prime by prime.

    ``on_prime_power(p, e, idx)`` is called with indices ``idx`` (into the
    segment) of the numbers divisible by exactly ``p**e``.  Returns the
    cofactor array: 1 or a prime ``> sqrt(hi)``.
    """
    rest = np.arange(lo, hi + 1, dtype=np.int64)
    for p in primes_upto(isqrt(hi)).tolist():
        first = (-lo) % p
        if first > hi - lo:
            continue
        idx = np.arange(first, hi - lo + 1, p)
        e = np.zeros(len(idx), dtype=np.int64)
        sub = rest[idx]
        while True:
            mask = sub % p == 0
            if not mask.any():
                break
            e += mask
            sub = np.where(mask, sub // p, sub)
        rest[idx] = sub
        for j in np.unique(e).tolist():
            on_prime_power(p, j, idx[e == j])
    return rest


def sieve_vonmangoldt(lo: int, hi: int) -> ArithTable:
    """Lambda(n) on [lo, hi] by a segmented sieve."""
    _check_range(lo, hi)
    vals = np.zeros(hi - lo + 1)
    small = primes_upto(isqrt(hi)).tolist()
    for start in range(lo, hi + 1, SEGMENT):
        stop = min(hi, start + SEGMENT - 1)
        composite = np.zeros(stop - start + 1, dtype=bool)
        for p in small:
            first = max(p * p, ((start + p - 1) // p) * p)
            if first <= stop:
                composite[first - start :: p] = True
        nums = np.arange(start, stop + 1)
        is_p = ~composite & (nums >= 2)
        seg = vals[start - lo : stop - lo + 1]
        seg[is_p] = np.log(nums[is_p].astype(np.float64))
    # prime powers p^j, j >= 2, exact integer powering
    for p in small:
        lp = log(p)
        pj = p * p
        while pj <= hi:
            if pj >= lo:
                vals[pj - lo] = lp
            pj *= p
    return ArithTable(lo, hi, vals, "vonmangoldt")


def chebyshev_psi(x: int) -> float:
    return math.fsum(sieve_vonmangoldt(1, x).values)


def prime_power_u(lam_p: float, j: int) -> float:
    """alpha^j + beta^j for alpha + beta = lam_p, alpha beta = 1."""
    u_prev, u = 2.0, lam_p
    if j == 0:
        return u_prev
    for _ in range(j - 1):
        u_prev, u = u, lam_p * u - u_prev
    return u


def lambda_f_table(form: CuspForm, lo: int, hi: int) -> ArithTable:
    """Coefficients of -L'/L(s, f): (alpha_p^j + beta_p^j) log p at n = p^j."""
    _check_range(lo, hi)
    _check_form_range(form, hi)
    lam = form.lam
    vals = np.zeros(hi - lo + 1)
    ps = primes_upto(hi)
    big = ps[ps >= lo]
    vals[big - lo] = lam[big] * np.log(big.astype(np.float64))
    for p in ps[ps <= isqrt(hi)].tolist():
        lp, lam_p = log(p), float(lam[p])
        u_prev, u, pj = 2.0, lam_p, p
        while pj * p <= hi:
            u_prev, u, pj = u, lam_p * u - u_prev, pj * p
            if pj >= lo:
                vals[pj - lo] = u * lp
    return ArithTable(lo, hi, vals, f"lambda_f[k={form.weight}]")


def mu_f_table(form: CuspForm, lo: int, hi: int) -> ArithTable:
    """Coefficients of 1/L(s, f): mu_f(p) = -lambda(p), mu_f(p^2) = 1, 0 beyond."""
    _check_range(lo, hi)
    _check_form_range(form, hi)
    lam = form.lam
    vals = np.ones(hi - lo + 1)

    def apply(p, e, idx):
        vals[idx] *= -lam[p] if e == 1 else (1.0 if e == 2 else 0.0)

    rest = _factor_segment(lo, hi, apply)
    big = rest > 1
    vals[big] *= -lam[rest[big]]
    return ArithTable(lo, hi, vals, f"mu_f[k={form.weight}]")


def lambda_log_table(form: CuspForm, lo: int, hi: int) -> ArithTable:
    """lambda_f(n) log n."""
    _check_form_range(form, hi)
    n = np.arange(lo, hi + 1)
    return ArithTable(lo, hi, form.lam[lo : hi + 1] * np.log(n), f"lambda_f*log[k={form.weight}]")


def lambda_table(form: CuspForm, lo: int, hi: int) -> ArithTable:
    _check_form_range(form, hi)
    return ArithTable(lo, hi, np.array(form.lam[lo : hi + 1]), f"lambda[k={form.weight}]")


def hecke_lambda_vm(form: CuspForm, lo: int, hi: int) -> ArithTable:
    """lambda_f(n) Lambda(n), the weight in the correlation sum."""
    _check_form_range(form, hi)
    lv = sieve_vonmangoldt(lo, hi)
    return ArithTable(lo, hi, form.lam[lo : hi + 1] * lv.values, f"lambda*Lambda[k={form.weight}]")


def sieve_divisor(m: int, lo: int, hi: int) -> ArithTable:
    """d_m(n); multiplicative with d_m(p^e) = C(e + m - 1, m - 1)."""
    if not 2 <= m <= 10:
        raise ParameterError(f"m must lie in [2, 10], got {m}")
    _check_range(lo, hi)
    vals = np.ones(hi - lo + 1)

    def apply(p, e, idx):
        vals[idx] *= comb(e + m - 1, m - 1)

    rest = _factor_segment(lo, hi, apply)
    vals[rest > 1] *= m
    return ArithTable(lo, hi, vals, f"d_{m}")


def mobius_table(lo: int, hi: int) -> ArithTable:
    _check_range(lo, hi)
    vals = np.ones(hi - lo + 1)

    def apply(p, e, idx):
        vals[idx] *= -1.0 if e == 1 else 0.0

    rest = _factor_segment(lo, hi, apply)
    vals[rest > 1] *= -1.0
    return ArithTable(lo, hi, vals, "mobius")


def log_table(lo: int, hi: int) -> ArithTable:
    return ArithTable(lo, hi, np.log(np.arange(lo, hi + 1, dtype=np.float64)), "log")


def delta_table(N: int) -> ArithTable:
    """The convolution identity delta_1 on [1, N]."""
    vals = np.zeros(N)
    vals[0] = 1.0
    return ArithTable(1, N, vals, "delta_1")


def dirichlet_convolve(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """(g * h)(n) for arrays indexed from 1 (index 0 is n = 1), divisor by divisor."""
    N = len(g)
    out = np.zeros(N, dtype=np.result_type(g, h))
    for d in range(1, N + 1):
        gd = g[d - 1]
        if gd == 0:
            continue
        # n = d * e for e = 1 .. N // d
        out[d - 1 :: d] += gd * h[: N // d]
    return out


@dataclass
class CheckReport:
    name: str
    max_error: float
    tol: float
    passed: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "max_error": self.max_error, "tol": self.tol,
                "passed": self.passed, **self.details}


def convolution_check(lhs: ArithTable, g: ArithTable, h: ArithTable, tol: float) -> CheckReport:
    """Compare lhs(n) against the divisor sum (g * h)(n) for all n <= N."""
    if not (lhs.lo == g.lo == h.lo == 1):
        raise ParameterError("convolution tables must start at n = 1")
    if not (lhs.hi == g.hi == h.hi):
        raise ParameterError(f"mismatched ranges: {lhs.hi}, {g.hi}, {h.hi}")
    conv = dirichlet_convolve(g.values, h.values)
    err = np.abs(lhs.values - conv)
    worst = float(err.max())
    return CheckReport(
        name=f"{lhs.label} = {g.label} * {h.label}",
        max_error=worst,
        tol=tol,
        passed=worst <= tol,
        details={"N": lhs.hi, "argmax": int(np.argmax(err)) + 1},
    )


def heath_brown_terms(form: CuspForm, L: int, z: int, N: int) -> np.ndarray:
    """Right-hand side of the Heath-Brown identity for n = 1..N (index n - 1)."""
    lamlog = lambda_log_table(form, 1, N).values
    lam = lambda_table(form, 1, N).values
    mu = mu_f_table(form, 1, N).values.copy()
    mu[z:] = 0.0  # n_j <= z
    total = np.zeros(N)
    # running products: (lambda log) * lambda^(l-1) * mu_z^l
    block = dirichlet_convolve(lamlog, mu)
    for ell in range(1, L + 1):
        if ell > 1:
            block = dirichlet_convolve(dirichlet_convolve(block, lam), mu)
        total += (-1) ** (ell - 1) * comb(L, ell) * block
    return total


def heath_brown_identity_check(form: CuspForm, L: int, z: int, N: int, tol: float = 1e-8) -> CheckReport:
    """Lambda_f(n) against the L-fold Heath-Brown expansion for all n <= N."""
    if not 1 <= L <= 4:
        raise ParameterError(f"L must lie in [1, 4], got {L}")
    if z < 1 or N < 1:
        raise ParameterError("z and N must be positive")
    if N > 2 * z**L:
        raise PreconditionError(f"N={N} > 2 z^L = {2 * z ** L}: identity not guaranteed")
    _check_form_range(form, N)
    rhs = heath_brown_terms(form, L, z, N)
    lhs = lambda_f_table(form, 1, N).values
    err = np.abs(lhs - rhs)
    worst = float(err.max())
    return CheckReport(
        name=f"heath-brown L={L} z={z}",
        max_error=worst,
        tol=tol,
        passed=worst <= tol,
        details={"L": L, "z": z, "N": N, "argmax": int(np.argmax(err)) + 1},
    )


def heath_brown_enumerate(form: CuspForm, L: int, z: int, n: int) -> float:
    """The same right-hand side at a single n by listing every factorisation.

    Intended for small n; used as an independent check of the convolution route.
    """
    from .sieve import divisors

    lam = form.lam
    mu = mu_f_table(form, 1, n).values

    def ordered_factorisations(m, parts):
        if parts == 1:
            yield (m,)
            return
        for d in divisors(m):
            for tail in ordered_factorisations(m // d, parts - 1):
                yield (d,) + tail

    total = 0.0
    for ell in range(1, L + 1):
        acc = 0.0
        for f in ordered_factorisations(n, 2 * ell):
            ms, ns = f[:ell], f[ell:]
            if any(x > z for x in ns):
                continue
            term = lam[ms[0]] * log(ms[0])
            for x in ms[1:]:
                term *= lam[x]
            for x in ns:
                term *= mu[x - 1]
            acc += term
        total += (-1) ** (ell - 1) * comb(L, ell) * acc
    return total


@dataclass(frozen=True)
class SingularSeries:
    value: float
    tail_bound: float
    pmax: int


TWIN_PRIME_TAIL = 2.0  # sum_{p > P} 1/(p-1)^2 < 2/P


def singular_series(h: int, pmax: int = 10**6) -> float:
    return singular_series_report(h, pmax).value


def singular_series_report(h: int, pmax: int = 10**6) -> SingularSeries:
    """Truncated Euler product for the Hardy-Littlewood constant S(h)."""
    if h == 0:
        raise ParameterError("singular series undefined at h = 0")
    if pmax < 3:
        raise ParameterError("pmax must be at least 3")
    tail = TWIN_PRIME_TAIL / pmax
    if h % 2:
        return SingularSeries(0.0, 0.0, pmax)
    ps = primes_upto(pmax)
    ps = ps[ps >= 3].astype(np.float64)
    logc = math.fsum(np.log1p(-1.0 / (ps - 1.0) ** 2))
    value = 2.0 * math.exp(logc)
    m = abs(h)
    while m % 2 == 0:
        m //= 2
    from .sieve import factorize

    for p, _ in factorize(m):
        value *= (p - 1) / (p - 2)
    return SingularSeries(value, tail, pmax)


def enumerate_divisor_m(m: int, n: int) -> int:
    """Ordered m-tuples with product n by brute force (small n only)."""
    from .sieve import divisors

    divs = divisors(n)
    return sum(1 for t in _product(divs, repeat=m - 1) if n % math.prod(t) == 0)
