"""Kloosterman sums, integer-order J-Bessel values and the level-one Petersson formula.

    Delta_k(m, n) = 1_{m=n} + 2 pi i^{-k} sum_{c >= 1} S(m, n; c)/c J_{k-1}(4 pi sqrt(mn)/c)

For the one-dimensional weights the left side is omega_f lambda_f(m) lambda_f(n),
which the checks below exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import arith
from .correlation import autocorr_fft
from .errors import AccuracyError, InsufficientTruncationError, ParameterError
from .expsum import TWO_PI, exp_sum
from .forms import SUPPORTED_WEIGHTS, CuspForm
from .sieve import divisor_count_table

TAIL_TOL = 1e-8
BESSEL_MAX_X = 1e5
_SERIES_COND = 1e3  # largest series term tolerated before switching to Miller


# --------------------------------------------------------------------------
# Kloosterman sums


@lru_cache(maxsize=64)
def _units_and_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    if c == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    x = np.arange(1, c, dtype=np.int64)
    x = x[np.gcd(x, c) == 1]
    # x^(phi(c) - 1) mod c by vectorised square-and-multiply; products stay below c^2
    e = len(x) - 1
    inv = np.ones_like(x)
    base = x.copy()
    while e:
        if e & 1:
            inv = inv * base % c
        base = base * base % c
        e >>= 1
    return x, inv


def kloosterman(m: int, n: int, c: int) -> float:
    """S(m, n; c) = sum over units x mod c of e((m x + n xbar)/c); always real."""
    if c < 1:
        raise ParameterError("modulus c must be positive")
    x, inv = _units_and_inverses(c)
    phase = (m % c * x + n % c * inv) % c
    # phases j and c - j come in pairs (x -> -x), so the cosine sum is the exact real part
    return math.fsum(np.cos(TWO_PI * phase / c).tolist())


def kloosterman_brute(m: int, n: int, c: int) -> complex:
    """Reference enumeration with Python's modular inverse, complex-valued."""
    total = 0j
    for x in range(c):
        if math.gcd(x, c) == 1:
            xb = pow(x, -1, c) if c > 1 else 0
            total += complex(math.cos(TWO_PI * ((m * x + n * xb) % c) / c),
                             math.sin(TWO_PI * ((m * x + n * xb) % c) / c))
    return total


def kloosterman_matrix(ms, ns, c: int) -> np.ndarray:
    """[S(m, n; c)] for m in ms, n in ns via two real matrix products."""
    x, inv = _units_and_inverses(c)
    ms = np.asarray(ms, dtype=np.int64) % c
    ns = np.asarray(ns, dtype=np.int64) % c
    table = TWO_PI * np.arange(c) / c
    cos_t, sin_t = np.cos(table), np.sin(table)
    pa = np.outer(ms, x) % c
    pb = np.outer(ns, inv) % c
    return cos_t[pa] @ cos_t[pb].T - sin_t[pa] @ sin_t[pb].T


# --------------------------------------------------------------------------
# Bessel functions


def _series(nu: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending series; returns (value, largest term magnitude)."""
    with np.errstate(divide="ignore"):
        logt = nu * np.log(x / 2.0) - math.lgamma(nu + 1)
    term = np.where(x > 0, np.exp(logt), 0.0)
    total = term.copy()
    big = np.abs(term)
    q = x * x / 4.0
    k = 0
    while True:
        k += 1
        term = -term * q / (k * (k + nu))
        total += term
        big = np.maximum(big, np.abs(term))
        if np.all(np.abs(term) <= 1e-17 * np.maximum(big, 1e-300)) or k > 500:
            return total, big


def _miller(nu: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence from well above max(nu, x), normalised by J_0 + 2 sum J_2j = 1."""
    top = max(nu, float(np.max(x)))
    start = 2 * int((top + 30 + 6 * math.sqrt(top)) / 2) + 2
    jp = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    res = np.zeros_like(x)
    two_over_x = 2.0 / x
    for m in range(start, 0, -1):
        jm = m * two_over_x * j - jp
        jp, j = j, jm
        if m - 1 == nu:
            res = j.copy()
        if (m - 1) % 2 == 0 and m > 1:
            norm += 2.0 * j
        big = np.abs(j) > 1e250
        if big.any():
            s = np.where(big, 1e-250, 1.0)
            j, jp, norm, res = j * s, jp * s, norm * s, res * s
    norm += j
    return res / norm


def bessel_j(nu: int, x):
    """J_nu(x) for integer nu >= 1 and x >= 0 (scalar or array).

    Ascending series for x <= nu unless its terms grow past 1e3 (cancellation),
    Miller's backward recurrence otherwise.
    """
    if nu < 1 or int(nu) != nu:
        raise ParameterError("order must be a positive integer")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(x < 0) or np.any(~np.isfinite(x)):
        raise ParameterError("x must be finite and non-negative")
    if np.any(x > BESSEL_MAX_X):
        raise AccuracyError(f"J_nu(x) accuracy not guaranteed for x > {BESSEL_MAX_X:g}")
    out = np.zeros_like(x)
    low = (x > 0) & (x <= nu)
    if low.any():
        val, big = _series(nu, x[low])
        idx = np.flatnonzero(low)
        out[idx] = val
        low_bad = idx[big > _SERIES_COND]
        if len(low_bad):
            out[low_bad] = _miller(nu, x[low_bad])
    high = x > nu
    if high.any():
        out[high] = _miller(nu, x[high])
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# Petersson formula


@dataclass(frozen=True)
class PeterssonValue:
    k: int
    m: int
    n: int
    value: float
    truncation_c: int
    tail_bound: float
    imag_residue: float = 0.0


def _check_k(k: int) -> None:
    if k % 2 or not 12 <= k <= 26:
        raise ParameterError(f"weight must be even in [12, 26], got {k}")


def tail_bound(k: int, m: int, n: int, cmax: int) -> float:
    """Bound on the discarded c > cmax terms from |S| <= c and J_nu(x) <= (x/2)^nu/nu!."""
    a = TWO_PI * math.sqrt(m * n)
    return math.exp(math.log(TWO_PI) + (k - 1) * math.log(a) - math.lgamma(k)
                    - (k - 2) * math.log(cmax) - math.log(k - 2))


def required_cmax(k: int, m: int, n: int, tol: float = TAIL_TOL) -> int:
    _check_k(k)
    a = TWO_PI * math.sqrt(m * n)
    logc = (math.log(TWO_PI) + (k - 1) * math.log(a) - math.lgamma(k) - math.log(k - 2) - math.log(tol)) / (k - 2)
    c = max(1, math.ceil(math.exp(logc)))
    while tail_bound(k, m, n, c) > tol:
        c += 1
    return c


def _sign(k: int) -> int:
    return -1 if (k // 2) % 2 else 1  # i^{-k} for even k


def petersson_delta(k: int, m: int, n: int, cmax: int | None = None) -> PeterssonValue:
    """sum_f omega_f lambda_f(m) lambda_f(n) via the Kloosterman-Bessel expansion."""
    _check_k(k)
    if m < 1 or n < 1:
        raise ParameterError("m and n must be positive")
    cmax = required_cmax(k, m, n) if cmax is None else cmax
    if cmax < 1:
        raise ParameterError("cmax must be positive")
    tb = tail_bound(k, m, n, cmax)
    if tb > TAIL_TOL:
        raise InsufficientTruncationError(f"tail bound {tb:.3e} > {TAIL_TOL:g}; raise cmax (need {required_cmax(k, m, n)})")
    c = np.arange(1, cmax + 1)
    J = bessel_j(k - 1, 4.0 * math.pi * math.sqrt(m * n) / c)
    S = np.array([kloosterman(m, n, int(ci)) for ci in c])
    # imaginary parts vanish identically; recorded from the brute route for small c
    imag = max(abs(kloosterman_brute(m, n, int(ci)).imag) for ci in c[: min(cmax, 20)])
    total = math.fsum((S / c * J).tolist())
    value = (1.0 if m == n else 0.0) + TWO_PI * _sign(k) * total
    return PeterssonValue(k, m, n, value, cmax, tb, imag)


def petersson_matrix(k: int, ms, ns=None, cmax: int | None = None) -> tuple[np.ndarray, int, float]:
    """[Delta_k(m, n)] over index lists; returns (matrix, cmax, worst tail bound)."""
    _check_k(k)
    ms = [int(v) for v in ms]
    ns = ms if ns is None else [int(v) for v in ns]
    mm, nn = max(ms), max(ns)
    cmax = required_cmax(k, mm, nn) if cmax is None else cmax
    tb = tail_bound(k, mm, nn, cmax)
    if tb > TAIL_TOL:
        raise InsufficientTruncationError(f"tail bound {tb:.3e} > {TAIL_TOL:g}; need cmax {required_cmax(k, mm, nn)}")
    root = np.sqrt(np.outer(ms, ns).astype(np.float64))
    acc = np.zeros((len(ms), len(ns)))
    comp = np.zeros_like(acc)  # Kahan compensation across c
    for c in range(1, cmax + 1):
        J = bessel_j(k - 1, (4.0 * math.pi / c) * root.ravel()).reshape(root.shape)
        term = kloosterman_matrix(ms, ns, c) * J / c - comp
        t = acc + term
        comp = (t - acc) - term
        acc = t
    diag = (np.asarray(ms)[:, None] == np.asarray(ns)[None, :]).astype(np.float64)
    return diag + TWO_PI * _sign(k) * acc, cmax, tb


def harmonic_weight(k: int, cmax: int | None = None) -> float:
    """omega_f = Delta_k(1, 1) in a one-dimensional space (lambda_f(1) = 1)."""
    if k not in SUPPORTED_WEIGHTS:
        raise ParameterError(f"weight {k} is not one-dimensional; supported {SUPPORTED_WEIGHTS}")
    return petersson_delta(k, 1, 1, cmax).value


def error_shape_ratio(k: int, m: int, n: int, value: float) -> float:
    """|Delta - 1_{m=n}| / ((mn)^{1/4} log(3mn)^2 d_2(gcd(m,n)) k^{-1/2})."""
    g = math.gcd(m, n)
    d2 = int(divisor_count_table(g)[g])
    env = (m * n) ** 0.25 * math.log(3 * m * n) ** 2 * d2 / math.sqrt(k)
    return abs(value - (1.0 if m == n else 0.0)) / env


# --------------------------------------------------------------------------
# averaged correlations


@dataclass
class AveragedReport:
    k: int
    X: int
    H: int
    omega: float
    weighted_vf: float
    normalized: float  # omega V / (H X^2)
    x: int | None = None
    y: int | None = None
    alpha: float | None = None
    direct: float | None = None
    expanded: float | None = None
    diagonal: float | None = None
    cmax: int | None = None
    tail_bound: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def relative_gap(self) -> float | None:
        if self.direct is None:
            return None
        return abs(self.direct - self.expanded) / max(abs(self.direct), 1e-300)


def expanded_square(k: int, x: int, y: int, alpha: float, cmax: int | None = None):
    """sum_{n1,n2} Lambda(n1)Lambda(n2) e((n1-n2) alpha) Delta_k(n1, n2) over (x, x+y].

    Returns (value, diagonal part sum Lambda(n)^2, cmax, tail bound).
    """
    vm = arith.sieve_vonmangoldt(x + 1, x + y).values
    idx = np.flatnonzero(vm)
    if not len(idx):
        return 0.0, 0.0, 0, 0.0
    ns = (idx + x + 1).tolist()
    w = vm[idx] * np.exp(2j * math.pi * np.mod(np.asarray(ns) * alpha, 1.0))
    D, cmax, tb = petersson_matrix(k, ns, cmax=cmax)
    val = float(np.real(w @ D @ np.conj(w)))
    return val, float(np.sum(vm[idx] ** 2)), cmax, tb


def averaged_vf(form: CuspForm, X: int, H: int, cmax: int | None = None, *, sample=None,
                omega: float | None = None) -> AveragedReport:
    """omega_f V_f(X; H) for a one-dimensional weight, plus an optional two-route check.

    ``sample = (x, y, alpha)`` compares omega |sum_{x<n<=x+y} lambda Lambda e(n alpha)|^2
    against its expansion through Delta_k(n1, n2).
    """
    k = form.weight
    if k not in SUPPORTED_WEIGHTS:
        raise ParameterError(f"weight {k} is not one-dimensional")
    if 2 * X + H > form.ncoeffs:
        raise ParameterError(f"need {2 * X + H} coefficients, form has {form.ncoeffs}")
    w = harmonic_weight(k, cmax) if omega is None else omega
    if H == 0:
        wv = 0.0
    else:
        wv = w * autocorr_fft(arith.hecke_lambda_vm(form, X + 1, 2 * X), H).vf
    rep = AveragedReport(k, X, H, w, wv, wv / (max(H, 1) * X * X))
    if sample is not None:
        x, y, alpha = sample
        coeffs = arith.hecke_lambda_vm(form, x + 1, x + y)
        direct = w * abs(exp_sum(coeffs, alpha)) ** 2
        expd, diag, c, tb = expanded_square(k, x, y, alpha, cmax=None)
        rep.x, rep.y, rep.alpha = x, y, alpha
        rep.direct, rep.expanded, rep.diagonal, rep.cmax, rep.tail_bound = direct, expd, diag, c, tb
    return rep
