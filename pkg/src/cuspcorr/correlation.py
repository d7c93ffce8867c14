"""The correlation sum V_f(X; H) and its circle-method reformulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arith, quad
from .arith import ArithTable
from .errors import InternalConsistencyError, ParameterError, ResourceError
from .expsum import ArcDissection, TWO_PI, exp_sum_grid

MAX_FFT_LEN = 1 << 28


@dataclass(frozen=True)
class CorrelationResult:
    X: int
    H: int
    c: np.ndarray = field(repr=False)  # c[h] for h = 0 .. H
    vf: float
    method: str

    @property
    def per_shift(self) -> dict[int, float]:
        """{h: c(h)} for 1 <= |h| <= H (c(-h) = c(h) for real input)."""
        out = {}
        for h in range(1, self.H + 1):
            out[-h] = out[h] = float(self.c[h])
        return dict(sorted(out.items()))

    def at(self, h: int) -> float:
        if abs(h) > self.H:
            raise ParameterError(f"|h|={abs(h)} exceeds H={self.H}")
        return float(self.c[abs(h)])


def _window_X(coeffs: ArithTable) -> int:
    return coeffs.lo - 1


def _vf(c: np.ndarray, H: int) -> float:
    return 2.0 * math.fsum((c[1 : H + 1] ** 2).tolist())


def _check_H(coeffs: ArithTable, H: int) -> None:
    if H < 1:
        raise ParameterError("H must be at least 1")
    if H >= len(coeffs):
        raise ParameterError(f"H={H} must be smaller than the window length {len(coeffs)}")


def autocorr_direct(coeffs: ArithTable, H: int) -> CorrelationResult:
    """c(h) = sum_{n - m = h} a(n) a(m) by explicit shifts, O(XH)."""
    _check_H(coeffs, H)
    v = coeffs.values
    c = np.empty(H + 1)
    c[0] = math.fsum((v * v).tolist())
    for h in range(1, H + 1):
        c[h] = math.fsum((v[h:] * v[:-h]).tolist())
    return CorrelationResult(_window_X(coeffs), H, c, _vf(c, H), "direct")


def full_autocorrelation(values: np.ndarray) -> np.ndarray:
    """Linear autocorrelation c(h), h = 0 .. len-1, by a zero-padded FFT."""
    L = len(values)
    size = 1 << max(1, (2 * (L + 1) - 1).bit_length())
    if size > MAX_FFT_LEN:
        raise ResourceError(f"transform length {size} exceeds {MAX_FFT_LEN}")
    F = np.fft.rfft(values, size)
    return np.fft.irfft(F * np.conj(F), size)[:L]


def autocorr_fft(coeffs: ArithTable, H: int) -> CorrelationResult:
    """Same object as autocorr_direct via a power-of-two FFT of length >= 2(X+1)."""
    _check_H(coeffs, H)
    c = full_autocorrelation(coeffs.values)[: H + 1].copy()
    return CorrelationResult(_window_X(coeffs), H, c, _vf(c, H), "fft")


def vf(coeffs: ArithTable, H: int, method: str = "fft") -> float:
    return (autocorr_fft if method == "fft" else autocorr_direct)(coeffs, H).vf


def fejer_kernel(x):
    """Phi(x) = (pi^2/4) (sin(pi x/2)/(pi x/2))^2.

    Even, non-negative, Phi >= 1 on [-1, 1], Fourier transform supported on
    [-1/2, 1/2].  Decays like x^-2 rather than faster, which is harmless for
    finitely supported c(h).
    """
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        # equal to sin^2(pi x/2)/x^2 away from 0, so Phi(1) == 1 in floating point
        out = np.sin(0.5 * math.pi * x) ** 2 / (x * x)
    return np.where(x == 0.0, math.pi**2 / 4.0, out)


def vf_smoothed(coeffs: ArithTable, H: int, phi=fejer_kernel) -> float:
    """sum_{h in Z} c(h)^2 Phi(h/H); c(h) vanishes for |h| >= window length."""
    _check_H(coeffs, H)
    c = full_autocorrelation(coeffs.values)
    h = np.arange(len(c))
    w = phi(h / H)
    terms = c**2 * w
    return terms[0] + 2.0 * math.fsum(terms[1:].tolist())


def kernel_shift_sum(H: int, xi, hmax: int | None = None) -> np.ndarray:
    """sum_{|h| <= hmax} Phi(h/H) e(h xi), truncated directly."""
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    hmax = 4096 * H if hmax is None else hmax
    h = np.arange(1, hmax + 1, dtype=np.float64)
    w = fejer_kernel(h / H)
    out = np.empty(len(xi))
    for i, x in enumerate(xi):
        out[i] = fejer_kernel(0.0) + 2.0 * math.fsum((w * np.cos(TWO_PI * np.mod(h * x, 1.0))).tolist())
    return out


def kernel_shift_sum_closed(H: int, xi) -> np.ndarray:
    """Closed form of the full sum over h in Z via sum_{h != 0} e(hx)/h^2 = 2 pi^2 B2({x})."""
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))

    def b2sum(x):
        t = np.mod(x, 1.0)
        return 2.0 * math.pi**2 * (t * t - t + 1.0 / 6.0)

    # Phi(h/H) = H^2 sin^2(pi h/2H)/h^2 = (H^2/2)(1 - cos(pi h/H))/h^2 for h != 0
    s = b2sum(xi) - 0.5 * (b2sum(xi + 0.5 / H) + b2sum(xi - 0.5 / H))
    return math.pi**2 / 4.0 + 0.5 * H**2 * s


@dataclass
class CircleCheck:
    X: int
    H: int
    grid: int
    max_deviation: float
    scale: float
    h0_integral: float
    l2_squared: float
    integrals: np.ndarray = field(repr=False)

    @property
    def relative_deviation(self) -> float:
        return self.max_deviation / self.scale if self.scale else 0.0


def circle_integrals(coeffs: ArithTable, H: int, grid: int | None = None) -> tuple[np.ndarray, int]:
    """int_0^1 |S(alpha)|^2 e(-h alpha) d alpha for h = 0..H by an exact equispaced mean."""
    L = len(coeffs)
    M = 4 * L + 2 if grid is None else grid
    v = coeffs.values
    # S(j/M) up to a unimodular factor, which cancels in |S|^2
    S = np.fft.ifft(v, M) * M
    S2 = np.abs(S) ** 2
    alphas = np.arange(M) / M
    out = np.empty(H + 1)
    for h in range(H + 1):
        out[h] = math.fsum((S2 * np.cos(TWO_PI * np.mod(h * alphas, 1.0))).tolist()) / M
    return out, M


def circle_integral_check(coeffs: ArithTable, H: int, tol: float = 1e-8) -> CircleCheck:
    """Orthogonality check: the Fourier coefficients of |S|^2 reproduce c(h)."""
    if len(coeffs) > 10**4:
        raise ParameterError("dense-grid check limited to windows of length <= 10^4")
    direct = autocorr_direct(coeffs, H)
    integrals, M = circle_integrals(coeffs, H)
    scale = max(direct.c[0], np.finfo(float).tiny)
    dev = float(np.max(np.abs(integrals[1:] - direct.c[1:]))) if H else 0.0
    out = CircleCheck(direct.X, H, M, dev, float(direct.c[0]) or 0.0, float(integrals[0]),
                      coeffs.l2_squared(), integrals)
    if direct.c[0] and dev / scale > tol:
        raise InternalConsistencyError(f"circle-method identity off by {dev / scale:.3e} (relative)")
    return out


def fourth_moment_check(coeffs: ArithTable) -> tuple[float, float]:
    """(sum_h c(h)^2, int_0^1 |S|^4) with the integral on an exact grid."""
    c = full_autocorrelation(coeffs.values)
    lhs = c[0] ** 2 + 2.0 * math.fsum((c[1:] ** 2).tolist())
    L = len(coeffs)
    M = 4 * L + 2
    S = np.fft.ifft(coeffs.values, M) * M
    rhs = math.fsum((np.abs(S) ** 4).tolist()) / M
    return lhs, rhs


# --------------------------------------------------------------------------
# arc energies


def _intervals(arcs) -> list[tuple[float, float]]:
    if isinstance(arcs, ArcDissection):
        return arcs.major_intervals()
    return [(float(a), float(b)) for a, b in arcs]


def _clip_window(intervals, alpha: float, window: float) -> list[tuple[float, float]]:
    """Intersection of the arc set (mod 1) with [alpha - w, alpha + w]."""
    lo, hi = alpha - window, alpha + window
    out = []
    for shift in (-1.0, 0.0, 1.0):
        for a, b in intervals:
            a2, b2 = max(a + shift, lo), min(b + shift, hi)
            if b2 > a2:
                out.append((a2, b2))
    return out


def arc_energy(coeffs: ArithTable, arcs, alpha: float, window: float,
               rtol: float = 1e-10) -> float:
    """int over arcs intersect [alpha - window, alpha + window] of |S(beta)|^2.

    ``arcs`` is an ArcDissection (its major union) or a list of intervals in
    [0, 1].  A window of total length >= 1 over the full circle uses the exact
    equispaced rule; otherwise composite Gauss-Legendre with doubling.
    """
    ivs = _intervals(arcs)
    v = coeffs.values
    n = coeffs.n
    L = len(coeffs)
    covered = math.fsum(b - a for a, b in ivs)
    if window >= 0.5 and covered >= 1.0 - 1e-15:
        M = 4 * L + 2
        S = np.fft.ifft(v, M) * M
        # each full period contributes the Parseval mean; windows wider than 1/2 wrap
        return (2.0 * window) * math.fsum((np.abs(S) ** 2).tolist()) / M
    pieces = _clip_window(ivs, alpha, window)
    total = 0.0
    for a, b in pieces:
        panels = max(1, math.ceil((b - a) * 2 * L))
        val, _ = quad.integrate_doubling(lambda x: np.abs(exp_sum_grid(v, n, x)) ** 2, a, b, panels,
                                         rtol=rtol, fail_rtol=1e-3)
        total += val
    return total


def arc_energy_exact(coeffs: ArithTable, arcs, alpha: float, window: float) -> float:
    """Closed-form counterpart of arc_energy via the autocorrelation coefficients."""
    c = full_autocorrelation(coeffs.values)
    h = np.arange(1, len(c), dtype=np.float64)
    total = 0.0
    for a, b in _clip_window(_intervals(arcs), alpha, window):
        # int_a^b e(h beta) + e(-h beta) = (sin(2 pi h b) - sin(2 pi h a)) / (pi h)
        terms = c[1:] * (np.sin(TWO_PI * np.mod(h * b, 1.0)) - np.sin(TWO_PI * np.mod(h * a, 1.0))) / (math.pi * h)
        total += c[0] * (b - a) + math.fsum(terms.tolist())
    return total


# --------------------------------------------------------------------------
# Hardy-Littlewood comparison


@dataclass
class HLRow:
    h: int
    correlation: float
    main_term: float
    error: float
    normalized: float
    envelope: float | None


def hardy_littlewood_compare(X: int, H: int, pmax: int = 10**6, exponent: float = 0.6) -> list[HLRow]:
    """sum_{X < n <= 2X} Lambda(n) Lambda(n+h) against S(h) X for 1 <= h <= H."""
    if X > 10**7:
        raise ParameterError("X must not exceed 10^7")
    vm = arith.sieve_vonmangoldt(X + 1, 2 * X + H).values
    base = vm[:X]
    rows = []
    for h in range(1, H + 1):
        corr = math.fsum((base * vm[h : h + X]).tolist())
        main = arith.singular_series(h, pmax) * X
        err = corr - main
        env = None if h % 2 == 0 else 10.0 * math.sqrt(X) * math.log(X) ** 2
        rows.append(HLRow(h, corr, main, err, err / X**exponent, env))
    return rows
