"""Exponential sums, rational approximation and the major/minor arc dissection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import arith, quad
from .arith import ArithTable
from .errors import InternalConsistencyError, ParameterError, PreconditionError
from .forms import CuspForm

TWO_PI = 2.0 * math.pi
_CHUNK = 1 << 22  # matrix entries per block when evaluating on grids


def e(x):
    """e(x) = exp(2 pi i x)."""
    return np.exp(1j * TWO_PI * np.asarray(x))


def _phases(n: np.ndarray, alpha: float) -> np.ndarray:
    # reduce n*alpha mod 1 before scaling by 2 pi
    return TWO_PI * np.mod(n * alpha, 1.0)


def exp_sum(coeffs: ArithTable, alpha: float) -> complex:
    """sum_n coeffs(n) e(n alpha) over the whole table, exactly rounded per component."""
    n = coeffs.n.astype(np.float64)
    ph = _phases(n, alpha)
    v = coeffs.values
    return complex(math.fsum(v * np.cos(ph)), math.fsum(v * np.sin(ph)))


def exp_sum_rational(coeffs: ArithTable, a: int, q: int) -> complex:
    """sum coeffs(n) e(an/q) with the phase reduced exactly in integers."""
    r = (coeffs.n * a) % q
    ph = TWO_PI * r / q
    v = coeffs.values
    return complex(math.fsum(v * np.cos(ph)), math.fsum(v * np.sin(ph)))


def exp_sum_grid(values: np.ndarray, n: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """S(beta) for many beta; phases recentred on the middle of ``n``.

    The common unimodular factor e(n_c beta) is dropped, so only ``|S|`` is
    meaningful for the result.
    """
    betas = np.asarray(betas, dtype=np.float64)
    out = np.empty(len(betas), dtype=np.complex128)
    if len(n) == 0:
        out[:] = 0
        return out
    nc = (int(n[0]) + int(n[-1])) // 2
    m = (n - nc).astype(np.float64)
    step = max(1, _CHUNK // max(1, len(m)))
    for i in range(0, len(betas), step):
        b = betas[i : i + step]
        out[i : i + step] = np.exp(1j * TWO_PI * np.outer(b, m)) @ values
    return out


def wilton_sum(form: CuspForm, y: int, theta: float) -> complex:
    """sum_{n <= y} lambda_f(n) e(n theta)."""
    if y < 1:
        raise ParameterError("y must be at least 1")
    if y > form.ncoeffs:
        raise ParameterError(f"y={y} exceeds coefficient table ({form.ncoeffs})")
    return exp_sum(arith.lambda_table(form, 1, y), theta)


def wilton_ratio(form: CuspForm, y: int, theta: float) -> float:
    """|wilton_sum| / (sqrt(y) log y), defined for y >= 2."""
    if y < 2:
        raise ParameterError("ratio needs y >= 2")
    return abs(wilton_sum(form, y, theta)) / (math.sqrt(y) * math.log(y))


# --------------------------------------------------------------------------
# rational approximation


@dataclass(frozen=True)
class RationalApprox:
    a: int
    q: int
    err: float


def convergents(x: Fraction):
    """Continued-fraction convergents (p, q) of a rational number."""
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = x.numerator, x.denominator
    while den:
        t, r = divmod(num, den)
        p0, q0, p1, q1 = p1, q1, t * p1 + p0, t * q1 + q0
        yield p1, q1
        num, den = den, r


def dirichlet_approx(alpha: float, R: float) -> RationalApprox:
    """Smallest-denominator a/q with q <= R and |alpha - a/q| <= 1/(qR).

    The minimal such q is a best approximation of the second kind, hence a
    convergent, so walking the convergents in order finds it.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
    if R < 1:
        raise ParameterError(f"R must be at least 1, got {R}")
    x = Fraction(alpha)
    Rf = Fraction(R)
    best = None
    for p, q in convergents(x):
        if q > R:
            break
        best = (p, q)
        if abs(q * x - p) * Rf <= 1:
            p = round(q * x)  # nearest numerator; may differ from the convergent's when q = 1
            return RationalApprox(p, q, abs(alpha - p / q))
    # unreachable by Dirichlet's theorem; keep the guard explicit
    raise InternalConsistencyError(f"no convergent of {alpha} within 1/(qR), last {best}")


# --------------------------------------------------------------------------
# arcs

VARIANTS = {"theorem1": "theorem1", "t1": "theorem1", "theorem2": "theorem2", "t2": "theorem2"}


@dataclass(frozen=True)
class ArcDissection:
    X: int
    H: int
    A: float
    eps: float
    variant: str
    Q: float
    R: float
    c0: float
    a: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    centers: np.ndarray = field(repr=False)
    halfwidths: np.ndarray = field(repr=False)
    union: np.ndarray = field(repr=False)  # merged major intervals, shape (k, 2)

    @property
    def majors(self):
        return list(zip(self.a.tolist(), self.q.tolist(), self.centers.tolist(), self.halfwidths.tolist()))

    @property
    def count(self) -> int:
        return len(self.a)

    def measure_major(self) -> float:
        return math.fsum((self.union[:, 1] - self.union[:, 0]).tolist())

    def measure_minor(self) -> float:
        return math.fsum((b - a for a, b in self.minor_intervals()))

    def major_intervals(self) -> list[tuple[float, float]]:
        return [tuple(r) for r in self.union.tolist()]

    def minor_intervals(self) -> list[tuple[float, float]]:
        out, cur = [], 0.0
        for lo, hi in self.union.tolist():
            if lo > cur:
                out.append((cur, lo))
            cur = max(cur, hi)
        if cur < 1.0:
            out.append((cur, 1.0))
        return out

    def halfwidth(self, q: int) -> float:
        if self.variant == "theorem1":
            return 1.0 / (q * self.R)
        return math.log(self.X) ** (3 * self.A) / self.H


def admissible_H(X: int, eps: float, variant: str) -> tuple[float, float]:
    lo_exp = 2.0 / 3.0 if variant == "theorem1" else 1.0 / 3.0
    return X ** (lo_exp + eps), X ** (1.0 - eps)


def arc_parameters(X: int, H: int, A: float, variant: str, c0: float = 1.0) -> tuple[float, float]:
    """(Q, R) for the chosen dissection."""
    L = math.log(X)
    if variant == "theorem1":
        return X ** (1.0 / 3.0) * L ** (A / 3.0 + c0), H * L ** (-2.0 * A)
    Q = L ** (2.0 * A + c0)
    # the minor-arc Dirichlet step approximates with |alpha - a/q| <= 1/(qQ)
    return Q, Q


def build_arcs(X: int, H: int, A: float, eps: float, variant: str = "theorem1",
               c0: float = 1.0, check_range: bool = True) -> ArcDissection:
    """All Farey fractions a/q (q <= Q) with their arcs, plus the merged union."""
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}")
    variant = VARIANTS[variant]
    if X < 3 or H < 1:
        raise ParameterError("need X >= 3 and H >= 1")
    if check_range:
        lo, hi = admissible_H(X, eps, variant)
        if not lo <= H <= hi:
            raise PreconditionError(f"H={H} outside admissible range [{lo:.1f}, {hi:.1f}] for {variant}")
    Q, R = arc_parameters(X, H, A, variant, c0)
    qmax = max(1, int(math.floor(Q)))
    as_, qs = [np.array([0])], [np.array([1])]
    for q in range(1, qmax + 1):
        a = np.arange(1, q + 1)
        a = a[np.gcd(a, q) == 1]
        as_.append(a)
        qs.append(np.full(len(a), q))
    a = np.concatenate(as_).astype(np.int64)
    q = np.concatenate(qs).astype(np.int64)
    centers = a / q
    if variant == "theorem1":
        hw = 1.0 / (q * R)
    else:
        hw = np.full(len(q), math.log(X) ** (3 * A) / H)
    order = np.lexsort((q, centers))
    a, q, centers, hw = a[order], q[order], centers[order], hw[order]
    union = _merge(np.clip(centers - hw, 0.0, 1.0), np.clip(centers + hw, 0.0, 1.0))
    return ArcDissection(X, H, A, eps, variant, Q, R, c0, a, q, centers, hw, union)


def _merge(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    order = np.argsort(lo, kind="stable")
    out = []
    for l, h in zip(lo[order].tolist(), hi[order].tolist()):
        if out and l < out[-1][1]:
            out[-1][1] = max(out[-1][1], h)
        else:
            out.append([l, h])
    return np.array(out, dtype=np.float64).reshape(-1, 2)


def in_major(arcs: ArcDissection, alpha: float) -> bool:
    if alpha <= 0.0 or alpha >= 1.0:
        return True  # 0/1 and 1/1 are arc centres
    lefts = arcs.union[:, 0]
    i = int(np.searchsorted(lefts, alpha, side="right")) - 1
    return i >= 0 and lefts[i] < alpha < arcs.union[i, 1]


def classify_alpha(arcs: ArcDissection, alpha: float) -> tuple[str, RationalApprox]:
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
    label = "major" if in_major(arcs, alpha) else "minor"
    return label, dirichlet_approx(alpha, max(1.0, arcs.R))


# --------------------------------------------------------------------------
# Gallagher window energy


@dataclass
class GallagherReport:
    lhs: float
    rhs: float
    ratio: float | None
    status: str
    quad_change: float = 0.0
    nodes: int = 0


def window_energy_exact(coeffs: ArithTable, center: float, halfwidth: float) -> float:
    """int_{center-w}^{center+w} |S(beta)|^2 d beta via the autocorrelation of coeffs.

    |S|^2 = sum_h c(h) e(h beta), so each shift integrates in closed form.
    """
    v = coeffs.values
    L = len(v)
    size = 1 << (2 * L).bit_length()
    F = np.fft.rfft(v, size)
    c = np.fft.irfft(F * np.conj(F), size)[:L]
    h = np.arange(1, L)
    # c(h) + c(-h) terms combine into 2 c(h) cos(2 pi h center) sin(2 pi h w)/(pi h)
    terms = 2.0 * c[1:] * np.cos(TWO_PI * np.mod(h * center, 1.0)) * np.sin(TWO_PI * h * halfwidth) / (math.pi * h)
    return math.fsum(terms.tolist()) + 2.0 * halfwidth * c[0]


def gallagher_ratio(coeffs: ArithTable, a: int, q: int, Y: int, X: int | None = None,
                    rtol: float = 1e-8) -> GallagherReport:
    """Ratio of the arc energy around a/q to Gallagher's short-sum majorant.

    LHS = int_{a/q - 1/Y}^{a/q + 1/Y} |S(beta)|^2 d beta by composite
    quadrature; RHS = Y^-2 int_X^{2X} |sum_{u < n <= u+Y} c(n) e(an/q)|^2 du,
    integrated exactly (the integrand is constant on each [j, j+1)).
    """
    if math.gcd(a, q) != 1 or q < 1:
        raise ParameterError(f"need gcd(a, q) = 1, got a={a}, q={q}")
    if Y < 1:
        raise ParameterError("Y must be positive")
    X = coeffs.lo - 1 if X is None else X
    center = a / q
    n = coeffs.n
    v = coeffs.values

    def integrand(beta):
        return np.abs(exp_sum_grid(v, n, beta)) ** 2

    span = coeffs.hi - coeffs.lo + 1
    min_nodes = 64 * math.ceil(max(X, 1) / Y)
    order = 8
    panels = max(math.ceil(min_nodes / order), math.ceil(2.0 * span * 2.0 / Y))
    if not np.any(v):
        return GallagherReport(0.0, 0.0, None, "degenerate")
    lhs, change = quad.integrate_doubling(integrand, center - 1.0 / Y, center + 1.0 / Y, panels,
                                          rtol=rtol, fail_rtol=1e-2, order=order)

    # RHS: W(j) = sum_{n=j+1}^{j+Y} b(n), j = X .. 2X-1
    lo, hi = X + 1, 2 * X + Y
    b = coeffs.padded(lo, hi) * np.exp(1j * TWO_PI * (np.arange(lo, hi + 1) * a % q) / q)
    P = np.concatenate([[0.0], np.cumsum(b)])
    j = np.arange(X, 2 * X)
    W = P[j + Y - X] - P[j - X]
    rhs = math.fsum((np.abs(W) ** 2).tolist()) / Y**2
    if rhs == 0.0:
        return GallagherReport(lhs, rhs, None, "degenerate", change, panels * order)
    return GallagherReport(lhs, rhs, lhs / rhs, "ok", change, panels * order)


# --------------------------------------------------------------------------
# Vaughan decomposition


@dataclass
class VaughanResult:
    S: complex
    S1: complex
    S2: complex
    S3: complex
    S4: complex

    @property
    def residual(self) -> float:
        return abs(self.S - (self.S1 + self.S2 - self.S3 + self.S4))

    def as_tuple(self):
        return self.S, self.S1, self.S2, self.S3, self.S4


def _window_sum(coef: np.ndarray, X: int, N: int, alpha: float) -> complex:
    # coef indexed from n = 1
    if N <= X:
        return 0j
    n = np.arange(X + 1, N + 1)
    ph = _phases(n.astype(np.float64), alpha)
    w = coef[X:N]
    return complex(math.fsum(w * np.cos(ph)), math.fsum(w * np.sin(ph)))


def vaughan_decompose(form: CuspForm, X: int, H: int, alpha: float, U: int, V: int,
                      tol: float = 1e-6) -> VaughanResult:
    """S = S1 + S2 - S3 + S4 for S = sum_{X < n <= X+H} Lambda_f(n) e(n alpha).

    With F = sum_{n<=U} Lambda_f n^-s and G = sum_{n<=V} mu_f n^-s,
    -L'/L = F - L'G - LFG + (-L'/L - F)(1 - LG).  The coefficient of 1 - LG
    vanishes for n <= V and equals -b_f(n) above V, which fixes the sign of S4.
    """
    if H < 0:
        raise ParameterError("H must be non-negative")
    if U < 2 or V < 2:
        raise ParameterError("U and V must be at least 2")
    N = X + H
    if H == 0:
        return VaughanResult(0j, 0j, 0j, 0j, 0j)
    if U * V > N:
        raise PreconditionError(f"UV={U * V} exceeds X+H={N}")
    if N > form.ncoeffs:
        raise ParameterError(f"X+H={N} exceeds coefficient table ({form.ncoeffs})")
    Lf = arith.lambda_f_table(form, 1, N).values
    mu = arith.mu_f_table(form, 1, N).values
    lam = arith.lambda_table(form, 1, N).values
    lamlog = arith.lambda_log_table(form, 1, N).values
    conv = arith.dirichlet_convolve

    Lf_small = Lf.copy()
    Lf_small[U:] = 0.0
    Lf_large = Lf - Lf_small
    mu_small = mu.copy()
    mu_small[V:] = 0.0

    a_f = conv(Lf_small, mu_small)  # supported on m <= UV
    b_f = conv(mu_small, lam)
    b_f[:V] = 0.0

    S = _window_sum(Lf, X, N, alpha)
    S1 = _window_sum(Lf_small, X, N, alpha)
    S2 = _window_sum(conv(mu_small, lamlog), X, N, alpha)
    S3 = _window_sum(conv(a_f, lam), X, N, alpha)
    S4 = _window_sum(conv(Lf_large, -b_f), X, N, alpha)
    res = VaughanResult(S, S1, S2, S3, S4)
    if res.residual > tol * (1.0 + abs(S)):
        raise InternalConsistencyError(f"Vaughan residual {res.residual:.3e} exceeds tolerance")
    return res


# --------------------------------------------------------------------------
# pointwise bound monitoring


@dataclass
class PointwiseReport:
    x: int
    H: int
    a: int
    q: int
    value: complex
    envelope: float
    ratio: float
    admissible: bool
    c1: float


def pointwise_bound_envelope(x: int, H: int, q: int, c1: float = 2.0) -> float:
    return (H / math.sqrt(q) + math.sqrt(x * q) + math.sqrt(H) * x ** (1.0 / 3.0) + x ** (2.0 / 3.0)) * math.log(x) ** c1


def pointwise_bound_ratio(form: CuspForm, x: int, H: int, a: int, q: int,
                          c1: float = 2.0, c: float = 0.0) -> PointwiseReport:
    """|sum_{x <= n <= x+H} lambda_f(n) Lambda(n) e(na/q)| over its bilinear envelope.

    ``admissible`` records whether x^(2/3) (log x)^c <= H <= x; the ratio is
    reported either way.
    """
    if math.gcd(a, q) != 1:
        raise ParameterError(f"need gcd(a, q) = 1, got a={a}, q={q}")
    table = arith.hecke_lambda_vm(form, x, x + H)
    value = exp_sum_rational(table, a, q)
    env = pointwise_bound_envelope(x, H, q, c1)
    admissible = x ** (2.0 / 3.0) * math.log(x) ** c <= H <= x
    return PointwiseReport(x, H, a, q, value, env, abs(value) / env, admissible, c1)
