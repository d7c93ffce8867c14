"""Dirichlet characters, twisted Dirichlet polynomials and their moments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import arith, quad
from .arith import ArithTable
from .errors import ParameterError
from .forms import CuspForm
from .sieve import divisors, euler_phi, factorize, mobius

MAX_Q = 10**4


# --------------------------------------------------------------------------
# character tables


def _primitive_root(p: int) -> int:
    phi = p - 1
    qs = [r for r, _ in factorize(phi)]
    for g in range(2, p):
        if all(pow(g, phi // r, p) != 1 for r in qs):
            return g
    return 1  # p = 2


def _component(p: int, e: int) -> list[tuple[int, np.ndarray]]:
    """Generators of (Z/p^e)^* as (order, discrete-log table mod p^e; -1 off units)."""
    pe = p**e
    if p == 2:
        if e == 1:
            return []
        out = []
        r = np.arange(pe)
        sign = np.where(r % 2 == 0, -1, (r % 4 == 3).astype(np.int64))
        out.append((2, sign))
        if e >= 3:
            order = pe // 4
            log5 = np.full(pe, -1, dtype=np.int64)
            v = 1
            for j in range(order):
                log5[v] = j
                log5[pe - v] = j
                v = v * 5 % pe
            out.append((order, log5))
        return out
    g = _primitive_root(p)
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    order = pe - pe // p
    table = np.full(pe, -1, dtype=np.int64)
    v = 1
    for j in range(order):
        table[v] = j
        v = v * g % pe
    return [(order, table)]


@dataclass(frozen=True)
class CharacterTable:
    """All characters mod q as exponents: chi_i(n) = e(exp[i, n] / L), exp = -1 where gcd(n, q) > 1."""

    q: int
    L: int
    exps: np.ndarray = field(repr=False)
    conductors: tuple
    gens: tuple  # exponent vector of each character against the generators

    def __len__(self):
        return len(self.conductors)

    def values(self, i: int) -> np.ndarray:
        """chi_i(0 .. q-1) as complex numbers."""
        ex = self.exps[i]
        roots = np.exp(2j * math.pi * np.arange(self.L) / self.L)
        out = np.where(ex >= 0, roots[np.maximum(ex, 0)], 0)
        return out.astype(np.complex128)

    def matrix(self) -> np.ndarray:
        return np.array([self.values(i) for i in range(len(self))])

    @property
    def is_principal(self) -> list[bool]:
        return [bool(np.all(ex[ex >= 0] == 0)) for ex in self.exps]

    @property
    def is_primitive(self) -> list[bool]:
        return [c == self.q for c in self.conductors]

    def primitive_indices(self) -> list[int]:
        return [i for i, c in enumerate(self.conductors) if c == self.q]

    def at(self, i: int, n) -> np.ndarray:
        return self.values(i)[np.asarray(n) % self.q]


def _conductor(p: int, e: int, exps_mod_pe: np.ndarray) -> int:
    """Smallest p^f such that the component character is trivial on 1 + p^f Z."""
    pe = p**e
    for f in range(e + 1):
        d = p**f
        idx = np.arange(1, pe, d) if d > 1 else np.arange(pe)
        idx = idx[idx % p != 0]
        if np.all(exps_mod_pe[idx] == 0):
            return d
    return pe


@lru_cache(maxsize=256)
def char_table(q: int) -> CharacterTable:
    if not 1 <= q <= MAX_Q:
        raise ParameterError(f"q must lie in [1, {MAX_Q}]")
    comps = []  # (p, e, [(order, logtable)])
    for p, e in factorize(q):
        comps.append((p, e, _component(p, e)))
    orders = [o for _, _, gs in comps for o, _ in gs]
    L = math.lcm(*orders) if orders else 1
    n = np.arange(q)
    unit = np.gcd(n, q) == 1
    # log of n against each generator, via the residue mod p^e
    logs = []
    for p, e, gs in comps:
        pe = p**e
        for o, table in gs:
            logs.append(table[n % pe])
    vecs = [()]
    for o in orders:
        vecs = [v + (j,) for v in vecs for j in range(o)]
    exps = np.empty((len(vecs), q), dtype=np.int64)
    conductors = []
    for i, v in enumerate(vecs):
        ex = np.zeros(q, dtype=np.int64)
        for j, o, lg in zip(v, orders, logs):
            ex = ex + j * (L // o) * np.where(lg >= 0, lg, 0)
        ex %= L
        exps[i] = np.where(unit, ex, -1)
        # conductor is multiplicative over the prime-power components
        cond, pos = 1, 0
        for p, e, gs in comps:
            pe = p**e
            k = len(gs)
            local = np.zeros(pe, dtype=np.int64)
            r = np.arange(pe)
            for j, (o, table) in zip(v[pos : pos + k], gs):
                local = local + j * (L // o) * np.where(table >= 0, table, 0)
            local %= L
            local[r % p == 0] = -1
            cond *= _conductor(p, e, local)
            pos += k
        conductors.append(cond)
    return CharacterTable(q, L, exps, tuple(conductors), tuple(vecs))


def primitive_count(q: int) -> int:
    """Number of primitive characters mod q from sum_{d | q} mu(q/d) phi(d)."""
    return sum(mobius(q // d) * euler_phi(d) for d in divisors(q))


def orthogonality_error(table: CharacterTable) -> float:
    """Max deviation of both orthogonality relations from phi(q) * identity."""
    M = table.matrix()
    phi = euler_phi(table.q)
    rows = M @ M.conj().T
    row_err = np.max(np.abs(rows - phi * np.eye(len(M))))
    unit = np.flatnonzero(np.gcd(np.arange(table.q), table.q) == 1)
    cols = M[:, unit].conj().T @ M[:, unit]
    col_err = np.max(np.abs(cols - phi * np.eye(len(unit))))
    return float(max(row_err, col_err))


def gauss_sum(table: CharacterTable, i: int) -> complex:
    q = table.q
    n = np.arange(q)
    return complex(np.sum(table.values(i) * np.exp(2j * math.pi * n / q)))


# --------------------------------------------------------------------------
# twisted Dirichlet polynomials


def _chi_array(chi, n: np.ndarray) -> np.ndarray:
    if chi is None:
        return np.ones(len(n), dtype=np.complex128)
    chi = np.asarray(chi, dtype=np.complex128)
    return chi[n % len(chi)]


def twisted_polynomial(form: CuspForm, chi, M: int, t: float) -> complex:
    """sum_{M <= n <= 2M} lambda_f(n) chi(n) n^{-1/2 - it}; ``chi`` is a table chi(0..q-1)."""
    if 2 * M > form.ncoeffs:
        raise ParameterError(f"need {2 * M} coefficients, form has {form.ncoeffs}")
    if M < 1:
        return 0j
    n = np.arange(M, 2 * M + 1)
    terms = form.lam[n] * _chi_array(chi, n) * np.exp(-(0.5 + 1j * t) * np.log(n))
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def _poly_values(coef: np.ndarray, n: np.ndarray, ts: np.ndarray, chunk: int = 1 << 22) -> np.ndarray:
    """[sum_n coef[j, n] n^{-it}] for each t; coef has shape (chars, len(n))."""
    logn = np.log(n.astype(np.float64))
    out = np.empty((len(ts), coef.shape[0]), dtype=np.complex128)
    step = max(1, chunk // max(len(n), 1))
    for s in range(0, len(ts), step):
        E = np.exp(-1j * np.outer(ts[s : s + step], logn))
        out[s : s + step] = E @ coef.T
    return out


@dataclass
class MomentResult:
    q: int
    T: float
    M: int
    value: float
    ratio: float
    normalizer: float
    c: float
    characters: int
    quad_change: float


def _panels(a: float, b: float, freq: float) -> int:
    width = math.pi / max(freq, 1e-12)
    return max(1, math.ceil((b - a) / width))


def moment4(form: CuspForm, q: int, T: float, M: int, quadrature_points: int | None = None,
            c: float = 3.0, rtol: float = 1e-4) -> MomentResult:
    """sum over primitive chi mod q of int_{T/2}^{T} |sum_{M<=n<=2M} lambda chi n^{-1/2-it}|^4 dt."""
    if 2 * M > form.ncoeffs:
        raise ParameterError(f"need {2 * M} coefficients, form has {form.ncoeffs}")
    if M < 1 or T <= 0:
        raise ParameterError("need M >= 1 and T > 0")
    table = char_table(q)
    prim = table.primitive_indices()
    n = np.arange(M, 2 * M + 1)
    base = form.lam[n] / np.sqrt(n)
    coef = np.array([base * table.values(i)[n % q] for i in prim]) if prim else np.zeros((0, len(n)))

    def integrand(ts):
        if not len(coef):
            return np.zeros(len(ts))
        P = _poly_values(coef, n, ts)
        return np.sum(np.abs(P) ** 4, axis=1)

    a, b = T / 2.0, float(T)
    # fastest oscillation of |P|^4 is 2 log(2M/M) ... capped by pi/log(4M) panel width
    panels = _panels(a, b, math.log(4 * M)) if quadrature_points is None else max(1, quadrature_points // 8)
    if not np.any(coef):
        value, change = 0.0, 0.0
    else:
        value, change = quad.integrate_doubling(integrand, a, b, panels, rtol=rtol, fail_rtol=rtol)
    norm = q * T * math.log(q * T * M) ** c
    return MomentResult(q, T, M, value, value / norm, norm, c, len(prim), change)


def moment4_two_term(lam2: float, T: float) -> float:
    """Closed form of int_{T/2}^{T} |1 + lambda(2) 2^{-1/2-it}|^4 dt."""
    b = lam2 / math.sqrt(2.0)
    w = math.log(2.0)
    a = T / 2.0

    def prim(t):
        return (((1 + b * b) ** 2 + 2 * b * b) * t
                + 4 * b * (1 + b * b) * math.sin(w * t) / w
                + b * b * math.sin(2 * w * t) / w)

    return prim(T) - prim(a)


# --------------------------------------------------------------------------
# mean value theorem


@dataclass
class MVTResult:
    q: int
    X: float
    T0: float
    T: float
    lhs: float
    envelope: float
    ratio: float
    quad_change: float


def mvt_envelope(q: int, T: float, X: float, l2: float) -> float:
    if q == 1:
        return (T + X) / X * l2
    return (q * T + X) / X * l2 * math.log(q * T * X) ** 3


def mvt_lhs_exact(coeffs: ArithTable, q: int, T0: float, T: float) -> float:
    """sum_chi int |sum f(n) chi(n) n^{-1/2-it}|^2 via orthogonality and exact t-integrals."""
    n = coeffs.n
    v = coeffs.values
    keep = (v != 0) & (np.gcd(n, q) == 1)
    n, v = n[keep], v[keep]
    if not len(n):
        return 0.0
    a = v / np.sqrt(n)
    logn = np.log(n.astype(np.float64))
    total = 0.0
    for r in np.unique(n % q):
        sel = n % q == r
        ar, lr = a[sel], logn[sel]
        d = lr[:, None] - lr[None, :]
        # int_{T0}^{T0+T} e^{-i t d} dt, real part suffices after symmetrisation
        with np.errstate(invalid="ignore", divide="ignore"):
            kern = np.where(d == 0, T, (np.sin(d * (T0 + T)) - np.sin(d * T0)) / np.where(d == 0, 1, d))
        total += float(ar @ kern @ ar)
    return euler_phi(q) * total


def mvt_ratio(coeffs: ArithTable, q: int, T0: float, T: float, X: float, rtol: float = 1e-4) -> MVTResult:
    """Numeric LHS over all characters mod q against the mean-value envelope."""
    if not (coeffs.lo >= X / 2 and coeffs.hi <= 4 * X and X >= 2):
        raise ParameterError(f"coefficients must be supported on [X/2, 4X] for X={X}")
    l2 = coeffs.l2_squared()
    env = mvt_envelope(q, T, X, l2)
    if l2 == 0:
        return MVTResult(q, X, T0, T, 0.0, env, 0.0, 0.0)
    table = char_table(q)
    n = coeffs.n
    base = coeffs.values / np.sqrt(n)
    coef = np.array([base * table.values(i)[n % q] for i in range(len(table))])

    def integrand(ts):
        P = _poly_values(coef, n, ts)
        return np.sum(np.abs(P) ** 2, axis=1)

    freq = math.log(coeffs.hi / coeffs.lo) if coeffs.hi > coeffs.lo else 1.0
    panels = _panels(T0, T0 + T, max(freq, 1.0))
    lhs, change = quad.integrate_doubling(integrand, T0, T0 + T, panels, rtol=rtol, fail_rtol=rtol)
    return MVTResult(q, X, T0, T, lhs, env, lhs / env, change)


# --------------------------------------------------------------------------
# twisted short-interval energy


@dataclass
class TwistedEnergy:
    q: int
    X: int
    H: int
    value: float
    normalized: float
    B: float


def _window_sums(values: np.ndarray, X: int, H: int) -> np.ndarray:
    """sum_{j < n <= j+H} values for j = X .. 2X-1; values[i] holds n = X + 1 + i."""
    P = np.concatenate([[0], np.cumsum(values)])
    j = np.arange(X)
    return P[j + H] - P[j]


def twisted_window_energy(form: CuspForm, q: int, X: int, H: int, B: float = 0.0,
                          route: str = "characters") -> TwistedEnergy:
    """(1/X) int_X^{2X} sum_{chi mod q} |sum_{x<n<=x+H} Lambda_f(n) chi(n)|^2 dx, exactly.

    The integrand is constant on each [j, j+1), so the integral is a finite sum.
    ``route='residues'`` evaluates the same quantity through character orthogonality.
    """
    if q > 100 or q < 1:
        raise ParameterError("q must lie in [1, 100]")
    if H < 0:
        raise ParameterError("H must be non-negative")
    if H == 0:
        return TwistedEnergy(q, X, H, 0.0, 0.0, B)
    if 2 * X + H > form.ncoeffs:
        raise ParameterError(f"need {2 * X + H} coefficients, form has {form.ncoeffs}")
    lf = arith.lambda_f_table(form, X + 1, 2 * X + H - 1).values
    n = np.arange(X + 1, 2 * X + H)
    total = 0.0
    if route == "characters":
        table = char_table(q)
        for i in range(len(table)):
            w = _window_sums(lf * table.values(i)[n % q], X, H)
            total += math.fsum((np.abs(w) ** 2).tolist())
    elif route == "residues":
        for r in range(q):
            if math.gcd(r, q) != 1:
                continue
            w = _window_sums(np.where(n % q == r, lf, 0.0), X, H)
            total += math.fsum((w * w).tolist())
        total *= euler_phi(q)
    else:
        raise ParameterError(f"unknown route {route!r}")
    value = total / X
    norm = H * H / math.log(X) ** B
    return TwistedEnergy(q, X, H, value, value / norm, B)
