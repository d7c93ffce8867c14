import cmath
import math

import numpy as np
import pytest

from cuspcorr import arith, dirichlet as dch, forms
from cuspcorr.arith import ArithTable
from cuspcorr.errors import ParameterError


def phi(n):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def brute_conductor(values, q):
    """Smallest d | q with chi(n) = 1 whenever n = 1 mod d and gcd(n, q) = 1."""
    for d in range(1, q + 1):
        if q % d:
            continue
        if all(abs(values[n] - 1) < 1e-9 for n in range(1, q) if n % d == 1 % d and math.gcd(n, q) == 1):
            return d
    return q


def test_small_tables():
    t1 = dch.char_table(1)
    assert len(t1) == 1 and t1.is_principal == [True] and t1.values(0)[0] == 1
    t3 = dch.char_table(3)
    assert len(t3) == 2
    (i,) = [j for j, p in enumerate(t3.is_principal) if not p]
    assert t3.values(i)[2] == pytest.approx(-1)
    assert t3.is_primitive[i]
    t8 = dch.char_table(8)
    assert len(t8) == 4 and sum(t8.is_primitive) == 2
    with pytest.raises(ParameterError):
        dch.char_table(10**4 + 1)


@pytest.mark.parametrize("q", list(range(1, 201)))
def test_orthogonality_and_count(q):
    t = dch.char_table(q)
    assert len(t) == phi(q)
    assert dch.orthogonality_error(t) <= 1e-10
    assert sum(t.is_primitive) == dch.primitive_count(q)
    assert sum(t.is_principal) == 1


@pytest.mark.parametrize("q", [4, 8, 9, 12, 16, 15, 24, 25, 27, 32, 45, 60, 64, 97, 100, 128, 180, 200])
def test_conductor_and_multiplicativity(q):
    t = dch.char_table(q)
    for i in range(len(t)):
        v = t.values(i)
        assert t.conductors[i] == brute_conductor(v, q)
        m = np.arange(q)
        prod = np.outer(v, v)
        assert np.allclose(prod, v[np.outer(m, m) % q], atol=1e-12)
        assert np.all(np.abs(np.abs(v[np.gcd(m, q) == 1]) - 1) < 1e-14)
        assert np.all(v[np.gcd(m, q) > 1] == 0)


def test_distinct_characters():
    for q in (24, 63, 100):
        M = dch.char_table(q).matrix()
        assert len({tuple(np.round(r, 9)) for r in M}) == len(M)


@pytest.mark.parametrize("q", list(range(2, 101)))
def test_gauss_sum_magnitude(q):
    t = dch.char_table(q)
    for i in t.primitive_indices():
        assert abs(dch.gauss_sum(t, i)) == pytest.approx(math.sqrt(q), abs=1e-10)


def test_twisted_polynomial_two_terms(delta):
    val = dch.twisted_polynomial(delta, None, 1, 0.0)
    assert val == pytest.approx(1 + delta.lambda_at(2) / math.sqrt(2), abs=1e-15)
    assert val.real == pytest.approx(0.625, abs=1e-12)
    assert dch.twisted_polynomial(delta, None, 0, 1.0) == 0


def test_twisted_polynomial_direct_and_conjugate(delta):
    t = dch.char_table(7)
    for i in range(len(t)):
        chi = t.values(i)
        for tt in (0.0, 3.7, -12.5):
            got = dch.twisted_polynomial(delta, chi, 50, tt)
            ref = sum(delta.lambda_at(n) * chi[n % 7] * n ** (-0.5 - 1j * tt) for n in range(50, 101))
            assert abs(got - ref) <= 1e-12
            conj = dch.twisted_polynomial(delta, np.conj(chi), 50, -tt)
            assert abs(conj - got.conjugate()) <= 1e-12


def test_moment4_two_term_closed_form(delta):
    for T in (10.0, 37.0, 100.0):
        r = dch.moment4(delta, 1, T, 1)
        assert r.value == pytest.approx(dch.moment4_two_term(delta.lambda_at(2), T), rel=1e-6)


def test_moment4_closed_form_against_trapezoid(delta):
    T = 20.0
    ts = np.linspace(T / 2, T, 200001)
    b = delta.lambda_at(2)
    f = np.abs(1 + b * 2 ** (-0.5 - 1j * ts)) ** 4
    trap = (f.sum() - 0.5 * (f[0] + f[-1])) * (ts[1] - ts[0])
    assert dch.moment4_two_term(b, T) == pytest.approx(trap, rel=1e-9)


def test_moment4_degenerate_cases(delta):
    # no primitive characters mod 2
    assert dch.moment4(delta, 2, 50.0, 64).value == 0.0
    zero = forms.form_from_coefficients(12, [0] * 300)
    assert dch.moment4(zero, 5, 50.0, 64).value == 0.0
    with pytest.raises(ParameterError):
        dch.moment4(delta, 3, 50.0, delta.ncoeffs)


def test_moment4_adding_characters(delta):
    # q = 5: the sum over primitive characters is at least each single term
    r = dch.moment4(delta, 5, 50.0, 64)
    t = dch.char_table(5)
    assert r.characters == len(t.primitive_indices()) == 3
    n = np.arange(64, 129)
    ts = np.linspace(25, 50, 20001)
    singles = []
    for i in t.primitive_indices():
        c = delta.lam[n] / np.sqrt(n) * t.values(i)[n % 5]
        P = np.exp(-1j * np.outer(ts, np.log(n))) @ c
        f = np.abs(P) ** 4
        singles.append((f.sum() - 0.5 * (f[0] + f[-1])) * (ts[1] - ts[0]))
    assert r.value == pytest.approx(sum(singles), rel=1e-4)
    assert all(r.value >= s for s in singles)


def test_mvt_zero_and_single():
    X, T = 1000, 50.0
    assert dch.mvt_ratio(ArithTable(500, 4000, np.zeros(3501)), 1, 0.0, T, X).ratio == 0.0
    v = np.zeros(3501)
    n0 = 1700
    v[n0 - 500] = 2.0
    r = dch.mvt_ratio(ArithTable(500, 4000, v), 1, 0.0, T, X)
    assert r.lhs == pytest.approx(T * 4 / n0, rel=1e-10)
    assert r.ratio == pytest.approx(T * X / (n0 * (T + X)), rel=1e-10)
    with pytest.raises(ParameterError):
        dch.mvt_ratio(ArithTable(100, 200, np.ones(101)), 1, 0.0, T, X)


def test_mvt_random_signs():
    X = 2**10
    rng = np.random.default_rng(11)
    v = rng.choice([-1.0, 1.0], size=3 * X // 2 + 1)
    coeffs = ArithTable(X // 2, 2 * X, v)
    r = dch.mvt_ratio(coeffs, 5, 0.0, 200.0, X)
    assert 0 < r.ratio <= 30
    assert r.lhs == pytest.approx(dch.mvt_lhs_exact(coeffs, 5, 0.0, 200.0), rel=1e-4)


def test_twisted_energy_trivial_and_errors(delta):
    assert dch.twisted_window_energy(delta, 3, 1000, 0).value == 0.0
    with pytest.raises(ParameterError):
        dch.twisted_window_energy(delta, 101, 1000, 10)
    with pytest.raises(ParameterError):
        dch.twisted_window_energy(delta, 3, 1000, 10, route="other")


def test_twisted_energy_principal_brute_force(delta):
    X, H = 1000, 50
    lf = arith.lambda_f_table(delta, 1, 2 * X + H)
    total = 0.0
    for x in range(X, 2 * X):
        s = math.fsum(lf[n] for n in range(x + 1, x + H + 1))
        total += s * s
    got = dch.twisted_window_energy(delta, 1, X, H)
    assert got.value == pytest.approx(total / X, rel=1e-10)


def test_twisted_energy_routes_agree(delta):
    for q in (3, 5, 8):
        a = dch.twisted_window_energy(delta, q, 1000, 40)
        b = dch.twisted_window_energy(delta, q, 1000, 40, route="residues")
        assert a.value == pytest.approx(b.value, rel=1e-10)


def test_twisted_energy_orthogonality_single_window(delta):
    # one window by hand: sum_chi |sum a(n) chi(n)|^2 = phi(q) sum_r |sum_{n = r} a(n)|^2
    q = 5
    t = dch.char_table(q)
    a = {n: arith.lambda_f_table(delta, 1, 1100)[n] for n in range(1001, 1041)}
    lhs = sum(abs(sum(a[n] * t.values(i)[n % q] for n in a)) ** 2 for i in range(len(t)))
    rhs = phi(q) * sum(sum(a[n] for n in a if n % q == r) ** 2 for r in range(1, q))
    assert lhs == pytest.approx(rhs, rel=1e-12)
