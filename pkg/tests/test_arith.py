import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcorr import arith
from cuspcorr.errors import ParameterError, PreconditionError, ResourceError

from oracles import factor, von_mangoldt

LOG2 = math.log(2)


def test_vonmangoldt_values():
    t = arith.sieve_vonmangoldt(1, 100)
    assert t[12] == 0.0
    assert t[8] == pytest.approx(LOG2, abs=1e-15)
    assert t[1] == 0.0
    assert all(t[n] == pytest.approx(von_mangoldt(n), abs=1e-15) for n in range(2, 101))


def test_chebyshev_psi_100():
    # direct sum of log p over prime powers up to 100
    ref = math.fsum(math.log(p) * int(math.log(100) / math.log(p) + 1e-12)
                    for p in range(2, 101) if len(factor(p)) == 1 and factor(p).get(p) == 1)
    assert ref == pytest.approx(94.0453112, abs=1e-6)
    assert arith.chebyshev_psi(100) == pytest.approx(ref, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 50000), st.integers(0, 3000))
def test_segmented_sieve_matches_full(lo, width):
    hi = lo + width
    full = arith.sieve_vonmangoldt(1, hi).values[lo - 1 :]
    assert np.array_equal(arith.sieve_vonmangoldt(lo, hi).values, full)


def test_sieve_range_errors():
    with pytest.raises(ParameterError):
        arith.sieve_vonmangoldt(0, 10)
    with pytest.raises(ParameterError):
        arith.sieve_vonmangoldt(10, 5)
    with pytest.raises(ResourceError):
        arith.sieve_vonmangoldt(1, arith.MAX_TABLE_LEN + 1)


def test_lambda_f_small_values(delta):
    t = arith.lambda_f_table(delta, 1, 100)
    lam2 = delta.lambda_at(2)
    # (lambda(2)^2 - 2) log 2 with lambda(2)^2 = 576/2^11 exactly
    assert t[4] == pytest.approx((0.28125 - 2.0) * LOG2, rel=1e-14)
    assert t[4] == pytest.approx(-1.1913467, abs=1e-7)
    assert t[6] == 0.0 and t[1] == 0.0
    assert t[8] == pytest.approx((lam2**3 - 3 * lam2) * LOG2, rel=1e-13)
    for p in (2, 3, 5, 7, 97):
        assert t[p] == pytest.approx(delta.lambda_at(p) * math.log(p), rel=1e-15)


def test_lambda_f_bounded_by_deligne(delta):
    # |alpha^j + beta^j| <= 2
    t = arith.lambda_f_table(delta, 2, 30000)
    assert np.all(np.abs(t.values) <= 2 * np.log(t.n) + 1e-9)


def test_lambda_f_range_beyond_table(delta):
    with pytest.raises(ParameterError):
        arith.lambda_f_table(delta, 1, delta.ncoeffs + 1)


def test_mu_f_values(delta):
    mu = arith.mu_f_table(delta, 1, 200)
    assert mu[1] == 1.0
    assert mu[2] == pytest.approx(0.530330086, abs=1e-9)
    assert mu[4] == 1.0 and mu[8] == 0.0 and mu[16] == 0.0
    assert mu[12] == pytest.approx(-delta.lambda_at(3), rel=1e-15)


def test_mu_f_is_multiplicative(delta):
    mu = arith.mu_f_table(delta, 1, 2000)
    for n in range(2, 2001):
        ref = 1.0
        for p, e in factor(n).items():
            ref *= -delta.lambda_at(p) if e == 1 else (1.0 if e == 2 else 0.0)
        assert mu[n] == pytest.approx(ref, rel=1e-13, abs=1e-15)


def test_mu_f_segment_matches_full(delta):
    full = arith.mu_f_table(delta, 1, 5000).values
    seg = arith.mu_f_table(delta, 3001, 5000).values
    assert np.allclose(seg, full[3000:], rtol=1e-14, atol=0)


def test_divisor_functions():
    d2 = arith.sieve_divisor(2, 1, 100)
    d3 = arith.sieve_divisor(3, 1, 100)
    assert d2[12] == 6 and d3[4] == 6 and d2[1] == 1 and d3[1] == 1
    for m in (2, 3, 4):
        t = arith.sieve_divisor(m, 1, 60)
        for n in range(1, 61):
            assert t[n] == arith.enumerate_divisor_m(m, n)
    with pytest.raises(ParameterError):
        arith.sieve_divisor(1, 1, 10)


def _tuples_with_product(m, n):
    return sum(1 for t in product(range(1, n + 1), repeat=m) if math.prod(t) == n)


def test_enumerate_divisor_against_raw_tuples():
    for n in (1, 4, 6, 12):
        assert arith.enumerate_divisor_m(3, n) == _tuples_with_product(3, n)


def test_convolution_classical():
    N = 1000
    rep = arith.convolution_check(arith.sieve_vonmangoldt(1, N), arith.mobius_table(1, N),
                                  arith.log_table(1, N), tol=1e-10)
    assert rep.passed and rep.max_error <= 1e-10


def test_convolution_identity_element(delta):
    h = arith.lambda_f_table(delta, 1, 500)
    rep = arith.convolution_check(h, arith.delta_table(500), h, tol=0.0)
    assert rep.passed and rep.max_error == 0.0


def test_convolution_lambda_f(delta):
    N = 10_000
    rep = arith.convolution_check(arith.lambda_f_table(delta, 1, N), arith.mu_f_table(delta, 1, N),
                                  arith.lambda_log_table(delta, 1, N), tol=1e-9)
    assert rep.passed, rep


def test_dirichlet_convolve_brute_force(delta):
    N = 120
    g = arith.mu_f_table(delta, 1, N).values
    h = arith.lambda_log_table(delta, 1, N).values
    out = arith.dirichlet_convolve(g, h)
    for n in range(1, N + 1):
        ref = math.fsum(g[d - 1] * h[n // d - 1] for d in range(1, n + 1) if n % d == 0)
        assert out[n - 1] == pytest.approx(ref, abs=1e-12)


def test_convolution_mismatched_ranges():
    with pytest.raises(ParameterError):
        arith.convolution_check(arith.log_table(1, 10), arith.log_table(1, 10), arith.log_table(1, 11), 1.0)


def test_heath_brown_L1_is_plain_convolution(delta):
    rep = arith.heath_brown_identity_check(delta, 1, 2000, 2000)
    assert rep.max_error <= 1e-9


def test_heath_brown_L2_against_enumeration(delta):
    rep = arith.heath_brown_identity_check(delta, 2, 10, 200)
    assert rep.passed and rep.max_error <= 1e-8
    rhs = arith.heath_brown_terms(delta, 2, 10, 200)
    lhs = arith.lambda_f_table(delta, 1, 200).values
    for n in (1, 2, 12, 16, 49, 64, 96, 128, 180, 199, 200):
        assert arith.heath_brown_enumerate(delta, 2, 10, n) == pytest.approx(rhs[n - 1], abs=1e-10)
    assert rhs[0] == 0.0 and lhs[0] == 0.0


@pytest.mark.parametrize("L,z,N", [(3, 8, 1000), (4, 5, 1250)])
def test_heath_brown_higher_L(delta, L, z, N):
    assert arith.heath_brown_identity_check(delta, L, z, N).passed


def test_heath_brown_precondition(delta):
    with pytest.raises(PreconditionError):
        arith.heath_brown_identity_check(delta, 2, 10, 201)
    with pytest.raises(ParameterError):
        arith.heath_brown_identity_check(delta, 5, 10, 10)


def test_singular_series():
    assert arith.singular_series(3) == 0.0
    s2 = arith.singular_series(2, 10**6)
    assert s2 == pytest.approx(1.320324, abs=2e-6)
    assert arith.singular_series(4) == s2
    assert arith.singular_series(-2) == s2
    assert arith.singular_series(6) == pytest.approx(2 * s2, rel=1e-15)
    assert arith.singular_series(30) == pytest.approx(s2 * 2 * 4 / 3, rel=1e-14)
    with pytest.raises(ParameterError):
        arith.singular_series(0)


def test_singular_series_tail_bound():
    a = arith.singular_series_report(2, 10**4)
    b = arith.singular_series(2, 10**6)
    assert abs(a.value - b) <= a.value * a.tail_bound
