import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcorr import arith, expsum
from cuspcorr.arith import ArithTable
from cuspcorr.errors import InternalConsistencyError, ParameterError, PreconditionError

from oracles import von_mangoldt


def naive_exp_sum(pairs, alpha):
    return sum(c * cmath.exp(2j * math.pi * n * alpha) for n, c in pairs)


def test_exp_sum_trivial_cases(delta):
    assert expsum.exp_sum(ArithTable(5, 9, np.zeros(5)), 0.3) == 0
    t = arith.hecke_lambda_vm(delta, 5, 8)
    s0 = expsum.exp_sum(t, 0.0)
    assert s0.imag == 0.0 and s0.real == pytest.approx(math.fsum(t.values), abs=1e-15)


def test_exp_sum_four_terms(delta):
    t = arith.hecke_lambda_vm(delta, 5, 8)
    pairs = [(n, delta.lambda_at(n) * von_mangoldt(n)) for n in range(5, 9)]
    assert t[6] == 0.0
    got = expsum.exp_sum(t, 0.5)
    ref = sum(c * (-1) ** n for n, c in pairs)
    assert abs(got - ref) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.integers(2, 3000))
def test_exp_sum_against_naive(alpha, lo):
    rng = np.random.default_rng(lo)
    vals = rng.standard_normal(200)
    t = ArithTable(lo, lo + 199, vals)
    ref = naive_exp_sum(zip(range(lo, lo + 200), vals), alpha)
    assert abs(expsum.exp_sum(t, alpha) - ref) <= 1e-9 * (1 + abs(ref))


def test_exp_sum_rational_and_grid_agree(delta):
    t = arith.hecke_lambda_vm(delta, 1001, 2000)
    r = expsum.exp_sum_rational(t, 2, 7)
    assert abs(r - expsum.exp_sum(t, 2 / 7)) <= 1e-9
    betas = np.array([0.1, 2 / 7, 0.9])
    g = expsum.exp_sum_grid(t.values, t.n, betas)
    for b, v in zip(betas, g):
        assert abs(abs(v) - abs(expsum.exp_sum(t, float(b)))) <= 1e-9


def test_wilton_small(delta):
    assert expsum.wilton_sum(delta, 1, 0.0) == 1.0
    assert abs(expsum.wilton_sum(delta, 1, 0.37)) == pytest.approx(1.0, abs=1e-15)
    assert expsum.wilton_sum(delta, 2, 0.0).real == pytest.approx(0.469670, abs=1e-6)
    with pytest.raises(ParameterError):
        expsum.wilton_sum(delta, 0, 0.1)
    with pytest.raises(ParameterError):
        expsum.wilton_sum(delta, delta.ncoeffs + 1, 0.1)


def test_wilton_ratio_stays_bounded_under_doubling(delta):
    thetas = np.random.default_rng(7).random(100)
    worst = {y: max(expsum.wilton_ratio(delta, y, float(t)) for t in thetas) for y in (2500, 5000, 10000)}
    assert all(math.isfinite(v) for v in worst.values())
    assert worst[10000] <= 2 * worst[2500] and worst[10000] < 1.0


def brute_approx(alpha, R):
    x = Fraction(alpha)
    for q in range(1, int(R) + 1):
        a = round(q * x)
        if abs(q * x - a) * Fraction(R) <= 1:
            return a, q


def test_dirichlet_approx_examples():
    r = expsum.dirichlet_approx(1 / 3, 10)
    assert (r.a, r.q) == (1, 3) and r.err < 1e-16
    r = expsum.dirichlet_approx(0.0, 5)
    assert (r.a, r.q, r.err) == (0, 1, 0.0)
    alpha = math.sqrt(2) - 1
    r = expsum.dirichlet_approx(alpha, 100)
    # the brute-force search confirms 29/70, not the earlier convergent 12/29
    assert (r.a, r.q) == brute_approx(alpha, 100) == (29, 70)
    assert r.err <= 1 / (r.q * 100)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.integers(1, 400))
def test_dirichlet_approx_is_smallest_denominator(alpha, R):
    r = expsum.dirichlet_approx(alpha, R)
    assert (r.a, r.q) == brute_approx(alpha, R)
    assert r.q <= R and abs(alpha - r.a / r.q) <= 1 / (r.q * R) + 1e-15


def test_dirichlet_approx_domain():
    with pytest.raises(ParameterError):
        expsum.dirichlet_approx(1.5, 10)
    with pytest.raises(ParameterError):
        expsum.dirichlet_approx(0.5, 0.5)


def totient(n):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def test_arc_count_is_totient_sum():
    X, A, eps = 10**4, 1.0, 0.05
    H = math.ceil(X**0.75)
    arcs = expsum.build_arcs(X, H, A, eps, "theorem1")
    Q = int(math.floor(arcs.Q))
    assert Q >= 2
    assert arcs.count == 1 + sum(totient(q) for q in range(1, Q + 1))
    assert arcs.measure_major() + arcs.measure_minor() == pytest.approx(1.0, abs=1e-12)


def test_small_Q_gives_endpoints_only():
    arcs = expsum.build_arcs(50, 40, 0.0, 0.05, "theorem2", c0=0.1, check_range=False)
    assert arcs.Q < 2
    assert sorted(zip(arcs.a.tolist(), arcs.q.tolist())) == [(0, 1), (1, 1)]


def test_arc_precondition():
    with pytest.raises(PreconditionError):
        expsum.build_arcs(10**4, 100, 1.0, 0.05, "theorem1")
    expsum.build_arcs(10**4, 100, 1.0, 0.05, "theorem2")
    with pytest.raises(ParameterError):
        expsum.build_arcs(10**4, 1000, 1.0, 0.05, "theorem3")


def test_theorem2_uses_common_halfwidth():
    arcs = expsum.build_arcs(10**5, 10**3, 0.5, 0.05, "t2")
    assert arcs.variant == "theorem2"
    assert np.all(arcs.halfwidths == arcs.halfwidths[0])
    assert arcs.halfwidths[0] == pytest.approx(math.log(10**5) ** 1.5 / 1000)


@pytest.fixture(scope="module")
def arcs1():
    return expsum.build_arcs(10**4, math.ceil(10**3), 1.0, 0.05, "theorem1")


@pytest.fixture(scope="module")
def arcs2():
    # small A keeps the theorem2 arcs narrow enough to leave minor arcs at this X
    return expsum.build_arcs(10**5, 1000, 0.1, 0.05, "theorem2")


def test_classify_centres_are_major(arcs1):
    for a, q, c, _ in arcs1.majors:
        assert expsum.classify_alpha(arcs1, c)[0] == "major"


def test_classify_minor_points(arcs2):
    minors = arcs2.minor_intervals()
    assert len(minors) > 10
    for lo, hi in minors:
        mid = 0.5 * (lo + hi)
        assert expsum.classify_alpha(arcs2, mid)[0] == "minor"
        # interval arithmetic: no arc contains mid
        assert not np.any(np.abs(mid - arcs2.centers) < arcs2.halfwidths)
    # just beyond the arc around 1/2
    hw = arcs2.halfwidth(2)
    outside = 0.5 + 1.5 * hw
    covered = np.any(np.abs(outside - arcs2.centers) < arcs2.halfwidths)
    assert expsum.classify_alpha(arcs2, outside)[0] == ("major" if covered else "minor")


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1))
def test_classify_symmetric(alpha):
    arcs = expsum.build_arcs(10**4, 1000, 1.0, 0.05, "theorem1")
    label, witness = expsum.classify_alpha(arcs, alpha)
    assert expsum.classify_alpha(arcs, 1.0 - alpha)[0] == label
    assert abs(alpha - witness.a / witness.q) <= 1 / (witness.q * arcs.R) + 1e-15


def test_gallagher_degenerate():
    rep = expsum.gallagher_ratio(ArithTable(101, 200, np.zeros(100)), 0, 1, 10)
    assert rep.status == "degenerate" and rep.ratio is None


def test_gallagher_single_coefficient():
    v = np.zeros(1000)
    v[499] = 3.0
    rep = expsum.gallagher_ratio(ArithTable(1001, 2000, v), 1, 3, 50)
    assert rep.lhs == pytest.approx(2 / 50 * 9, rel=1e-10)
    assert rep.rhs == pytest.approx(9 / 50, rel=1e-12)
    assert rep.ratio == pytest.approx(2.0, rel=1e-10)


def test_gallagher_matches_exact_window_energy(delta):
    t = arith.hecke_lambda_vm(delta, 1001, 2000)
    rep = expsum.gallagher_ratio(t, 0, 1, 50)
    assert rep.lhs == pytest.approx(expsum.window_energy_exact(t, 0.0, 1 / 50), rel=1e-7)
    assert 0 < rep.ratio <= 70


def test_gallagher_bad_fraction():
    with pytest.raises(ParameterError):
        expsum.gallagher_ratio(ArithTable(11, 20, np.ones(10)), 2, 4, 5)


def test_vaughan_identity(delta):
    U = V = math.ceil(1000 ** (1 / 3))
    res = expsum.vaughan_decompose(delta, 1000, 100, 0.3, U, V)
    assert res.residual <= 1e-8
    direct = expsum.exp_sum(arith.lambda_f_table(delta, 1001, 1100), 0.3)
    assert abs(res.S - direct) <= 1e-9


def test_vaughan_real_at_zero(delta):
    res = expsum.vaughan_decompose(delta, 2000, 300, 0.0, 12, 12)
    assert all(abs(s.imag) <= 1e-12 for s in res.as_tuple())
    assert res.residual <= 1e-8


def test_vaughan_empty_window_and_errors(delta):
    assert expsum.vaughan_decompose(delta, 1000, 0, 0.3, 10, 10).as_tuple() == (0j,) * 5
    with pytest.raises(PreconditionError):
        expsum.vaughan_decompose(delta, 100, 10, 0.1, 20, 20)
    with pytest.raises(ParameterError):
        expsum.vaughan_decompose(delta, 100, 10, 0.1, 1, 5)
    with pytest.raises(InternalConsistencyError):
        expsum.vaughan_decompose(delta, 1000, 100, 0.3, 10, 10, tol=-1.0)


def test_pointwise_zero_window(delta):
    rep = expsum.pointwise_bound_ratio(delta, 90, 6, 0, 1)
    assert rep.value == 0 and rep.ratio == 0.0


def test_pointwise_plain_sum(delta):
    x, H = 5000, 400
    rep = expsum.pointwise_bound_ratio(delta, x, H, 0, 1)
    ref = math.fsum(delta.lambda_at(n) * von_mangoldt(n) for n in range(x, x + H + 1))
    assert abs(rep.value - ref) <= 1e-10


def test_pointwise_growth(delta):
    ratios = [expsum.pointwise_bound_ratio(delta, x, math.ceil(x**0.75), 1, 3).ratio for x in (10**3, 10**4)]
    assert all(math.isfinite(r) for r in ratios)
    assert max(ratios) <= 10 * ratios[0]
    assert expsum.pointwise_bound_ratio(delta, 10**4, 1000, 1, 3).admissible
