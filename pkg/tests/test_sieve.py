import numpy as np

from cuspcorr import sieve

from oracles import factor


def test_primes_upto():
    assert sieve.primes_upto(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_factorize_and_divisors():
    for n in range(1, 500):
        assert dict(sieve.factorize(n)) == factor(n)
        assert sieve.divisors(n) == [d for d in range(1, n + 1) if n % d == 0]


def test_phi_mobius():
    assert [sieve.euler_phi(n) for n in range(1, 11)] == [1, 1, 2, 2, 4, 2, 6, 4, 6, 4]
    assert [sieve.mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_divisor_count_table():
    d = sieve.divisor_count_table(100)
    assert d[12] == 6 and d[1] == 1 and d[97] == 2
    assert np.all(d[1:] == [len(sieve.divisors(n)) for n in range(1, 101)])


def test_smallest_prime_factor():
    spf = sieve.smallest_prime_factor(100)
    assert spf[91] == 7 and spf[97] == 97 and spf[64] == 2
