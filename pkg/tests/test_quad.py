import math

import numpy as np
import pytest

from cuspcorr import quad
from cuspcorr.errors import NumericInstabilityError


def test_polynomial_exact():
    # 8-point Gauss-Legendre integrates degree 15 exactly
    assert quad.integrate(lambda x: x**15 + 3 * x**2, 0.0, 2.0, 1) == pytest.approx(2**16 / 16 + 8, rel=1e-14)


def test_doubling_oscillatory():
    val, change = quad.integrate_doubling(lambda x: np.cos(50 * x), 0.0, 3.0, 2, rtol=1e-12)
    assert val == pytest.approx(math.sin(150) / 50, abs=1e-13)
    assert change <= 1e-12


def test_empty_interval():
    assert quad.integrate_doubling(np.sin, 1.0, 1.0, 4) == (0.0, 0.0)


def test_nonconvergence_raises():
    with pytest.raises(NumericInstabilityError):
        quad.integrate_doubling(lambda x: np.sign(np.sin(1e4 * x)) * 1e3 + np.cos(1e5 * x) * 1e6, 0.0, 1.0, 1,
                                rtol=1e-15, fail_rtol=1e-12, max_doublings=2)
