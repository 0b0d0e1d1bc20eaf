import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fairks.hypergeom import HypergeometricDomainError, gauss_at_one, gauss_hypergeometric, power_series


@pytest.mark.parametrize("a, b, c", [(1.0, 1.0, 2.0), (0.3, 2.5, 4.0), (-1.2, 0.7, 1.5)])
def test_value_at_zero_is_one(a, b, c):
    assert gauss_hypergeometric(a, b, c, 0.0) == 1.0


def test_logarithm_identity():
    # F(1, 1; 2; z) = -log(1 - z)/z
    assert gauss_hypergeometric(1.0, 1.0, 2.0, 0.5) == pytest.approx(2 * math.log(2), rel=1e-12)


def test_gauss_summation_at_one():
    expected = oracles.gauss_value_at_one(0.5, 0.5, 2.0)
    assert expected == pytest.approx(1.27324, abs=1e-5)
    assert gauss_at_one(0.5, 0.5, 2.0) == pytest.approx(expected, rel=1e-13)
    assert gauss_hypergeometric(0.5, 0.5, 2.0, 1.0) == pytest.approx(expected, rel=1e-13)


def test_divergent_at_one_is_rejected():
    with pytest.raises(HypergeometricDomainError):
        gauss_hypergeometric(1.0, 1.5, 2.0, 1.0)


def test_nonpositive_integer_c_is_rejected():
    with pytest.raises(HypergeometricDomainError):
        gauss_hypergeometric(1.0, 1.0, -2.0, 0.3)


def test_argument_outside_unit_interval_is_rejected():
    with pytest.raises(HypergeometricDomainError):
        gauss_hypergeometric(1.0, 1.0, 2.0, 1.5)


def test_terminating_series_is_a_polynomial():
    # F(-2, b; c; z) = 1 - 2bz/c + b(b+1)z^2/(c(c+1))
    b, c, z = 0.7, 1.9, 0.97
    expected = 1 - 2 * b * z / c + b * (b + 1) * z * z / (c * (c + 1))
    assert gauss_hypergeometric(-2.0, b, c, z) == pytest.approx(expected, rel=1e-14)


def test_power_series_matches_closed_form():
    z = np.array([0.1, 0.4, 0.8])
    np.testing.assert_allclose(power_series(1.0, 1.0, 2.0, z), -np.log1p(-z) / z, rtol=1e-13)


# parameter families that occur for the sphere-averaged kernels, including the
# integer-difference cases c - a - b in Z handled by logarithmic forms
CASES = [
    (1.75, 2.5, 5.0, 0.95),
    (3.25, 0.5, 1.0, 0.99),
    (2.0, 2.5, 5.0, 0.999),
    (0.5, 1.0, 2.0, 0.97),
    (1.25, 1.5, 3.0, 0.9999),
    (-0.25, 0.5, 1.0, 0.93),
    (2.5, 1.0, 2.0, 0.995),
]


@pytest.mark.parametrize("a, b, c, z", CASES)
def test_against_high_precision_oracle(a, b, c, z):
    assert gauss_hypergeometric(a, b, c, z) == pytest.approx(oracles.hyp2f1(a, b, c, z), rel=1e-11)


@given(
    a=st.floats(-2.0, 4.0),
    b=st.floats(0.2, 4.0),
    c=st.floats(0.6, 6.0),
    z=st.floats(0.0, 0.999),
)
def test_random_parameters_against_oracle(a, b, c, z):
    ref = oracles.hyp2f1(a, b, c, z)
    got = gauss_hypergeometric(a, b, c, z)
    assert got == pytest.approx(ref, rel=1e-8, abs=1e-12 * max(1.0, abs(ref)))


def test_accurate_complement_near_one():
    a, b, c = 1.0, 1.5, 2.0  # c - a - b = -1/2: singular at z = 1
    y = 1e-14
    ref = oracles.hyp2f1(a, b, c, 1 - mpmath.mpf(y))
    assert gauss_hypergeometric(a, b, c, 1 - y, one_minus_z=y) == pytest.approx(ref, rel=1e-12)
