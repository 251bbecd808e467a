import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbmlocal import rng
from fbmlocal.energy import energy_distance, energy_test


def _normal(seed, n, k=1):
    return rng.generator(seed).standard_normal((n, k))


def test_identical_samples_zero():
    a = _normal(1, 50, 3)
    assert energy_distance(a, a) == 0.0


@given(arrays(float, (8, 2), elements=st.floats(-10, 10)), arrays(float, (5, 2), elements=st.floats(-10, 10)))
def test_nonnegative_and_symmetric(a, b):
    d = energy_distance(a, b)
    assert d >= -1e-9
    assert d == pytest.approx(energy_distance(b, a), abs=1e-9)


def test_one_dimensional_closed_form():
    # points {0} and {1}: 2 * 1 - 0 - 0
    assert energy_distance([0.0, 0.0], [1.0, 1.0]) == pytest.approx(2.0)


def test_permutation_statistic_matches_direct():
    a, b = _normal(2, 40, 2), _normal(3, 30, 2) + 0.3
    res = energy_test(a, b, 20, 0)
    assert res.statistic == pytest.approx(energy_distance(a, b), rel=1e-12)
    assert res.null.shape == (20,)
    assert 0 < res.p_value <= 1


def test_same_law_not_significant():
    res = energy_test(_normal(4, 1000), _normal(5, 1000), 200, 1)
    assert res.p_value >= 0.05
    assert res.statistic < res.quantile(0.95)


def test_large_shift_detected():
    a = _normal(6, 200, 2)
    res = energy_test(a, a + 10.0, 1000, 2)
    assert res.statistic > res.quantile(0.999)
    assert res.p_value == pytest.approx(1 / 1001)


def test_deterministic_given_seed():
    a, b = _normal(7, 60), _normal(8, 60)
    r1, r2 = energy_test(a, b, 50, 9), energy_test(a, b, 50, 9)
    np.testing.assert_array_equal(r1.null, r2.null)
    assert r1.ci_halfwidth > 0


def test_errors():
    with pytest.raises(ValueError):
        energy_distance(np.zeros((1, 2)), np.zeros((5, 2)))
    with pytest.raises(ValueError, match="dimension"):
        energy_distance(np.zeros((3, 2)), np.zeros((3, 3)))
