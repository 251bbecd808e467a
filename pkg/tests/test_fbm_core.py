import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fbmlocal.errors import DomainError
from fbmlocal.fbm_core import (
    BetaGamma, HurstParam, IncrementQuad, consecutive_correlation, correlation_beta_gamma, covariance,
    disjoint_increment_correlation, gaussian_even_moment, increment_moment, shifted_power_diff,
)

hursts = st.floats(0.01, 0.99)
times = st.floats(0.0, 10.0)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.2, float("nan")])
def test_hurst_outside_open_interval_rejected(bad):
    with pytest.raises(DomainError, match="hurst"):
        HurstParam(bad)


def test_covariance_brownian_case_is_min():
    assert covariance(0.5, 0.3, 0.7) == pytest.approx(0.3, abs=1e-15)
    assert covariance(0.5, 2.0, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_covariance_at_origin_and_diagonal():
    assert covariance(0.3, 0.0, 1.0) == 0.0
    assert covariance(0.8, 2.0, 2.0) == pytest.approx(2.0**1.6, rel=1e-14)


def test_covariance_rejects_negative_time():
    with pytest.raises(DomainError):
        covariance(0.5, -1.0, 1.0)


@given(hursts, times, times)
def test_covariance_symmetric(h, s, t):
    assert covariance(h, s, t) == covariance(h, t, s)


@given(hursts, st.lists(st.floats(0.01, 5.0), min_size=2, max_size=6, unique=True))
def test_covariance_matrix_positive_semidefinite(h, ts):
    ts = np.array(sorted(ts))
    if np.min(np.diff(ts)) < 1e-3:
        return
    cov = covariance(h, ts[:, None], ts[None, :])
    eig = np.linalg.eigvalsh(cov)
    assert eig.min() > -1e-10 * eig.max()


def test_even_moments_exact():
    assert [gaussian_even_moment(m) for m in (1, 2, 3, 4)] == [1.0, 3.0, 15.0, 105.0]
    assert gaussian_even_moment(12) == pytest.approx(math.prod(range(1, 24, 2)), rel=1e-12)
    with pytest.raises(DomainError):
        gaussian_even_moment(0)


def test_increment_moment_examples():
    assert increment_moment(0.5, 1, 0.0, 1.0) == pytest.approx(1.0)
    assert increment_moment(0.25, 2, 1.0, 5.0) == pytest.approx(3.0 * 4.0)


def test_disjoint_correlation_brownian_is_exact_zero():
    assert disjoint_increment_correlation(0.5, IncrementQuad(0.0, 1.0, 2.0, 3.0)) == 0.0
    assert correlation_beta_gamma(0.5, 3.0, 2.0) == 0.0


def test_consecutive_unit_correlation_closed_form():
    for h in (0.2, 0.5, 0.7):
        assert consecutive_correlation(h, 1.0) == pytest.approx(2.0 ** (2 * h - 1) - 1.0, abs=1e-14)


def test_quad_validation():
    with pytest.raises(DomainError):
        IncrementQuad(0.0, 1.0, 0.5, 2.0)
    with pytest.raises(DomainError):
        IncrementQuad(1.0, 1.0, 2.0, 3.0)


@given(hursts, st.floats(0.0, 3.0), st.floats(0.01, 3.0), st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_two_parametrizations_agree(h, s, length, gap, length2):
    q = IncrementQuad(s, s + length, s + length + gap, s + length + gap + length2)
    direct = disjoint_increment_correlation(h, q)
    scaled = correlation_beta_gamma(h, q.to_beta_gamma())
    assert scaled == pytest.approx(direct, abs=1e-9)


@given(hursts, st.floats(0.0, 1e4), st.floats(1e-4, 1e4))
def test_correlation_is_a_correlation(h, beta, gamma):
    rho = correlation_beta_gamma(h, beta, gamma)
    assert -1.0 - 1e-12 <= rho <= 1.0 + 1e-12


@given(st.floats(0.51, 0.99), st.floats(0.0, 1e3), st.floats(1e-3, 1e3))
def test_sign_follows_hurst(h, beta, gamma):
    assert correlation_beta_gamma(h, beta, gamma) >= -1e-15
    assert correlation_beta_gamma(1.0 - h, beta, gamma) <= 1e-15


def test_correlation_vectorized_matches_scalar():
    b = np.array([0.0, 0.5, 10.0])
    g = np.array([0.1, 1.0, 50.0])
    vec = correlation_beta_gamma(0.7, b, g)
    assert vec.shape == (3,)
    for i in range(3):
        assert vec[i] == correlation_beta_gamma(0.7, BetaGamma(b[i], g[i]))


def test_shifted_power_diff_small_increment():
    # (1 + 1e-12)^0.6 - 1 ~ 0.6e-12, lost entirely by naive subtraction at this scale
    assert shifted_power_diff(1e6, 1e-6, 0.6) == pytest.approx(1e6**0.6 * 0.6e-12, rel=1e-9)
    assert shifted_power_diff(0.0, 2.0, 0.5) == pytest.approx(math.sqrt(2.0))
