import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from fbmlocal import rng
from fbmlocal.errors import DomainError
from fbmlocal.fbm_core import covariance
from fbmlocal.path_gen import (
    SamplePath, TimeGrid, generate, generate_cholesky, generate_circulant, increment_autocovariance, sample_paths,
)


def test_derived_seeds_distinct_and_stable():
    seeds = rng.derive_seeds(42, 10_000)
    assert len(set(seeds)) == 10_000
    assert seeds[:3] == rng.derive_seeds(42, 3)
    assert rng.derive_seed(42, 5) == seeds[5]
    assert rng.derive_seeds(42, 2, offset=5) == seeds[5:7]


def test_splitmix_reference_value():
    # first output of the reference SplitMix64 generator seeded with 0
    assert rng.splitmix64(0) == 0xE220A8397B1DCDAF


def test_seed_range():
    with pytest.raises(ValueError):
        rng.check_seed(-1)
    with pytest.raises(ValueError):
        rng.check_seed(2**64)


def test_uniforms_open_interval_and_normals_gaussian():
    u = rng.uniforms(7, 100_000)
    assert u.min() > 0.0 and u.max() < 1.0
    z = rng.normals(7, 100_000)
    assert stats.kstest(z, "norm").pvalue > 1e-3
    np.testing.assert_array_equal(z, rng.normals(7, 100_000))


@given(st.integers(0, 2**64 - 1), st.integers(1, 64))
def test_stream_prefix_property(seed, n):
    np.testing.assert_array_equal(rng.uniforms(seed, n), rng.uniforms(seed, 64)[:n])


def test_time_grid():
    g = TimeGrid(2.0, 8)
    assert g.dt == 0.25
    assert g.index_of(1.5) == 6
    with pytest.raises(DomainError):
        g.index_of(0.3)
    with pytest.raises(DomainError):
        TimeGrid(1.0, 0)


def test_sample_path_invariants(tmp_path):
    g = TimeGrid(1.0, 4)
    with pytest.raises(DomainError):
        SamplePath(g, np.ones(5), 0.5, 1)
    with pytest.raises(DomainError):
        SamplePath(g, np.zeros(4), 0.5, 1)
    p = generate(0.6, g, 3)
    p.to_csv(tmp_path / "p.csv")
    rows = (tmp_path / "p.csv").read_text().splitlines()
    assert rows[0] == "t,value" and len(rows) == 6
    assert [float(v) for v in rows[-1].split(",")] == [1.0, p.values[-1]]


def test_fgn_autocovariance_brownian_is_white():
    acov = increment_autocovariance(0.5, 5, 0.1)
    np.testing.assert_allclose(acov, [0.1, 0, 0, 0, 0, 0], atol=1e-15)


def test_same_seed_same_path():
    g = TimeGrid(1.0, 256)
    a, b = generate(0.3, g, 99), generate(0.3, g, 99)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.values[0] == 0.0


def test_circulant_needs_power_of_two():
    with pytest.raises(DomainError, match="power of two"):
        generate_circulant(0.5, TimeGrid(1.0, 100), 1)


def test_cholesky_budget():
    with pytest.raises(DomainError, match="Cholesky"):
        generate_cholesky(0.5, TimeGrid(1.0, 8192), 1)


@pytest.mark.parametrize("method", ["cholesky", "circulant"])
@pytest.mark.parametrize("h", [0.2, 0.5, 0.8])
def test_empirical_covariance_matches(method, h):
    g = TimeGrid(1.0, 64)
    vals, fell_back = sample_paths(h, g, rng.derive_seeds(5, 4000), method)
    assert not fell_back
    idx = [8, 32, 64]
    emp = np.cov(vals[:, idx].T, bias=True) + np.outer(vals[:, idx].mean(0), vals[:, idx].mean(0))
    t = g.points[idx]
    exact = covariance(h, t[:, None], t[None, :])
    # standard error of a second moment with 4000 paths is about sqrt(2/4000) relative
    np.testing.assert_allclose(emp, exact, atol=5 * np.sqrt(2 / 4000) * exact.max())


def test_hurst_recovered_from_increment_variance():
    g = TimeGrid(1.0, 1024)
    vals, _ = sample_paths(0.7, g, rng.derive_seeds(8, 200))
    lags = np.array([1, 2, 4, 8, 16, 32])
    v = [np.mean((vals[:, k:] - vals[:, :-k]) ** 2) for k in lags]
    slope = np.polyfit(np.log(lags * g.dt), np.log(v), 1)[0]
    assert slope / 2 == pytest.approx(0.7, abs=0.02)
