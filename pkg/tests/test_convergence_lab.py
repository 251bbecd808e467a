import logging
import math

import numpy as np
import pytest

from fbmlocal import rng
from fbmlocal.convergence_lab import (
    Ensemble, EnsembleConfig, Envelope, ProbeSet, build_ensemble, check_independent, convergence_curve,
    ensemble_seeds, envelope_ratio, identification_check, modulus_statistics, moment_scaling, path_marginals,
)
from fbmlocal.errors import DomainError

SMALL = EnsembleConfig(n_paths=200, n_steps=512, x_grid=(0.0, 0.5), t_grid=(0.5, 1.0), master_seed=3)


def test_empty_ensemble_errors_downstream():
    e = build_ensemble(0.5, EnsembleConfig(n_paths=0))
    assert e.n_paths == 0
    with pytest.raises(DomainError):
        e.at_probes(ProbeSet.default())
    with pytest.raises(DomainError):
        modulus_statistics(e)
    with pytest.raises(DomainError):
        moment_scaling(e, 2, "time", [0.5], t=0.5)


def test_same_config_identical_ensembles():
    a, b = build_ensemble(0.5, SMALL), build_ensemble(0.5, SMALL)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.seeds == rng.derive_seeds(3, 200)


def test_worker_count_does_not_change_values():
    cfg = EnsembleConfig(n_paths=150, n_steps=256, x_grid=(0.0,), t_grid=(1.0,), master_seed=4)
    one = build_ensemble(0.4, cfg)
    many = build_ensemble(0.4, EnsembleConfig(**{**cfg.__dict__, "workers": 4}))
    np.testing.assert_array_equal(one.values, many.values)


def test_path_regenerated_from_seed_matches_field():
    e = build_ensemble(0.5, SMALL)
    fld = e.field(7)
    assert fld.values.shape == (2, 2)
    np.testing.assert_array_equal(fld.values, e.values[7])
    path = e.path(7)
    assert path.seed == e.seeds[7]


def test_resource_budget_names_dimension():
    huge = EnsembleConfig(n_paths=10**7, x_grid=tuple(np.linspace(-1, 1, 101)), t_grid=(1.0,))
    with pytest.raises(DomainError, match="n_paths"):
        build_ensemble(0.5, huge)


def test_probe_must_be_on_grid():
    e = build_ensemble(0.5, SMALL)
    with pytest.raises(DomainError, match="x=0.25"):
        e.at_probes(ProbeSet(((0.25, 1.0),)))
    assert e.at_probes(ProbeSet.default()).shape == (200, 3)


def test_brownian_mean_local_time_within_three_se():
    cfg = EnsembleConfig(n_paths=2000, n_steps=1024, x_grid=(0.0,), t_grid=(1.0,), master_seed=11)
    v = build_ensemble(0.5, cfg).values[:, 0, 0]
    se = v.std(ddof=1) / math.sqrt(v.size)
    assert abs(v.mean() - math.sqrt(2 / math.pi)) <= 3 * se + 0.01 * math.sqrt(2 / math.pi)


def test_moment_scaling_brownian_slope():
    lags = [2.0**-k for k in range(7, 1, -1)]
    cfg = EnsembleConfig(n_paths=1000, n_steps=1024, x_grid=(0.0,), t_grid=(0.0, *lags), master_seed=5)
    fit = moment_scaling(build_ensemble(0.5, cfg), 2, "time", lags)
    assert fit.slope >= 0.7 and fit.r2 >= 0.95
    slope, intercept, r2 = fit
    assert slope == fit.slope


def test_moment_scaling_space_direction():
    lags = [0.05, 0.1, 0.2, 0.4]
    xs = (0.0, *lags)
    cfg = EnsembleConfig(n_paths=500, n_steps=1024, x_grid=xs, t_grid=(0.0, 1.0), master_seed=6)
    fit = moment_scaling(build_ensemble(0.5, cfg), 2, "space", lags, x=0.0, t=0.0)
    assert fit.slope > 0


def test_moment_scaling_preconditions(caplog):
    e = build_ensemble(0.5, SMALL)
    with pytest.raises(DomainError, match="m must be"):
        moment_scaling(e, 3, "time", [0.5], t=0.5)
    with pytest.raises(DomainError, match="positive"):
        moment_scaling(e, 2, "time", [0.0], t=0.5)
    with pytest.raises(DomainError, match="two lags"):
        moment_scaling(e, 2, "time", [0.5], t=0.5)
    # zero moment at a lag is dropped with a warning
    zero = Ensemble(0.5, EnsembleConfig(n_paths=3, x_grid=(0.0,), t_grid=(0.0, 0.25, 0.5, 1.0)),
                    np.tile(np.array([[[0.0, 0.0, 1.0, 2.0]]]), (3, 1, 1)), [1, 2, 3])
    with caplog.at_level(logging.WARNING):
        fit = moment_scaling(zero, 2, "time", [0.25, 0.5, 1.0])
    assert list(fit.lags) == [0.5, 1.0]
    assert "zero sample moment" in caplog.text


def test_seed_collisions_rejected():
    with pytest.raises(DomainError, match="collide"):
        check_independent([1, 1], 10)
    seeds = ensemble_seeds(1, 4)
    check_independent(seeds, 100)
    with pytest.raises(DomainError, match="collide"):
        convergence_curve(0.6, [0.7], ProbeSet.default(), SMALL, seeds=[5, 5, 6])


def test_convergence_curve_orders_and_null():
    cfg = EnsembleConfig(n_paths=300, n_steps=512, x_grid=(0.0, 0.5), t_grid=(0.5, 1.0), master_seed=8)
    curve = convergence_curve(0.5, [0.8, 0.65], ProbeSet.default(), cfg, n_perm=100)
    assert len(curve.h_values) == len(curve.distances) == len(curve.ci_halfwidths) == 2
    assert all(d >= 0 for d in curve.distances)
    assert curve.distances[0] > curve.distances[1]
    assert curve.null_p >= 0.05
    rows = list(curve.rows())
    assert rows[0][2] == pytest.approx(curve.distances[0] - curve.ci_halfwidths[0])


def test_convergence_curve_same_h_indistinguishable():
    cfg = EnsembleConfig(n_paths=300, n_steps=512, x_grid=(0.0, 0.5), t_grid=(0.5, 1.0), master_seed=9)
    curve = convergence_curve(0.5, [0.5], ProbeSet.default(), cfg, n_perm=100, include_null=False)
    assert curve.p_values[0] >= 0.05


def test_convergence_curve_requires_sorted_h_list():
    with pytest.raises(DomainError, match="sorted"):
        convergence_curve(0.6, [0.62, 0.75], ProbeSet.default(), SMALL)


def test_path_level_observable():
    cfg = EnsembleConfig(n_paths=400, n_steps=256, x_grid=(0.0,), t_grid=(1.0,), master_seed=10)
    m = path_marginals(0.5, cfg, (0.5, 1.0))
    assert m.shape == (400, 2)
    curve = convergence_curve(0.5, [0.9, 0.7], ProbeSet(((0.0, 1.0),)), cfg, n_perm=100, observable="path")
    assert curve.distances[0] > curve.distances[1]
    assert curve.p_values[0] < 0.05


def test_identification_constant_one_window():
    # g = 1 on a window holding the whole path: both sides equal t
    cfg = EnsembleConfig(n_paths=2, n_steps=512, x_grid=tuple(np.round(np.arange(-4, 4.001, 0.01), 10)),
                         t_grid=(1.0,), epsilon=0.02, master_seed=12)
    e = build_ensemble(0.5, cfg)
    fld = e.field(0)
    # trapezoid error only: four grid cells span the kernel support
    assert np.trapezoid(fld.values[:, 0], fld.x_grid) == pytest.approx(1.0, rel=1e-3)


def test_identification_kernel_field_wide_mollifier():
    xs = tuple(np.round(np.arange(-2, 2.0001, 0.01), 10))
    cfg = EnsembleConfig(n_paths=5, n_steps=1024, x_grid=xs, t_grid=(0.5, 1.0), epsilon=0.02, master_seed=13)
    e = build_ensemble(0.5, cfg)
    assert identification_check(e, ProbeSet.default(), [0.4, 0.2]) <= 0.01


def test_identification_preconditions():
    xs = tuple(np.round(np.arange(-2, 2.0001, 0.01), 10))
    e = build_ensemble(0.5, EnsembleConfig(n_paths=1, n_steps=256, x_grid=xs, t_grid=(1.0,)))
    with pytest.raises(DomainError, match="resolution"):
        identification_check(e, ProbeSet(((0.0, 1.0),)), [0.1, 0.01])
    with pytest.raises(DomainError, match="decreasing"):
        identification_check(e, ProbeSet(((0.0, 1.0),)), [0.05, 0.1])


def test_modulus_zero_field():
    e = Ensemble(0.5, EnsembleConfig(n_paths=2, x_grid=(0.0, 0.5, 1.0), t_grid=(0.5, 1.0)),
                 np.zeros((2, 3, 2)), [1, 2])
    assert tuple(modulus_statistics(e)) == (0.0, 0.0)


def test_modulus_envelope_across_neighborhood():
    ts = tuple(np.arange(1, 33) / 32)
    xs = tuple(np.round(np.arange(-1, 1.0001, 1 / 16), 10))
    stats = {}
    for h in (0.45, 0.5, 0.55):
        cfg = EnsembleConfig(n_paths=100, n_steps=1024, x_grid=xs, t_grid=ts, epsilon="step", master_seed=14)
        stats[h] = modulus_statistics(build_ensemble(h, cfg))
    base = stats[0.5]
    env = Envelope.fit(base.time_lags, base.time_osc)
    assert env.exponent > 0
    for s in stats.values():
        assert envelope_ratio(env, s.time_lags, s.time_osc) <= 2.0
