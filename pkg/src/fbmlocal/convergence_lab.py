"""Monte Carlo experiments on ensembles of local-time fields.

An :class:`Ensemble` holds estimated fields of ``n_paths`` independent fBm
paths on a common (x, t) grid.  Path ``r`` is generated from the stream
``derive_seed(master_seed, r)``; paths are processed in fixed chunks and
collected in replica order, so results do not depend on the worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import occupation, rng
from .energy import energy_test
from .errors import DomainError
from .fbm_core import as_hurst
from .path_gen import SamplePath, TimeGrid, sample_paths

log = logging.getLogger(__name__)

MAX_FIELD_BYTES = 2 * 1024**3
CHUNK_PATHS = 64


@dataclass(frozen=True)
class EnsembleConfig:
    n_paths: int = 1000
    horizon: float = 1.0
    n_steps: int = 2048
    method: str = "circulant"
    estimator: str = "kernel"
    epsilon: float | str = "step"
    n_cutoff: float = 200.0
    du: float = 0.05
    x_grid: tuple = (0.0, 0.5)
    t_grid: tuple = (0.5, 1.0)
    master_seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 0:
            raise DomainError(f"n_paths must be a non-negative integer, got {self.n_paths}")
        if self.estimator not in ("kernel", "fourier"):
            raise DomainError(f"estimator must be 'kernel' or 'fourier', got {self.estimator!r}")
        if self.method not in ("circulant", "cholesky"):
            raise DomainError(f"method must be 'circulant' or 'cholesky', got {self.method!r}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        object.__setattr__(self, "x_grid", tuple(float(x) for x in self.x_grid))
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        rng.check_seed(self.master_seed)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.horizon, self.n_steps)


@dataclass
class Ensemble:
    """Sampled law of the estimated local time at one Hurst value.

    ``values[r, i, j]`` is the estimate for path ``r`` at ``(x_grid[i], t_grid[j])``.
    """

    hurst: float
    config: EnsembleConfig
    values: np.ndarray
    seeds: list
    epsilon: float | None = None
    fell_back: bool = False

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def master_seed(self) -> int:
        return self.config.master_seed

    @property
    def x_grid(self) -> np.ndarray:
        return np.asarray(self.config.x_grid)

    @property
    def t_grid(self) -> np.ndarray:
        return np.asarray(self.config.t_grid)

    def path(self, r: int) -> SamplePath:
        """Regenerate path ``r`` from its seed."""
        vals, fell_back = sample_paths(self.hurst, self.config.grid, [self.seeds[r]], self.config.method)
        return SamplePath(self.config.grid, vals[0], self.hurst, self.seeds[r], self.config.method, fell_back)

    def field(self, r: int) -> occupation.LocalTimeField:
        params = {"epsilon": self.epsilon} if self.config.estimator == "kernel" else {
            "n_cutoff": self.config.n_cutoff, "du": self.config.du}
        return occupation.LocalTimeField(
            self.x_grid, self.t_grid, self.values[r], self.config.estimator, params,
            self.seeds[r], self.hurst, self.config.grid,
        )

    def at_probes(self, probes: "ProbeSet") -> np.ndarray:
        """(n_paths, k) matrix of estimates at the probe points."""
        if self.n_paths == 0:
            raise DomainError("ensemble is empty")
        cols = [self.values[:, _index(self.x_grid, x, "x"), _index(self.t_grid, t, "t")] for x, t in probes.points]
        return np.stack(cols, axis=1)


@dataclass(frozen=True)
class ProbeSet:
    points: tuple

    def __post_init__(self):
        pts = tuple((float(x), float(t)) for x, t in self.points)
        if not pts:
            raise DomainError("a probe set needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return len(self.points)

    @classmethod
    def default(cls, T: float = 1.0) -> "ProbeSet":
        return cls(((0.0, T / 2), (0.0, T), (0.5, T)))


def _index(grid: np.ndarray, value: float, name: str) -> int:
    hits = np.flatnonzero(np.isclose(grid, value, rtol=0.0, atol=1e-12))
    if hits.size == 0:
        raise DomainError(f"{name}={value} is not on the ensemble's {name} grid")
    return int(hits[0])


def _chunk_values(h, cfg: EnsembleConfig, seeds, eps):
    paths, fell_back = sample_paths(h, cfg.grid, seeds, cfg.method)
    if cfg.estimator == "kernel":
        vals = occupation.kernel_values(paths, cfg.grid, cfg.x_grid, cfg.t_grid, eps)
    else:
        vals = np.empty((len(seeds), len(cfg.x_grid), len(cfg.t_grid)))
        for i, p in enumerate(paths):
            occupation.check_fourier_params(cfg.n_cutoff, cfg.du, cfg.x_grid, p)
            vals[i] = occupation.fourier_values(p, cfg.grid, cfg.x_grid, cfg.t_grid, cfg.n_cutoff, cfg.du)
    return vals, fell_back


def build_ensemble(h, config: EnsembleConfig) -> Ensemble:
    h = as_hurst(h)
    cfg = config
    grid = cfg.grid
    n_bytes = 8 * cfg.n_paths * len(cfg.x_grid) * len(cfg.t_grid)
    if n_bytes > MAX_FIELD_BYTES:
        raise DomainError(
            f"ensemble needs {n_bytes / 1e9:.2f} GB; reduce n_paths, x_grid or t_grid "
            f"(n_paths={cfg.n_paths}, n_x={len(cfg.x_grid)}, n_t={len(cfg.t_grid)})"
        )
    if cfg.method == "cholesky" and cfg.n_steps > 4096:
        raise DomainError(f"n_steps={cfg.n_steps} exceeds the Cholesky budget of 4096")
    for t in cfg.t_grid:
        grid.index_of(t)
    eps = occupation.resolve_epsilon(cfg.epsilon, h, grid) if cfg.estimator == "kernel" else None
    seeds = rng.derive_seeds(cfg.master_seed, cfg.n_paths)
    chunks = [seeds[i:i + CHUNK_PATHS] for i in range(0, len(seeds), CHUNK_PATHS)]
    shape = (0, len(cfg.x_grid), len(cfg.t_grid))
    if not chunks:
        return Ensemble(h, cfg, np.zeros(shape), [], eps)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda s: _chunk_values(h, cfg, s, eps), chunks))
    else:
        results = [_chunk_values(h, cfg, s, eps) for s in chunks]
    values = np.concatenate([r[0] for r in results])
    fell_back = any(r[1] for r in results)
    return Ensemble(h, cfg, values, seeds, eps, fell_back)


# --- moment scaling ---------------------------------------------------------

@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r2: float
    lags: np.ndarray
    moments: np.ndarray

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r2))


def _fit_loglog(lags, moments) -> ScalingFit:
    lags = np.asarray(lags, dtype=float)
    moments = np.asarray(moments, dtype=float)
    keep = moments > 0
    if not np.all(keep):
        log.warning("dropping lags with zero sample moment: %s", lags[~keep].tolist())
    lags, moments = lags[keep], moments[keep]
    if lags.size < 2:
        raise DomainError("need at least two lags with positive moments for a slope")
    fit = stats.linregress(np.log(lags), np.log(moments))
    return ScalingFit(float(fit.slope), float(fit.intercept), float(fit.rvalue**2), lags, moments)


def moment_scaling(e: Ensemble, m: int, direction: str, lags, x: float = 0.0, t: float = 0.0,
                   k: float | None = None, h: float | None = None) -> ScalingFit:
    """Log-log regression of sample m-th absolute moments of local-time increments.

    ``direction='time'``: increments L(x, t + lag) - L(x, t).
    ``direction='space'``: rectangle increments over [x, x + lag] x [t, t + h]
    (``h`` defaults to the last grid time minus ``t``).
    """
    if m not in (2, 4):
        raise DomainError(f"m must be 2 or 4, got {m}")
    if e.n_paths == 0:
        raise DomainError("ensemble is empty")
    lags = np.asarray(lags, dtype=float)
    if np.any(lags <= 0):
        raise DomainError("lags must be positive")
    xs, ts, v = e.x_grid, e.t_grid, e.values
    moments = []
    if direction == "time":
        i = _index(xs, x, "x")
        j0 = _index(ts, t, "t")
        for lag in lags:
            j1 = _index(ts, t + lag, "t")
            inc = v[:, i, j1] - v[:, i, j0]
            moments.append(np.mean(np.abs(inc) ** m))
    elif direction == "space":
        if h is None:
            h = float(ts[-1]) - t
        i0 = _index(xs, x, "x")
        j0, j1 = _index(ts, t, "t"), _index(ts, t + h, "t")
        for lag in lags:
            i1 = _index(xs, x + lag, "x")
            inc = v[:, i1, j1] - v[:, i1, j0] - v[:, i0, j1] + v[:, i0, j0]
            moments.append(np.mean(np.abs(inc) ** m))
    else:
        raise DomainError(f"direction must be 'time' or 'space', got {direction!r}")
    return _fit_loglog(lags, moments)


# --- convergence curve ---------------------------------------------------------

@dataclass
class ConvergenceCurve:
    h_center: float
    h_values: list
    distances: list
    ci_halfwidths: list
    p_values: list
    kendall_tau: float = float("nan")
    kendall_p: float = float("nan")
    null_distance: float = float("nan")
    null_p: float = float("nan")
    seeds: dict = field(default_factory=dict)

    def rows(self):
        for h, d, w in zip(self.h_values, self.distances, self.ci_halfwidths):
            yield h, d, d - w, d + w


def path_marginals(h, cfg: EnsembleConfig, times) -> np.ndarray:
    """(n_paths, len(times)) matrix of path values, same seeds as the ensemble."""
    grid = cfg.grid
    idx = [grid.index_of(t) for t in times]
    seeds = rng.derive_seeds(cfg.master_seed, cfg.n_paths)
    out = []
    for i in range(0, len(seeds), CHUNK_PATHS):
        vals, _ = sample_paths(h, grid, seeds[i:i + CHUNK_PATHS], cfg.method)
        out.append(vals[:, idx])
    return np.concatenate(out)


def ensemble_seeds(master_seed: int, count: int) -> list[int]:
    """Independent master seeds for ``count`` ensembles of one experiment."""
    return [rng.derive_seed(master_seed ^ 0x5EED5EED5EED5EED, i) for i in range(count)]


def check_independent(master_seeds, n_paths: int) -> None:
    """Raise if two ensembles would share a master seed or any path seed."""
    if len(set(master_seeds)) != len(master_seeds):
        raise DomainError("ensemble seeds collide: master seeds repeat")
    seen = set()
    for s in master_seeds:
        derived = set(rng.derive_seeds(s, n_paths))
        if seen & derived:
            raise DomainError("ensemble seeds collide: derived path seeds overlap")
        seen |= derived


def convergence_curve(h_center, h_list, probes: ProbeSet, config: EnsembleConfig,
                      seeds=None, n_perm: int = 200, perm_seed: int = 0,
                      observable: str = "localtime", include_null: bool = True) -> ConvergenceCurve:
    """Energy distance between the law at each H in ``h_list`` and at ``h_center``.

    ``seeds`` lists master seeds: one for the center ensemble, one per entry
    of ``h_list`` and, if ``include_null``, one for a second center ensemble.
    The kernel bandwidth is resolved once at ``h_center`` and shared.
    """
    h0 = as_hurst(h_center)
    h_list = [as_hurst(h) for h in h_list]
    gaps = [abs(h - h0) for h in h_list]
    if any(b > a for a, b in zip(gaps, gaps[1:])):
        raise DomainError("h_list must be sorted by |h - h_center| descending")
    n_ens = 1 + len(h_list) + (1 if include_null else 0)
    if seeds is None:
        seeds = ensemble_seeds(config.master_seed, n_ens)
    seeds = [int(s) for s in seeds]
    if len(seeds) != n_ens:
        raise DomainError(f"need {n_ens} ensemble seeds, got {len(seeds)}")
    check_independent(seeds, config.n_paths)
    if config.estimator == "kernel":
        eps = occupation.resolve_epsilon(config.epsilon, h0, config.grid)
        config = replace(config, epsilon=eps)

    def sample(h, s):
        cfg = replace(config, master_seed=s)
        if observable == "path":
            return path_marginals(h, cfg, (cfg.horizon / 2, cfg.horizon))
        return build_ensemble(h, cfg).at_probes(probes)

    center = sample(h0, seeds[0])
    curve = ConvergenceCurve(h0, [], [], [], [], seeds={"center": seeds[0]})
    for i, h in enumerate(h_list):
        other = sample(h, seeds[1 + i])
        res = energy_test(other, center, n_perm, rng.derive_seed(perm_seed, i))
        curve.h_values.append(h)
        curve.distances.append(res.statistic)
        curve.ci_halfwidths.append(res.ci_halfwidth)
        curve.p_values.append(res.p_value)
        curve.seeds[str(h)] = seeds[1 + i]
    if len(h_list) >= 2:
        curve.kendall_tau, curve.kendall_p = kendall_trend(curve)
    if include_null:
        twin = sample(h0, seeds[-1])
        res = energy_test(twin, center, n_perm, rng.derive_seed(perm_seed, 10_000))
        curve.null_distance, curve.null_p = res.statistic, res.p_value
        curve.seeds["null"] = seeds[-1]
    return curve


def kendall_trend(curve: ConvergenceCurve):
    """One-sided Kendall test that distance increases with |h - h_center|."""
    gaps = np.abs(np.asarray(curve.h_values) - curve.h_center)
    res = stats.kendalltau(gaps, curve.distances, alternative="greater")
    return float(res.statistic), float(res.pvalue)


# --- identification ---------------------------------------------------------------

def identification_check(e: Ensemble, probes: ProbeSet, eps_list, return_details: bool = False):
    """Max relative gap between smoothed field and smoothed occupation.

    For each path, probe (x, t) and eps: compare the trapezoid quadrature of
    int g_eps(u, x) L(u, t) du over the field's x grid with the direct time
    integral int_0^t g_eps(X_s, x) ds.  The gap is relative to the largest
    value of the direct integral over the x grid at that (path, t, eps).
    """
    eps_list = [float(s) for s in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise DomainError("eps_list must be strictly decreasing")
    xs = e.x_grid
    if xs.size < 2:
        raise DomainError("identification needs a spatial grid")
    dx = float(np.min(np.diff(xs)))
    if eps_list[-1] < 2.0 * dx:
        raise DomainError(f"eps={eps_list[-1]} is below the spatial resolution (2 dx = {2 * dx})")
    for x, _ in probes.points:
        if x - eps_list[0] < xs[0] or x + eps_list[0] > xs[-1]:
            raise DomainError(f"probe x={x} with eps={eps_list[0]} leaves the x grid")
    worst, where = 0.0, None
    for r in range(e.n_paths):
        path = e.path(r)
        for eps in eps_list:
            for x, t in probes.points:
                j = _index(e.t_grid, t, "t")
                lhs = np.trapezoid(occupation.PHI.scaled(xs, x, eps) * e.values[r, :, j], xs)
                rhs = occupation.occupation_integral(path, t, lambda u: occupation.PHI.scaled(u, x, eps))
                i_t = path.grid.index_of(t)
                direct = occupation.kernel_values(path.values[None, :], path.grid, xs, [t], eps)[0, :, 0] \
                    if i_t > 0 else np.zeros(1)
                scale = max(float(direct.max()), np.finfo(float).tiny)
                gap = abs(lhs - rhs) / scale
                if gap > worst:
                    worst, where = gap, {"path": r, "x": x, "t": t, "eps": eps, "smoothed": lhs, "direct": rhs}
    return (worst, where) if return_details else worst


# --- modulus statistics -------------------------------------------------------------

@dataclass
class ModulusStats:
    hurst: float
    time_lags: np.ndarray
    time_osc: np.ndarray
    space_lags: np.ndarray
    space_osc: np.ndarray

    @property
    def max_time_osc(self) -> float:
        return float(self.time_osc.max(initial=0.0))

    @property
    def max_space_osc(self) -> float:
        return float(self.space_osc.max(initial=0.0))

    def __iter__(self):
        return iter((self.max_time_osc, self.max_space_osc))


def _dyadic_offsets(n: int) -> list[int]:
    out, k = [], 1
    while k < n:
        out.append(k)
        k *= 2
    return out


def modulus_statistics(e: Ensemble) -> ModulusStats:
    """Maxima of |increments| over dyadic index lags in time and in space.

    Time: L(x, t_{j+d}) - L(x, t_j); space: L(x_{i+d}, t) - L(x_i, t), which
    is the rectangle increment over [x_i, x_{i+d}] x [0, t] since L(., 0) = 0.
    """
    if e.n_paths == 0:
        raise DomainError("ensemble is empty")
    v = e.values
    xs, ts = e.x_grid, e.t_grid
    t_off = _dyadic_offsets(ts.size)
    x_off = _dyadic_offsets(xs.size)
    t_lags = np.array([float(np.min(ts[d:] - ts[:-d])) for d in t_off])
    x_lags = np.array([float(np.min(xs[d:] - xs[:-d])) for d in x_off])
    t_osc = np.array([float(np.max(np.abs(v[:, :, d:] - v[:, :, :-d]))) for d in t_off])
    x_osc = np.array([float(np.max(np.abs(v[:, d:, :] - v[:, :-d, :]))) for d in x_off])
    return ModulusStats(e.hurst, t_lags, t_osc, x_lags, x_osc)


@dataclass
class Envelope:
    """C * lag^exponent, with C raised so the fitted data lie on or under it."""

    coef: float
    exponent: float

    def __call__(self, lag):
        return self.coef * np.asarray(lag, dtype=float) ** self.exponent

    @classmethod
    def fit(cls, lags, osc) -> "Envelope":
        fit = _fit_loglog(lags, osc)
        coef = float(np.max(fit.moments / fit.lags**fit.slope))
        return cls(coef, fit.slope)


def envelope_ratio(env: Envelope, lags, osc) -> float:
    """Largest osc / envelope over the lags (<= 1 means inside the envelope)."""
    lags = np.asarray(lags, dtype=float)
    osc = np.asarray(osc, dtype=float)
    return float(np.max(osc / env(lags)))
