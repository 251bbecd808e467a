"""Strict JSON experiment configs, one dataclass per CLI command.

A config file is a JSON object with ``schema_version`` plus any subset of
the command's fields; missing fields take the defaults below and unknown
keys are rejected.  :meth:`validate` checks every field against the
preconditions of the library call it feeds, before any compute starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from . import rng
from .convergence_lab import check_independent
from .theory_checks import DEFAULT_SUITE

SCHEMA_VERSION = 1
MAX_CHOLESKY_STEPS = 4096


class ConfigError(ValueError):
    """Invalid config; the message starts with the offending field name."""

    def __init__(self, name: str, msg: str):
        super().__init__(f"config field '{name}': {msg}")
        self.field = name


# --- field checks --------------------------------------------------------

def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (_is_int(v) or isinstance(v, float)) and math.isfinite(v)


def _int(name, v, lo=None, hi=None):
    if not _is_int(v):
        raise ConfigError(name, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(name, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(name, f"must be <= {hi}, got {v}")
    return v


def _pos(name, v):
    if not _is_num(v) or v <= 0:
        raise ConfigError(name, f"expected a positive number, got {v!r}")
    return float(v)


def _hurst(name, v):
    if not _is_num(v) or not 0.0 < v < 1.0:
        raise ConfigError(name, f"hurst must lie strictly inside (0, 1), got {v!r}")
    return float(v)


def _seed(name, v):
    if not _is_int(v) or not 0 <= v < 2**64:
        raise ConfigError(name, f"seed must be an integer in [0, 2^64), got {v!r}")
    return v


def _choice(name, v, options):
    if v not in options:
        raise ConfigError(name, f"must be one of {list(options)}, got {v!r}")
    return v


def _list(name, v, min_len=1):
    if not isinstance(v, list) or len(v) < min_len:
        raise ConfigError(name, f"expected a list with at least {min_len} entries, got {v!r}")
    return v


def _epsilon(name, v):
    if isinstance(v, str):
        return _choice(name, v, ("step", "silverman"))
    return _pos(name, v)


def _on_grid(name, t, horizon, n_steps):
    k = t / horizon * n_steps
    if not (0.0 <= t <= horizon) or abs(k - round(k)) > 1e-9 * max(1.0, k):
        raise ConfigError(name, f"time {t} is not a point of the {n_steps}-step grid on [0, {horizon}]")


def _grid_checks(c):
    _pos("horizon", c.horizon)
    _int("n_steps", c.n_steps, lo=1)
    _choice("method", c.method, ("circulant", "cholesky"))
    if c.method == "cholesky" and c.n_steps > MAX_CHOLESKY_STEPS:
        raise ConfigError("n_steps", f"Cholesky supports at most {MAX_CHOLESKY_STEPS} steps, got {c.n_steps}")
    if c.method == "circulant" and c.n_steps & (c.n_steps - 1):
        raise ConfigError("n_steps", f"circulant method needs a power of two, got {c.n_steps}")


def _estimator_checks(c, x_extent):
    _choice("estimator", c.estimator, ("kernel", "fourier"))
    _epsilon("epsilon", c.epsilon)
    _pos("n_cutoff", c.n_cutoff)
    _pos("du", c.du)
    if c.estimator == "fourier" and c.du > math.pi / (4.0 * x_extent if x_extent > 0 else 1.0):
        raise ConfigError("du", f"du={c.du} exceeds pi / (4 max|x|) = {math.pi / (4.0 * x_extent)}")


# --- configs --------------------------------------------------------------

@dataclass
class SimulateConfig:
    hurst: float = 0.7
    horizon: float = 1.0
    n_steps: int = 1024
    method: str = "circulant"
    n_paths: int = 2000
    export_paths: int = 3
    master_seed: int = 1
    z_max: float = 4.0

    def validate(self):
        _hurst("hurst", self.hurst)
        _grid_checks(self)
        _int("n_paths", self.n_paths, lo=3)
        _int("export_paths", self.export_paths, lo=0, hi=self.n_paths)
        _seed("master_seed", self.master_seed)
        _pos("z_max", self.z_max)


@dataclass
class LocaltimeConfig:
    hurst: float = 0.5
    horizon: float = 1.0
    n_steps: int = 2048
    method: str = "circulant"
    estimator: str = "kernel"
    epsilon: float | str = "step"
    n_cutoff: float = 200.0
    du: float = 0.05
    x_min: float = -2.0
    x_max: float = 2.0
    dx: float = 0.01
    t_grid: list = field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0])
    n_paths: int = 10_000
    master_seed: int = 1
    mean_tol: float = 0.03
    mass_tol: float = 0.02

    def validate(self):
        _hurst("hurst", self.hurst)
        _grid_checks(self)
        for name in ("x_min", "x_max"):
            if not _is_num(getattr(self, name)):
                raise ConfigError(name, f"expected a number, got {getattr(self, name)!r}")
        if not self.x_min < 0.0 < self.x_max:
            raise ConfigError("x_min", f"need x_min < 0 < x_max, got [{self.x_min}, {self.x_max}]")
        _pos("dx", self.dx)
        _estimator_checks(self, max(abs(self.x_min), abs(self.x_max)))
        ts = _list("t_grid", self.t_grid)
        for i, t in enumerate(ts):
            if not _is_num(t) or t <= 0:
                raise ConfigError(f"t_grid[{i}]", f"expected a positive time, got {t!r}")
            _on_grid(f"t_grid[{i}]", t, self.horizon, self.n_steps)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("t_grid", "times must be strictly increasing")
        _int("n_paths", self.n_paths, lo=2)
        _seed("master_seed", self.master_seed)
        _pos("mean_tol", self.mean_tol)
        _pos("mass_tol", self.mass_tol)

    @property
    def x_grid(self) -> list[float]:
        n = int(round((self.x_max - self.x_min) / self.dx))
        return [round(self.x_min + i * self.dx, 12) for i in range(n + 1)]


@dataclass
class VerifyConfig:
    seed: int = 0
    variance_dims: list = field(default_factory=lambda: list(DEFAULT_SUITE["variance_dims"]))
    variance_trials: int = DEFAULT_SUITE["variance_trials"]
    moment_a: list = field(default_factory=lambda: list(DEFAULT_SUITE["moment_a"]))
    moment_alpha: list = field(default_factory=lambda: list(DEFAULT_SUITE["moment_alpha"]))
    sigma: dict = field(default_factory=lambda: dict(DEFAULT_SUITE["sigma"]))
    det_concave_h: list = field(default_factory=lambda: list(DEFAULT_SUITE["det_concave_h"]))
    det_m: list = field(default_factory=lambda: list(DEFAULT_SUITE["det_m"]))
    det_budget: int = DEFAULT_SUITE["det_budget"]
    det_neighborhoods: list = field(default_factory=lambda: list(DEFAULT_SUITE["det_neighborhoods"]))
    det_eta: float = DEFAULT_SUITE["det_eta"]
    det_neighborhood_m: int = DEFAULT_SUITE["det_neighborhood_m"]
    corr_h0: float = DEFAULT_SUITE["corr_h0"]
    corr_d: list = field(default_factory=lambda: list(DEFAULT_SUITE["corr_d"]))
    corr_budget: int = DEFAULT_SUITE["corr_budget"]
    convexity_h: list = field(default_factory=lambda: list(DEFAULT_SUITE["convexity_h"]))
    convexity_trials: int = DEFAULT_SUITE["convexity_trials"]

    def validate(self):
        _seed("seed", self.seed)
        for i, d in enumerate(_list("variance_dims", self.variance_dims)):
            _int(f"variance_dims[{i}]", d, lo=1)
        _int("variance_trials", self.variance_trials, lo=1)
        for i, a in enumerate(_list("moment_a", self.moment_a)):
            _pos(f"moment_a[{i}]", a)
        for i, a in enumerate(_list("moment_alpha", self.moment_alpha)):
            if not _is_num(a) or not 0.0 < a < 2.0:
                raise ConfigError(f"moment_alpha[{i}]", f"must lie in (0, 2), got {a!r}")
        if not isinstance(self.sigma, dict) or set(self.sigma) != {"h0", "eta", "delta", "T"}:
            raise ConfigError("sigma", "expected an object with keys h0, eta, delta, T")
        s = self.sigma
        _hurst("sigma.h0", s["h0"])
        _pos("sigma.eta", s["eta"])
        _pos("sigma.delta", s["delta"])
        _pos("sigma.T", s["T"])
        if (s["h0"] + s["eta"]) * (1 + 2 * s["delta"]) >= 1.0:
            raise ConfigError("sigma", "need (h0 + eta)(1 + 2 delta) < 1 for a finite integral")
        for i, h in enumerate(_list("det_concave_h", self.det_concave_h)):
            _hurst(f"det_concave_h[{i}]", h)
            if h > 0.5:
                raise ConfigError(f"det_concave_h[{i}]", f"the 2^(-3m) bound needs hurst <= 1/2, got {h}")
        for i, m in enumerate(_list("det_m", self.det_m)):
            _int(f"det_m[{i}]", m, lo=1)
        _int("det_budget", self.det_budget, lo=1)
        _pos("det_eta", self.det_eta)
        for i, h in enumerate(_list("det_neighborhoods", self.det_neighborhoods)):
            _hurst(f"det_neighborhoods[{i}]", h)
            if not (0.0 < h - self.det_eta and h + self.det_eta < 1.0):
                raise ConfigError(f"det_neighborhoods[{i}]", "neighborhood leaves (0, 1)")
        _int("det_neighborhood_m", self.det_neighborhood_m, lo=1)
        _hurst("corr_h0", self.corr_h0)
        for i, d in enumerate(_list("corr_d", self.corr_d, 2)):
            _pos(f"corr_d[{i}]", d)
            _hurst(f"corr_d[{i}]", self.corr_h0 + d)
        _int("corr_budget", self.corr_budget, lo=1)
        for i, h in enumerate(_list("convexity_h", self.convexity_h)):
            _hurst(f"convexity_h[{i}]", h)
            if h <= 0.5:
                raise ConfigError(f"convexity_h[{i}]", f"the inequality is stated for hurst > 1/2, got {h}")
        _int("convexity_trials", self.convexity_trials, lo=1)

    def suite(self) -> dict:
        d = asdict(self)
        d.pop("seed")
        return d


@dataclass
class ScalingConfig:
    hurst_values: list = field(default_factory=lambda: [0.3, 0.5, 0.7])
    m: int = 2
    direction: str = "time"
    lags: list = field(default_factory=lambda: [2.0**-k for k in range(8, 1, -1)])
    x: float = 0.0
    t0: float = 0.0
    window: float = 1.0
    horizon: float = 1.0
    n_steps: int = 2048
    method: str = "circulant"
    estimator: str = "kernel"
    epsilon: float | str = "step"
    n_cutoff: float = 200.0
    du: float = 0.05
    n_paths: int = 5000
    master_seed: int = 1
    slope_tol: float = 0.3
    r2_min: float = 0.95

    def validate(self):
        hs = _list("hurst_values", self.hurst_values)
        for i, h in enumerate(hs):
            _hurst(f"hurst_values[{i}]", h)
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ConfigError("hurst_values", "values must be strictly increasing")
        _choice("m", self.m, (2, 4))
        _choice("direction", self.direction, ("time", "space"))
        _grid_checks(self)
        lags = _list("lags", self.lags, 2)
        for i, lag in enumerate(lags):
            _pos(f"lags[{i}]", lag)
        if not _is_num(self.x):
            raise ConfigError("x", f"expected a number, got {self.x!r}")
        if not _is_num(self.t0) or self.t0 < 0:
            raise ConfigError("t0", f"expected a non-negative time, got {self.t0!r}")
        _on_grid("t0", self.t0, self.horizon, self.n_steps)
        if self.direction == "time":
            for i, lag in enumerate(lags):
                _on_grid(f"lags[{i}]", self.t0 + lag, self.horizon, self.n_steps)
        else:
            _pos("window", self.window)
            _on_grid("window", self.t0 + self.window, self.horizon, self.n_steps)
        extent = abs(self.x) + (max(lags) if self.direction == "space" else 0.0)
        _estimator_checks(self, extent)
        _int("n_paths", self.n_paths, lo=2)
        _seed("master_seed", self.master_seed)
        _pos("slope_tol", self.slope_tol)
        _pos("r2_min", self.r2_min)

    def grids(self):
        """(x_grid, t_grid) covering the increments to be regressed."""
        if self.direction == "time":
            return [self.x], sorted({self.t0, *(self.t0 + lag for lag in self.lags)})
        return sorted({self.x, *(self.x + lag for lag in self.lags)}), [self.t0, self.t0 + self.window]


@dataclass
class ConvergeConfig:
    h_center: float = 0.6
    h_list: list = field(default_factory=lambda: [0.75, 0.70, 0.65, 0.62])
    probes: list = field(default_factory=lambda: [[0.0, 0.5], [0.0, 1.0], [0.5, 1.0]])
    observable: str = "localtime"
    horizon: float = 1.0
    n_steps: int = 2048
    method: str = "circulant"
    estimator: str = "kernel"
    epsilon: float | str = "step"
    n_cutoff: float = 200.0
    du: float = 0.05
    n_paths: int = 2000
    master_seed: int = 1
    ensemble_seeds: list | None = None
    n_perm: int = 200
    perm_seed: int = 0
    null_check: bool = True
    alpha: float = 0.05

    def validate(self):
        _hurst("h_center", self.h_center)
        hs = _list("h_list", self.h_list)
        for i, h in enumerate(hs):
            _hurst(f"h_list[{i}]", h)
        gaps = [abs(h - self.h_center) for h in hs]
        if any(b > a for a, b in zip(gaps, gaps[1:])):
            raise ConfigError("h_list", "must be sorted by |h - h_center| descending")
        _choice("observable", self.observable, ("localtime", "path"))
        _grid_checks(self)
        probes = _list("probes", self.probes)
        for i, p in enumerate(probes):
            if not (isinstance(p, list) and len(p) == 2 and all(_is_num(v) for v in p)):
                raise ConfigError(f"probes[{i}]", f"expected [x, t], got {p!r}")
            _on_grid(f"probes[{i}]", p[1], self.horizon, self.n_steps)
        for t in (self.horizon / 2, self.horizon):
            _on_grid("horizon", t, self.horizon, self.n_steps)
        _estimator_checks(self, max(abs(p[0]) for p in probes))
        _int("n_paths", self.n_paths, lo=2)
        _seed("master_seed", self.master_seed)
        _int("n_perm", self.n_perm, lo=1)
        _seed("perm_seed", self.perm_seed)
        if not isinstance(self.null_check, bool):
            raise ConfigError("null_check", f"expected true or false, got {self.null_check!r}")
        if not _is_num(self.alpha) or not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", f"must lie in (0, 1), got {self.alpha!r}")
        if self.ensemble_seeds is not None:
            seeds = _list("ensemble_seeds", self.ensemble_seeds)
            for i, s in enumerate(seeds):
                _seed(f"ensemble_seeds[{i}]", s)
            need = self.n_ensembles
            if len(seeds) != need:
                raise ConfigError("ensemble_seeds", f"need {need} seeds (center, h_list, null), got {len(seeds)}")
            try:
                check_independent(seeds, self.n_paths)
            except ValueError as exc:
                raise ConfigError("ensemble_seeds", str(exc)) from None

    @property
    def n_ensembles(self) -> int:
        return 1 + len(self.h_list) + (1 if self.null_check else 0)


COMMANDS = {
    "simulate": SimulateConfig,
    "localtime": LocaltimeConfig,
    "verify": VerifyConfig,
    "scaling": ScalingConfig,
    "converge": ConvergeConfig,
}


def from_dict(command: str, data: dict):
    cls = COMMANDS[command]
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    data = dict(data)
    if "schema_version" not in data:
        raise ConfigError("schema_version", "missing")
    version = data.pop("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}, expected {SCHEMA_VERSION}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], f"unknown key for '{command}' (known: {', '.join(sorted(known))})")
    cfg = cls(**data)
    cfg.validate()
    return cfg


def _reject_constant(token):
    raise ValueError(f"non-finite number {token} is not valid JSON")


def load(command: str, path=None):
    """Load and validate a config; ``path=None`` gives the validated defaults."""
    if path is None:
        cfg = COMMANDS[command]()
        cfg.validate()
        return cfg
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise ConfigError("<root>", f"invalid JSON in {path}: {exc}") from None
    return from_dict(command, data)


def to_dict(cfg) -> dict:
    return {"schema_version": SCHEMA_VERSION, **asdict(cfg)}


def default_seed_ledger(master_seed: int) -> dict:
    return {"master_seed": master_seed, "derivation": rng.SEED_DERIVATION, "generator": rng.GENERATOR_NAME}
