"""Exact simulation of fractional Brownian motion on a uniform grid.

Both generators draw the increment vector (fractional Gaussian noise) with
the exact stationary autocovariance and sum it left to right, so that
``values[0] == 0`` and ``values[i] = sum(increments[:i])``.

* ``generate_cholesky``: Cholesky factor of the n x n Toeplitz increment
  covariance, O(n^3) once per (H, grid), then O(n^2) per path.
* ``generate_circulant``: circulant embedding of size 2n (Davies-Harte),
  O(n log n) per path.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import rng
from .errors import DomainError, FactorizationError
from .fbm_core import as_hurst, power

log = logging.getLogger(__name__)

MAX_CHOLESKY_STEPS = 4096
CIRCULANT_NEG_TOL = 1e-8


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i * horizon / n_steps, i = 0..n_steps."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not (self.horizon > 0):
            raise DomainError(f"horizon must be > 0, got {self.horizon}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps}")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; ``t`` must be a grid point up to round-off."""
        k = round(t / self.dt)
        if not (0 <= k <= self.n_steps) or abs(k * self.dt - t) > 1e-9 * max(1.0, self.horizon):
            raise DomainError(f"time {t} is not a point of the grid (dt={self.dt})")
        return int(k)


@dataclass(frozen=True)
class SamplePath:
    grid: TimeGrid
    values: np.ndarray
    hurst: float
    seed: int
    method: str = "circulant"
    fell_back: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.values) != self.grid.n_steps + 1:
            raise DomainError("values must have n_steps + 1 entries")
        if self.values[0] != 0.0:
            raise DomainError("a sample path must start at 0")

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    def to_csv(self, path) -> None:
        """Write ``t,value`` rows with 17 significant digits."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,value\n")
            for t, x in zip(self.times, self.values):
                fh.write(f"{t:.17g},{x:.17g}\n")


def increment_autocovariance(h, n_lags: int, dt: float) -> np.ndarray:
    """Autocovariance of fractional Gaussian noise with step ``dt`` at lags 0..n_lags."""
    h = as_hurst(h)
    k = np.arange(n_lags + 1, dtype=float)
    two_h = 2.0 * h
    gam = 0.5 * (power(k + 1.0, two_h) + power(np.abs(k - 1.0), two_h) - 2.0 * power(k, two_h))
    return gam * power(dt, two_h)


@functools.lru_cache(maxsize=32)
def _cholesky_factor(h: float, horizon: float, n_steps: int) -> np.ndarray:
    acov = increment_autocovariance(h, n_steps - 1, horizon / n_steps)
    cov = scipy.linalg.toeplitz(acov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * np.trace(cov) / n_steps
    log.warning("Cholesky failed for H=%g, n=%d; adding jitter %g", h, n_steps, jitter)
    cov = cov + jitter * np.eye(n_steps)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        smallest = float(np.linalg.eigvalsh(cov)[0])
        raise FactorizationError(
            f"increment covariance not positive definite (H={h}, n={n_steps}); "
            f"smallest pivot/eigenvalue {smallest:.3e}",
            smallest_pivot=smallest,
        ) from None


@functools.lru_cache(maxsize=32)
def _circulant_sqrt_eigs(h: float, horizon: float, n_steps: int):
    """sqrt(eigenvalues / 2n) of the embedding, or None if the embedding fails."""
    acov = increment_autocovariance(h, n_steps, horizon / n_steps)
    row = np.concatenate([acov, acov[-2:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < -CIRCULANT_NEG_TOL * eig.max():
        return None
    eig = np.clip(eig, 0.0, None)
    return np.sqrt(eig / row.size)


def _check_common(h, grid):
    h = as_hurst(h)
    if not isinstance(grid, TimeGrid):
        raise DomainError("grid must be a TimeGrid")
    return h


def cholesky_increments(h, grid: TimeGrid, seeds) -> np.ndarray:
    """Increment matrix (len(seeds), n_steps) by the Cholesky method."""
    h = _check_common(h, grid)
    if grid.n_steps > MAX_CHOLESKY_STEPS:
        raise DomainError(f"n_steps={grid.n_steps} exceeds the Cholesky budget {MAX_CHOLESKY_STEPS}")
    chol = _cholesky_factor(h, grid.horizon, grid.n_steps)
    n = grid.n_steps
    z = np.empty((len(seeds), n))
    for i, seed in enumerate(seeds):
        z[i] = rng.normals(seed, n)
    return z @ chol.T


def circulant_increments(h, grid: TimeGrid, seeds):
    """Increment matrix by circulant embedding.

    Returns ``(increments, fell_back)``; when the embedding spectrum has a
    significantly negative eigenvalue the Cholesky method is used instead.
    """
    h = _check_common(h, grid)
    n = grid.n_steps
    if n & (n - 1):
        raise DomainError(f"circulant method needs n_steps a power of two, got {n}")
    scale = _circulant_sqrt_eigs(h, grid.horizon, n)
    if scale is None:
        log.warning("circulant embedding not nonnegative for H=%g, n=%d; using Cholesky", h, n)
        return cholesky_increments(h, grid, seeds), True
    m = 2 * n
    w = np.empty((len(seeds), m), dtype=complex)
    for i, seed in enumerate(seeds):
        z = rng.normals(seed, 2 * m)
        w[i].real = z[:m]
        w[i].imag = z[m:]
    y = np.fft.fft(w * scale, axis=1)
    return np.ascontiguousarray(y[:, :n].real), False


def cumulate(increments: np.ndarray) -> np.ndarray:
    """Prepend 0 and sum left to right along the last axis."""
    incs = np.atleast_2d(increments)
    out = np.zeros((incs.shape[0], incs.shape[1] + 1))
    np.cumsum(incs, axis=1, out=out[:, 1:])
    return out


def sample_paths(h, grid: TimeGrid, seeds, method: str = "circulant"):
    """Values matrix (len(seeds), n_steps + 1) and the fallback flag."""
    if method == "circulant":
        incs, fell_back = circulant_increments(h, grid, seeds)
    elif method == "cholesky":
        incs, fell_back = cholesky_increments(h, grid, seeds), False
    else:
        raise DomainError(f"unknown method {method!r}; use 'circulant' or 'cholesky'")
    return cumulate(incs), fell_back


def generate_cholesky(h, grid: TimeGrid, seed: int) -> SamplePath:
    values, _ = sample_paths(h, grid, [rng.check_seed(seed)], "cholesky")
    return SamplePath(grid, values[0], as_hurst(h), int(seed), "cholesky")


def generate_circulant(h, grid: TimeGrid, seed: int) -> SamplePath:
    values, fell_back = sample_paths(h, grid, [rng.check_seed(seed)], "circulant")
    method = "cholesky" if fell_back else "circulant"
    return SamplePath(grid, values[0], as_hurst(h), int(seed), method, fell_back)


def generate(h, grid: TimeGrid, seed: int, method: str = "circulant") -> SamplePath:
    if method == "circulant":
        return generate_circulant(h, grid, seed)
    if method == "cholesky":
        return generate_cholesky(h, grid, seed)
    raise DomainError(f"unknown method {method!r}; use 'circulant' or 'cholesky'")
