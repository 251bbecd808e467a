"""Occupation measure and local-time estimators.

Time integrals use the left-endpoint rule on the path grid: for a grid time
``t = i * dt`` the occupation sums run over steps ``k < i``.

Two estimators of the local time L^t_x are provided:

* kernel:  sum_{t_k < t} dt * phi((X_k - x) / eps) / eps, with the C^1 bump
  phi(y) = 15/16 (1 - y^2)^2 on [-1, 1];
* fourier: (1 / 2 pi) sum_{|u_j| <= N} du sum_{t_k < t} dt cos(u_j (X_k - x)),
  the truncated inverse Fourier transform of the occupation measure on a
  symmetric uniform frequency grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError
from .fbm_core import as_hurst
from .path_gen import SamplePath, TimeGrid

FIELD_TOL = 1e-9
KERNEL_BLOCK_ELEMS = 8_000_000


class MollifierKernel:
    """The polynomial bump phi(y) = 15/16 (1 - y^2)^2 on [-1, 1].

    phi is C^1 with compact support and unit mass; the mass is checked by
    quadrature when the kernel is constructed.
    """

    support = (-1.0, 1.0)

    def __init__(self):
        mass, _ = integrate.quad(self.__call__, -1.0, 1.0, epsabs=1e-13, epsrel=1e-12)
        if abs(mass - 1.0) > 1e-10:
            raise ArithmeticError(f"mollifier mass {mass!r} differs from 1")
        self.mass = mass

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = np.abs(y) < 1.0
        w = 1.0 - y * y
        return np.where(inside, 0.9375 * w * w, 0.0)

    def derivative(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) < 1.0, -3.75 * y * (1.0 - y * y), 0.0)

    def scaled(self, u, x, eps):
        """g_eps(u, x) = phi((u - x) / eps) / eps."""
        return self((np.asarray(u, dtype=float) - x) / eps) / eps

    @property
    def variance(self) -> float:
        return 1.0 / 7.0


PHI = MollifierKernel()


@dataclass(frozen=True)
class OccupationHistogram:
    x_lo: float
    x_hi: float
    n_bins: int
    masses: np.ndarray
    t: float
    overflow: float = 0.0

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n_bins + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    @property
    def width(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_bins

    def density(self) -> np.ndarray:
        return self.masses / self.width

    def integrate(self, g: Callable) -> float:
        """Integral of ``g`` against the binned measure (midpoint rule)."""
        return float(np.sum(self.masses * g(self.centers)))


@dataclass(frozen=True)
class LocalTimeField:
    """Estimated local time on an (x, t) grid; ``values[i, j]`` is at (x_i, t_j)."""

    x_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    estimator: str
    params: dict
    seed: int | None = None
    hurst: float | None = None
    grid: TimeGrid | None = field(default=None, compare=False)

    def _x_index(self, x) -> int:
        hits = np.flatnonzero(self.x_grid == x)
        if hits.size == 0:
            raise DomainError(f"x={x} is not a point of the field's x grid")
        return int(hits[0])

    def _t_index(self, t) -> int:
        hits = np.flatnonzero(self.t_grid == t)
        if hits.size == 0:
            raise DomainError(f"t={t} is not a point of the field's t grid")
        return int(hits[0])

    def at(self, x, t) -> float:
        return float(self.values[self._x_index(x), self._t_index(t)])

    def clipped(self) -> np.ndarray:
        """Values with negative entries set to 0 (for statistics needing L >= 0)."""
        return np.clip(self.values, 0.0, None)

    def rectangle_increment(self, x, t, k, h) -> float:
        return rectangle_increment(self, x, t, k, h)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,t,value\n")
            for i, x in enumerate(self.x_grid):
                for j, t in enumerate(self.t_grid):
                    fh.write(f"{x:.17g},{t:.17g},{self.values[i, j]:.17g}\n")

    def metadata(self) -> dict:
        grid = None
        if self.grid is not None:
            grid = {"horizon": self.grid.horizon, "n_steps": self.grid.n_steps}
        return {
            "estimator": self.estimator,
            "params": dict(self.params),
            "seed": self.seed,
            "hurst": self.hurst,
            "grid": grid,
            "x_grid": [float(x) for x in self.x_grid],
            "t_grid": [float(t) for t in self.t_grid],
        }

    def write_metadata(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _time_index(grid: TimeGrid, t: float) -> int:
    if t < 0 or t > grid.horizon * (1 + 1e-12):
        raise DomainError(f"time {t} outside [0, {grid.horizon}]")
    return grid.index_of(t)


def _time_indices(grid: TimeGrid, t_grid) -> np.ndarray:
    idx = np.array([_time_index(grid, float(t)) for t in np.atleast_1d(t_grid)], dtype=int)
    if np.any(np.diff(idx) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    return idx


def _cumulative_blocks(contrib: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Sums of ``contrib[..., :i, :]`` over axis -2 for each i in ``idx``.

    Summation runs block by block in index order, so the result is
    non-decreasing in i whenever the contributions are nonnegative.
    """
    lead = contrib.shape[:-2]
    width = contrib.shape[-1]
    out = np.zeros(lead + (idx.size, width))
    acc = np.zeros(lead + (width,))
    start = 0
    for j, stop in enumerate(idx):
        if stop > start:
            acc = acc + contrib[..., start:stop, :].sum(axis=-2)
        out[..., j, :] = acc
        start = stop
    return out


def occupation_histogram(path: SamplePath, t: float, x_lo: float, x_hi: float, n_bins: int) -> OccupationHistogram:
    if not x_lo < x_hi:
        raise DomainError(f"need x_lo < x_hi, got {x_lo}, {x_hi}")
    if int(n_bins) < 1:
        raise DomainError(f"n_bins must be >= 1, got {n_bins}")
    grid = path.grid
    i = _time_index(grid, t)
    xs = path.values[:i]
    edges = np.linspace(x_lo, x_hi, int(n_bins) + 1)
    counts, _ = np.histogram(xs, bins=edges)
    masses = counts * grid.dt
    overflow = (i - counts.sum()) * grid.dt
    return OccupationHistogram(float(x_lo), float(x_hi), int(n_bins), masses, float(t), float(overflow))


def occupation_integral(path: SamplePath, t: float, g: Callable) -> float:
    """Left-endpoint quadrature of int_0^t g(X_s) ds."""
    i = _time_index(path.grid, t)
    vals = np.asarray(g(path.values[:i]), dtype=float)
    return float(path.grid.dt * np.sum(vals))


def step_bandwidth(h, grid: TimeGrid, c: float = 1.0) -> float:
    """eps = c * dt^H, the standard deviation of one path increment."""
    return c * grid.dt ** as_hurst(h)


def silverman_bandwidth(h, grid: TimeGrid, c: float = 1.06) -> float:
    """eps = c * std(X_T) * n^(-1/5) with std(X_T) = T^H."""
    return c * grid.horizon ** as_hurst(h) * grid.n_steps ** -0.2


def resolve_epsilon(epsilon, h, grid: TimeGrid) -> float:
    """Turn a numeric epsilon or a rule name ('step', 'silverman') into a value."""
    if isinstance(epsilon, str):
        if epsilon == "step":
            return step_bandwidth(h, grid)
        if epsilon == "silverman":
            return silverman_bandwidth(h, grid)
        raise DomainError(f"unknown bandwidth rule {epsilon!r}")
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise DomainError(f"epsilon must be > 0, got {epsilon}")
    return epsilon


def kernel_values(paths: np.ndarray, grid: TimeGrid, x_grid, t_grid, epsilon: float) -> np.ndarray:
    """Kernel estimates for a batch of paths, shape (n_paths, n_x, n_t)."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be > 0, got {epsilon}")
    paths = np.atleast_2d(paths)
    x_grid = np.asarray(x_grid, dtype=float)
    idx = _time_indices(grid, t_grid)
    stop = idx[-1] if idx.size else 0
    out = np.empty((paths.shape[0], x_grid.size, idx.size))
    # bound the (paths, steps, x) temporary to about 64 MB
    block = max(1, KERNEL_BLOCK_ELEMS // max(1, stop * x_grid.size))
    for lo in range(0, paths.shape[0], block):
        xs = paths[lo:lo + block, :stop]
        contrib = PHI((xs[:, :, None] - x_grid[None, None, :]) / epsilon) * (grid.dt / epsilon)
        out[lo:lo + block] = np.swapaxes(_cumulative_blocks(contrib, idx), 1, 2)
    return out


def kernel_local_time(path: SamplePath, x_grid, t_grid, epsilon) -> LocalTimeField:
    eps = resolve_epsilon(epsilon, path.hurst, path.grid)
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    vals = kernel_values(path.values[None, :], path.grid, x_grid, t_grid, eps)[0]
    return LocalTimeField(x_grid, t_grid, vals, "kernel", {"epsilon": eps}, path.seed, path.hurst, path.grid)


def _frequency_grid(n_cutoff: float, du: float) -> np.ndarray:
    """Positive frequencies j * du <= n_cutoff of the symmetric grid."""
    n_pos = int(math.floor(n_cutoff / du * (1 + 1e-12)))
    return np.arange(1, n_pos + 1) * du


def check_fourier_params(n_cutoff, du, x_grid, path_values) -> None:
    if not n_cutoff > 0:
        raise DomainError(f"n_cutoff must be > 0, got {n_cutoff}")
    if not du > 0:
        raise DomainError(f"du must be > 0, got {du}")
    x_grid = np.asarray(x_grid, dtype=float)
    span = 4.0 * float(np.max(np.abs(x_grid), initial=0.0)) + float(np.ptp(path_values))
    if span > 0 and du > math.pi / span:
        raise DomainError(
            f"du={du} exceeds pi / (4 max|x| + path range) = {math.pi / span:.6g}"
        )


def fourier_values(path_values: np.ndarray, grid: TimeGrid, x_grid, t_grid, n_cutoff: float, du: float) -> np.ndarray:
    """Truncated-Fourier estimates for one path, shape (n_x, n_t)."""
    x_grid = np.asarray(x_grid, dtype=float)
    idx = _time_indices(grid, t_grid)
    stop = idx[-1] if idx.size else 0
    u = _frequency_grid(n_cutoff, du)
    xs = path_values[:stop]
    phase = np.outer(xs, u)
    csum = _cumulative_blocks(np.cos(phase), idx) * grid.dt  # (n_t, n_u)
    ssum = _cumulative_blocks(np.sin(phase), idx) * grid.dt
    ux = np.outer(u, x_grid)
    total = idx * grid.dt
    vals = total[:, None] + 2.0 * (csum @ np.cos(ux) + ssum @ np.sin(ux))
    return (du / (2.0 * math.pi)) * vals.T


def fourier_local_time(path: SamplePath, x_grid, t_grid, n_cutoff: float, du: float) -> LocalTimeField:
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    check_fourier_params(n_cutoff, du, x_grid, path.values)
    vals = fourier_values(path.values, path.grid, x_grid, t_grid, n_cutoff, du)
    params = {"n_cutoff": float(n_cutoff), "du": float(du)}
    return LocalTimeField(x_grid, t_grid, vals, "fourier", params, path.seed, path.hurst, path.grid)


def rectangle_increment(fld: LocalTimeField, x, t, k, h) -> float:
    """F(x+k, t+h) - F(x+k, t) - F(x, t+h) + F(x, t) with exact grid membership."""
    i0, i1 = fld._x_index(x), fld._x_index(x + k)
    j0, j1 = fld._t_index(t), fld._t_index(t + h)
    v = fld.values
    return float(v[i1, j1] - v[i1, j0] - v[i0, j1] + v[i0, j0])


def smoothed_field(fld: LocalTimeField, x, eps: float) -> np.ndarray:
    """Trapezoid quadrature of int g_eps(u, x) L(u, t) du over the x grid, per t."""
    weights = PHI.scaled(fld.x_grid, x, eps)
    return np.trapezoid(weights[:, None] * fld.values, fld.x_grid, axis=0)
