"""Closed-form analytics of fractional Brownian motion.

Covariance, even increment moments and the correlation of two disjoint
increments, written both in terms of the four endpoints (s, t, u, v) and in
the scale-free coordinates

    beta  = (u - t) / (t - s)    (gap ratio)
    gamma = (v - u) / (t - s)    (length ratio)

All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "HurstParam",
    "IncrementQuad",
    "BetaGamma",
    "as_hurst",
    "power",
    "shifted_power_diff",
    "covariance",
    "increment_moment",
    "gaussian_even_moment",
    "disjoint_increment_correlation",
    "correlation_beta_gamma",
    "consecutive_correlation",
]


@dataclass(frozen=True)
class HurstParam:
    """Validated Hurst exponent, strictly inside (0, 1)."""

    h: float

    def __post_init__(self):
        h = float(self.h)
        if not (0.0 < h < 1.0) or math.isnan(h):
            raise DomainError(f"hurst must lie strictly inside (0, 1), got {self.h!r}")
        object.__setattr__(self, "h", h)

    def __float__(self):
        return self.h


def as_hurst(h) -> float:
    """Return ``h`` as a validated float (accepts HurstParam or a number)."""
    if isinstance(h, HurstParam):
        return h.h
    return HurstParam(h).h


@dataclass(frozen=True)
class IncrementQuad:
    """Endpoints of two disjoint increments, 0 <= s < t <= u < v."""

    s: float
    t: float
    u: float
    v: float

    def __post_init__(self):
        s, t, u, v = self.s, self.t, self.u, self.v
        if not (0.0 <= s < t <= u < v):
            raise DomainError(
                f"need 0 <= s < t <= u < v, got s={s}, t={t}, u={u}, v={v}"
            )

    def to_beta_gamma(self) -> "BetaGamma":
        length = self.t - self.s
        return BetaGamma((self.u - self.t) / length, (self.v - self.u) / length)


@dataclass(frozen=True)
class BetaGamma:
    beta: float
    gamma: float

    def __post_init__(self):
        if not (self.beta >= 0.0):
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if not (self.gamma > 0.0):
            raise DomainError(f"gamma must be > 0, got {self.gamma}")


def power(x, expo):
    """``x ** expo`` for ``x >= 0`` with the convention ``0 ** expo = 0``.

    Evaluated as ``exp(expo * log(x))``; ``expo`` is assumed positive.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(x > 0.0, np.exp(expo * np.log(np.where(x > 0.0, x, 1.0))), 0.0)
    return out if out.ndim else float(out)


def covariance(h, s, t):
    """Covariance ``E[B_s B_t] = (t^2H + s^2H - |t-s|^2H) / 2``."""
    h = as_hurst(h)
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise DomainError("covariance is defined for non-negative times only")
    two_h = 2.0 * h
    return 0.5 * (power(t_arr, two_h) + power(s_arr, two_h) - power(np.abs(t_arr - s_arr), two_h))


def gaussian_even_moment(m: int) -> float:
    """``E Z^(2m) = (2m)! / (2^m m!) = (2m-1)!!`` for a standard normal Z."""
    m = int(m)
    if m < 1:
        raise DomainError(f"moment order m must be >= 1, got {m}")
    if m <= 10:
        return float(math.factorial(2 * m) // (2**m * math.factorial(m)))
    return math.exp(math.lgamma(2 * m + 1) - m * math.log(2.0) - math.lgamma(m + 1))


def increment_moment(h, m: int, s, t):
    """``E (B_t - B_s)^(2m) = (2m-1)!! |t-s|^(2Hm)``."""
    h = as_hurst(h)
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise DomainError("increment_moment is defined for non-negative times only")
    return gaussian_even_moment(m) * power(np.abs(t_arr - s_arr), 2.0 * h * int(m))


def disjoint_increment_correlation(h, q: IncrementQuad) -> float:
    """Correlation of ``B_t - B_s`` and ``B_v - B_u`` for s < t <= u < v."""
    h = as_hurst(h)
    if not isinstance(q, IncrementQuad):
        q = IncrementQuad(*q)
    if h == 0.5:
        return 0.0
    s, t, u, v = q.s, q.t, q.u, q.v
    two_h = 2.0 * h
    num = power(u - t, two_h) - power(u - s, two_h) - power(v - t, two_h) + power(v - s, two_h)
    return 0.5 * num / (power(t - s, h) * power(v - u, h))


def shifted_power_diff(a, b, expo):
    """``(a + b)^expo - a^expo`` for a >= 0, b >= 0 without cancellation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # cancellation only bites for b <= a; otherwise subtract directly
    close = (a > 0.0) & (b <= a)
    safe_a = np.where(close, a, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        stable = np.exp(expo * np.log(safe_a)) * np.expm1(expo * np.log1p(np.where(close, b, 0.0) / safe_a))
    direct = power(a + b, expo) - power(a, expo)
    out = np.where(close, stable, direct)
    return out if out.ndim else float(out)


def _numerator_beta_gamma(h, beta, gamma):
    """``beta^2H - (1+beta)^2H - (beta+gamma)^2H + (1+beta+gamma)^2H``.

    Grouped as a difference of two forward differences; the grouping is
    chosen so the bracketed terms stay small relative to the result.
    """
    two_h = 2.0 * h
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    # gamma <= 1: difference in the gamma direction of unit steps
    by_gamma = shifted_power_diff(beta + 1.0, gamma, two_h) - shifted_power_diff(beta, gamma, two_h)
    # gamma > 1: difference in the unit direction of gamma steps
    by_unit = shifted_power_diff(beta + gamma, 1.0, two_h) - shifted_power_diff(beta, 1.0, two_h)
    return np.where(gamma <= 1.0, by_gamma, by_unit)


def correlation_beta_gamma(h, beta, gamma=None):
    """Disjoint-increment correlation in (beta, gamma) coordinates.

    ``0.5 * [b^2H - (1+b)^2H - (b+g)^2H + (1+b+g)^2H] / g^H``.
    Accepts a BetaGamma or two array-likes (vectorized).
    """
    h = as_hurst(h)
    if isinstance(beta, BetaGamma):
        beta, gamma = beta.beta, beta.gamma
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(beta < 0) or np.any(gamma <= 0):
        raise DomainError("need beta >= 0 and gamma > 0")
    if h == 0.5:
        # independent increments: the numerator vanishes identically
        out = np.zeros(np.broadcast(beta, gamma).shape)
    else:
        out = 0.5 * _numerator_beta_gamma(h, beta, gamma) / power(gamma, h)
    return out if np.ndim(out) else float(out)


def consecutive_correlation(h, gamma):
    """Correlation of adjacent increments with length ratio ``gamma``."""
    return correlation_beta_gamma(h, np.zeros_like(np.asarray(gamma, dtype=float)), gamma)
