"""Numerical checks of the analytic inequalities and constants behind the moment bounds.

Each ``check_*`` function returns the statistic the inequality is judged on
(a worst ratio, a worst margin, a relative error ...); ``run_theory_suite``
turns them into :class:`~fbmlocal.report.Verdict` records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from . import rng
from .errors import DomainError
from .fbm_core import (
    as_hurst,
    correlation_beta_gamma,
    disjoint_increment_correlation,
    power,
    shifted_power_diff,
)
from .report import Verdict, at_least, at_most

SINGULAR_COND = 1e12


# --- variance lower bound -------------------------------------------------

def variance_bound_ratio(cov: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Var(sum v_i Y_i) divided by det(G)/prod(G_ii) * mean(v_i^2 G_ii).

    Batched over leading axes: ``cov`` is (..., m, m), ``v`` is (..., m).
    """
    cov = np.asarray(cov, dtype=float)
    v = np.asarray(v, dtype=float)
    m = cov.shape[-1]
    lhs = np.einsum("...i,...ij,...j->...", v, cov, v)
    diag = np.diagonal(cov, axis1=-2, axis2=-1)
    sign, logdet = np.linalg.slogdet(cov)
    det_ratio = sign * np.exp(logdet - np.sum(np.log(diag), axis=-1))
    rhs = det_ratio * np.sum(v * v * diag, axis=-1) / m
    return lhs / rhs


def _random_covariances(gen: np.random.Generator, dim: int, count: int) -> np.ndarray:
    """Covariances with log-uniform spectra (1e-6..1), random rotations and scales."""
    a = gen.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]
    eig = np.exp(gen.uniform(math.log(1e-6), 0.0, (count, dim)))
    cov = np.einsum("nij,nj,nkj->nik", q, eig, q)
    scale = np.exp(gen.uniform(-3.0, 3.0, (count, dim)))
    cov = cov * scale[:, :, None] * scale[:, None, :]
    return 0.5 * (cov + np.swapaxes(cov, -1, -2))


def check_variance_lower_bound(dim: int, trials: int, seed: int, return_details: bool = False):
    """Worst ratio LHS/RHS of the variance lower bound over random trials.

    Covariances with condition number above 1e12 count as singular and are
    resampled.  The contract is ``worst_ratio >= 1 - 1e-9``.
    """
    if dim < 2:
        raise DomainError(f"dim must be >= 2, got {dim}")
    gen = rng.generator(seed)
    worst, witness, resamples, done = math.inf, None, 0, 0
    while done < trials:
        batch = min(20_000, trials - done)
        cov = _random_covariances(gen, dim, batch)
        v = gen.standard_normal((batch, dim)) * np.exp(gen.uniform(-2.0, 2.0, (batch, dim)))
        ok = np.linalg.cond(cov) < SINGULAR_COND
        resamples += int(np.count_nonzero(~ok))
        cov, v = cov[ok], v[ok]
        ratio = variance_bound_ratio(cov, v)
        i = int(np.argmin(ratio))
        if ratio[i] < worst:
            worst, witness = float(ratio[i]), {"cov": cov[i].tolist(), "v": v[i].tolist()}
        done += int(ok.sum())
    if return_details:
        return worst, {"resamples": resamples, "witness": witness}
    return worst


# --- Gaussian moment integral ---------------------------------------------

def gaussian_moment_closed(a: float, alpha: float) -> float:
    """a^(-(alpha+1)/2) * Gamma((alpha+1)/2), via log-gamma."""
    return math.exp(-0.5 * (alpha + 1.0) * math.log(a) + gammaln(0.5 * (alpha + 1.0)))


def check_gaussian_moment_integral(a: float, alpha: float):
    """(quadrature, closed form) of int_R |x|^alpha exp(-a x^2) dx."""
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a}")
    if not 0 < alpha < 2:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    cut = 1.0 / math.sqrt(a)
    # algebraic weight x^alpha absorbs the non-smooth factor at the origin
    head, err_head = integrate.quad(
        lambda x: math.exp(-a * x * x), 0.0, cut, weight="alg", wvar=(alpha, 0.0),
        epsabs=0.0, epsrel=1e-13, limit=200,
    )
    tail, err_tail = integrate.quad(
        lambda x: x**alpha * math.exp(-a * x * x), cut, math.inf,
        epsabs=0.0, epsrel=1e-13, limit=200,
    )
    numeric = 2.0 * (head + tail)
    closed = gaussian_moment_closed(a, alpha)
    achieved = 2.0 * (err_head + err_tail) / closed
    if achieved > 1e-9:
        raise ArithmeticError(f"quadrature did not converge: estimated relative error {achieved:.2e}")
    return numeric, closed


# --- sigma integral ---------------------------------------------------------

def sigma_exponent(h, delta) -> float:
    return as_hurst(h) * (1.0 + 2.0 * delta)


def sigma_integral(h, delta: float, t: float, window: float, T: float | None = None) -> float:
    """int_t^{t+window} (s^H)^{-(1+2 delta)} ds in closed form."""
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    p = sigma_exponent(h, delta)
    if p >= 1.0:
        raise DomainError(f"need H(1+2 delta) < 1 for integrability, got {p:.6g}")
    if t < 0 or window < 0:
        raise DomainError("t and window must be non-negative")
    if T is not None and t > T:
        raise DomainError(f"t={t} exceeds T={T}")
    q = 1.0 - p
    return float(shifted_power_diff(t, window, q)) / q


def sigma_integral_quadrature(h, delta: float, t: float, window: float) -> float:
    p = sigma_exponent(h, delta)
    if t == 0.0:
        val, _ = integrate.quad(lambda s: 1.0, 0.0, window, weight="alg", wvar=(-p, 0.0),
                                epsabs=0.0, epsrel=1e-13)
        return val
    val, _ = integrate.quad(lambda s: s**-p, t, t + window, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def sigma_constant(T: float, h0: float, eta: float, delta: float) -> float:
    """max(1, T^{2 eta (1+2 delta)}) / ((1 - P) T^{1-P}), P = (H0+eta)(1+2 delta)."""
    big_p = (h0 + eta) * (1.0 + 2.0 * delta)
    if big_p >= 1.0:
        raise DomainError(f"need (H0+eta)(1+2 delta) < 1, got {big_p:.6g}")
    return max(1.0, T ** (2.0 * eta * (1.0 + 2.0 * delta))) / ((1.0 - big_p) * T ** (1.0 - big_p))


@dataclass
class SigmaConstantResult:
    cells: int
    violations: int
    worst_margin: float
    witness: dict | None
    max_quadrature_rel_err: float = float("nan")


def check_sigma_constant(h0: float, eta: float, delta: float, T: float = 1.0,
                         n_t: int = 50, n_window: int = 50, n_h: int = 11,
                         rel_tol: float = 1e-12, spot_checks: int = 100, seed: int = 0) -> SigmaConstantResult:
    """Closed form <= constant * window^{1-P} on a (t, window, H) grid.

    A cell is a violation when the closed form exceeds the bound by more than
    ``rel_tol`` relative (round-off at the equality corner t=0, window=T,
    H=H0+eta).  Also compares the closed form with quadrature at random cells.
    """
    if not 0 < eta < min(h0, 1 - h0):
        raise DomainError(f"need 0 < eta < min(H0, 1-H0), got eta={eta}")
    const = sigma_constant(T, h0, eta, delta)
    big_p = (h0 + eta) * (1.0 + 2.0 * delta)
    ts = np.linspace(0.0, T, n_t)
    ws = np.linspace(T / n_window, T, n_window)
    hs = np.linspace(h0 - eta, h0 + eta, n_h)
    violations, worst, witness, cells = 0, math.inf, None, 0
    for h in hs:
        for t in ts:
            for w in ws:
                val = sigma_integral(h, delta, t, w)
                bound = const * w ** (1.0 - big_p)
                cells += 1
                margin = (bound - val) / bound
                if margin < worst:
                    worst, witness = margin, {"h": h, "t": t, "window": w, "value": val, "bound": bound}
                if val > bound * (1.0 + rel_tol):
                    violations += 1
    gen = rng.generator(seed)
    max_err = 0.0
    for _ in range(spot_checks):
        h = gen.uniform(h0 - eta, h0 + eta)
        t = 0.0 if gen.uniform() < 0.2 else gen.uniform(0.0, T)
        w = gen.uniform(1e-3 * T, T)
        closed = sigma_integral(h, delta, t, w)
        quad = sigma_integral_quadrature(h, delta, t, w)
        max_err = max(max_err, abs(closed - quad) / abs(closed))
    return SigmaConstantResult(cells, violations, worst, witness, max_err)


# --- correlation matrices and determinants ---------------------------------

@dataclass(frozen=True)
class PartitionSample:
    """Partition 0 = t_0 < t_1 < ... < t_m < T (``times`` holds t_0..t_m)."""

    times: tuple
    T: float = 1.0

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        if ts.size < 3:
            raise DomainError("a partition needs m >= 2 increments")
        if ts[0] != 0.0:
            raise DomainError("a partition starts at t_0 = 0")
        if np.any(np.diff(ts) <= 0):
            raise DomainError("partition times must be strictly increasing")
        if not ts[-1] < self.T:
            raise DomainError(f"need t_m < T={self.T}, got {ts[-1]}")
        object.__setattr__(self, "times", tuple(float(t) for t in ts))

    @property
    def m(self) -> int:
        return len(self.times) - 1


def increment_correlation_matrix(h, p: PartitionSample) -> np.ndarray:
    """Correlation matrix of the increments B_{t_j} - B_{t_{j-1}}, j = 1..m."""
    ts = p.times
    m = p.m
    mat = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            r = disjoint_increment_correlation(h, (ts[i], ts[i + 1], ts[j], ts[j + 1]))
            mat[i, j] = mat[j, i] = r
    return mat


def batch_correlation_matrices(h, gaps: np.ndarray) -> np.ndarray:
    """Correlation matrices for partitions given by positive gap vectors (n, m)."""
    gaps = np.asarray(gaps, dtype=float)
    n, m = gaps.shape
    ends = np.cumsum(gaps, axis=1)
    starts = ends - gaps
    mats = np.broadcast_to(np.eye(m), (n, m, m)).copy()
    for i in range(m):
        for j in range(i + 1, m):
            beta = (starts[:, j] - ends[:, i]) / gaps[:, i]
            gamma = gaps[:, j] / gaps[:, i]
            r = correlation_beta_gamma(h, np.clip(beta, 0.0, None), gamma)
            mats[:, i, j] = mats[:, j, i] = r
    return mats


def determinants(mats: np.ndarray) -> np.ndarray:
    """Determinants by pivoted LU; eigenvalue products where LU loses sign or underflows."""
    mats = np.asarray(mats, dtype=float)
    sign, logdet = np.linalg.slogdet(mats)
    det = sign * np.exp(logdet)
    bad = (sign <= 0) | (det < 1e-300)
    if np.any(bad):
        det = det.copy()
        det[bad] = np.prod(np.linalg.eigvalsh(mats[bad]), axis=-1)
    return det


def _random_gaps(gen: np.random.Generator, count: int, m: int) -> np.ndarray:
    """Gap vectors mixing log-uniform ratios over 12 decades with uniform spacings."""
    half = count // 2
    log_gaps = np.exp(gen.uniform(math.log(1e-6), math.log(1e6), (half, m)))
    flat = gen.exponential(1.0, (count - half, m))
    return np.concatenate([log_gaps, flat])


def _scale_to_partition(gaps: np.ndarray, T: float) -> np.ndarray:
    g = np.asarray(gaps, dtype=float)
    return g * (0.999 * T / g.sum(axis=-1, keepdims=True))


def scan_min_determinant(h, m: int, budget: int, seed: int, T: float = 1.0, refine: int = 5):
    """Smallest determinant found over ``budget`` random partitions plus refinement.

    Returns ``(min_det, partition_times)``.  Correlations depend only on gap
    ratios, so partitions are random gap vectors rescaled into [0, T).
    """
    h = as_hurst(h)
    if m < 2 or m % 2:
        raise DomainError(f"m must be an even integer >= 2, got {m}")
    gen = rng.generator(seed)
    best_val = math.inf
    pool = []
    done = 0
    while done < budget:
        batch = min(20_000, budget - done)
        gaps = _random_gaps(gen, batch, m)
        det = determinants(batch_correlation_matrices(h, gaps))
        order = np.argsort(det)[:refine]
        pool.extend((float(det[i]), gaps[i]) for i in order)
        done += batch
    pool.sort(key=lambda item: item[0])
    best_val, best_gaps = pool[0]
    for start_val, start_gaps in pool[:refine]:
        val, gaps = _coordinate_descent(h, start_gaps, start_val)
        if val < best_val:
            best_val, best_gaps = val, gaps
    times = np.concatenate([[0.0], np.cumsum(_scale_to_partition(best_gaps, T))])
    return best_val, times


def _coordinate_descent(h, gaps, value, rounds: int = 30):
    """Greedy multiplicative moves on one gap at a time (log-scale coordinates)."""
    gaps = np.array(gaps, dtype=float)
    factors = np.array([0.1, 0.5, 0.8, 0.95, 1.05, 1.25, 2.0, 10.0])
    m = gaps.size
    for _ in range(rounds):
        improved = False
        for k in range(m):
            trial = np.repeat(gaps[None, :], factors.size, axis=0)
            trial[:, k] *= factors
            det = determinants(batch_correlation_matrices(h, trial))
            i = int(np.argmin(det))
            if det[i] < value:
                value, gaps, improved = float(det[i]), trial[i], True
        if not improved:
            break
    return value, gaps


@dataclass
class DetScanResult:
    h_values: list
    min_dets: list
    partitions_at_min: list
    m: int
    search_budget: int
    violations: list = field(default_factory=list)

    @property
    def overall_min(self) -> float:
        return min(self.min_dets)


def determinant_scan(h_center, eta: float, m: int, budget: int, seed: int, T: float = 1.0,
                     n_h: int = 5) -> DetScanResult:
    """Minimum correlation-matrix determinant on a grid over [H0 - eta, H0 + eta]."""
    h0 = as_hurst(h_center)
    if m < 2 or m % 2:
        raise DomainError(f"m must be an even integer >= 2, got {m}")
    if not 0 < eta < min(h0, 1 - h0):
        raise DomainError(f"need 0 < eta < min(H0, 1-H0), got eta={eta}")
    hs = np.linspace(h0 - eta, h0 + eta, n_h)
    res = DetScanResult([], [], [], m, budget)
    for i, h in enumerate(hs):
        val, times = scan_min_determinant(h, m, budget, rng.derive_seed(seed, i), T)
        res.h_values.append(float(h))
        res.min_dets.append(val)
        res.partitions_at_min.append(times.tolist())
        if not val > 0:
            res.violations.append({"h": float(h), "det": val, "partition": times.tolist()})
    return res


# --- correlation uniformity --------------------------------------------------

def _corr_gap(h1, h2, log_beta, log_gamma):
    beta = np.exp(log_beta)
    gamma = np.exp(log_gamma)
    return np.abs(correlation_beta_gamma(h1, beta, gamma) - correlation_beta_gamma(h2, beta, gamma))


def correlation_sup_difference(h1, h2, budget: int = 20_000, seed: int = 0, return_argmax: bool = False):
    """sup over (beta, gamma) of |Corr_h1 - Corr_h2|.

    Searched on a log grid over 12 decades in both coordinates (plus the
    consecutive case beta = 0), random log-uniform restarts, and Nelder-Mead
    polishing from the best candidates.
    """
    h1, h2 = as_hurst(h1), as_hurst(h2)
    grid = np.linspace(math.log(1e-6), math.log(1e6), 121)
    lb, lg = np.meshgrid(grid, grid, indexing="ij")
    gamma_all = np.exp(np.concatenate([lg.ravel(), grid]))
    beta_all = np.concatenate([np.exp(lb.ravel()), np.zeros(grid.size)])
    gen = rng.generator(seed)
    rb = gen.uniform(math.log(1e-6), math.log(1e6), budget)
    rg = gen.uniform(math.log(1e-6), math.log(1e6), budget)
    beta_all = np.concatenate([beta_all, np.exp(rb)])
    gamma_all = np.concatenate([gamma_all, np.exp(rg)])
    diff = np.abs(correlation_beta_gamma(h1, beta_all, gamma_all) - correlation_beta_gamma(h2, beta_all, gamma_all))
    best = float(diff.max())
    arg = (float(beta_all[diff.argmax()]), float(gamma_all[diff.argmax()]))
    if best == 0.0:
        return (best, arg) if return_argmax else best
    for i in np.argsort(diff)[-5:]:
        b, g = beta_all[i], gamma_all[i]
        if b == 0.0:
            res = optimize.minimize_scalar(
                lambda lgam: -float(_corr_gap(h1, h2, -np.inf, lgam)),
                bracket=(math.log(g) - 0.5, math.log(g) + 0.5),
            )
            val, cand = -res.fun, (0.0, float(np.exp(res.x)))
        else:
            res = optimize.minimize(
                lambda z: -float(_corr_gap(h1, h2, z[0], z[1])),
                x0=[math.log(b), math.log(g)], method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000},
            )
            val, cand = -res.fun, (float(np.exp(res.x[0])), float(np.exp(res.x[1])))
        if val > best:
            best, arg = float(val), cand
    return (best, arg) if return_argmax else best


# --- convexity inequality ----------------------------------------------------

def convexity_margin(h, beta, gamma):
    """RHS - LHS of the consecutive-vs-disjoint inequality (no 1/2 factor).

    With D(x) = (x + 1)^2H - x^2H the margin is
    [D(gamma) - D(0)] - [D(beta + gamma) - D(beta)] over gamma^H.  For
    gamma <= 1 both brackets are taken as differences in the gamma direction,
    otherwise as [D(beta) - 1] - [D(beta + gamma) - D(gamma)]; either way no
    bracket cancels catastrophically, and beta = 0 gives exactly 0.
    """
    h = as_hurst(h)
    two_h = 2.0 * h
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    small = (np.expm1(two_h * np.log1p(gamma)) - power(gamma, two_h)) - (
        shifted_power_diff(beta + 1.0, gamma, two_h) - shifted_power_diff(beta, gamma, two_h)
    )
    d_beta_minus_one = np.where(
        beta < 1.0,
        np.expm1(two_h * np.log1p(beta)) - power(beta, two_h),
        shifted_power_diff(beta, 1.0, two_h) - 1.0,
    )
    large = d_beta_minus_one - (
        shifted_power_diff(beta + gamma, 1.0, two_h) - shifted_power_diff(gamma, 1.0, two_h)
    )
    out = np.where(gamma <= 1.0, small, large) / power(gamma, h)
    return out if np.ndim(out) else float(out)


def check_convexity_inequality(h, trials: int, seed: int, return_witness: bool = False):
    """Worst RHS - LHS over (beta, gamma) log-uniform in [1e-6, 1e6]^2."""
    h = as_hurst(h)
    if not h > 0.5:
        raise DomainError(f"the convexity inequality needs H > 1/2, got {h}")
    gen = rng.generator(seed)
    worst, witness, done = math.inf, None, 0
    lo, hi = math.log(1e-6), math.log(1e6)
    while done < trials:
        batch = min(200_000, trials - done)
        beta = np.exp(gen.uniform(lo, hi, batch))
        gamma = np.exp(gen.uniform(lo, hi, batch))
        margin = convexity_margin(h, beta, gamma)
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst, witness = float(margin[i]), (float(beta[i]), float(gamma[i]))
        done += batch
    return (worst, witness) if return_witness else worst


# --- suite ---------------------------------------------------------------------

DEFAULT_SUITE = {
    "variance_dims": [2, 3, 4, 5, 6],
    "variance_trials": 100_000,
    "moment_a": [0.25, 1.0, 4.0, 16.0],
    "moment_alpha": [0.01, 0.5, 1.0, 1.5, 1.99],
    "sigma": {"h0": 0.5, "eta": 0.1, "delta": 0.1, "T": 1.0},
    "det_concave_h": [0.2, 0.35, 0.5],
    "det_m": [2, 4],
    "det_budget": 100_000,
    "det_neighborhoods": [0.6, 0.75],
    "det_eta": 0.05,
    "det_neighborhood_m": 4,
    "corr_h0": 0.75,
    "corr_d": [0.10, 0.05, 0.02, 0.01],
    "corr_budget": 20_000,
    "convexity_h": [0.51, 0.75, 0.99],
    "convexity_trials": 1_000_000,
}


def run_theory_suite(cfg: dict | None = None, seed: int = 0) -> list[Verdict]:
    """Run the six analytic checks and return one verdict per check."""
    c = dict(DEFAULT_SUITE)
    c.update(cfg or {})
    verdicts = []

    worst, per_dim, resamples = math.inf, {}, 0
    for k, dim in enumerate(c["variance_dims"]):
        w, det = check_variance_lower_bound(dim, c["variance_trials"], rng.derive_seed(seed, 100 + k), True)
        per_dim[str(dim)] = w
        resamples += det["resamples"]
        worst = min(worst, w)
    verdicts.append(at_least(
        "variance_lower_bound",
        {"dims": c["variance_dims"], "trials": c["variance_trials"]},
        worst, 1.0 - 1e-9, {"worst_ratio_by_dim": per_dim, "resamples": resamples},
    ))

    worst_rel, witness = 0.0, None
    for a in c["moment_a"]:
        for alpha in c["moment_alpha"]:
            num, closed = check_gaussian_moment_integral(a, alpha)
            rel = abs(num - closed) / closed
            if rel >= worst_rel:
                worst_rel, witness = rel, {"a": a, "alpha": alpha, "numeric": num, "closed": closed}
    verdicts.append(at_most(
        "gaussian_moment_integral",
        {"a": c["moment_a"], "alpha": c["moment_alpha"]},
        worst_rel, 1e-8, witness,
    ))

    s = c["sigma"]
    res = check_sigma_constant(s["h0"], s["eta"], s["delta"], s["T"], seed=rng.derive_seed(seed, 200))
    verdicts.append(Verdict(
        "sigma_integral_constant", dict(s, cells=res.cells),
        float(res.violations), 0.0,
        res.violations == 0 and res.max_quadrature_rel_err <= 1e-8,
        {"worst_relative_margin": res.worst_margin, "at": res.witness,
         "max_quadrature_rel_err": res.max_quadrature_rel_err},
        "<=",
    ))

    det_ok, det_info, det_stat = True, [], math.inf
    for h in c["det_concave_h"]:
        for m in c["det_m"]:
            val, times = scan_min_determinant(h, m, c["det_budget"], rng.derive_seed(seed, int(1000 * h) + m))
            bound = 2.0 ** (-3 * m)
            ok = val >= bound
            det_ok &= ok
            det_stat = min(det_stat, val / bound)
            det_info.append({"h": h, "m": m, "min_det": val, "bound": bound, "partition": times.tolist(), "pass": ok})
    for h0 in c["det_neighborhoods"]:
        scan = determinant_scan(h0, c["det_eta"], c["det_neighborhood_m"], c["det_budget"],
                                rng.derive_seed(seed, int(10000 * h0)))
        ok = not scan.violations and scan.overall_min > 0
        det_ok &= ok
        det_info.append({"h_center": h0, "eta": c["det_eta"], "m": scan.m, "h_values": scan.h_values,
                         "min_dets": scan.min_dets, "pass": ok})
    verdicts.append(Verdict(
        "determinant_scan",
        {"concave_h": c["det_concave_h"], "m": c["det_m"], "budget": c["det_budget"],
         "neighborhoods": c["det_neighborhoods"], "eta": c["det_eta"]},
        det_stat, 1.0, bool(det_ok), det_info, ">=",
    ))

    sups = [correlation_sup_difference(c["corr_h0"], c["corr_h0"] + d, c["corr_budget"], rng.derive_seed(seed, 300))
            for d in c["corr_d"]]
    steps = np.diff(sups)
    verdicts.append(Verdict(
        "correlation_uniformity",
        {"h0": c["corr_h0"], "d": c["corr_d"], "budget": c["corr_budget"]},
        float(steps.max()), 0.0, bool(np.all(steps < 0)),
        {"sup_differences": sups}, "<",
    ))

    margins = {}
    for k, h in enumerate(c["convexity_h"]):
        margins[str(h)] = check_convexity_inequality(h, c["convexity_trials"], rng.derive_seed(seed, 400 + k))
    worst_margin = min(margins.values())
    verdicts.append(at_least(
        "convexity_inequality",
        {"h": c["convexity_h"], "trials": c["convexity_trials"]},
        worst_margin, -1e-12, {"worst_margin_by_h": margins},
    ))
    return verdicts
