"""Experiment runner: ``fbmlocal <command> [--config PATH] --out DIR``.

Exit codes: 0 all checks passed, 1 a check failed (report still written),
2 configuration or IO error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
import numpy as np

from . import __version__, config, occupation, rng
from .convergence_lab import EnsembleConfig, ProbeSet, build_ensemble, convergence_curve, ensemble_seeds, moment_scaling
from .errors import DomainError
from .fbm_core import covariance, consecutive_correlation
from .path_gen import TimeGrid, generate, sample_paths
from .report import ExperimentReport, at_least, at_most, below, svg_line_chart, write_csv
from .theory_checks import run_theory_suite

log = logging.getLogger("fbmlocal")


def mean_local_time(h: float, t: float) -> float:
    """E L(0, t) = t^(1-H) / ((1-H) sqrt(2 pi)) for fBm started at 0."""
    return t ** (1.0 - h) / ((1.0 - h) * math.sqrt(2.0 * math.pi))


class Run:
    """Output directory plus the artifacts written so far (paths relative to it)."""

    def __init__(self, out_dir, workers):
        self.out_dir = out_dir
        self.workers = workers
        self.artifacts = []

    def path(self, name):
        self.artifacts.append(name)
        return os.path.join(self.out_dir, name)


def _ensemble_config(c, run, **kw) -> EnsembleConfig:
    base = dict(
        horizon=c.horizon, n_steps=c.n_steps, method=c.method, estimator=c.estimator,
        epsilon=c.epsilon, n_cutoff=c.n_cutoff, du=c.du, n_paths=c.n_paths,
        master_seed=c.master_seed, workers=run.workers,
    )
    base.update(kw)
    return EnsembleConfig(**base)


# --- commands ---------------------------------------------------------------

def cmd_simulate(c: config.SimulateConfig, run: Run):
    grid = TimeGrid(c.horizon, c.n_steps)
    seeds = rng.derive_seeds(c.master_seed, c.n_paths)
    vals, fell_back = sample_paths(c.hurst, grid, seeds, c.method)
    n = c.n_paths
    target = float(covariance(c.hurst, c.horizon, c.horizon))
    var_t = float(np.mean(vals[:, -1] ** 2))
    z_var = abs(var_t / target - 1.0) / math.sqrt(2.0 / n)
    inc = np.diff(vals[:, :3], axis=1)
    rho = float(np.corrcoef(inc[:, 0], inc[:, 1])[0, 1])
    rho_true = float(consecutive_correlation(c.hurst, 1.0))
    z_rho = abs(rho - rho_true) / ((1.0 - rho_true**2) / math.sqrt(n))
    checks = [
        at_most("terminal_variance", {"target": target, "n_paths": n}, z_var, c.z_max, {"sample_variance": var_t}),
        at_most("adjacent_increment_correlation", {"target": rho_true, "n_paths": n}, z_rho, c.z_max,
                {"sample_correlation": rho}),
    ]
    stats = {"terminal_variance": var_t, "adjacent_correlation": rho, "fell_back": fell_back}
    k = c.export_paths
    if k:
        t = grid.points
        write_csv(run.path("paths.csv"), ["t"] + [f"path_{i}" for i in range(k)],
                  (([t[j]] + [vals[i, j] for i in range(k)]) for j in range(t.size)))
        svg_line_chart(run.path("paths.svg"), [(f"path {i}", t, vals[i]) for i in range(k)],
                       title=f"fBm sample paths, H={c.hurst}", xlabel="t", ylabel="B_t")
    return checks, stats, {}


def cmd_localtime(c: config.LocaltimeConfig, run: Run):
    grid = TimeGrid(c.horizon, c.n_steps)
    xs = c.x_grid
    # one full field for inspection
    path = generate(c.hurst, grid, rng.derive_seed(c.master_seed, 0), c.method)
    if c.estimator == "kernel":
        fld = occupation.kernel_local_time(path, xs, c.t_grid, c.epsilon)
    else:
        occupation.check_fourier_params(c.n_cutoff, c.du, xs, path.values)
        fld = occupation.fourier_local_time(path, xs, c.t_grid, c.n_cutoff, c.du)
    fld.to_csv(run.path("field.csv"))
    fld.write_metadata(run.path("field.json"))
    t_end = c.t_grid[-1]
    in_window = (path.values[:grid.index_of(t_end)] >= xs[0]) & (path.values[:grid.index_of(t_end)] <= xs[-1])
    occupied = float(grid.dt * np.count_nonzero(in_window))
    mass = float(np.trapezoid(fld.values[:, -1], fld.x_grid))
    mass_err = abs(mass - occupied) / occupied
    svg_line_chart(run.path("field.svg"), [(f"t={t}", fld.x_grid, fld.values[:, j]) for j, t in enumerate(c.t_grid)],
                   title=f"local time of path 0, H={c.hurst}", xlabel="x", ylabel="L(x, t)")

    # ensemble mean at x = 0 against the closed form
    ens = build_ensemble(c.hurst, _ensemble_config(c, run, x_grid=(0.0,), t_grid=tuple(c.t_grid)))
    means = ens.values[:, 0, :].mean(axis=0)
    ses = ens.values[:, 0, :].std(axis=0, ddof=1) / math.sqrt(c.n_paths)
    exact = np.array([mean_local_time(c.hurst, t) for t in c.t_grid])
    rel = np.abs(means / exact - 1.0)
    worst = int(np.argmax(rel))
    write_csv(run.path("mean_local_time.csv"), ["t", "mean", "se", "exact"], zip(c.t_grid, means, ses, exact))
    svg_line_chart(run.path("mean_local_time.svg"), [("ensemble mean", c.t_grid, means), ("closed form", c.t_grid, exact)],
                   title=f"E L(0, t), H={c.hurst}", xlabel="t", ylabel="mean local time")
    checks = [
        at_most("mean_local_time", {"hurst": c.hurst, "x": 0.0, "n_paths": c.n_paths}, float(rel[worst]), c.mean_tol,
                {"t": c.t_grid[worst], "mean": means[worst], "exact": exact[worst], "se": ses[worst]}),
        at_most("occupation_mass", {"t": t_end, "x_range": [xs[0], xs[-1]]}, mass_err, c.mass_tol,
                {"field_integral": mass, "occupation_time": occupied}),
    ]
    stats = {"epsilon": ens.epsilon, "mean": means, "se": ses, "exact": exact, "fell_back": ens.fell_back}
    return checks, stats, {"path_0": path.seed}


def cmd_verify(c: config.VerifyConfig, run: Run):
    checks = run_theory_suite(c.suite(), seed=c.seed)
    return checks, {}, {}


def cmd_scaling(c: config.ScalingConfig, run: Run):
    xs, ts = c.grids()
    fits, series = {}, []
    for k, h in enumerate(c.hurst_values):
        seed = rng.derive_seed(c.master_seed, k)
        ens = build_ensemble(h, _ensemble_config(c, run, x_grid=tuple(xs), t_grid=tuple(ts), master_seed=seed))
        if c.direction == "time":
            fit = moment_scaling(ens, c.m, "time", c.lags, x=c.x, t=c.t0)
        else:
            fit = moment_scaling(ens, c.m, "space", c.lags, x=c.x, t=c.t0, h=c.window)
        fits[h] = (fit, seed, ens.epsilon)
        write_csv(run.path(f"scaling_H{h:g}.csv"), ["lag", "log_moment"], zip(fit.lags, np.log(fit.moments)))
        series.append((f"H={h:g}, slope {fit.slope:.3f}", fit.lags, fit.moments))
    svg_line_chart(run.path("scaling.svg"), series, title=f"m={c.m} moments of {c.direction} increments",
                   xlabel="lag", ylabel=f"E|increment|^{c.m}", logx=True, logy=True)
    checks = []
    for h, (fit, _, _) in fits.items():
        params = {"hurst": h, "m": c.m, "direction": c.direction}
        if c.direction == "time":
            checks.append(at_least(f"slope_H{h:g}", params, fit.slope, c.m * (1.0 - h) - c.slope_tol))
        else:
            checks.append(at_least(f"slope_H{h:g}", params, fit.slope, 0.0))
        checks.append(at_least(f"r2_H{h:g}", params, fit.r2, c.r2_min))
    if c.direction == "time" and len(fits) > 1:
        slopes = [f.slope for f, _, _ in fits.values()]
        steps = np.diff(slopes)
        checks.append(below("slope_decreasing_in_hurst", {"hurst_values": c.hurst_values},
                            float(steps.max()), 0.0, {"slopes": slopes}))
    stats = {f"H{h:g}": {"slope": f.slope, "intercept": f.intercept, "r2": f.r2, "epsilon": eps}
             for h, (f, _, eps) in fits.items()}
    seeds = {f"H{h:g}": s for h, (_, s, _) in fits.items()}
    return checks, stats, seeds


def cmd_converge(c: config.ConvergeConfig, run: Run):
    probes = ProbeSet(tuple(tuple(p) for p in c.probes))
    xs = sorted({p[0] for p in probes.points})
    ts = sorted({p[1] for p in probes.points})
    seeds = c.ensemble_seeds or ensemble_seeds(c.master_seed, c.n_ensembles)
    ecfg = _ensemble_config(c, run, x_grid=tuple(xs), t_grid=tuple(ts))
    curve = convergence_curve(c.h_center, c.h_list, probes, ecfg, seeds=seeds, n_perm=c.n_perm,
                              perm_seed=c.perm_seed, observable=c.observable, include_null=c.null_check)
    write_csv(run.path("curve.csv"), ["h", "distance", "ci_lo", "ci_hi"], curve.rows())
    gaps = [abs(h - c.h_center) for h in curve.h_values]
    lo = [d - w for d, w in zip(curve.distances, curve.ci_halfwidths)]
    hi = [d + w for d, w in zip(curve.distances, curve.ci_halfwidths)]
    svg_line_chart(run.path("curve.svg"), [("distance", gaps, curve.distances), ("ci low", gaps, lo), ("ci high", gaps, hi)],
                   title=f"energy distance to H0={c.h_center}", xlabel="|H - H0|", ylabel="energy distance")
    params = {"h_center": c.h_center, "h_list": c.h_list, "n_paths": c.n_paths, "k": probes.k}
    checks = []
    if len(c.h_list) >= 2:
        checks.append(below("kendall_trend", params, curve.kendall_p, c.alpha, {"tau": curve.kendall_tau}))
    if c.null_check:
        checks.append(at_least("same_hurst_null", params, curve.null_p, c.alpha, {"distance": curve.null_distance}))
    stats = {
        "h_values": curve.h_values, "distances": curve.distances, "ci_halfwidths": curve.ci_halfwidths,
        "p_values": curve.p_values, "kendall_tau": curve.kendall_tau, "kendall_p": curve.kendall_p,
        "null_distance": curve.null_distance, "null_p": curve.null_p,
    }
    return checks, stats, {"ensembles": curve.seeds, "perm_seed": c.perm_seed}


COMMANDS = {
    "simulate": cmd_simulate,
    "localtime": cmd_localtime,
    "verify": cmd_verify,
    "scaling": cmd_scaling,
    "converge": cmd_converge,
}


def _seed_of(cfg) -> int:
    return getattr(cfg, "master_seed", getattr(cfg, "seed", 0))


def run(command, config_path=None, out_dir=".", workers=1, fixed_timestamp=False):
    """Run one command and return ``(exit_code, report or None)``."""
    start = time.perf_counter()
    try:
        cfg = config.load(command, config_path)
        if workers < 1:
            raise config.ConfigError("workers", f"must be >= 1, got {workers}")
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise OSError(f"output directory {out_dir} is not writable")
    except (config.ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    r = Run(out_dir, workers)
    try:
        checks, stats, seeds = COMMANDS[command](cfg, r)
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    ledger = config.default_seed_ledger(_seed_of(cfg))
    ledger.update(seeds)
    wall = 0 if fixed_timestamp else int(round(1000 * (time.perf_counter() - start)))
    report = ExperimentReport(
        command=command, config=config.to_dict(cfg), seed_ledger=ledger, checks=checks,
        artifacts=r.artifacts + ["report.json"], statistics=stats, wall_ms=wall, tool_version=__version__,
    )
    try:
        report.write(os.path.join(out_dir, "report.json"))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    for v in checks:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.name}: {v.statistic!r} {v.comparison} {v.threshold!r}")
    return (0 if report.passed else 1), report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fbmlocal", description="fBm local-time experiments")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config (defaults are used when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1, help="threads for ensemble builds")
    p.add_argument("--fixed-timestamp", action="store_true", help="write wall_ms = 0 for byte-stable reports")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    code, _ = run(args.command, args.config, args.out, args.workers, args.fixed_timestamp)
    return code


if __name__ == "__main__":
    sys.exit(main())
