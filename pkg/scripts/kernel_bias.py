"""Exact bias of the kernel local-time estimator at x = 0.

E L_eps(0, t) under left-endpoint time quadrature is
dt * sum_i E g_eps(X_{t_i}) with X_{t_i} ~ N(0, t_i^{2H}); each term is a
one-dimensional integral against the bump, so the bias needs no simulation.

    python scripts/kernel_bias.py [--n-steps 2048]
"""

import argparse
import math

import numpy as np
from scipy import integrate

from fbmlocal.cli import mean_local_time
from fbmlocal.occupation import PHI, resolve_epsilon
from fbmlocal.path_gen import TimeGrid


def expected_kernel_estimate(h, grid, eps):
    t = grid.points[:-1]
    total = grid.dt * PHI(0.0) / eps  # X_0 = 0
    for s in t[1:]:
        sd = s**h
        dens, _ = integrate.quad(lambda y: PHI(y) * math.exp(-0.5 * (eps * y / sd) ** 2), -1, 1)
        total += grid.dt * dens / (math.sqrt(2 * math.pi) * sd)
    return total


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-steps", type=int, default=2048)
    args = ap.parse_args()
    grid = TimeGrid(1.0, args.n_steps)
    print("H     rule       eps        rel_bias")
    for h in (0.3, 0.5, 0.6, 0.7, 0.75):
        exact = mean_local_time(h, 1.0)
        for rule in ("step", "silverman"):
            eps = resolve_epsilon(rule, h, grid)
            est = expected_kernel_estimate(h, grid, eps)
            print(f"{h:<5} {rule:<10} {eps:<10.4g} {est / exact - 1:+.4f}")


if __name__ == "__main__":
    main()
