"""Worst relative margin of the sigma-integral constant bound as the horizon grows.

The bound is tight at t = 0, window = T for the largest H in the
neighborhood and holds only for T <= 1.

    python scripts/sigma_horizon.py
"""

from fbmlocal.theory_checks import check_sigma_constant


def main():
    for T in (0.5, 1.0, 2.0, 5.0):
        res = check_sigma_constant(0.5, 0.1, 0.1, T=T, spot_checks=0)
        print(f"T={T:<4} violations {res.violations:5d}/{res.cells}  worst margin {res.worst_margin:+.4f}")


if __name__ == "__main__":
    main()
