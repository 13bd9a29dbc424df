#!/usr/bin/env python3
"""Fixed gamma*t scaling report.

Prints, for each qubit number and scheme family, the numeric deviation at
a fixed noise-per-time budget next to the two-term expansion, and the
largest qubit number for which the Heisenberg term still dominates.

Usage: python scripts/scaling_report.py [gamma_t] [t]
"""
import sys

from qmetro.metrology import heisenberg_dominated_limit, scaling_table


def main(gamma_t: float = 0.05, t: float = 2.0) -> None:
    print(f"gamma*t = {gamma_t}, evolution time t = {t}")
    print(f"{'N':>3} {'family':>9} {'numeric':>10} {'predicted':>10} "
          f"{'offset/total':>12} {'dominated':>9}")
    for row in scaling_table([2, 3, 4, 6], gamma_t, t):
        frac = row.offset_term / row.predicted_deviation
        print(f"{row.n:>3} {row.family:>9} {row.numeric_deviation:>10.5f} "
              f"{row.predicted_deviation:>10.5f} {frac:>12.3f} "
              f"{str(row.heisenberg_dominated):>9}")
    for family in ("cluster", "ref-max", "ref-unc"):
        limit = heisenberg_dominated_limit(family, gamma_t)
        label = "unbounded" if limit > 10 ** 6 else str(limit)
        print(f"largest Heisenberg-dominated N ({family}): {label}")


if __name__ == "__main__":
    args = [float(a) for a in sys.argv[1:]]
    main(*args)
