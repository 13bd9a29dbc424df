#!/usr/bin/env python3
"""Print the noise-channel improvement summary.

For each channel, sweeps gamma over a one-decade window and reports the
plateau (minimum and median) of the relative improvement of the chain
scheme over its reference, per qubit number.

Usage: python scripts/improvement_summary.py [points_per_decade]
"""
import math
import sys

import numpy as np

from qmetro.metrology import improvement

CASES = [
    ("dephasing", "ref1-max", (2, 3, 4, 5, 6, 7)),
    ("depolarizing", "ref1-max", (2, 4, 6)),
    ("damping", "ref1-max", (2, 3, 4)),
]


def log_grid(lo, hi, per_decade):
    count = int(round(per_decade * math.log10(hi / lo))) + 1
    return np.logspace(math.log10(lo), math.log10(hi), count)


def main(per_decade: int = 20) -> None:
    grid = log_grid(0.02, 0.2, per_decade)
    for channel, reference, n_list in CASES:
        print(f"{channel} vs {reference}:")
        for n in n_list:
            eps = [improvement(g, n, channel, reference) for g in grid]
            print(f"  N={n}: min {min(eps):+.4f}  "
                  f"median {float(np.median(eps)):+.4f}  "
                  f"max {max(eps):+.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20)
