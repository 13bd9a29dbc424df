#!/usr/bin/env python3
"""Estimator Monte Carlo convergence check.

Draws repeated arccos-inversion estimates at increasing shot counts and
prints bias and spread per shot count together with the fitted log-log
spread slope (expected -1/2).

Usage: python scripts/estimator_convergence.py [seed]
"""
import sys

import numpy as np

from qmetro.metrology import simulate_estimator
from qmetro.model import ExperimentConfig, NoiseChannel


def main(seed: int = 0) -> None:
    cfg = ExperimentConfig(n=4, chi=1.0,
                           channel=NoiseChannel("dephasing", 0.0),
                           scheme="cluster", t_max=0.5)
    nus = [10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5]
    spreads = []
    print(f"{'nu':>8} {'bias':>12} {'spread':>12}")
    for k, nu in enumerate(nus):
        _s, bias, spread = simulate_estimator(cfg, nu, seed=seed + k,
                                              repeats=300)
        spreads.append(spread)
        print(f"{nu:>8} {bias:>12.3e} {spread:>12.3e}")
    slope = np.polyfit(np.log10(nus), np.log10(spreads), 1)[0]
    print(f"log-log spread slope: {slope:.4f} (expected -0.5)")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
