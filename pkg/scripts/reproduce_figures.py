#!/usr/bin/env python3
"""Regenerate every built-in figure dataset as CSV files.

Usage: python scripts/reproduce_figures.py [outdir] [fig-id ...]
Defaults to all presets into ./figures.
"""
import sys
from pathlib import Path

from qmetro.cli import FIGURE_IDS, main


def run(outdir: Path, fig_ids) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for fig in fig_ids:
        out = outdir / f"{fig}.csv"
        print(f"== {fig} -> {out}")
        code = main(["figure", fig, "--out", str(out)])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    args = sys.argv[1:]
    outdir = Path(args[0]) if args else Path("figures")
    fig_ids = args[1:] or FIGURE_IDS
    sys.exit(run(outdir, fig_ids))
