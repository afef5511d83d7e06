#!/usr/bin/env python3
"""Plot running OG and signed CV curves for every cell of a sweep directory.

Usage: plot_sweep.py RUN_DIR [RUN_DIR ...] [-o figure.png]

Each RUN_DIR is the `output` directory of a `cmdp sweep` run. Curves are
averaged over seeds; the best cell (from summary.csv) is drawn dark and the
others light.
"""

import argparse
import csv
import glob
import os
import re
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read_run(path):
    header = {}
    rows = []
    with open(path, newline="") as f:
        lines = [line for line in f]
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key] = value
    body = [line for line in lines if not line.startswith("#")]
    for row in csv.DictReader(body):
        rows.append(row)
    it = np.array([int(r["iter"]) for r in rows])
    og = np.array([float(r["og_running"]) for r in rows])
    jc = np.array([float(r["J_c"]) for r in rows])
    b = float(header["b"])
    signed_cv = np.cumsum(b - jc) / (it + 1)
    return header, og, signed_cv


def read_summary(run_dir):
    path = os.path.join(run_dir, "summary.csv")
    header = {}
    with open(path) as f:
        for line in f:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key] = value
    return header


def load_sweep(run_dir):
    cells = defaultdict(list)
    algorithm = None
    for path in sorted(glob.glob(os.path.join(run_dir, "cell*_seed*.csv"))):
        match = re.match(r"cell(\d+)_seed", os.path.basename(path))
        header, og, cv = read_run(path)
        algorithm = header.get("algorithm", algorithm)
        cells[int(match.group(1))].append((og, cv))
    summary = read_summary(run_dir)
    best = int(summary.get("best_cell", -1))
    return algorithm, cells, best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("run_dirs", nargs="+")
    parser.add_argument("-o", "--output", default="sweep.png")
    args = parser.parse_args()

    fig, axes = plt.subplots(2, len(args.run_dirs), figsize=(4.5 * len(args.run_dirs), 6), squeeze=False)
    for col, run_dir in enumerate(args.run_dirs):
        algorithm, cells, best = load_sweep(run_dir)
        ax_og, ax_cv = axes[0][col], axes[1][col]
        for cell, runs in sorted(cells.items()):
            og = np.mean([r[0] for r in runs], axis=0)
            cv = np.mean([r[1] for r in runs], axis=0)
            style = dict(color="C0", lw=2.0, alpha=1.0, zorder=3) if cell == best else dict(color="C0", lw=0.8, alpha=0.25)
            ax_og.plot(og, **style)
            ax_cv.plot(cv, **style)
        ax_og.set_title(algorithm or run_dir)
        ax_og.set_ylabel("OG")
        ax_cv.set_ylabel("CV (signed)")
        ax_cv.set_xlabel("iteration")
        ax_cv.axhline(0.0, color="k", lw=0.5)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
