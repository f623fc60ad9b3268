"""Plot mean F1 with SEM error bars against L from a sweep plot-data file.

The input is the headerless ``L, mean F1, SEM`` table that ``corrdep sweep``
writes next to its report. Needs matplotlib.

    corrdep sweep --manifest m.csv --approach app1 --out sweep.tsv
    python3 scripts/plot_L_sweep.py sweep.plot.tsv sweep.png
"""
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main(src, dst):
    L, mean, sem = np.loadtxt(src, delimiter="\t", ndmin=2).T
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(L, mean, yerr=sem, marker="o", capsize=3)
    ax.set_xlabel("L (frames)")
    ax.set_ylabel("F1 (%)")
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:3])
