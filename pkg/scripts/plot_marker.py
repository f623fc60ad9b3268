"""Bar chart of per-recording consecutive-matrix stability, sorted descending.

Computes scores directly from a manifest at one L and colours bars by group.
Needs matplotlib.

    python3 scripts/plot_marker.py runs/synth/corpus/manifest.csv marker.png --L 100
"""
import argparse

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from corrdep.audio_io import CONTROL, load_manifest
from corrdep.eval_harness import load_corpus_features
from corrdep.marker_analysis import bar_data, stability_scores


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("manifest")
    ap.add_argument("out")
    ap.add_argument("--L", type=int, default=100)
    ap.add_argument("--features", default=None)
    args = ap.parse_args()

    manifest = load_manifest(args.manifest)
    data = load_corpus_features(manifest, args.features)
    scores = bar_data(stability_scores(manifest, data, args.L))
    colours = ["tab:blue" if s.label == CONTROL else "tab:red" for s in scores]
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.bar(range(len(scores)), [s.mean_rho for s in scores], color=colours)
    ax.set_ylim(min(s.mean_rho for s in scores) - 0.01, 1.0)
    ax.set_xlabel("recording (sorted)")
    ax.set_ylabel(f"mean Spearman, L={args.L}")
    ax.set_title("blue: control, red: depressed")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
