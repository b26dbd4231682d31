#!/usr/bin/env python3
"""Plots the CSV output of `gpaf fig2` and `gpaf track`.

    python3 tools/plot.py fig2 out/fig2
    python3 tools/plot.py track out/track
"""
import argparse
import pathlib
import re
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def plot_fig2(directory: pathlib.Path) -> pathlib.Path:
    post = np.genfromtxt(directory / "fig2_posterior.csv", delimiter=",", names=True)
    train = np.genfromtxt(directory / "fig2_train.csv", delimiter=",", names=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.fill_between(post["x"], post["lower"], post["upper"], color="0.85", label="mean ± 2σ_y")
    for name in post.dtype.names:
        if name.startswith("sample_"):
            ax.plot(post["x"], post[name], lw=0.8, alpha=0.7)
    ax.plot(post["x"], post["mean"], "k", lw=1.5, label="posterior mean")
    ax.plot(train["x"], train["y"], "r+", ms=8, label="training data")
    ax.set_xlabel("x")
    ax.legend(loc="upper left")
    out = directory / "fig2.png"
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    return out


def plot_track(directory: pathlib.Path) -> list[pathlib.Path]:
    pattern = re.compile(r"(?P<label>.+)_(?P<algo>[a-z]+)_r(?P<rep>\d+)\.csv")
    curves = defaultdict(lambda: defaultdict(list))
    for path in sorted((directory / "curves").glob("*.csv")):
        m = pattern.fullmatch(path.name)
        if m:
            data = np.genfromtxt(path, delimiter=",", names=True)
            curves[m["label"]][m["algo"]].append(data)
    outputs = []
    for label, by_algo in curves.items():
        fig, ax = plt.subplots(figsize=(7, 4))
        for algo, reps in sorted(by_algo.items()):
            # average the MSE ratio across replicates, then convert back to dB
            mean_db = 10 * np.log10(np.mean([10 ** (r["nmse_db"] / 10) for r in reps], axis=0))
            ax.plot(reps[0]["step"], mean_db, label=algo)
        ax.set_xlabel("iteration")
        ax.set_ylabel("NMSE (dB)")
        ax.set_title(label)
        ax.legend()
        out = directory / f"{label}.png"
        fig.tight_layout()
        fig.savefig(out, dpi=150)
        outputs.append(out)
    return outputs


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("kind", choices=["fig2", "track"])
    parser.add_argument("directory", type=pathlib.Path)
    args = parser.parse_args()
    written = plot_fig2(args.directory) if args.kind == "fig2" else plot_track(args.directory)
    print(written)


if __name__ == "__main__":
    main()
