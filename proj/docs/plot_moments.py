#!/usr/bin/env python3
"""Plot moments.csv files produced by the otfpf CLI.

Usage: plot_moments.py out/mc/moments.csv [out/ot/moments.csv ...]

One panel per estimator component: the across-replication mean with a
+- sqrt(sim_var) band, and the analytic reference curve where present.
Writes moments.png next to the first input file.
"""

import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load(path):
    series = defaultdict(lambda: {"t": [], "mean": [], "var": [], "ref": []})
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["filter"], row["estimator"])
            series[key]["t"].append(float(row["time"]))
            series[key]["mean"].append(float(row["rep_mean"]) if row["rep_mean"] else np.nan)
            series[key]["var"].append(float(row["sim_var"]) if row["sim_var"] else np.nan)
            series[key]["ref"].append(float(row["ref_var"]) if row["ref_var"] else np.nan)
    return series


def main(paths):
    merged = {}
    for path in paths:
        merged.update({k + (path,): v for k, v in load(path).items()})

    estimators = sorted({k[1] for k in merged})
    fig, axes = plt.subplots(len(estimators), 2, figsize=(11, 3.2 * len(estimators)),
                             squeeze=False)
    for i, est in enumerate(estimators):
        for (kind, e, path), s in merged.items():
            if e != est:
                continue
            t = np.asarray(s["t"])
            mean = np.asarray(s["mean"])
            var = np.asarray(s["var"])
            label = f"{kind} ({Path(path).parent.name})"
            axes[i][0].plot(t, mean, label=label)
            if np.isfinite(var).any():
                band = np.sqrt(var)
                axes[i][0].fill_between(t, mean - band, mean + band, alpha=0.2)
                axes[i][1].plot(t, var, label=f"{label} measured")
            ref = np.asarray(s["ref"])
            if np.isfinite(ref).any():
                axes[i][1].plot(t, ref, "--", label=f"{label} reference")
        axes[i][0].set_title(f"{est}: replication mean +- sqrt(sim var)")
        axes[i][1].set_title(f"{est}: simulation variance")
        for ax in axes[i]:
            ax.set_xlabel("t")
            ax.legend(fontsize=7)
    fig.tight_layout()
    out = Path(paths[0]).with_name("moments.png")
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    main(sys.argv[1:])
