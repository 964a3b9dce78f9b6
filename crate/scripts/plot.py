#!/usr/bin/env python3
"""Plots for backhaul-sim output.

  plot.py sweep sweep.csv out.png        per-BS throughput and Jain vs load
  plot.py bs run_dir/metrics.csv 4 out.png  DL/UL throughput of one BS over time
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

SUBFRAME_S = 1e-4


def sweep(path, out):
    df = pd.read_csv(path)
    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
    for preset, g in df.groupby("preset"):
        a.plot(g.load_gbps, g.mean_per_bs_gbps, marker="o", label=preset)
        b.plot(g.load_gbps, g.mean_jain, marker="o", label=preset)
    a.plot(df.load_gbps, df.load_gbps, "k:", label="offered")
    a.set(xlabel="offered load per BS (Gbps)", ylabel="throughput per BS (Gbps)")
    b.set(xlabel="offered load per BS (Gbps)", ylabel="Jain index", ylim=(0, 1.05))
    a.legend()
    fig.tight_layout()
    fig.savefig(out)


def bs(path, node, out):
    df = pd.read_csv(path)
    d = df[df.bs == node]
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(d.subframe, d.dl_bits / SUBFRAME_S / 1e9, label="downlink")
    ax.plot(d.subframe, d.ul_bits / SUBFRAME_S / 1e9, label="uplink")
    ax.set(xlabel="subframe", ylabel="Gbps", title=f"BS {node}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out)


if __name__ == "__main__":
    if len(sys.argv) == 4 and sys.argv[1] == "sweep":
        sweep(sys.argv[2], sys.argv[3])
    elif len(sys.argv) == 5 and sys.argv[1] == "bs":
        bs(sys.argv[2], sys.argv[3], sys.argv[4])
    else:
        sys.exit(__doc__)
