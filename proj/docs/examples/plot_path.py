"""S(D) curves at fixed epsilon, one per gamma.

    tunnelpath path --config fig1.json --out fig1
    python plot_path.py fig1
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd

out = sys.argv[1] if len(sys.argv) > 1 else "fig1"
df = pd.read_csv(f"{out}/path.csv")

fig, ax = plt.subplots(figsize=(5, 4))
for (gamma, eps), g in df.groupby(["gamma", "epsilon"]):
    ax.plot(g["D"], g["S"], label=f"$\\gamma$ = {gamma:g}")
ax.set_xlabel("D = x / a")
ax.set_ylabel("S")
ax.set_yscale("log")
ax.legend()
fig.tight_layout()
fig.savefig(f"{out}/path.png", dpi=150)
